#include "flowpick/selection.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "flowpick/error.hpp"
#include "flowpick/hashing.hpp"
#include "flowpick/io.hpp"
#include "flowpick/pipeline.hpp"

namespace flowpick {

const char* method_name(SelectionMethod m) noexcept {
    switch (m) {
        case SelectionMethod::InContext: return "ic";
        case SelectionMethod::FineTuned: return "ft";
        case SelectionMethod::Fallback: return "fallback";
    }
    return "?";
}

Json SelectionResult::to_json() const {
    Json doc{{"prompt_id", prompt_id}, {"flow_id", flow_id.str()}, {"method", method_name(method)}};
    if (explanation) doc["explanation"] = *explanation;
    if (target_score) doc["target_score"] = *target_score;
    if (neighbor) doc["neighbor"] = {{"flow_id", neighbor->id.str()}, {"similarity", neighbor->similarity}};
    return doc;
}

void save_selections(const std::filesystem::path& path, const std::vector<SelectionResult>& selections) {
    std::string text;
    for (const auto& s : selections) {
        auto doc = s.to_json();
        doc["graph"] = flow_to_json(s.graph);
        text += doc.dump() + "\n";
    }
    write_text_file(path, text);
}

std::vector<SelectionResult> load_selections(const std::filesystem::path& path) {
    std::vector<SelectionResult> out;
    for (const auto& line : read_lines(path)) {
        try {
            auto doc = Json::parse(line);
            auto graph = flow_from_json(doc.at("graph"));
            auto method_text = doc.at("method").get<std::string>();
            auto method = method_text == "ic"   ? SelectionMethod::InContext
                          : method_text == "ft" ? SelectionMethod::FineTuned
                                                : SelectionMethod::Fallback;
            SelectionResult r{doc.at("prompt_id").get<std::string>(),
                              FlowId(doc.at("flow_id").get<std::string>()),
                              method,
                              std::nullopt,
                              std::nullopt,
                              graph,
                              graph,
                              std::nullopt};
            if (doc.contains("explanation")) r.explanation = doc["explanation"].get<std::string>();
            if (doc.contains("target_score")) r.target_score = doc["target_score"].get<double>();
            if (doc.contains("neighbor")) {
                r.neighbor = NearestMatch{FlowId(doc["neighbor"].at("flow_id").get<std::string>()),
                                          doc["neighbor"].at("similarity").get<double>()};
            }
            out.push_back(std::move(r));
        } catch (const Json::exception& e) {
            throw Error(Errc::InvalidArgument, "bad selection line in " + path.string() + ": " + e.what(),
                        path.string());
        }
    }
    return out;
}

namespace {

bool id_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '~' || c == '.' || c == '/';
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::string trim_copy(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return std::string(s);
}

// Reads an id token starting at `pos`, skipping markdown/quote decoration.
std::string read_id(std::string_view text, std::size_t pos) {
    while (pos < text.size() && (std::isspace(static_cast<unsigned char>(text[pos])) || text[pos] == '*' ||
                                 text[pos] == '`' || text[pos] == '"' || text[pos] == '\'' || text[pos] == '#')) {
        ++pos;
    }
    auto end = pos;
    while (end < text.size() && id_char(text[end])) ++end;
    auto id = text.substr(pos, end - pos);
    while (!id.empty() && (id.back() == '.' || id.back() == '/')) id.remove_suffix(1);
    return std::string(id);
}

const CorpusEntry& corpus_entry(const Corpus& corpus, const FlowId& id) {
    auto entry = find_flow(corpus, id);
    if (!entry) throw Error(Errc::MissingFlow, "flow " + id.str() + " is not in the corpus", id.str());
    return *entry;
}

SelectionResult make_result(const PromptRecord& prompt, const CorpusEntry& entry, SelectionMethod method,
                            std::string explanation, const SelectionOptions& options) {
    SelectionResult r{prompt.prompt_id,
                      entry.id,
                      method,
                      std::move(explanation),
                      std::nullopt,
                      entry.graph,
                      bind_prompt(entry.graph, prompt, options.negative_default),
                      NearestMatch{entry.id, 1.0}};
    return r;
}

std::string join(const std::vector<std::string>& parts) {
    std::string out;
    for (const auto& p : parts) {
        if (!out.empty()) out += ", ";
        out += p;
    }
    return out;
}

}  // namespace

std::string ic_request(std::string_view prompt_text, std::string_view context) {
    std::string ctx(context);
    while (!ctx.empty() && ctx.back() == '\n') ctx.pop_back();
    return ctx + "\n\nPlease classify the following prompt into one of the flows mentioned above:\n\n" +
           std::string(prompt_text) + "\n\nProvide the flow ID and a brief explanation for your classification.";
}

IcParse parse_ic_response(std::string_view text, const std::set<FlowId>& allowed) {
    IcParse out;
    const auto low = lower(text);
    auto explanation_after = [&](std::size_t from) {
        auto e = low.find("explanation", from);
        std::size_t start = from;
        if (e != std::string::npos) {
            start = e + 11;
            while (start < text.size() && (text[start] == ':' || text[start] == '*' || text[start] == ' ')) ++start;
        }
        return trim_copy(text.substr(std::min(start, text.size())));
    };

    for (std::size_t pos = low.find("flow"); pos != std::string::npos; pos = low.find("flow", pos + 1)) {
        auto p = pos + 4;
        if (p < low.size() && (low[p] == ' ' || low[p] == '_' || low[p] == '-')) ++p;
        if (low.compare(p, 2, "id") != 0) continue;
        p += 2;
        while (p < low.size() && (low[p] == '*' || low[p] == ' ')) ++p;
        if (p < low.size() && (low[p] == ':' || low[p] == '=')) ++p;
        FlowId candidate(read_id(text, p));
        if (allowed.count(candidate)) {
            out.flow_id = candidate;
            out.explanation = explanation_after(p);
            return out;
        }
    }

    // No usable "Flow ID:" marker: accept a unique allowed id named as a whole token.
    std::set<FlowId> mentioned;
    for (std::size_t i = 0; i < text.size();) {
        if (!id_char(text[i])) {
            ++i;
            continue;
        }
        auto j = i;
        while (j < text.size() && id_char(text[j])) ++j;
        auto tok = text.substr(i, j - i);
        while (!tok.empty() && (tok.back() == '.' || tok.back() == '/')) tok.remove_suffix(1);
        FlowId candidate{std::string(tok)};
        if (allowed.count(candidate)) mentioned.insert(candidate);
        i = j;
    }
    if (mentioned.size() == 1) {
        out.flow_id = *mentioned.begin();
        out.explanation = explanation_after(0);
    }
    return out;
}

FlowId fallback_choice(const ScoreTable& table, const std::vector<std::string>& labels) {
    auto best_by = [&](auto&& score_of) -> std::optional<FlowId> {
        std::optional<std::size_t> best;
        double best_score = 0.0;
        for (std::size_t r = 0; r < table.rows(); ++r) {
            if (!table.kept(r)) continue;
            auto s = score_of(r);
            if (!s) continue;
            // Rows are sorted by FlowId, so strict '>' keeps the smallest id on ties.
            if (!best || *s > best_score) {
                best = r;
                best_score = *s;
            }
        }
        if (!best) return std::nullopt;
        return table.flows()[*best];
    };
    if (!labels.empty()) {
        if (auto id = best_by([&](std::size_t r) { return table.row_mean(r, labels); })) return *id;
    }
    if (auto id = best_by([&](std::size_t r) { return table.row_mean(r); })) return *id;
    throw Error(Errc::EmptyDataset, "score table has no kept flow with a score");
}

SelectionResult select_fallback(const PromptRecord& prompt, const ScoreTable& table, const Corpus& corpus,
                                LabelerClient& labeler, const LabelVocabulary& vocabulary,
                                const SelectionOptions& options) {
    std::vector<std::string> labels;
    std::string why;
    try {
        labels = prompt.labels ? *prompt.labels
                               : assign_labels(prompt, labeler, vocabulary, options.max_labels).labels;
        why = "best mean score over labels: " + join(labels);
    } catch (const Error& e) {
        if (e.code() != Errc::NoLabelsAssigned) throw;
        why = "no labels assigned; best overall mean score";
    }
    auto id = fallback_choice(table, labels);
    return make_result(prompt, corpus_entry(corpus, id), SelectionMethod::Fallback, why, options);
}

SelectionResult select_in_context(const PromptRecord& prompt, const std::string& context, const ScoreTable& table,
                                  const Corpus& corpus, LlmClient& llm, LabelerClient& fallback_labeler,
                                  const LabelVocabulary& vocabulary, const SelectionOptions& options) {
    std::set<FlowId> allowed;
    for (std::size_t r = 0; r < table.rows(); ++r) {
        if (table.kept(r)) allowed.insert(table.flows()[r]);
    }
    const auto request = ic_request(prompt.text, context);
    std::string last_problem = "no flow id in response";
    for (int attempt = 0; attempt <= options.ic_reprompts; ++attempt) {
        LlmRequest req{std::nullopt, request, options.max_tokens, options.temperature};
        if (attempt > 0) {
            req.user += "\n\nYour previous answer did not name a flow ID from the table. Answer with \"Flow ID: <id>\" "
                        "using an ID listed above, then a brief explanation.";
        }
        std::string reply;
        try {
            reply = llm.complete(req);
        } catch (const Error& e) {
            if (e.code() != Errc::LlmUnavailable) throw;
            auto r = select_fallback(prompt, table, corpus, fallback_labeler, vocabulary, options);
            r.explanation = "llm unavailable (" + std::string(e.what()) + "); " + r.explanation.value_or("");
            return r;
        }
        auto parsed = parse_ic_response(reply, allowed);
        if (parsed.flow_id) {
            return make_result(prompt, corpus_entry(corpus, *parsed.flow_id), SelectionMethod::InContext,
                               parsed.explanation, options);
        }
        last_problem = "no valid flow id in response: " + reply.substr(0, 120);
    }
    auto r = select_fallback(prompt, table, corpus, fallback_labeler, vocabulary, options);
    r.explanation = "NoValidFlowId after " + std::to_string(options.ic_reprompts) + " reprompts (" + last_problem +
                    "); " + r.explanation.value_or("");
    return r;
}

// ---------------------------------------------------------------------------

const std::string& default_ft_template() {
    static const std::string tmpl =
        "Below is a prompt that describes an image a user wants to generate, and a numerical score describing the "
        "quality of an image. Please output a ComfyUI workflow in json format that will create an image with this "
        "score when given the prompt.\n>>> Prompt:\n[prompt]\n>>> Score:\n[score]\n>>> Flow:";
    return tmpl;
}

std::string render_ft_instruction(const std::string& tmpl, std::string_view prompt_text, double score) {
    if (!std::isfinite(score)) throw Error(Errc::InvalidArgument, "target score must be finite");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", score);
    std::string out;
    out.reserve(tmpl.size() + prompt_text.size() + 16);
    for (std::size_t i = 0; i < tmpl.size();) {
        if (tmpl.compare(i, 8, "[prompt]") == 0) {
            out += prompt_text;
            i += 8;
        } else if (tmpl.compare(i, 7, "[score]") == 0) {
            out += buf;
            i += 7;
        } else {
            out += tmpl[i++];
        }
    }
    return out;
}

std::vector<FtExample> export_ft_dataset(const std::vector<ScoredTriplet>& triplets, const Corpus& corpus,
                                         const std::vector<PromptRecord>& prompts, const std::string& tmpl,
                                         FtExportMode mode) {
    std::map<std::string, const PromptRecord*> by_id;
    for (const auto& p : prompts) by_id[p.prompt_id] = &p;

    std::vector<const ScoredTriplet*> rows;
    rows.reserve(triplets.size());
    for (const auto& t : triplets) rows.push_back(&t);
    std::sort(rows.begin(), rows.end(), [](const ScoredTriplet* a, const ScoredTriplet* b) {
        return std::tie(a->prompt_id, a->flow_id, a->seed) < std::tie(b->prompt_id, b->flow_id, b->seed);
    });
    if (mode == FtExportMode::PredictBest) {
        std::vector<const ScoredTriplet*> best;
        for (auto* t : rows) {
            if (!best.empty() && best.back()->prompt_id == t->prompt_id) {
                if (t->ensemble > best.back()->ensemble) best.back() = t;
            } else {
                best.push_back(t);
            }
        }
        rows = std::move(best);
    }

    std::map<FlowId, std::string> completions;
    std::vector<FtExample> out;
    out.reserve(rows.size());
    for (auto* t : rows) {
        auto p = by_id.find(t->prompt_id);
        if (p == by_id.end()) {
            throw Error(Errc::InvalidArgument, "triplet names unknown prompt " + t->prompt_id, t->prompt_id);
        }
        auto c = completions.find(t->flow_id);
        if (c == completions.end()) {
            c = completions.emplace(t->flow_id, serialize_flow(corpus_entry(corpus, t->flow_id).graph)).first;
        }
        out.push_back({render_ft_instruction(tmpl, p->second->text, t->ensemble), c->second});
    }
    return out;
}

void save_ft_dataset(const std::filesystem::path& path, const std::vector<FtExample>& examples) {
    std::string text;
    for (const auto& e : examples) text += e.to_json().dump() + "\n";
    write_text_file(path, text);
}

std::string build_ft_request(const PromptRecord& prompt, double target, const std::string& tmpl) {
    return render_ft_instruction(tmpl, prompt.text, target);
}

std::optional<std::string> target_warning(double target, const std::vector<ScoredTriplet>& triplets) {
    if (triplets.empty()) return std::nullopt;
    auto [lo, hi] = std::minmax_element(triplets.begin(), triplets.end(),
                                        [](const auto& a, const auto& b) { return a.ensemble < b.ensemble; });
    if (target >= lo->ensemble && target <= hi->ensemble) return std::nullopt;
    std::ostringstream os;
    os << "target score " << target << " is outside the training range [" << lo->ensemble << ", " << hi->ensemble
       << "]";
    return os.str();
}

std::string extract_json_object(std::string_view text) {
    for (auto start = text.find('{'); start != std::string_view::npos; start = text.find('{', start + 1)) {
        int depth = 0;
        bool in_string = false;
        bool escaped = false;
        for (auto i = start; i < text.size(); ++i) {
            char c = text[i];
            if (in_string) {
                if (escaped) {
                    escaped = false;
                } else if (c == '\\') {
                    escaped = true;
                } else if (c == '"') {
                    in_string = false;
                }
                continue;
            }
            if (c == '"') {
                in_string = true;
            } else if (c == '{') {
                ++depth;
            } else if (c == '}' && --depth == 0) {
                auto candidate = text.substr(start, i - start + 1);
                if (Json::accept(candidate)) return std::string(candidate);
                break;
            }
        }
    }
    throw Error(Errc::NoJsonFound, "no JSON object in response");
}

SelectionResult parse_ft_response(std::string_view text, const SimilarityIndex& index) {
    auto json_text = extract_json_object(text);
    auto graph = [&] {
        try {
            return parse_flow(json_text);
        } catch (const Error& e) {
            throw Error(Errc::InvalidFlow, std::string("response flow is invalid: ") + e.what(), e.subject());
        }
    }();
    auto neighbor = index.nearest(graph);
    FlowId id = neighbor.id;
    if (neighbor.similarity != 1.0) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "ft-%016llx", static_cast<unsigned long long>(fnv1a(serialize_flow(graph))));
        id = FlowId(buf);
    }
    return SelectionResult{"", id, SelectionMethod::FineTuned, std::nullopt, std::nullopt, graph, graph, neighbor};
}

SelectionResult select_fine_tuned(const PromptRecord& prompt, double target, LlmClient& llm, const std::string& tmpl,
                                  const SimilarityIndex& index, const SelectionOptions& options) {
    const auto request = build_ft_request(prompt, target, tmpl);
    for (int attempt = 0;; ++attempt) {
        try {
            auto reply = llm.complete({std::nullopt, request, options.max_tokens, options.temperature});
            auto r = parse_ft_response(reply, index);
            try {
                r.resolved_graph = bind_prompt(r.graph, prompt, options.negative_default);
            } catch (const Error& e) {
                throw Error(Errc::InvalidFlow, std::string("response flow has no usable prompt slot: ") + e.what());
            }
            r.prompt_id = prompt.prompt_id;
            r.target_score = target;
            return r;
        } catch (const Error& e) {
            bool retryable = e.code() == Errc::NoJsonFound || e.code() == Errc::InvalidFlow;
            if (!retryable || attempt >= options.ft_retries) throw;
        }
    }
}

std::vector<SweepRow> score_sweep(const std::vector<PromptRecord>& prompts, const std::vector<double>& targets,
                                  LlmClient& llm, const std::string& tmpl, const SimilarityIndex& index,
                                  ExecutorClient& executor, ScorerClient& evaluator, std::uint64_t seed,
                                  const SelectionOptions& options) {
    std::vector<SweepRow> rows;
    for (double target : targets) {
        SweepRow row{target, std::nullopt, 0, 0};
        double sum = 0.0;
        for (const auto& prompt : prompts) {
            try {
                auto sel = select_fine_tuned(prompt, target, llm, tmpl, index, options);
                GenerationJob job{prompt.prompt_id, sel.flow_id, sel.resolved_graph,
                                  hash_strings({prompt.prompt_id}, seed), prompt.text};
                auto image = submit_generation(job, executor);
                sum += evaluator.score(image, prompt.text);
                ++row.evaluated;
            } catch (const Error&) {
                ++row.failures;
            }
        }
        if (row.evaluated) row.mean_score = sum / static_cast<double>(row.evaluated);
        rows.push_back(row);
    }
    return rows;
}

// ---------------------------------------------------------------------------

namespace {

std::string_view between(std::string_view text, std::string_view open, std::string_view close) {
    auto a = text.find(open);
    if (a == std::string_view::npos) return {};
    a += open.size();
    auto b = text.find(close, a);
    return text.substr(a, b == std::string_view::npos ? std::string_view::npos : b - a);
}

std::vector<std::string> split_cells(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        auto bar = line.find(" | ", start);
        out.push_back(trim_copy(line.substr(start, bar == std::string_view::npos ? std::string_view::npos
                                                                                 : bar - start)));
        if (bar == std::string_view::npos) break;
        start = bar + 3;
    }
    return out;
}

}  // namespace

std::string MockLlm::complete(const LlmRequest& request) {
    ++calls_;
    const std::string_view user = request.user;
    const auto vocab = LabelVocabulary::standard();

    if (user.find("\n\nSelected labels:") != std::string_view::npos) {
        PromptRecord p{"", std::string(between(user, "Image prompt: ", "\n\nAvailable labels:")), std::nullopt};
        return labeler_.raw_labels(p, vocab);
    }

    if (user.find(">>> Flow:") != std::string_view::npos) {
        if (corpus_.empty()) return "I cannot produce a workflow.";
        auto prompt = between(user, ">>> Prompt:\n", "\n>>> Score:");
        auto score = between(user, ">>> Score:\n", "\n>>> Flow:");
        auto k = hash_strings({prompt, score}, seed_) % corpus_.size();
        return "Here is a workflow for this prompt:\n" + serialize_flow(corpus_[k].graph) + "\nEnjoy.";
    }

    const std::string_view marker = "\n\nPlease classify the following prompt into one of the flows mentioned above:\n\n";
    auto m = user.find(marker);
    if (m == std::string_view::npos) return "I am not sure what you are asking.";
    auto context = user.substr(0, m);
    auto prompt_text = between(user.substr(m), marker, "\n\nProvide the flow ID");

    std::istringstream lines{std::string(context)};
    std::string line;
    std::getline(lines, line);
    auto header = split_cells(line);
    std::vector<std::pair<std::string, std::vector<std::string>>> rows;
    while (std::getline(lines, line)) {
        if (line.empty()) continue;
        auto cells = split_cells(line);
        auto id = cells.front();
        cells.erase(cells.begin());
        rows.emplace_back(std::move(id), std::move(cells));
    }
    if (rows.empty()) return "The table is empty.";

    const auto labels = labeler_.match(prompt_text, vocab);
    auto score_of = [&](const std::vector<std::string>& cells, bool use_labels) -> std::optional<double> {
        double sum = 0.0;
        int n = 0;
        for (std::size_t c = 0; c < cells.size() && c + 1 < header.size(); ++c) {
            if (cells[c] == "-") continue;
            if (use_labels && std::find(labels.begin(), labels.end(), header[c + 1]) == labels.end()) continue;
            sum += std::stod(cells[c]);
            ++n;
        }
        if (n == 0) return std::nullopt;
        return sum / n;
    };
    std::optional<std::size_t> best;
    double best_score = 0.0;
    for (int pass = 0; pass < 2 && !best; ++pass) {
        for (std::size_t r = 0; r < rows.size(); ++r) {
            auto s = score_of(rows[r].second, pass == 0 && !labels.empty());
            if (s && (!best || *s > best_score || (*s == best_score && rows[r].first < rows[*best].first))) {
                best = r;
                best_score = *s;
            }
        }
    }
    if (!best) return "None of these flows has a score.";
    return "Flow ID: " + rows[*best].first + ". Explanation: highest average score for " +
           (labels.empty() ? std::string("all categories") : join(labels)) + ".";
}

}  // namespace flowpick
