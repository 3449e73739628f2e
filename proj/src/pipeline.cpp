#include "flowpick/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <tuple>
#include <variant>

#include "flowpick/error.hpp"
#include "flowpick/io.hpp"
#include "flowpick/prompt_slots.hpp"

namespace flowpick {

PromptRecord make_prompt(std::string prompt_id, std::string text) {
    if (prompt_id.empty()) throw Error(Errc::InvalidArgument, "prompt id is empty");
    if (text.empty()) throw Error(Errc::InvalidArgument, "prompt " + prompt_id + " has empty text", prompt_id);
    return {std::move(prompt_id), std::move(text), std::nullopt};
}

std::vector<PromptRecord> load_prompts(const std::filesystem::path& path) {
    std::vector<PromptRecord> out;
    std::set<std::string> ids;
    for (const auto& line : read_lines(path)) {
        Json row;
        try {
            row = Json::parse(line);
            out.push_back(make_prompt(row.at("prompt_id").get<std::string>(), row.at("text").get<std::string>()));
        } catch (const Json::exception& e) {
            throw Error(Errc::InvalidArgument, "bad prompt line in " + path.string() + ": " + e.what(), path.string());
        }
        if (!ids.insert(out.back().prompt_id).second) {
            throw Error(Errc::InvalidArgument, "duplicate prompt id " + out.back().prompt_id, out.back().prompt_id);
        }
    }
    return out;
}

WorkflowGraph bind_prompt(const WorkflowGraph& graph, const PromptRecord& prompt, const std::string& negative_default) {
    const auto slots = find_prompt_slots(graph);
    WorkflowGraph out = graph;
    for (const auto& s : slots.positive) out = out.with_literal(s.node, s.input, prompt.text);
    for (const auto& s : slots.negative) {
        const auto* current = as_string(graph.node(s.node).inputs.at(s.input));
        if (current && current->empty()) out = out.with_literal(s.node, s.input, negative_default);
    }
    return out;
}

ImageHandle submit_generation(const GenerationJob& job, ExecutorClient& executor) {
    for (const auto& s : find_prompt_slots(job.resolved_graph).positive) {
        const auto* text = as_string(job.resolved_graph.node(s.node).inputs.at(s.input));
        if (!text || text->empty()) {
            throw Error(Errc::InvalidArgument, "job " + job.prompt_id + "/" + job.flow_id.str() + " has an empty prompt slot " +
                                                   s.node + "." + s.input,
                        s.node);
        }
    }
    return executor.submit(job);
}

RawScoreVector score_image(const ImageHandle& image, std::string_view prompt_text,
                           const std::vector<ScorerClient*>& scorers) {
    RawScoreVector raw;
    for (auto* scorer : scorers) {
        double v = scorer->score(image, prompt_text);
        if (!std::isfinite(v)) {
            throw Error(Errc::ScorerUnavailable, "scorer " + scorer->name() + " returned a non-finite value", scorer->name());
        }
        raw[scorer->name()] = v;
    }
    return raw;
}

namespace {

struct Job {
    const PromptRecord* prompt;
    const CorpusEntry* flow;
};

using JobResult = std::variant<std::monostate, RawScoreVector, PairFailure>;

JobResult run_job(const Job& job, ExecutorClient& executor, const std::vector<ScorerClient*>& scorers,
                  const RunOptions& options) {
    try {
        GenerationJob gen{job.prompt->prompt_id, job.flow->id,
                          bind_prompt(job.flow->graph, *job.prompt, options.negative_default), options.seed,
                          job.prompt->text};
        auto handle = submit_generation(gen, executor);
        return score_image(handle, job.prompt->text, scorers);
    } catch (const Error& e) {
        return PairFailure{job.prompt->prompt_id, job.flow->id, e.code(), e.what()};
    } catch (const std::exception& e) {
        return PairFailure{job.prompt->prompt_id, job.flow->id, Errc::ExecutionFailed, e.what()};
    }
}

void check_scorer_set(const EnsembleConfig& config, const std::vector<ScorerClient*>& scorers) {
    std::set<std::string> have;
    for (auto* s : scorers) have.insert(s->name());
    std::set<std::string> want(config.scorers.begin(), config.scorers.end());
    if (have != want) throw Error(Errc::Config, "configured scorer clients do not match the ensemble scorer set");
}

}  // namespace

RunReport run_matrix(const std::vector<PromptRecord>& prompts, const Corpus& corpus, ExecutorClient& executor,
                     const std::vector<ScorerClient*>& scorers, const EnsembleConfig& config, const TripletStore& store,
                     const RunOptions& options) {
    if (prompts.empty() || corpus.empty()) throw Error(Errc::InvalidArgument, "run_matrix needs prompts and flows");
    config.validate(false);
    check_scorer_set(config, scorers);

    RunReport report;
    report.requested = prompts.size() * corpus.size();

    const auto existing = store.load();
    std::optional<EnsembleConfig> active = store.load_config();
    if (active) {
        if (active->scorers != config.scorers || active->weights != config.weights || active->scale != config.scale ||
            active->offset != config.offset) {
            throw Error(Errc::Config, "store sidecar " + store.sidecar_path().string() +
                                          " holds a different ensemble config; use a fresh store");
        }
    } else if (!existing.empty()) {
        throw Error(Errc::StoreCorrupt, "store " + store.path().string() + " has rows but no ensemble sidecar");
    } else if (!config.stats.empty()) {
        config.validate(true);
        active = config;
        store.save_config(config);
    }

    std::set<std::tuple<std::string, std::string, std::uint64_t>> done;
    for (const auto& t : existing) done.emplace(t.prompt_id, t.flow_id.str(), t.seed);

    std::vector<Job> jobs;
    for (const auto& p : prompts) {
        for (const auto& f : corpus) {
            if (done.count({p.prompt_id, f.id.str(), options.seed})) {
                ++report.skipped;
            } else {
                jobs.push_back({&p, &f});
            }
        }
    }

    std::vector<std::pair<const Job*, RawScoreVector>> pending;  // held until stats are known
    auto flush = [&](std::vector<std::pair<const Job*, RawScoreVector>>& rows) {
        std::vector<ScoredTriplet> out;
        out.reserve(rows.size());
        for (auto& [job, raw] : rows) {
            double ensemble = aggregate_score(raw, *active);
            out.push_back({job->prompt->prompt_id, job->flow->id, options.seed, std::move(raw), ensemble, options.clock()});
        }
        store.append(out);
        report.completed += out.size();
        rows.clear();
    };

    const std::size_t batch = std::max<std::size_t>(1, options.batch_size);
    const int workers = std::max(1, options.workers);
    for (std::size_t start = 0; start < jobs.size(); start += batch) {
        const std::size_t end = std::min(jobs.size(), start + batch);
        std::vector<JobResult> results(end - start);
        const auto n = static_cast<std::ptrdiff_t>(end - start);
#pragma omp parallel for schedule(dynamic) num_threads(workers)
        for (std::ptrdiff_t k = 0; k < n; ++k) results[k] = run_job(jobs[start + k], executor, scorers, options);

        std::vector<std::pair<const Job*, RawScoreVector>> ready;
        for (std::size_t k = 0; k < results.size(); ++k) {
            if (auto f = std::get_if<PairFailure>(&results[k])) {
                report.failures.push_back(std::move(*f));
            } else {
                ready.emplace_back(&jobs[start + k], std::move(std::get<RawScoreVector>(results[k])));
            }
        }
        if (active) {
            flush(ready);
        } else {
            std::move(ready.begin(), ready.end(), std::back_inserter(pending));
        }
    }

    if (!active) {
        std::vector<RawScoreVector> raw;
        for (const auto& [_, r] : pending) raw.push_back(r);
        if (raw.size() < 2) {
            throw Error(Errc::EmptyDataset, "fewer than two pairs completed; cannot fit standardization");
        }
        EnsembleConfig fitted = config;
        fitted.stats = fit_standardization(raw);
        store.save_config(fitted);
        active = fitted;
        report.fitted_standardization = true;
        flush(pending);
    }
    report.config = *active;
    return report;
}

}  // namespace flowpick
