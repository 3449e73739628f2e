#include "flowpick/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "flowpick/error.hpp"

namespace flowpick {

bool is_term_category(Category c) noexcept {
    return std::find(kTermCategories.begin(), kTermCategories.end(), c) != kTermCategories.end();
}

std::vector<ComponentRef> extract_components(const WorkflowGraph& graph, const ComponentRegistry& registry) {
    std::vector<ComponentRef> out;
    for (const auto& id : graph.topological_order()) {
        const auto& node = graph.node(id);
        for (const auto& [input, value] : node.inputs) {
            auto name = as_string(value);
            if (!name || name->empty()) continue;
            auto cat = registry.slot_category(node.class_type, input);
            if (cat && is_term_category(*cat)) out.push_back({*name, *cat});
        }
    }
    return out;
}

std::vector<LabelDocument> build_label_documents(const std::vector<SelectionResult>& selections,
                                                 const std::vector<LabelAssignment>& assignments,
                                                 const ComponentRegistry& registry) {
    std::map<std::string, const LabelAssignment*> by_prompt;
    for (const auto& a : assignments) by_prompt[a.prompt_id] = &a;
    std::map<std::string, LabelDocument> docs;
    for (const auto& sel : selections) {
        auto a = by_prompt.find(sel.prompt_id);
        if (a == by_prompt.end()) continue;
        const auto components = extract_components(sel.graph, registry);
        for (const auto& label : a->second->labels) {
            auto& doc = docs[label];
            doc.label = label;
            for (const auto& c : components) ++doc.terms[c];
        }
    }
    std::vector<LabelDocument> out;
    for (auto& [_, d] : docs) out.push_back(std::move(d));
    return out;
}

namespace {

std::map<ComponentRef, std::size_t> document_frequency(const std::vector<LabelDocument>& documents) {
    std::map<ComponentRef, std::size_t> df;
    for (const auto& d : documents) {
        for (const auto& [term, count] : d.terms) {
            if (count > 0) ++df[term];
        }
    }
    return df;
}

std::vector<TfIdfList> rank_document(const LabelDocument& doc, const std::map<ComponentRef, std::size_t>& df,
                                     double n, bool smoothed) {
    std::vector<TfIdfList> lists;
    for (auto cat : kTermCategories) {
        TfIdfList list{doc.label, cat, {}};
        for (const auto& [term, count] : doc.terms) {
            if (term.category != cat || count == 0) continue;
            const double ratio = n / static_cast<double>(df.at(term));
            const double idf = smoothed ? std::log(1.0 + ratio) : std::log(ratio);
            list.ranked.push_back({term.name, count, static_cast<double>(count) * idf});
        }
        if (list.ranked.empty()) continue;
        std::sort(list.ranked.begin(), list.ranked.end(), [](const TfIdfTerm& a, const TfIdfTerm& b) {
            if (a.score != b.score) return a.score > b.score;
            return a.name < b.name;
        });
        lists.push_back(std::move(list));
    }
    return lists;
}

}  // namespace

std::optional<TfIdfTerm> TfIdfReport::top(const std::string& label, Category category) const {
    for (const auto& l : lists) {
        if (l.label == label && l.category == category && !l.ranked.empty()) return l.ranked.front();
    }
    return std::nullopt;
}

TfIdfReport tfidf_rank(const std::vector<LabelDocument>& documents, bool smoothed) {
    TfIdfReport report{documents.size(), smoothed, {}};
    if (documents.empty()) return report;
    const auto df = document_frequency(documents);
    const double n = static_cast<double>(documents.size());
    std::vector<std::vector<TfIdfList>> per_doc(documents.size());
    const auto count = static_cast<std::ptrdiff_t>(documents.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t d = 0; d < count; ++d) per_doc[d] = rank_document(documents[d], df, n, smoothed);
    for (auto& lists : per_doc) {
        for (auto& l : lists) report.lists.push_back(std::move(l));
    }
    return report;
}

namespace serial {

TfIdfReport tfidf_rank(const std::vector<LabelDocument>& documents, bool smoothed) {
    TfIdfReport report{documents.size(), smoothed, {}};
    if (documents.empty()) return report;
    const auto df = document_frequency(documents);
    for (const auto& doc : documents) {
        for (auto& l : rank_document(doc, df, static_cast<double>(documents.size()), smoothed)) {
            report.lists.push_back(std::move(l));
        }
    }
    return report;
}

}  // namespace serial

DiversityStats diversity_stats(const std::vector<SelectionResult>& selections) {
    DiversityStats s;
    s.selections = selections.size();
    for (const auto& sel : selections) ++s.usage[sel.flow_id];
    s.unique_flows = s.usage.size();
    return s;
}

OriginalityStats originality_stats(const std::vector<SelectionResult>& selections, const Corpus& corpus) {
    if (corpus.empty()) throw Error(Errc::EmptyCorpus, "originality needs a non-empty corpus");
    OriginalityStats s;
    s.selections = selections.size();
    if (selections.empty()) return s;
    const SimilarityIndex index(corpus);
    double sum = 0.0;
    for (const auto& sel : selections) {
        auto nn = index.nearest(sel.graph);
        sum += nn.similarity;
        auto bin = static_cast<std::size_t>(std::floor(nn.similarity * 10.0));
        ++s.histogram[std::min<std::size_t>(bin, 9)];
        s.neighbors.push_back(nn);
    }
    s.mean_nn_similarity = sum / static_cast<double>(selections.size());
    return s;
}

std::string render_tfidf(const TfIdfReport& report, std::size_t top_n) {
    std::string out = "tf-idf over " + std::to_string(report.documents) + " label documents" +
                      (report.smoothed ? " (smoothed idf)" : "") + "\n";
    char buf[64];
    std::string current;
    for (const auto& list : report.lists) {
        if (list.label != current) {
            current = list.label;
            out += "\n[" + current + "]\n";
        }
        out += "  " + std::string(category_name(list.category)) + ":";
        for (std::size_t i = 0; i < list.ranked.size() && i < top_n; ++i) {
            std::snprintf(buf, sizeof buf, "%.4f", list.ranked[i].score);
            out += (i ? ", " : " ") + list.ranked[i].name + " (" + buf + ")";
        }
        out += "\n";
    }
    return out;
}

Json tfidf_to_json(const TfIdfReport& report) {
    Json lists = Json::array();
    for (const auto& l : report.lists) {
        Json ranked = Json::array();
        for (const auto& t : l.ranked) ranked.push_back({{"name", t.name}, {"count", t.count}, {"score", t.score}});
        lists.push_back({{"label", l.label}, {"category", category_name(l.category)}, {"ranked", std::move(ranked)}});
    }
    return {{"documents", report.documents}, {"smoothed", report.smoothed}, {"lists", std::move(lists)}};
}

std::string render_diversity(const DiversityStats& stats) {
    std::string out = "selections: " + std::to_string(stats.selections) +
                      "\nunique flows: " + std::to_string(stats.unique_flows) + "\n";
    std::vector<std::pair<FlowId, std::size_t>> rows(stats.usage.begin(), stats.usage.end());
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    for (const auto& [id, n] : rows) out += "  " + id.str() + "\t" + std::to_string(n) + "\n";
    return out;
}

Json diversity_to_json(const DiversityStats& stats) {
    Json usage = Json::object();
    for (const auto& [id, n] : stats.usage) usage[id.str()] = n;
    return {{"selections", stats.selections}, {"unique_flows", stats.unique_flows}, {"usage", std::move(usage)}};
}

std::string render_originality(const OriginalityStats& stats) {
    std::string out = "selections: " + std::to_string(stats.selections) + "\n";
    char buf[96];
    if (stats.mean_nn_similarity) {
        std::snprintf(buf, sizeof buf, "mean nearest-neighbour similarity: %.6f\n", *stats.mean_nn_similarity);
        out += buf;
    }
    for (std::size_t b = 0; b < stats.histogram.size(); ++b) {
        std::snprintf(buf, sizeof buf, "  [%.1f, %.1f%c %zu\n", b / 10.0, (b + 1) / 10.0, b == 9 ? ']' : ')',
                      stats.histogram[b]);
        out += buf;
    }
    return out;
}

Json originality_to_json(const OriginalityStats& stats) {
    Json nn = Json::array();
    for (const auto& m : stats.neighbors) nn.push_back({{"flow_id", m.id.str()}, {"similarity", m.similarity}});
    Json doc{{"selections", stats.selections}, {"histogram", stats.histogram}, {"neighbors", std::move(nn)}};
    doc["mean_nn_similarity"] = stats.mean_nn_similarity ? Json(*stats.mean_nn_similarity) : Json(nullptr);
    return doc;
}

}  // namespace flowpick
