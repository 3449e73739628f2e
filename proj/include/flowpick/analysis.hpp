#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "flowpick/registry.hpp"
#include "flowpick/selection.hpp"

namespace flowpick {

/// Categories whose asset names count as terms.
inline constexpr std::array kTermCategories{Category::BaseModel, Category::Refiner,  Category::Lora,
                                            Category::Embedding, Category::Upscaler, Category::FaceRestore};

bool is_term_category(Category c) noexcept;

/// Asset names found in literal inputs covered by a slot rule of a term
/// category, one per occurrence, in topological node order.
std::vector<ComponentRef> extract_components(const WorkflowGraph& graph, const ComponentRegistry& registry);

struct LabelDocument {
    std::string label;
    std::map<ComponentRef, std::size_t> terms;  // term -> count

    friend bool operator==(const LabelDocument&, const LabelDocument&) = default;
};

/// One document per label carried by at least one selected prompt, sorted by
/// label. Each component of a selected flow is added once per occurrence to
/// every label of the prompt. Selections without an assignment are skipped.
std::vector<LabelDocument> build_label_documents(const std::vector<SelectionResult>& selections,
                                                 const std::vector<LabelAssignment>& assignments,
                                                 const ComponentRegistry& registry);

struct TfIdfTerm {
    std::string name;
    std::size_t count = 0;
    double score = 0.0;
};

struct TfIdfList {
    std::string label;
    Category category;
    std::vector<TfIdfTerm> ranked;  // descending score, ties by name
};

struct TfIdfReport {
    std::size_t documents = 0;
    bool smoothed = false;
    std::vector<TfIdfList> lists;  // by label, then category order

    std::optional<TfIdfTerm> top(const std::string& label, Category category) const;
};

/// score = tf * idf with idf = ln(N / df), or ln(1 + N / df) when smoothed.
TfIdfReport tfidf_rank(const std::vector<LabelDocument>& documents, bool smoothed = false);

struct DiversityStats {
    std::size_t selections = 0;
    std::size_t unique_flows = 0;
    std::map<FlowId, std::size_t> usage;
};

DiversityStats diversity_stats(const std::vector<SelectionResult>& selections);

struct OriginalityStats {
    std::size_t selections = 0;
    std::optional<double> mean_nn_similarity;
    std::array<std::size_t, 10> histogram{};  // bins of width 0.1 over [0, 1]; 1.0 lands in the last
    std::vector<NearestMatch> neighbors;
};

/// Nearest-neighbour similarity of each selection's unbound graph.
/// Errors: EmptyCorpus.
OriginalityStats originality_stats(const std::vector<SelectionResult>& selections, const Corpus& corpus);

std::string render_tfidf(const TfIdfReport& report, std::size_t top_n = 3);
Json tfidf_to_json(const TfIdfReport& report);
std::string render_diversity(const DiversityStats& stats);
Json diversity_to_json(const DiversityStats& stats);
std::string render_originality(const OriginalityStats& stats);
Json originality_to_json(const OriginalityStats& stats);

namespace serial {
TfIdfReport tfidf_rank(const std::vector<LabelDocument>& documents, bool smoothed = false);
}

}  // namespace flowpick
