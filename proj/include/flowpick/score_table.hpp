#pragma once

#include <optional>
#include <string>
#include <vector>

#include "flowpick/labels.hpp"
#include "flowpick/triplet_store.hpp"

namespace flowpick {

/// Flows x labels matrix of mean ensemble scores. Rows are sorted by FlowId,
/// columns follow the vocabulary order.
class ScoreTable {
public:
    ScoreTable() = default;
    ScoreTable(std::vector<FlowId> flows, std::vector<std::string> labels);

    const std::vector<FlowId>& flows() const noexcept { return flows_; }
    const std::vector<std::string>& labels() const noexcept { return labels_; }
    std::size_t rows() const noexcept { return flows_.size(); }
    std::size_t cols() const noexcept { return labels_.size(); }

    std::optional<std::size_t> row_of(const FlowId& id) const;
    std::optional<std::size_t> col_of(std::string_view label) const;

    std::optional<double> cell(std::size_t row, std::size_t col) const { return cells_[row * cols() + col]; }
    std::size_t support(std::size_t row, std::size_t col) const { return support_[row * cols() + col]; }
    void set_cell(std::size_t row, std::size_t col, double mean, std::size_t support);

    bool kept(std::size_t row) const { return kept_[row]; }
    void set_kept(std::size_t row, bool keep) { kept_[row] = keep; }
    std::size_t kept_count() const;

    /// Per-label medians from the last median_filter, absent when the label
    /// had no present cell.
    const std::vector<std::optional<double>>& medians() const noexcept { return medians_; }
    void set_medians(std::vector<std::optional<double>> m) { medians_ = std::move(m); }

    /// Mean of the row's present cells over `labels`; nullopt when none.
    std::optional<double> row_mean(std::size_t row, const std::vector<std::string>& labels) const;
    /// Mean of all present cells of the row.
    std::optional<double> row_mean(std::size_t row) const;

    Json to_json() const;
    static ScoreTable from_json(const Json& doc);

    friend bool operator==(const ScoreTable&, const ScoreTable&) = default;

private:
    std::vector<FlowId> flows_;
    std::vector<std::string> labels_;
    std::vector<std::optional<double>> cells_;
    std::vector<std::size_t> support_;
    std::vector<bool> kept_;
    std::vector<std::optional<double>> medians_;
};

/// cell(f, l) = mean ensemble score over triplets (p, f) with l in labels(p).
/// Triplets whose prompt has no assignment are ignored. Every flow seen in
/// `triplets` gets a row. Errors: EmptyDataset.
ScoreTable build_table(const std::vector<ScoredTriplet>& triplets, const std::vector<LabelAssignment>& assignments,
                       const std::vector<std::string>& labels);

/// Discards a flow when each of its present cells is strictly below that
/// label's median (medians over present cells only; even counts take the
/// midpoint). Rows without any present cell are discarded.
/// Errors: InvalidArgument with fewer than two flows.
ScoreTable median_filter(ScoreTable table);

/// Plain-text rendering of the kept rows: a "flow_id | label | ..." header,
/// then one line per kept flow with fixed-precision cells, "-" when absent.
std::string render_context(const ScoreTable& table, int precision = 3);

/// Rough token count of a rendered context (characters / 4).
std::size_t estimate_tokens(const std::string& text);

namespace serial {
ScoreTable build_table(const std::vector<ScoredTriplet>& triplets, const std::vector<LabelAssignment>& assignments,
                       const std::vector<std::string>& labels);
}

}  // namespace flowpick
