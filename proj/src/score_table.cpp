#include "flowpick/score_table.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <unordered_map>

#include "flowpick/error.hpp"

namespace flowpick {

ScoreTable::ScoreTable(std::vector<FlowId> flows, std::vector<std::string> labels)
    : flows_(std::move(flows)), labels_(std::move(labels)) {
    std::sort(flows_.begin(), flows_.end());
    if (std::adjacent_find(flows_.begin(), flows_.end()) != flows_.end()) {
        throw Error(Errc::InvalidArgument, "duplicate flow id in score table");
    }
    cells_.assign(flows_.size() * labels_.size(), std::nullopt);
    support_.assign(flows_.size() * labels_.size(), 0);
    kept_.assign(flows_.size(), true);
}

std::optional<std::size_t> ScoreTable::row_of(const FlowId& id) const {
    auto it = std::lower_bound(flows_.begin(), flows_.end(), id);
    if (it == flows_.end() || *it != id) return std::nullopt;
    return static_cast<std::size_t>(it - flows_.begin());
}

std::optional<std::size_t> ScoreTable::col_of(std::string_view label) const {
    auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - labels_.begin());
}

void ScoreTable::set_cell(std::size_t row, std::size_t col, double mean, std::size_t support) {
    if (!std::isfinite(mean) || support == 0) {
        throw Error(Errc::InvalidArgument, "score cell must be finite with positive support");
    }
    cells_[row * cols() + col] = mean;
    support_[row * cols() + col] = support;
}

std::size_t ScoreTable::kept_count() const {
    return static_cast<std::size_t>(std::count(kept_.begin(), kept_.end(), true));
}

std::optional<double> ScoreTable::row_mean(std::size_t row, const std::vector<std::string>& labels) const {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& l : labels) {
        auto c = col_of(l);
        if (!c) continue;
        if (auto v = cell(row, *c)) {
            sum += *v;
            ++n;
        }
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
}

std::optional<double> ScoreTable::row_mean(std::size_t row) const { return row_mean(row, labels_); }

Json ScoreTable::to_json() const {
    Json out_rows = Json::array();
    for (std::size_t r = 0; r < rows(); ++r) {
        Json cells = Json::object();
        for (std::size_t c = 0; c < cols(); ++c) {
            if (auto v = cell(r, c)) cells[labels_[c]] = {{"mean", *v}, {"support", support(r, c)}};
        }
        out_rows.push_back({{"flow_id", flows_[r].str()}, {"kept", kept(r)}, {"cells", std::move(cells)}});
    }
    Json medians = Json::object();
    for (std::size_t c = 0; c < medians_.size() && c < cols(); ++c) {
        if (medians_[c]) medians[labels_[c]] = *medians_[c];
    }
    return {{"labels", labels_}, {"rows", std::move(out_rows)}, {"medians", std::move(medians)}};
}

ScoreTable ScoreTable::from_json(const Json& doc) {
    try {
        std::vector<FlowId> flows;
        for (const auto& row : doc.at("rows")) flows.emplace_back(row.at("flow_id").get<std::string>());
        ScoreTable t(std::move(flows), doc.at("labels").get<std::vector<std::string>>());
        for (const auto& row : doc.at("rows")) {
            const auto r = *t.row_of(FlowId(row.at("flow_id").get<std::string>()));
            t.set_kept(r, row.at("kept").get<bool>());
            for (const auto& [label, cell] : row.at("cells").items()) {
                auto c = t.col_of(label);
                if (!c) throw Error(Errc::InvalidArgument, "score table cell for unknown label '" + label + "'", label);
                t.set_cell(r, *c, cell.at("mean").get<double>(), cell.at("support").get<std::size_t>());
            }
        }
        if (doc.contains("medians") && !doc.at("medians").empty()) {
            std::vector<std::optional<double>> m(t.cols());
            for (const auto& [label, v] : doc.at("medians").items()) {
                if (auto c = t.col_of(label)) m[*c] = v.get<double>();
            }
            t.set_medians(std::move(m));
        }
        return t;
    } catch (const Json::exception& e) {
        throw Error(Errc::InvalidArgument, std::string("malformed score table: ") + e.what());
    }
}

namespace {

struct Prepared {
    std::vector<FlowId> flows;
    // Per flow (sorted order): (ensemble, label columns) contributions in triplet order.
    std::vector<std::vector<std::pair<double, const std::vector<std::size_t>*>>> contributions;
    std::vector<std::vector<std::size_t>> label_cols;  // per assignment
};

Prepared prepare(const std::vector<ScoredTriplet>& triplets, const std::vector<LabelAssignment>& assignments,
                 const std::vector<std::string>& labels) {
    if (triplets.empty()) throw Error(Errc::EmptyDataset, "no scored triplets to build a table from");
    Prepared p;
    std::unordered_map<std::string, std::size_t> by_prompt;
    p.label_cols.reserve(assignments.size());
    for (const auto& a : assignments) {
        std::vector<std::size_t> cols;
        for (const auto& l : a.labels) {
            auto it = std::find(labels.begin(), labels.end(), l);
            if (it != labels.end()) cols.push_back(static_cast<std::size_t>(it - labels.begin()));
        }
        std::sort(cols.begin(), cols.end());
        cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
        by_prompt[a.prompt_id] = p.label_cols.size();
        p.label_cols.push_back(std::move(cols));
    }
    std::set<FlowId> flow_set;
    for (const auto& t : triplets) flow_set.insert(t.flow_id);
    p.flows.assign(flow_set.begin(), flow_set.end());
    p.contributions.resize(p.flows.size());
    for (const auto& t : triplets) {
        auto it = by_prompt.find(t.prompt_id);
        if (it == by_prompt.end()) continue;
        auto row = static_cast<std::size_t>(std::lower_bound(p.flows.begin(), p.flows.end(), t.flow_id) -
                                            p.flows.begin());
        p.contributions[row].emplace_back(t.ensemble, &p.label_cols[it->second]);
    }
    return p;
}

void fill_row(ScoreTable& table, std::size_t row,
              const std::vector<std::pair<double, const std::vector<std::size_t>*>>& contribs) {
    std::vector<double> sum(table.cols(), 0.0);
    std::vector<std::size_t> count(table.cols(), 0);
    for (const auto& [score, cols] : contribs) {
        for (auto c : *cols) {
            sum[c] += score;
            ++count[c];
        }
    }
    for (std::size_t c = 0; c < table.cols(); ++c) {
        if (count[c]) table.set_cell(row, c, sum[c] / static_cast<double>(count[c]), count[c]);
    }
}

}  // namespace

ScoreTable build_table(const std::vector<ScoredTriplet>& triplets, const std::vector<LabelAssignment>& assignments,
                       const std::vector<std::string>& labels) {
    auto p = prepare(triplets, assignments, labels);
    ScoreTable table(p.flows, labels);
    const auto n = static_cast<std::ptrdiff_t>(p.flows.size());
    // Rows are disjoint slices of the table, and each row sums in triplet order.
#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t r = 0; r < n; ++r) fill_row(table, static_cast<std::size_t>(r), p.contributions[r]);
    return table;
}

namespace serial {

ScoreTable build_table(const std::vector<ScoredTriplet>& triplets, const std::vector<LabelAssignment>& assignments,
                       const std::vector<std::string>& labels) {
    auto p = prepare(triplets, assignments, labels);
    ScoreTable table(p.flows, labels);
    for (std::size_t r = 0; r < p.flows.size(); ++r) fill_row(table, r, p.contributions[r]);
    return table;
}

}  // namespace serial

ScoreTable median_filter(ScoreTable table) {
    if (table.rows() < 2) throw Error(Errc::InvalidArgument, "median filter needs at least two flows");
    std::vector<std::optional<double>> medians(table.cols());
    for (std::size_t c = 0; c < table.cols(); ++c) {
        std::vector<double> present;
        for (std::size_t r = 0; r < table.rows(); ++r) {
            if (auto v = table.cell(r, c)) present.push_back(*v);
        }
        if (present.empty()) continue;
        std::sort(present.begin(), present.end());
        const auto mid = present.size() / 2;
        medians[c] = present.size() % 2 ? present[mid] : (present[mid - 1] + present[mid]) / 2.0;
    }
    for (std::size_t r = 0; r < table.rows(); ++r) {
        bool any_present = false;
        bool all_below = true;
        for (std::size_t c = 0; c < table.cols(); ++c) {
            auto v = table.cell(r, c);
            if (!v) continue;
            any_present = true;
            if (!(*v < *medians[c])) all_below = false;
        }
        table.set_kept(r, any_present && !all_below);
    }
    table.set_medians(std::move(medians));
    return table;
}

std::string render_context(const ScoreTable& table, int precision) {
    std::string out = "flow_id";
    for (const auto& l : table.labels()) out += " | " + l;
    out += "\n";
    char buf[64];
    for (std::size_t r = 0; r < table.rows(); ++r) {
        if (!table.kept(r)) continue;
        out += table.flows()[r].str();
        for (std::size_t c = 0; c < table.cols(); ++c) {
            out += " | ";
            if (auto v = table.cell(r, c)) {
                std::snprintf(buf, sizeof buf, "%.*f", precision, *v);
                out += buf;
            } else {
                out += "-";
            }
        }
        out += "\n";
    }
    return out;
}

std::size_t estimate_tokens(const std::string& text) { return text.size() / 4; }

}  // namespace flowpick
