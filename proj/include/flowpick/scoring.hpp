#pragma once

#include <map>
#include <string>
#include <vector>

#include "flowpick/graph.hpp"

namespace flowpick {

/// Unstandardized output of each quality model, by scorer name.
using RawScoreVector = std::map<std::string, double>;

struct Standardization {
    double mean = 0.0;
    double std = 1.0;

    friend bool operator==(const Standardization&, const Standardization&) = default;
};

using StandardizationStats = std::map<std::string, Standardization>;

inline const std::vector<std::string>& default_scorer_names() {
    static const std::vector<std::string> names{"aesthetic", "image_reward", "hps", "pickscore"};
    return names;
}

/// Weighted sum of per-scorer z-scores, mapped affinely into the reporting
/// range: scale * Σ w_s (raw_s − mean_s) / std_s + offset.
struct EnsembleConfig {
    std::vector<std::string> scorers;
    std::map<std::string, double> weights;
    StandardizationStats stats;
    double scale = 0.1;
    double offset = 0.4;

    /// Default preference-leaning weights (HPS and PickScore heaviest).
    static EnsembleConfig with_default_weights(std::vector<std::string> scorers = default_scorer_names());

    /// Weights positive and covering exactly `scorers`; scale > 0. When
    /// `require_stats`, stats must cover exactly `scorers` with std > 0.
    void validate(bool require_stats = true) const;

    Json to_json() const;
    static EnsembleConfig from_json(const Json& doc);

    friend bool operator==(const EnsembleConfig&, const EnsembleConfig&) = default;
};

/// Per-scorer mean and population standard deviation over the corpus.
/// Requires at least two vectors with identical scorer sets.
/// Errors: DegenerateScorer(name) when a column is constant.
StandardizationStats fit_standardization(const std::vector<RawScoreVector>& raw_vectors);

/// Errors: MissingScorer(name).
double aggregate_score(const RawScoreVector& raw, const EnsembleConfig& config);

namespace serial {
StandardizationStats fit_standardization(const std::vector<RawScoreVector>& raw_vectors);
}

}  // namespace flowpick
