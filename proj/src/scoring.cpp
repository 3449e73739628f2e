#include "flowpick/scoring.hpp"

#include <cmath>

#include "flowpick/error.hpp"

namespace flowpick {

EnsembleConfig EnsembleConfig::with_default_weights(std::vector<std::string> scorers) {
    static const std::map<std::string, double> defaults{
        {"hps", 1.5}, {"pickscore", 1.5}, {"image_reward", 1.0}, {"aesthetic", 0.5}};
    EnsembleConfig cfg;
    for (const auto& s : scorers) {
        auto it = defaults.find(s);
        cfg.weights[s] = it == defaults.end() ? 1.0 : it->second;
    }
    cfg.scorers = std::move(scorers);
    return cfg;
}

void EnsembleConfig::validate(bool require_stats) const {
    if (scorers.empty()) throw Error(Errc::Config, "ensemble has no scorers");
    if (!(scale > 0.0) || !std::isfinite(offset)) throw Error(Errc::Config, "ensemble scale must be > 0");
    if (weights.size() != scorers.size()) throw Error(Errc::Config, "ensemble weights must cover exactly the scorer set");
    for (const auto& s : scorers) {
        auto w = weights.find(s);
        if (w == weights.end()) throw Error(Errc::Config, "no weight for scorer " + s, s);
        if (!(w->second > 0.0)) throw Error(Errc::Config, "weight for " + s + " must be positive", s);
        if (!require_stats) continue;
        auto st = stats.find(s);
        if (st == stats.end()) throw Error(Errc::Config, "no standardization stats for scorer " + s, s);
        if (!(st->second.std > 0.0)) throw Error(Errc::DegenerateScorer, "std for " + s + " must be > 0", s);
    }
    if (require_stats && stats.size() != scorers.size()) {
        throw Error(Errc::Config, "standardization stats must cover exactly the scorer set");
    }
}

Json EnsembleConfig::to_json() const {
    Json st = Json::object();
    for (const auto& [name, s] : stats) st[name] = {{"mean", s.mean}, {"std", s.std}};
    return {{"scorers", scorers}, {"weights", weights}, {"stats", st}, {"scale", scale}, {"offset", offset}};
}

EnsembleConfig EnsembleConfig::from_json(const Json& doc) {
    EnsembleConfig cfg;
    try {
        cfg.scorers = doc.at("scorers").get<std::vector<std::string>>();
        cfg.weights = doc.at("weights").get<std::map<std::string, double>>();
        if (auto st = doc.find("stats"); st != doc.end()) {
            for (const auto& [name, s] : st->items()) {
                cfg.stats[name] = {s.at("mean").get<double>(), s.at("std").get<double>()};
            }
        }
        cfg.scale = doc.value("scale", 0.1);
        cfg.offset = doc.value("offset", 0.4);
    } catch (const Json::exception& e) {
        throw Error(Errc::Config, std::string("bad ensemble config: ") + e.what());
    }
    return cfg;
}

namespace {

/// Neumaier-compensated sum.
class CompensatedSum {
public:
    void add(double x) noexcept {
        double t = sum_ + x;
        if (std::fabs(sum_) >= std::fabs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

std::vector<std::string> check_columns(const std::vector<RawScoreVector>& raw) {
    if (raw.size() < 2) throw Error(Errc::InvalidArgument, "standardization needs at least two score vectors");
    std::vector<std::string> names;
    for (const auto& [name, _] : raw.front()) names.push_back(name);
    for (const auto& v : raw) {
        for (const auto& name : names) {
            auto it = v.find(name);
            if (it == v.end()) throw Error(Errc::MissingScorer, "score vector lacks " + name, name);
            if (!std::isfinite(it->second)) throw Error(Errc::InvalidArgument, "non-finite score for " + name, name);
        }
        if (v.size() != names.size()) throw Error(Errc::MissingScorer, "score vectors have different scorer sets");
    }
    return names;
}

Standardization fit_column(const std::vector<RawScoreVector>& raw, const std::string& name) {
    const double n = static_cast<double>(raw.size());
    CompensatedSum sum;
    for (const auto& v : raw) sum.add(v.at(name));
    const double mean = sum.value() / n;
    CompensatedSum sq;
    for (const auto& v : raw) {
        double d = v.at(name) - mean;
        sq.add(d * d);
    }
    return {mean, std::sqrt(sq.value() / n)};
}

StandardizationStats finish(const std::vector<std::string>& names, const std::vector<Standardization>& cols) {
    StandardizationStats stats;
    for (std::size_t k = 0; k < names.size(); ++k) {
        if (!(cols[k].std > 0.0)) {
            throw Error(Errc::DegenerateScorer, "scorer " + names[k] + " is constant over the corpus", names[k]);
        }
        stats[names[k]] = cols[k];
    }
    return stats;
}

}  // namespace

StandardizationStats fit_standardization(const std::vector<RawScoreVector>& raw_vectors) {
    const auto names = check_columns(raw_vectors);
    std::vector<Standardization> cols(names.size());
    const auto n = static_cast<std::ptrdiff_t>(names.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < n; ++k) cols[k] = fit_column(raw_vectors, names[k]);
    return finish(names, cols);
}

namespace serial {

StandardizationStats fit_standardization(const std::vector<RawScoreVector>& raw_vectors) {
    const auto names = check_columns(raw_vectors);
    std::vector<Standardization> cols;
    for (const auto& name : names) cols.push_back(fit_column(raw_vectors, name));
    return finish(names, cols);
}

}  // namespace serial

double aggregate_score(const RawScoreVector& raw, const EnsembleConfig& config) {
    double total = 0.0;
    for (const auto& name : config.scorers) {
        auto it = raw.find(name);
        if (it == raw.end()) throw Error(Errc::MissingScorer, "raw scores lack " + name, name);
        auto st = config.stats.find(name);
        auto w = config.weights.find(name);
        if (st == config.stats.end() || w == config.weights.end()) {
            throw Error(Errc::Config, "ensemble config has no weight or stats for " + name, name);
        }
        total += w->second * (it->second - st->second.mean) / st->second.std;
    }
    return config.scale * total + config.offset;
}

}  // namespace flowpick
