#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "flowpick/augment.hpp"
#include "flowpick/scoring.hpp"
#include "flowpick/selection.hpp"

namespace flowpick {

/// A client is either the hermetic mock or a live HTTP endpoint, never both.
struct EndpointConfig {
    bool mock = true;
    std::string url;
    std::string secret;  // bearer token or API key

    friend bool operator==(const EndpointConfig&, const EndpointConfig&) = default;
};

struct ExecutorConfig {
    EndpointConfig endpoint;
    std::string image_dir = "images";
    double timeout_s = 300.0;
    std::set<std::string> available_models;                   // mock only; empty = accept all
    std::set<std::pair<std::string, std::string>> fail_pairs;  // mock only

    friend bool operator==(const ExecutorConfig&, const ExecutorConfig&) = default;
};

struct ScorerConfig {
    std::string name;
    EndpointConfig endpoint;

    friend bool operator==(const ScorerConfig&, const ScorerConfig&) = default;
};

struct PipelineConfig {
    /// Directory relative paths are resolved against (the config file's).
    std::filesystem::path base_dir = ".";

    std::uint64_t seed = 0;
    int workers = 1;

    struct Paths {
        std::string templates = "templates";
        std::string prompts = "prompts.jsonl";
        std::string registry;    // empty: built-in registry
        std::string slot_rules;  // empty: built-in rules
        std::string work_dir = "work";
        friend bool operator==(const Paths&, const Paths&) = default;
    } paths;

    ExecutorConfig executor;
    std::vector<ScorerConfig> scorers;
    EndpointConfig labeler;
    EndpointConfig llm;
    ScorerConfig evaluator{"hps_v2", {}};

    EnsembleConfig ensemble = EnsembleConfig::with_default_weights();

    struct Augment {
        int mutations_per_template = 8;
        int chain_length = 1;
        bool dedup = true;
        std::vector<WeightedMutation> mix = default_mutation_mix();
    } augment;

    struct Labels {
        std::vector<std::string> vocabulary = LabelVocabulary::standard().labels();
        std::size_t max_labels = 10;
        friend bool operator==(const Labels&, const Labels&) = default;
    } labels;

    struct Selection {
        double target_score = 0.725;
        std::vector<double> sweep{0.296, 0.467, 0.596, 0.725};
        int precision = 3;
        int ic_reprompts = 3;
        int ft_retries = 3;
        int max_tokens = 4096;
        double temperature = 0.0;
        std::string negative_default;
        friend bool operator==(const Selection&, const Selection&) = default;
    } selection;

    struct Run {
        std::size_t batch_size = 32;
        std::string fixed_timestamp;  // empty: wall clock
        friend bool operator==(const Run&, const Run&) = default;
    } run;

    /// Reference scale printed next to the projection from this config.
    struct Scale {
        std::size_t prompts = 500;
        std::size_t flows = 310;
        std::size_t discarded = 125;
        friend bool operator==(const Scale&, const Scale&) = default;
    } scale;

    std::filesystem::path resolve(const std::string& p) const;
    std::filesystem::path work(const std::string& name) const { return resolve(paths.work_dir) / name; }

    SelectionOptions selection_options() const;

    Json to_json() const;
    /// Errors: Config on unknown shapes, a mock endpoint with a url, or a live
    /// one without.
    static PipelineConfig from_json(const Json& doc, std::filesystem::path base_dir = ".");
};

/// Replaces ${NAME} in every string with the environment value.
/// Errors: Config when a variable is undefined.
Json interpolate_env(const Json& doc);

/// Parses, interpolates and checks that the template dir, prompts file and
/// registry files (when set) exist. Errors: Config, Io.
PipelineConfig load_config(const std::filesystem::path& path);

Json mutation_to_json(const WeightedMutation& m);
WeightedMutation mutation_from_json(const Json& doc);

}  // namespace flowpick
