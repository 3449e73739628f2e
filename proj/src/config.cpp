#include "flowpick/config.hpp"

#include <cstdlib>

#include "flowpick/error.hpp"
#include "flowpick/io.hpp"

namespace flowpick {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

[[noreturn]] void config_error(const std::string& what) { throw Error(Errc::Config, what); }

Json endpoint_to_json(const EndpointConfig& e) {
    if (e.mock) return {{"mock", true}};
    Json doc{{"url", e.url}};
    if (!e.secret.empty()) doc["secret"] = e.secret;
    return doc;
}

EndpointConfig endpoint_from_json(const Json& doc, const std::string& where) {
    if (!doc.is_object()) config_error(where + " must be an object");
    EndpointConfig e;
    e.mock = doc.value("mock", false);
    e.url = doc.value("url", std::string());
    e.secret = doc.value("secret", std::string());
    if (e.mock && !e.url.empty()) config_error(where + ": mock and url are mutually exclusive");
    if (!e.mock && e.url.empty()) config_error(where + ": needs either \"mock\": true or a url");
    return e;
}

template <class T>
void read(const Json& obj, const char* key, T& target) {
    if (auto it = obj.find(key); it != obj.end()) target = it->template get<T>();
}

}  // namespace

Json mutation_to_json(const WeightedMutation& m) {
    Json doc = std::visit(
        overloaded{
            [](const SwapComponent& s) -> Json {
                return {{"kind", "swap"}, {"category", std::string(category_name(s.category))}};
            },
            [](const ChangeGuidance& g) -> Json { return {{"kind", "guidance"}, {"min", g.min}, {"max", g.max}}; },
            [](const ChangeSteps& s) -> Json { return {{"kind", "steps"}, {"min", s.min}, {"max", s.max}}; },
            [](const SwapSampler&) -> Json { return {{"kind", "sampler"}}; },
            [](const SwapScheduler&) -> Json { return {{"kind", "scheduler"}}; },
        },
        m.kind);
    doc["weight"] = m.weight;
    return doc;
}

WeightedMutation mutation_from_json(const Json& doc) {
    const auto kind = doc.at("kind").get<std::string>();
    const double weight = doc.value("weight", 1.0);
    if (kind == "swap") {
        auto name = doc.at("category").get<std::string>();
        auto cat = parse_category(name);
        if (!cat) config_error("unknown mutation category '" + name + "'");
        return {SwapComponent{*cat}, weight};
    }
    if (kind == "guidance") return {ChangeGuidance{doc.at("min").get<double>(), doc.at("max").get<double>()}, weight};
    if (kind == "steps") {
        return {ChangeSteps{doc.at("min").get<std::int64_t>(), doc.at("max").get<std::int64_t>()}, weight};
    }
    if (kind == "sampler") return {SwapSampler{}, weight};
    if (kind == "scheduler") return {SwapScheduler{}, weight};
    config_error("unknown mutation kind '" + kind + "'");
}

std::filesystem::path PipelineConfig::resolve(const std::string& p) const {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base_dir / path;
}

SelectionOptions PipelineConfig::selection_options() const {
    SelectionOptions o;
    o.negative_default = selection.negative_default;
    o.max_labels = labels.max_labels;
    o.ic_reprompts = selection.ic_reprompts;
    o.ft_retries = selection.ft_retries;
    o.max_tokens = selection.max_tokens;
    o.temperature = selection.temperature;
    return o;
}

Json PipelineConfig::to_json() const {
    Json paths_doc{{"templates", paths.templates}, {"prompts", paths.prompts}, {"work_dir", paths.work_dir}};
    if (!paths.registry.empty()) paths_doc["registry"] = paths.registry;
    if (!paths.slot_rules.empty()) paths_doc["slot_rules"] = paths.slot_rules;

    Json exec = endpoint_to_json(executor.endpoint);
    if (executor.endpoint.mock) {
        exec["available_models"] = executor.available_models;
        Json pairs = Json::array();
        for (const auto& [p, f] : executor.fail_pairs) pairs.push_back({p, f});
        exec["fail_pairs"] = pairs;
    } else {
        exec["image_dir"] = executor.image_dir;
        exec["timeout_s"] = executor.timeout_s;
    }

    Json scorer_docs = Json::array();
    for (const auto& s : scorers) {
        auto d = endpoint_to_json(s.endpoint);
        d["name"] = s.name;
        scorer_docs.push_back(d);
    }
    auto eval = endpoint_to_json(evaluator.endpoint);
    eval["name"] = evaluator.name;

    Json mix = Json::array();
    for (const auto& m : augment.mix) mix.push_back(mutation_to_json(m));

    return {
        {"seed", seed},
        {"workers", workers},
        {"paths", paths_doc},
        {"endpoints",
         {{"executor", exec},
          {"scorers", scorer_docs},
          {"labeler", endpoint_to_json(labeler)},
          {"llm", endpoint_to_json(llm)},
          {"evaluator", eval}}},
        {"ensemble", ensemble.to_json()},
        {"augment",
         {{"mutations_per_template", augment.mutations_per_template},
          {"chain_length", augment.chain_length},
          {"dedup", augment.dedup},
          {"mix", mix}}},
        {"labels", {{"vocabulary", labels.vocabulary}, {"max_labels", labels.max_labels}}},
        {"selection",
         {{"target_score", selection.target_score},
          {"sweep", selection.sweep},
          {"precision", selection.precision},
          {"ic_reprompts", selection.ic_reprompts},
          {"ft_retries", selection.ft_retries},
          {"max_tokens", selection.max_tokens},
          {"temperature", selection.temperature},
          {"negative_default", selection.negative_default}}},
        {"run", {{"batch_size", run.batch_size}, {"fixed_timestamp", run.fixed_timestamp}}},
        {"scale", {{"prompts", scale.prompts}, {"flows", scale.flows}, {"discarded", scale.discarded}}},
    };
}

PipelineConfig PipelineConfig::from_json(const Json& doc, std::filesystem::path base_dir) {
    PipelineConfig cfg;
    cfg.base_dir = std::move(base_dir);
    try {
        if (!doc.is_object()) config_error("config must be a JSON object");
        read(doc, "seed", cfg.seed);
        read(doc, "workers", cfg.workers);
        if (cfg.workers < 1) config_error("workers must be at least 1");

        if (auto p = doc.find("paths"); p != doc.end()) {
            read(*p, "templates", cfg.paths.templates);
            read(*p, "prompts", cfg.paths.prompts);
            read(*p, "registry", cfg.paths.registry);
            read(*p, "slot_rules", cfg.paths.slot_rules);
            read(*p, "work_dir", cfg.paths.work_dir);
        }

        const Json endpoints = doc.value("endpoints", Json::object());
        if (auto e = endpoints.find("executor"); e != endpoints.end()) {
            cfg.executor.endpoint = endpoint_from_json(*e, "endpoints.executor");
            read(*e, "image_dir", cfg.executor.image_dir);
            read(*e, "timeout_s", cfg.executor.timeout_s);
            read(*e, "available_models", cfg.executor.available_models);
            if (auto fp = e->find("fail_pairs"); fp != e->end()) {
                for (const auto& pair : *fp) {
                    cfg.executor.fail_pairs.emplace(pair.at(0).get<std::string>(), pair.at(1).get<std::string>());
                }
            }
            if (!cfg.executor.endpoint.mock && (!cfg.executor.fail_pairs.empty() ||
                                                !cfg.executor.available_models.empty())) {
                config_error("endpoints.executor: fail_pairs/available_models apply to the mock only");
            }
        }
        if (auto s = endpoints.find("scorers"); s != endpoints.end()) {
            for (const auto& sd : *s) {
                auto name = sd.at("name").get<std::string>();
                cfg.scorers.push_back({name, endpoint_from_json(sd, "endpoints.scorers." + name)});
            }
        } else {
            for (const auto& name : default_scorer_names()) cfg.scorers.push_back({name, {}});
        }
        if (auto l = endpoints.find("labeler"); l != endpoints.end()) {
            cfg.labeler = endpoint_from_json(*l, "endpoints.labeler");
        }
        if (auto l = endpoints.find("llm"); l != endpoints.end()) cfg.llm = endpoint_from_json(*l, "endpoints.llm");
        if (auto ev = endpoints.find("evaluator"); ev != endpoints.end()) {
            cfg.evaluator = {ev->value("name", cfg.evaluator.name), endpoint_from_json(*ev, "endpoints.evaluator")};
        }

        if (auto e = doc.find("ensemble"); e != doc.end()) {
            cfg.ensemble = EnsembleConfig::from_json(*e);
        } else {
            std::vector<std::string> names;
            for (const auto& s : cfg.scorers) names.push_back(s.name);
            cfg.ensemble = EnsembleConfig::with_default_weights(names);
        }
        cfg.ensemble.validate(!cfg.ensemble.stats.empty());

        if (auto a = doc.find("augment"); a != doc.end()) {
            read(*a, "mutations_per_template", cfg.augment.mutations_per_template);
            read(*a, "chain_length", cfg.augment.chain_length);
            read(*a, "dedup", cfg.augment.dedup);
            if (auto mix = a->find("mix"); mix != a->end()) {
                cfg.augment.mix.clear();
                for (const auto& m : *mix) cfg.augment.mix.push_back(mutation_from_json(m));
            }
        }
        if (auto l = doc.find("labels"); l != doc.end()) {
            read(*l, "vocabulary", cfg.labels.vocabulary);
            read(*l, "max_labels", cfg.labels.max_labels);
        }
        LabelVocabulary check(cfg.labels.vocabulary);
        if (cfg.labels.max_labels == 0) config_error("labels.max_labels must be positive");

        if (auto s = doc.find("selection"); s != doc.end()) {
            read(*s, "target_score", cfg.selection.target_score);
            read(*s, "sweep", cfg.selection.sweep);
            read(*s, "precision", cfg.selection.precision);
            read(*s, "ic_reprompts", cfg.selection.ic_reprompts);
            read(*s, "ft_retries", cfg.selection.ft_retries);
            read(*s, "max_tokens", cfg.selection.max_tokens);
            read(*s, "temperature", cfg.selection.temperature);
            read(*s, "negative_default", cfg.selection.negative_default);
        }
        if (auto r = doc.find("run"); r != doc.end()) {
            read(*r, "batch_size", cfg.run.batch_size);
            read(*r, "fixed_timestamp", cfg.run.fixed_timestamp);
        }
        if (auto s = doc.find("scale"); s != doc.end()) {
            read(*s, "prompts", cfg.scale.prompts);
            read(*s, "flows", cfg.scale.flows);
            read(*s, "discarded", cfg.scale.discarded);
        }
    } catch (const Json::exception& e) {
        config_error(std::string("malformed config: ") + e.what());
    } catch (const Error& e) {
        if (e.code() == Errc::Config) throw;
        config_error(e.what());
    }
    return cfg;
}

Json interpolate_env(const Json& doc) {
    if (doc.is_object()) {
        Json out = Json::object();
        for (const auto& [k, v] : doc.items()) out[k] = interpolate_env(v);
        return out;
    }
    if (doc.is_array()) {
        Json out = Json::array();
        for (const auto& v : doc) out.push_back(interpolate_env(v));
        return out;
    }
    if (!doc.is_string()) return doc;
    const auto& s = doc.get_ref<const std::string&>();
    std::string out;
    for (std::size_t i = 0; i < s.size();) {
        if (s.compare(i, 2, "${") == 0) {
            auto end = s.find('}', i + 2);
            if (end == std::string::npos) config_error("unterminated ${ in config string '" + s + "'");
            auto name = s.substr(i + 2, end - i - 2);
            const char* value = std::getenv(name.c_str());
            if (!value) throw Error(Errc::Config, "environment variable " + name + " is not set", name);
            out += value;
            i = end + 1;
        } else {
            out += s[i++];
        }
    }
    return out;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    Json doc;
    try {
        doc = Json::parse(read_text_file(path));
    } catch (const Json::exception& e) {
        throw Error(Errc::Config, "config " + path.string() + " is not valid JSON: " + e.what(), path.string());
    }
    auto cfg = PipelineConfig::from_json(interpolate_env(doc), path.parent_path().empty() ? "." : path.parent_path());
    auto must_exist = [&](const std::string& p, const char* what) {
        if (!p.empty() && !std::filesystem::exists(cfg.resolve(p))) {
            throw Error(Errc::Config, std::string(what) + " not found: " + cfg.resolve(p).string(), p);
        }
    };
    must_exist(cfg.paths.templates, "template directory");
    must_exist(cfg.paths.prompts, "prompts file");
    must_exist(cfg.paths.registry, "registry file");
    must_exist(cfg.paths.slot_rules, "slot rules file");
    if (cfg.paths.registry.empty() != cfg.paths.slot_rules.empty()) {
        throw Error(Errc::Config, "paths.registry and paths.slot_rules must be given together");
    }
    return cfg;
}

}  // namespace flowpick
