#include "flowpick/registry.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "flowpick/error.hpp"

namespace flowpick {

std::string_view category_name(Category c) noexcept {
    switch (c) {
        case Category::BaseModel: return "BaseModel";
        case Category::Refiner: return "Refiner";
        case Category::Lora: return "Lora";
        case Category::Embedding: return "Embedding";
        case Category::Sampler: return "Sampler";
        case Category::Scheduler: return "Scheduler";
        case Category::Upscaler: return "Upscaler";
        case Category::FaceRestore: return "FaceRestore";
        case Category::Vae: return "Vae";
    }
    return "";
}

std::optional<Category> parse_category(std::string_view text) noexcept {
    for (auto c : kAllCategories) {
        if (category_name(c) == text) return c;
    }
    return std::nullopt;
}

void ComponentRegistry::add(ComponentRef ref) {
    if (ref.name.empty()) throw Error(Errc::RegistryInvariant, "component name is empty");
    if (!seen_.insert(ref).second) {
        throw Error(Errc::RegistryInvariant,
                    "duplicate component '" + ref.name + "' in " + std::string(category_name(ref.category)),
                    ref.name);
    }
    entries_.push_back(std::move(ref));
}

void ComponentRegistry::add_slot_rule(std::string class_type, std::string input, Category category) {
    slot_rules_[{std::move(class_type), std::move(input)}] = category;
}

void ComponentRegistry::add_guidance_input(std::string class_type, std::string input) {
    guidance_.emplace(std::move(class_type), std::move(input));
}

void ComponentRegistry::add_steps_input(std::string class_type, std::string input) {
    steps_.emplace(std::move(class_type), std::move(input));
}

void ComponentRegistry::clear(Category category) {
    std::erase_if(entries_, [&](const ComponentRef& r) { return r.category == category; });
    std::erase_if(seen_, [&](const ComponentRef& r) { return r.category == category; });
}

std::vector<std::string> ComponentRegistry::names(Category category) const {
    std::vector<std::string> out;
    for (const auto& e : entries_) {
        if (e.category == category) out.push_back(e.name);
    }
    return out;
}

bool ComponentRegistry::contains(std::string_view name, Category category) const {
    return seen_.count(ComponentRef{std::string(name), category}) != 0;
}

std::optional<Category> ComponentRegistry::category_of(std::string_view name) const {
    for (const auto& e : entries_) {
        if (e.name == name) return e.category;
    }
    return std::nullopt;
}

std::optional<Category> ComponentRegistry::slot_category(const std::string& class_type,
                                                         const std::string& input) const {
    auto it = slot_rules_.find({class_type, input});
    if (it == slot_rules_.end()) return std::nullopt;
    return it->second;
}

void ComponentRegistry::validate() const {
    for (const auto& [key, category] : slot_rules_) {
        bool populated = std::any_of(entries_.begin(), entries_.end(),
                                     [&](const ComponentRef& r) { return r.category == category; });
        if (!populated) {
            throw Error(Errc::RegistryInvariant,
                        "slot rule " + key.first + "." + key.second + " uses category " +
                            std::string(category_name(category)) + " which has no entries",
                        std::string(category_name(category)));
        }
    }
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, '\t')) fields.push_back(f);
    return fields;
}

bool skip_line(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line.empty() || line.front() == '#';
}

Category require_category(const std::string& text, int lineno) {
    auto c = parse_category(text);
    if (!c) {
        throw Error(Errc::Config, "line " + std::to_string(lineno) + ": unknown category '" + text + "'", text);
    }
    return *c;
}

}  // namespace

void ComponentRegistry::load_entries(std::istream& in) {
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (skip_line(line)) continue;
        auto f = split_tabs(line);
        if (f.size() != 2) {
            throw Error(Errc::Config, "line " + std::to_string(lineno) + ": expected category<TAB>name");
        }
        add({f[1], require_category(f[0], lineno)});
    }
}

void ComponentRegistry::load_slot_rules(std::istream& in) {
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (skip_line(line)) continue;
        auto f = split_tabs(line);
        if (f.size() != 3) {
            throw Error(Errc::Config,
                        "line " + std::to_string(lineno) + ": expected class_type<TAB>input<TAB>category");
        }
        if (f[2] == "guidance") {
            add_guidance_input(f[0], f[1]);
        } else if (f[2] == "steps") {
            add_steps_input(f[0], f[1]);
        } else {
            add_slot_rule(f[0], f[1], require_category(f[2], lineno));
        }
    }
}

void ComponentRegistry::write_entries(std::ostream& out) const {
    for (const auto& e : entries_) out << category_name(e.category) << '\t' << e.name << '\n';
}

void ComponentRegistry::write_slot_rules(std::ostream& out) const {
    for (const auto& [key, c] : slot_rules_) out << key.first << '\t' << key.second << '\t' << category_name(c) << '\n';
    for (const auto& key : guidance_) out << key.first << '\t' << key.second << "\tguidance\n";
    for (const auto& key : steps_) out << key.first << '\t' << key.second << "\tsteps\n";
}

ComponentRegistry register_defaults() {
    ComponentRegistry reg;
    const auto add_all = [&](Category c, std::initializer_list<const char*> names) {
        for (const char* n : names) reg.add({n, c});
    };

    add_all(Category::BaseModel, {
        "AetherverseLightning v10",
        "AlbedobaseXL v13",
        "AnimagineXL v30",
        "AnythingXL",
        "crystalClearXL ccXL",
        "DreamshaperXL turboDpmppSDEKarras",
        "EnvyhyperdriveXL v10",
        "GleipnirV0.3",
        "JibMixXL v9 \"BetterBodies\"",
        "JuggernautXL v9 Rdphoto2Lightning",
        "LeosamsHelloworldXL v70",
        "Proteus v03",
        "RealismEngineSDXL v10",
        "RealvisXL v40 BakedVAE",
        "RealvisXL v40 LightningBakedVAE",
        "SDXL Base 1.0 0.9VAE",
        "SDXL Base 1.0",
        "SDVN7 - NijiStyleXL v1",
        "SSD-1B",
        "TurbovisionXL SuperFastXL V431BakedVAE",
        "Stable Cascade",
        "Pixart-Sigma",
    });
    add_all(Category::Refiner, {"SDXL Refiner 1.0 0.9VAE", "SDXL Refiner 1.0"});
    add_all(Category::Embedding, {"easynegative", "bad-hands-5", "nfixer"});
    add_all(Category::Lora, {
        "Add-Detail XL",
        "EpicF4nta5yXL",
        "AnimeTarot",
        "JuggerCineXL2",
        "LCM LoRA SSD-1B",
        "LCM LoRA SDXL",
        "LogoRedmond",
        "MJ52 v2.0",
        "MJ52",
        "PerfectEyesXL",
        "Pixel-Art-XL v1.1",
        "Ral-Dissolve-SDXL",
        "SDXL Glass",
        "SDXLFaetastic v24",
        "Sinfully Stylish SDXL",
        "Werewolf SDXL",
        "WowifierXL v2",
        "XL more art-full-beta1",
    });
    add_all(Category::Upscaler, {"4x NMKD Superscale - SP 178000 G", "4x UltraSharp", "RealESRGAN x2 plus"});
    add_all(Category::FaceRestore, {"codeformer", "GFPGAN v1.4"});
    add_all(Category::Vae, {"SharpSpectrum VAEXL", "SDXL VAE fp16 fix", "SDXL VAE"});
    add_all(Category::Sampler, {"euler", "euler_ancestral", "dpmpp_2m", "dpmpp_2m_sde", "dpmpp_sde", "ddim", "uni_pc"});
    add_all(Category::Scheduler, {"normal", "karras", "exponential", "sgm_uniform"});

    reg.add_slot_rule("CheckpointLoaderSimple", "ckpt_name", Category::BaseModel);
    reg.add_slot_rule("CheckpointLoader", "ckpt_name", Category::BaseModel);
    reg.add_slot_rule("LoraLoader", "lora_name", Category::Lora);
    reg.add_slot_rule("LoraLoaderModelOnly", "lora_name", Category::Lora);
    reg.add_slot_rule("VAELoader", "vae_name", Category::Vae);
    reg.add_slot_rule("UpscaleModelLoader", "model_name", Category::Upscaler);
    reg.add_slot_rule("FaceRestoreModelLoader", "model_name", Category::FaceRestore);
    for (const char* sampler : {"KSampler", "KSamplerAdvanced"}) {
        reg.add_slot_rule(sampler, "sampler_name", Category::Sampler);
        reg.add_slot_rule(sampler, "scheduler", Category::Scheduler);
        reg.add_guidance_input(sampler, "cfg");
        reg.add_steps_input(sampler, "steps");
    }
    return reg;
}

ComponentRegistry load_registry_files(const std::string& entries_path, const std::string& slot_rules_path) {
    ComponentRegistry reg;
    std::ifstream entries(entries_path);
    if (!entries) throw Error(Errc::Io, "cannot open registry file " + entries_path, entries_path);
    reg.load_entries(entries);
    std::ifstream rules(slot_rules_path);
    if (!rules) throw Error(Errc::Io, "cannot open slot rules file " + slot_rules_path, slot_rules_path);
    reg.load_slot_rules(rules);
    return reg;
}

}  // namespace flowpick
