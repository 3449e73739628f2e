#pragma once

#include <array>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace flowpick {

enum class Category { BaseModel, Refiner, Lora, Embedding, Sampler, Scheduler, Upscaler, FaceRestore, Vae };

inline constexpr std::array kAllCategories{
    Category::BaseModel, Category::Refiner,  Category::Lora,        Category::Embedding, Category::Sampler,
    Category::Scheduler, Category::Upscaler, Category::FaceRestore, Category::Vae,
};

std::string_view category_name(Category c) noexcept;
std::optional<Category> parse_category(std::string_view text) noexcept;

struct ComponentRef {
    std::string name;
    Category category;

    friend auto operator<=>(const ComponentRef&, const ComponentRef&) = default;
};

/// (class_type, input name) pair identifying a node input across flows.
using InputKey = std::pair<std::string, std::string>;

/// Swappable assets plus the explicit rules saying which node inputs hold
/// which kind of asset. Guidance and step-count inputs are listed separately
/// since they are numeric parameters rather than named components.
class ComponentRegistry {
public:
    /// Throws Error(RegistryInvariant) on empty names or duplicate (name, category).
    void add(ComponentRef ref);
    void add_slot_rule(std::string class_type, std::string input, Category category);
    void add_guidance_input(std::string class_type, std::string input);
    void add_steps_input(std::string class_type, std::string input);

    /// Drops every entry of `category`; slot rules are kept, so `validate`
    /// reports them afterwards.
    void clear(Category category);

    const std::vector<ComponentRef>& entries() const noexcept { return entries_; }
    const std::map<InputKey, Category>& slot_rules() const noexcept { return slot_rules_; }
    const std::set<InputKey>& guidance_inputs() const noexcept { return guidance_; }
    const std::set<InputKey>& steps_inputs() const noexcept { return steps_; }

    /// Names in registration order.
    std::vector<std::string> names(Category category) const;
    bool contains(std::string_view name, Category category) const;
    /// First registered category carrying `name`.
    std::optional<Category> category_of(std::string_view name) const;
    std::optional<Category> slot_category(const std::string& class_type, const std::string& input) const;

    /// Throws Error(RegistryInvariant) when a slot rule names a category with
    /// no entries.
    void validate() const;

    /// `category<TAB>name` lines; blank lines and '#' comments ignored.
    void load_entries(std::istream& in);
    /// `class_type<TAB>input_name<TAB>category`; category may also be
    /// `guidance` or `steps` for the numeric parameter rules.
    void load_slot_rules(std::istream& in);
    void write_entries(std::ostream& out) const;
    void write_slot_rules(std::ostream& out) const;

private:
    std::vector<ComponentRef> entries_;
    std::set<ComponentRef> seen_;
    std::map<InputKey, Category> slot_rules_;
    std::set<InputKey> guidance_;
    std::set<InputKey> steps_;
};

/// Registry with every asset used by the reference flow corpus, standard
/// ComfyUI samplers and schedulers, and slot rules for the stock loader nodes.
ComponentRegistry register_defaults();

ComponentRegistry load_registry_files(const std::string& entries_path, const std::string& slot_rules_path);

}  // namespace flowpick
