#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace flowpick {

struct PromptRecord {
    std::string prompt_id;
    std::string text;
    std::optional<std::vector<std::string>> labels;
};

/// Throws Error(InvalidArgument) on empty text or id.
PromptRecord make_prompt(std::string prompt_id, std::string text);

/// JSONL rows {prompt_id, text}; ids must be unique.
std::vector<PromptRecord> load_prompts(const std::filesystem::path& path);

}  // namespace flowpick
