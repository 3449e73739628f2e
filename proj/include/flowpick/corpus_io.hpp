#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "flowpick/graph.hpp"

namespace flowpick {

struct TemplateFile {
    FlowId id;  // file stem
    std::filesystem::path path;
};

/// `*.json` files directly under `dir`, sorted by name.
std::vector<TemplateFile> list_template_files(const std::filesystem::path& dir);

/// Parses every template; throws Error(TemplateInvalid) naming the first bad file.
Corpus load_template_dir(const std::filesystem::path& dir);

/// Writes `<flow id>.json` (canonical form) per entry and `manifest.jsonl`
/// with {flow_id, template, mutations} lines in corpus order.
void write_corpus(const std::filesystem::path& dir, const Corpus& corpus);

/// Reads a directory written by write_corpus, in manifest order.
Corpus load_corpus(const std::filesystem::path& dir);

}  // namespace flowpick
