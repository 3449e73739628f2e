#include "flowpick/corpus_io.hpp"

#include <algorithm>

#include "flowpick/error.hpp"
#include "flowpick/io.hpp"

namespace flowpick {

namespace fs = std::filesystem;

std::vector<TemplateFile> list_template_files(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw Error(Errc::Io, "not a directory: " + dir.string(), dir.string());
    std::vector<TemplateFile> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == ".json") {
            files.push_back({FlowId(e.path().stem().string()), e.path()});
        }
    }
    std::sort(files.begin(), files.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    return files;
}

Corpus load_template_dir(const fs::path& dir) {
    Corpus corpus;
    for (const auto& f : list_template_files(dir)) {
        try {
            corpus.push_back({f.id, parse_flow(read_text_file(f.path)), {f.id, {}}});
        } catch (const Error& e) {
            throw Error(Errc::TemplateInvalid, f.path.filename().string() + ": " + e.what(), f.id.str());
        }
    }
    return corpus;
}

void write_corpus(const fs::path& dir, const Corpus& corpus) {
    fs::create_directories(dir);
    std::string manifest;
    for (const auto& entry : corpus) {
        write_text_file(dir / (entry.id.str() + ".json"), serialize_flow(entry.graph) + "\n");
        Json line = {{"flow_id", entry.id.str()},
                     {"template", entry.lineage.template_id.str()},
                     {"mutations", entry.lineage.mutations}};
        manifest += line.dump() + "\n";
    }
    write_text_file(dir / "manifest.jsonl", manifest);
}

Corpus load_corpus(const fs::path& dir) {
    Corpus corpus;
    const auto manifest = dir / "manifest.jsonl";
    for (const auto& line : read_lines(manifest)) {
        Json row;
        try {
            row = Json::parse(line);
            FlowId id(row.at("flow_id").get<std::string>());
            FlowLineage lineage{FlowId(row.at("template").get<std::string>()),
                                row.at("mutations").get<std::vector<std::string>>()};
            corpus.push_back({id, parse_flow(read_text_file(dir / (id.str() + ".json"))), std::move(lineage)});
        } catch (const Json::exception& e) {
            throw Error(Errc::Io, "bad manifest line in " + manifest.string() + ": " + e.what(), manifest.string());
        }
    }
    return corpus;
}

}  // namespace flowpick
