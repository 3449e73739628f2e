#pragma once

#include <atomic>
#include <filesystem>
#include <random>
#include <string>

#include <unistd.h>

#include "flowpick/graph.hpp"
#include "flowpick/io.hpp"

namespace testing {

inline std::filesystem::path fixtures() { return FLOWPICK_FIXTURES; }

inline std::string fixture_text(const std::string& rel) { return flowpick::read_text_file(fixtures() / rel); }

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag = "flowpick") {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                (tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

private:
    std::filesystem::path path_;
};

/// Random node map. Links only point from higher to lower indices, so the
/// result is acyclic unless `back_edges` adds links the other way.
inline flowpick::WorkflowGraph::NodeMap random_nodes(std::mt19937_64& rng, int n, int back_edges = 0) {
    using namespace flowpick;
    static const char* classes[] = {"Loader", "Encode", "Sampler", "Decode", "Save"};
    WorkflowGraph::NodeMap nodes;
    for (int i = 0; i < n; ++i) {
        Node node;
        node.class_type = classes[rng() % 5];
        node.inputs["k"] = Literal{static_cast<std::int64_t>(rng() % 4)};
        if (rng() % 3 == 0) node.inputs["name"] = Literal{std::string("v") + std::to_string(rng() % 3)};
        if (rng() % 5 == 0) node.inputs["w"] = Literal{0.5 * static_cast<double>(rng() % 7)};
        for (int j = 0; j < i; ++j) {
            if (rng() % 3 == 0) node.inputs["in" + std::to_string(j)] = LinkRef{std::to_string(j), rng() % 2};
        }
        nodes.emplace(std::to_string(i), std::move(node));
    }
    for (int b = 0; b < back_edges && n > 1; ++b) {
        int from = static_cast<int>(rng() % n);
        int to = static_cast<int>(rng() % n);
        if (from < to) std::swap(from, to);
        if (from == to) continue;
        nodes.at(std::to_string(to)).inputs["back" + std::to_string(b)] = LinkRef{std::to_string(from), 0};
    }
    return nodes;
}

}  // namespace testing
