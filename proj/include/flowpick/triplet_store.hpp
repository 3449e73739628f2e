#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "flowpick/scoring.hpp"

namespace flowpick {

struct ScoredTriplet {
    std::string prompt_id;
    FlowId flow_id;
    std::uint64_t seed = 0;
    RawScoreVector raw;
    double ensemble = 0.0;
    std::string timestamp;

    Json to_json() const;
    static ScoredTriplet from_json(const Json& row);
};

/// Append-only JSONL triplet store. The EnsembleConfig that produced the
/// stored ensemble values lives in a sidecar next to it
/// ("<store>.ensemble.json").
class TripletStore {
public:
    explicit TripletStore(std::filesystem::path path);

    const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path sidecar_path() const;

    /// Empty when the file does not exist. Errors: StoreCorrupt on any
    /// unparseable line.
    std::vector<ScoredTriplet> load() const;
    void append(const std::vector<ScoredTriplet>& rows) const;

    std::optional<EnsembleConfig> load_config() const;
    void save_config(const EnsembleConfig& config) const;

private:
    std::filesystem::path path_;
};

std::string utc_timestamp();

}  // namespace flowpick
