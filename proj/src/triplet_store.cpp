#include "flowpick/triplet_store.hpp"

#include <chrono>
#include <ctime>
#include <fstream>

#include "flowpick/error.hpp"
#include "flowpick/io.hpp"

namespace flowpick {

Json ScoredTriplet::to_json() const {
    return {{"prompt_id", prompt_id}, {"flow_id", flow_id.str()}, {"seed", seed},
            {"raw", raw},             {"ensemble", ensemble},       {"timestamp", timestamp}};
}

ScoredTriplet ScoredTriplet::from_json(const Json& row) {
    ScoredTriplet t;
    t.prompt_id = row.at("prompt_id").get<std::string>();
    t.flow_id = FlowId(row.at("flow_id").get<std::string>());
    t.seed = row.at("seed").get<std::uint64_t>();
    t.raw = row.at("raw").get<RawScoreVector>();
    t.ensemble = row.at("ensemble").get<double>();
    t.timestamp = row.value("timestamp", "");
    return t;
}

TripletStore::TripletStore(std::filesystem::path path) : path_(std::move(path)) {}

std::filesystem::path TripletStore::sidecar_path() const {
    auto p = path_;
    p += ".ensemble.json";
    return p;
}

std::vector<ScoredTriplet> TripletStore::load() const {
    std::vector<ScoredTriplet> rows;
    if (!std::filesystem::exists(path_)) return rows;
    std::ifstream in(path_, std::ios::binary);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            rows.push_back(ScoredTriplet::from_json(Json::parse(line)));
        } catch (const Json::exception& e) {
            throw Error(Errc::StoreCorrupt, path_.string() + ":" + std::to_string(lineno) + ": " + e.what(),
                        path_.string());
        }
    }
    return rows;
}

void TripletStore::append(const std::vector<ScoredTriplet>& rows) const {
    if (rows.empty()) return;
    std::string text;
    for (const auto& r : rows) text += r.to_json().dump() + "\n";
    append_text_file(path_, text);
}

std::optional<EnsembleConfig> TripletStore::load_config() const {
    const auto p = sidecar_path();
    if (!std::filesystem::exists(p)) return std::nullopt;
    try {
        return EnsembleConfig::from_json(Json::parse(read_text_file(p)));
    } catch (const Json::exception& e) {
        throw Error(Errc::StoreCorrupt, p.string() + ": " + e.what(), p.string());
    }
}

void TripletStore::save_config(const EnsembleConfig& config) const {
    write_text_file(sidecar_path(), config.to_json().dump(2) + "\n");
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace flowpick
