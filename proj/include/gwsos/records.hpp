#pragma once

#include <json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gwsos {

const char* tool_version();

// 64-bit FNV-1a, as 16 hex digits. Identifies inputs; not a security hash.
std::string digest_bytes(std::string_view bytes);
// Throws InputError if the file cannot be read.
std::string digest_file(const std::string& path);

struct RunManifest {
    std::string command;
    std::map<std::string, std::string> input_digests;  // input name -> digest
    nlohmann::json parameters = nlohmann::json::object();
    std::optional<std::uint64_t> seed;
    std::map<std::string, double> timings;  // seconds
    std::vector<std::string> outputs;

    nlohmann::json to_json() const;
};

// A result file: the manifest on the first line, then one JSON object per line.
class RecordFile {
public:
    explicit RecordFile(RunManifest manifest) : manifest_(std::move(manifest)) {}
    RunManifest& manifest() { return manifest_; }
    void add(const std::string& kind, nlohmann::json record);
    const std::vector<nlohmann::json>& records() const { return records_; }
    std::string serialize() const;
    // Records the path as an output before writing. Throws InputError if the file cannot be written.
    void write(const std::string& path);

private:
    RunManifest manifest_;
    std::vector<nlohmann::json> records_;
};

// Parses a record file; throws InputError on malformed lines.
std::vector<nlohmann::json> read_record_file(const std::string& path);
// Copy of a record line without timing fields, for reproducibility comparisons.
nlohmann::json strip_timings(const nlohmann::json& record);

}  // namespace gwsos
