#include "gwsos/records.hpp"

#include "gwsos/mmspace.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#ifndef GWSOS_VERSION
#define GWSOS_VERSION "0.0.0"
#endif

namespace gwsos {

const char* tool_version() { return GWSOS_VERSION; }

std::string digest_bytes(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

std::string digest_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return digest_bytes(buf.str());
}

nlohmann::json RunManifest::to_json() const {
    nlohmann::json j = {{"record", "manifest"},
                        {"command", command},
                        {"tool_version", tool_version()},
                        {"inputs", input_digests},
                        {"parameters", parameters},
                        {"timings", timings},
                        {"outputs", outputs}};
    j["seed"] = seed ? nlohmann::json(*seed) : nlohmann::json(nullptr);
    return j;
}

void RecordFile::add(const std::string& kind, nlohmann::json record) {
    record["record"] = kind;
    records_.push_back(std::move(record));
}

std::string RecordFile::serialize() const {
    std::string out = manifest_.to_json().dump() + "\n";
    for (const auto& r : records_) out += r.dump() + "\n";
    return out;
}

void RecordFile::write(const std::string& path) {
    manifest_.outputs.push_back(path);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path);
    out << serialize();
    if (!out) throw InputError("failed writing " + path);
}

std::vector<nlohmann::json> read_record_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot read " + path);
    std::vector<nlohmann::json> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            out.push_back(nlohmann::json::parse(line));
        } catch (const nlohmann::json::exception& e) {
            throw InputError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

nlohmann::json strip_timings(const nlohmann::json& record) {
    nlohmann::json out = record;
    if (out.is_object()) {
        out.erase("timings");
        out.erase("seconds");
    }
    return out;
}

}  // namespace gwsos
