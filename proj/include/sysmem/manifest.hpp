#pragma once

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sysmem/io.hpp"

namespace sysmem {

inline constexpr const char* kToolVersion = "0.1.0";

/// Provenance block attached to every CLI result so a run can be repeated
/// bit-for-bit: tool version, the exact command line, the seed if one was
/// drawn on, and a checksum of every input file read.
struct RunManifest {
    std::string tool_version = kToolVersion;
    std::string command;
    std::optional<std::uint64_t> seed;
    std::map<std::string, std::string> inputs;  // path -> fnv1a64 hex
    std::string timestamp_utc;

    static std::string now_utc() {
        const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        std::tm tm{};
        gmtime_r(&now, &tm);
        char buf[32];
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
        return buf;
    }

    static RunManifest make(const std::vector<std::string>& argv,
                            const std::vector<std::filesystem::path>& input_files,
                            std::optional<std::uint64_t> seed = std::nullopt) {
        RunManifest m;
        std::string cmd;
        for (const auto& a : argv) {
            if (!cmd.empty()) cmd += ' ';
            cmd += a;
        }
        m.command = cmd;
        m.seed = seed;
        for (const auto& p : input_files) m.inputs[p.string()] = io::file_checksum_hex(p);
        m.timestamp_utc = now_utc();
        return m;
    }

    io::json to_json() const {
        io::json j;
        j["tool_version"] = tool_version;
        j["command"] = command;
        if (seed) j["seed"] = *seed;
        j["inputs"] = inputs;
        j["timestamp_utc"] = timestamp_utc;
        return j;
    }
};

}  // namespace sysmem
