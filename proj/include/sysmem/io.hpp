#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sysmem/core.hpp"
#include "sysmem/errors.hpp"
#include "sysmem/memorization.hpp"

namespace sysmem::io {

using json = nlohmann::json;

// --- small helpers -------------------------------------------------------

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw parse_error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline double parse_double(std::string_view text, long line) {
    double value = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    while (begin != end && (*begin == ' ' || *begin == '\t')) ++begin;
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{}) throw parse_error("bad number '" + std::string(text) + "'", line);
    for (const char* p = ptr; p != end; ++p)
        if (*p != ' ' && *p != '\t' && *p != '\r')
            throw parse_error("trailing junk in number '" + std::string(text) + "'", line);
    return value;
}

inline std::vector<std::string> split_csv_row(std::string_view row) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = row.find(',', start);
        if (comma == std::string_view::npos) {
            fields.emplace_back(row.substr(start));
            break;
        }
        fields.emplace_back(row.substr(start, comma - start));
        start = comma + 1;
    }
    for (std::string& f : fields) {
        while (!f.empty() && (f.back() == '\r' || f.back() == ' ')) f.pop_back();
        while (!f.empty() && f.front() == ' ') f.erase(f.begin());
    }
    return fields;
}

// FNV-1a 64-bit, used for fixture and input checksums.
inline std::uint64_t fnv1a64(std::string_view bytes) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string fnv1a64_hex(std::string_view bytes) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes)));
    return std::string(buf);
}

inline std::string file_checksum_hex(const std::filesystem::path& path) {
    return fnv1a64_hex(read_file(path));
}

// --- segment profile CSV: header near_m,far_m,rate -----------------------

inline std::vector<RawSegment> parse_profile_csv(std::istream& in) {
    std::string row;
    if (!std::getline(in, row)) throw parse_error("empty profile CSV", 1);
    const auto header = split_csv_row(row);
    if (header != std::vector<std::string>{"near_m", "far_m", "rate"})
        throw parse_error("expected header near_m,far_m,rate", 1);

    std::vector<RawSegment> segments;
    long line = 1;
    while (std::getline(in, row)) {
        ++line;
        if (row.empty() || row == "\r") continue;
        const auto fields = split_csv_row(row);
        if (fields.size() != 3)
            throw parse_error("expected 3 fields, got " + std::to_string(fields.size()), line);
        segments.push_back(RawSegment{parse_double(fields[0], line),
                                      parse_double(fields[1], line),
                                      parse_double(fields[2], line)});
    }
    if (segments.empty()) throw parse_error("profile CSV has no segment rows");
    return segments;
}

inline SegmentProfile load_profile_csv(const std::filesystem::path& path, AttackGoal goal) {
    std::ifstream in(path);
    if (!in) throw parse_error("cannot open " + path.string());
    return validate_profile(goal, parse_profile_csv(in));
}

inline void write_profile_csv(std::ostream& out, const SegmentProfile& profile) {
    out << "near_m,far_m,rate\n";
    json row;  // reuse the JSON dumper for shortest round-trip doubles
    for (const Segment& s : profile.segments()) {
        out << json(s.near_m).dump() << ',' << json(s.far_m).dump() << ','
            << json(s.rate.value()).dump() << '\n';
    }
}

// --- labeled fixture CSV: label,near_m,far_m,rate ------------------------

inline std::map<std::string, std::vector<RawSegment>> parse_labeled_csv(std::istream& in) {
    std::string row;
    if (!std::getline(in, row)) throw parse_error("empty fixture CSV", 1);
    const auto header = split_csv_row(row);
    if (header != std::vector<std::string>{"label", "near_m", "far_m", "rate"})
        throw parse_error("expected header label,near_m,far_m,rate", 1);

    std::map<std::string, std::vector<RawSegment>> out;
    long line = 1;
    while (std::getline(in, row)) {
        ++line;
        if (row.empty() || row == "\r") continue;
        const auto fields = split_csv_row(row);
        if (fields.size() != 4)
            throw parse_error("expected 4 fields, got " + std::to_string(fields.size()), line);
        out[fields[0]].push_back(RawSegment{parse_double(fields[1], line),
                                            parse_double(fields[2], line),
                                            parse_double(fields[3], line)});
    }
    return out;
}

// --- scenario / grid JSON ------------------------------------------------
//
// Flat object; a scenario uses d_m, speed_mps (or speed_mph), t_s and
// frame_rate_hz, a grid uses speeds_mph[] and times_s[].

struct ScenarioOrGrid {
    std::optional<DriveScenario> scenario;
    std::optional<SweepGrid> grid;
    double d_m = 0.0;  // detection distance, required in both forms
};

inline json parse_json_file(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    json parsed = json::parse(text, nullptr, false);
    if (parsed.is_discarded()) throw parse_error("invalid JSON in " + path.string());
    return parsed;
}

inline ScenarioOrGrid scenario_or_grid_from_json(const json& j) {
    if (!j.is_object()) throw parse_error("scenario/grid JSON must be an object");
    ScenarioOrGrid out;

    const double frame_rate = j.value("frame_rate_hz", 20.0);
    if (!j.contains("d_m")) throw parse_error("scenario/grid JSON needs d_m");
    out.d_m = j.at("d_m").get<double>();
    if (j.contains("speeds_mph") || j.contains("times_s")) {
        if (!j.contains("speeds_mph") || !j.contains("times_s"))
            throw parse_error("a grid needs both speeds_mph and times_s");
        std::vector<double> speeds;
        for (const auto& s : j.at("speeds_mph")) speeds.push_back(mph_to_mps(s.get<double>()));
        std::vector<double> times = j.at("times_s").get<std::vector<double>>();
        out.grid = SweepGrid::checked(std::move(speeds), std::move(times));
    }
    if (j.contains("t_s") && (j.contains("speed_mps") || j.contains("speed_mph"))) {
        const double v = j.contains("speed_mps") ? j.at("speed_mps").get<double>()
                                                 : mph_to_mps(j.at("speed_mph").get<double>());
        out.scenario = DriveScenario::checked(out.d_m, v, j.at("t_s").get<double>(), frame_rate);
    }
    if (!out.scenario && !out.grid)
        throw parse_error("JSON holds neither a scenario (d_m, speed_*, t_s) nor a grid "
                          "(speeds_mph, times_s)");
    return out;
}

inline ScenarioOrGrid load_scenario_or_grid(const std::filesystem::path& path) {
    return scenario_or_grid_from_json(parse_json_file(path));
}

// --- scenario script JSON ------------------------------------------------

inline MemorizationPolicy policy_from_json(const json& j) {
    if (j.is_string()) {
        const std::string name = j.get<std::string>();
        if (name == "spatial") return MemorizationPolicy::spatial();
        if (name == "temporal") return MemorizationPolicy::temporal();
        if (name == "real_time_only") return MemorizationPolicy::real_time_only();
        throw parse_error("unknown policy '" + name + "'");
    }
    if (j.is_object() && j.value("kind", "") == "temporal")
        return MemorizationPolicy::temporal(j.value("window_s", 3.0));
    throw parse_error("policy must be a name or {\"kind\":\"temporal\",\"window_s\":...}");
}

inline SignSemantics sign_type_from_string(const std::string& name) {
    if (name == "stop") return SignSemantics::stop;
    if (name == "speed_limit") return SignSemantics::speed_limit;
    throw parse_error("unknown sign type '" + name + "'");
}

inline AttackGoal goal_from_string(const std::string& name) {
    if (name == "hiding") return AttackGoal::hiding;
    if (name == "appearing") return AttackGoal::appearing;
    throw parse_error("unknown attack goal '" + name + "'");
}

/// A parsed scenario script file: either a visibility script or a raw trace.
struct ScriptFile {
    ScenarioScript script;              // sign/policy/vehicle always filled
    std::optional<DriveTrace> trace;    // set when the file carries trace rows
    std::optional<AttackGoal> goal;
};

inline ScriptFile script_from_json(const json& j) {
    if (!j.is_object()) throw parse_error("script JSON must be an object");
    ScriptFile out;
    try {
        const json& sign = j.at("sign");
        out.script.sign.semantics = sign_type_from_string(sign.at("type").get<std::string>());
        out.script.sign.position_m = sign.at("position_m").get<double>();
        out.script.policy = policy_from_json(j.at("policy"));
        if (j.contains("vehicle")) {
            const json& v = j.at("vehicle");
            out.script.vehicle.length_m = v.value("length_m", 4.5);
            out.script.vehicle.speed_mps = v.value("speed_mps", 10.0);
            out.script.vehicle.start_position_m = v.value("start_position_m", 0.0);
            if (v.contains("depart_t_s"))
                out.script.vehicle.depart_t_s = v.at("depart_t_s").get<double>();
        }
        out.script.frame_rate_hz = j.value("frame_rate_hz", 20.0);
        out.script.memorize_time_s = j.value("memorize_time_s", 1.0);
        if (j.contains("goal")) out.goal = goal_from_string(j.at("goal").get<std::string>());

        if (j.contains("script")) {
            for (const auto& change : j.at("script"))
                out.script.visibility.emplace_back(change.at("t_s").get<double>(),
                                                   change.at("visible").get<bool>());
        } else if (j.contains("trace")) {
            DriveTrace trace;
            for (const auto& row : j.at("trace"))
                trace.rows.push_back(TraceRow{row.at("t_s").get<double>(),
                                              row.at("position_m").get<double>(),
                                              row.at("detected").get<bool>()});
            out.trace = std::move(trace);
        } else {
            throw parse_error("script JSON needs either 'script' or 'trace'");
        }
    } catch (const json::exception& e) {
        throw parse_error(std::string("bad script JSON: ") + e.what());
    }
    return out;
}

inline ScriptFile load_script(const std::filesystem::path& path) {
    return script_from_json(parse_json_file(path));
}

}  // namespace sysmem::io
