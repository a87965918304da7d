#pragma once

#include <stdexcept>
#include <string>

namespace sysmem {

// Domain error kinds. The CLI maps these onto its exit-code contract:
// parse errors exit 2, validation errors exit 3, anything else 4.
enum class errc {
    gap_or_overlap,
    rate_out_of_range,
    non_positive_width,
    non_positive_speed,
    non_positive_scenario_field,
    wrong_goal,
    unequal_widths,
    segmentation_mismatch,
    degenerate_count,
    too_many_segments,
    length_mismatch,
    out_of_order_event,
    trace_does_not_reach_sign,
    bad_counts,
    degenerate_null,
    bad_step,
    bad_grid,
    missing_fixture,
    checksum_mismatch,
    script_error,
};

inline const char* errc_name(errc c) {
    switch (c) {
        case errc::gap_or_overlap: return "GapOrOverlap";
        case errc::rate_out_of_range: return "RateOutOfRange";
        case errc::non_positive_width: return "NonPositiveWidth";
        case errc::non_positive_speed: return "NonPositiveSpeed";
        case errc::non_positive_scenario_field: return "NonPositiveScenarioField";
        case errc::wrong_goal: return "WrongGoal";
        case errc::unequal_widths: return "UnequalWidths";
        case errc::segmentation_mismatch: return "SegmentationMismatch";
        case errc::degenerate_count: return "DegenerateCount";
        case errc::too_many_segments: return "TooManySegments";
        case errc::length_mismatch: return "LengthMismatch";
        case errc::out_of_order_event: return "OutOfOrderEvent";
        case errc::trace_does_not_reach_sign: return "TraceDoesNotReachSign";
        case errc::bad_counts: return "BadCounts";
        case errc::degenerate_null: return "DegenerateNull";
        case errc::bad_step: return "BadStep";
        case errc::bad_grid: return "BadGrid";
        case errc::missing_fixture: return "MissingFixture";
        case errc::checksum_mismatch: return "ChecksumMismatch";
        case errc::script_error: return "ScriptError";
    }
    return "Unknown";
}

/// Violation of a domain invariant (bad rates, gapped segments, ...).
class validation_error : public std::runtime_error {
public:
    validation_error(errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

/// Malformed input file or text (CSV row, JSON field, number syntax).
class parse_error : public std::runtime_error {
public:
    explicit parse_error(const std::string& what, long line = -1)
        : std::runtime_error(line >= 0 ? what + " (line " + std::to_string(line) + ")" : what),
          line_(line) {}

    /// 1-based line number when known, -1 otherwise.
    long line() const noexcept { return line_; }

private:
    long line_;
};

}  // namespace sysmem
