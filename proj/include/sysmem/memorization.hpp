#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "sysmem/core.hpp"
#include "sysmem/errors.hpp"

namespace sysmem {

/// The single sign of a scenario: what it means and where it stands.
struct SignInstance {
    SignSemantics semantics = SignSemantics::stop;
    double position_m = 0.0;  // along-track sign location
};

struct DetectionFrame {
    double t_s = 0.0;
    bool detected = false;
};

struct VehicleMoved {
    double t_s = 0.0;
    double position_m = 0.0;  // front bumper, along track
};

using DisplayEvent = std::variant<DetectionFrame, VehicleMoved>;

struct MemorizedRecord {
    SignSemantics semantics = SignSemantics::stop;
    double position_m = 0.0;
    double first_memorized_at_s = 0.0;
};

struct MachineConfig {
    SignInstance sign;
    MemorizationPolicy policy = MemorizationPolicy::spatial();
    double vehicle_length_m = 4.5;  // mid-size sedan default
    int frames_to_memorize = 1;    // consecutive detected frames, ceil(t*r)
};

/// Observable display state plus the bookkeeping the transitions need.
///
/// displaying obeys the sign semantics: a STOP display runs from evidence
/// (detection or live memorized record) until the sign is passed; a speed
/// limit display turns on when the vehicle body is halfway past the sign
/// and latches. cleared marks a record retired by its reaction task.
struct DisplayState {
    std::optional<MemorizedRecord> memorized;
    bool displaying = false;
    bool cleared = false;

    double vehicle_position_m = 0.0;
    double last_event_t_s = -std::numeric_limits<double>::infinity();
    double last_detection_t_s = -std::numeric_limits<double>::infinity();
    int consecutive_detections = 0;
    bool current_detection = false;
    bool limit_latched = false;
};

namespace detail {

inline bool record_alive(const DisplayState& s, const MemorizationPolicy& policy, double now) {
    if (!s.memorized) return false;
    if (policy.kind == MemorizationPolicy::Kind::temporal)
        return now - s.last_detection_t_s <= policy.window_s;
    return policy.kind == MemorizationPolicy::Kind::spatial;
}

}  // namespace detail

/// Deterministic transition. Events must arrive in time order with a
/// non-decreasing vehicle position.
inline DisplayState step(DisplayState s, const DisplayEvent& event, const MachineConfig& cfg) {
    const double t = std::holds_alternative<DetectionFrame>(event)
                         ? std::get<DetectionFrame>(event).t_s
                         : std::get<VehicleMoved>(event).t_s;
    if (t < s.last_event_t_s)
        throw validation_error(errc::out_of_order_event,
                               "event at t=" + std::to_string(t) + " after t=" +
                                   std::to_string(s.last_event_t_s));
    s.last_event_t_s = t;

    if (const auto* moved = std::get_if<VehicleMoved>(&event)) {
        if (moved->position_m < s.vehicle_position_m - 1e-9)
            throw validation_error(errc::out_of_order_event, "vehicle position decreased");
        s.vehicle_position_m = moved->position_m;
    } else {
        const auto& frame = std::get<DetectionFrame>(event);
        s.current_detection = frame.detected;
        if (frame.detected) {
            ++s.consecutive_detections;
            s.last_detection_t_s = t;
            const bool can_memorize = cfg.policy.kind != MemorizationPolicy::Kind::real_time_only;
            if (can_memorize && !s.memorized && !s.cleared &&
                s.consecutive_detections >= cfg.frames_to_memorize) {
                s.memorized = MemorizedRecord{cfg.sign.semantics, cfg.sign.position_m, t};
            }
        } else {
            s.consecutive_detections = 0;
        }
    }

    // Temporal records expire after the window; spatial ones only clear below.
    if (cfg.policy.kind == MemorizationPolicy::Kind::temporal && s.memorized &&
        t - s.last_detection_t_s > cfg.policy.window_s) {
        s.memorized.reset();
    }

    const double sign_pos = cfg.sign.position_m;
    const bool passed = s.vehicle_position_m >= sign_pos;
    const bool halfway_past = s.vehicle_position_m >= sign_pos + cfg.vehicle_length_m / 2.0;
    const bool evidence = s.current_detection || detail::record_alive(s, cfg.policy, t);

    if (cfg.sign.semantics == SignSemantics::stop) {
        if (passed && s.memorized) {  // reaction need met, record retired
            s.cleared = true;
            s.memorized.reset();
        }
        s.displaying = evidence && !passed;
    } else {
        if (halfway_past && !s.limit_latched && evidence) {
            s.limit_latched = true;
            if (s.memorized) {
                s.cleared = true;
                s.memorized.reset();
            }
        }
        s.displaying = s.limit_latched;
    }
    return s;
}

// --- trace replay --------------------------------------------------------

struct TraceRow {
    double t_s = 0.0;
    double position_m = 0.0;
    bool detected = false;
};

struct DriveTrace {
    std::vector<TraceRow> rows;
};

enum class AttackOutcome { system_level_success, system_level_failure };

struct TraceResult {
    bool reaction_satisfied = false;   // did the display meet the sign's reaction need
    bool memorization_indicated = false;
    std::optional<double> memorized_at_s;
    std::optional<double> cleared_at_s;
    std::vector<std::pair<double, double>> display_intervals;
    DisplayState final_state;
};

/// Replay a trace through the state machine and report what was displayed.
inline TraceResult run_trace(const DriveTrace& trace, const MachineConfig& cfg) {
    TraceResult result;
    DisplayState s;
    bool was_displaying = false;
    double display_start = 0.0;
    bool displayed_before_pass = false;
    bool last_pre_pass_displaying = false;

    for (const TraceRow& row : trace.rows) {
        s = step(s, VehicleMoved{row.t_s, row.position_m}, cfg);
        s = step(s, DetectionFrame{row.t_s, row.detected}, cfg);

        if (s.memorized && !result.memorized_at_s)
            result.memorized_at_s = s.memorized->first_memorized_at_s;
        if (s.cleared && !result.cleared_at_s) result.cleared_at_s = row.t_s;

        if (s.vehicle_position_m < cfg.sign.position_m) {
            last_pre_pass_displaying = s.displaying;
            if (s.displaying) displayed_before_pass = true;
        }
        if (s.displaying && !was_displaying) display_start = row.t_s;
        if (!s.displaying && was_displaying)
            result.display_intervals.emplace_back(display_start, row.t_s);
        was_displaying = s.displaying;
    }
    if (was_displaying && !trace.rows.empty())
        result.display_intervals.emplace_back(display_start, trace.rows.back().t_s);

    if (cfg.sign.semantics == SignSemantics::stop) {
        // STOP must be shown at some point before the vehicle passes the sign.
        result.reaction_satisfied = displayed_before_pass;
        // Memorization shows as a display that survives up to the pass.
        result.memorization_indicated = last_pre_pass_displaying;
    } else {
        // A speed limit must be shown once the vehicle body is halfway past.
        result.reaction_satisfied = s.limit_latched;
        result.memorization_indicated = s.limit_latched;
    }
    result.final_state = s;
    return result;
}

/// Judge one drive at system level. Hiding succeeds iff the display never
/// meets the reaction need; appearing succeeds iff it does.
inline AttackOutcome reaction_task_outcome(const DriveTrace& trace, const SignInstance& sign,
                                           const MemorizationPolicy& policy, AttackGoal goal,
                                           const MachineConfig& base_cfg = MachineConfig{}) {
    MachineConfig cfg = base_cfg;
    cfg.sign = sign;
    cfg.policy = policy;

    double reach = sign.position_m;
    if (sign.semantics == SignSemantics::speed_limit) reach += cfg.vehicle_length_m / 2.0;
    double max_pos = -std::numeric_limits<double>::infinity();
    for (const TraceRow& row : trace.rows) max_pos = std::max(max_pos, row.position_m);
    if (!(max_pos >= reach))
        throw validation_error(errc::trace_does_not_reach_sign,
                               "trace ends at " + std::to_string(max_pos) +
                                   " m, before the reaction point at " + std::to_string(reach) +
                                   " m");

    const TraceResult result = run_trace(trace, cfg);
    const bool satisfied = result.reaction_satisfied;
    const bool success = goal == AttackGoal::hiding ? !satisfied : satisfied;
    return success ? AttackOutcome::system_level_success : AttackOutcome::system_level_failure;
}

// --- scripted scenarios --------------------------------------------------

struct VehicleParams {
    double length_m = 4.5;
    double speed_mps = 10.0;
    double start_position_m = 0.0;
    std::optional<double> depart_t_s;  // stationary until then; default: after the script
};

/// One scripted single-sign scenario: a sign visibility timeline plus a
/// stationary-then-drive vehicle. Visibility changes take effect at t_s.
struct ScenarioScript {
    SignInstance sign;
    MemorizationPolicy policy = MemorizationPolicy::spatial();
    VehicleParams vehicle;
    std::vector<std::pair<double, bool>> visibility;  // (t_s, visible)
    double frame_rate_hz = 20.0;
    double memorize_time_s = 1.0;  // upper bound observed in the field
};

inline DriveTrace script_to_trace(const ScenarioScript& script) {
    if (script.visibility.empty())
        throw validation_error(errc::script_error, "script has no visibility entries");
    for (std::size_t i = 1; i < script.visibility.size(); ++i)
        if (script.visibility[i].first < script.visibility[i - 1].first)
            throw validation_error(errc::script_error, "visibility timeline not in time order");

    const double dt = 1.0 / script.frame_rate_hz;
    const double depart =
        script.vehicle.depart_t_s.value_or(script.visibility.back().first);
    const double travel =
        script.sign.position_m + script.vehicle.length_m + 1.0 - script.vehicle.start_position_m;
    if (travel <= 0.0)
        throw validation_error(errc::script_error, "vehicle starts beyond the sign");
    const double end_t = depart + travel / script.vehicle.speed_mps;

    DriveTrace trace;
    const auto frames = static_cast<std::size_t>(std::ceil(end_t / dt)) + 1;
    trace.rows.reserve(frames);
    for (std::size_t k = 0; k < frames; ++k) {
        const double t = static_cast<double>(k) * dt;
        double pos = script.vehicle.start_position_m;
        if (t > depart) pos += (t - depart) * script.vehicle.speed_mps;

        bool visible = false;
        for (const auto& [vt, v] : script.visibility) {
            if (vt <= t) visible = v;
            else break;
        }
        // A forward camera cannot see a sign already passed.
        const bool detected = visible && pos < script.sign.position_m;
        trace.rows.push_back(TraceRow{t, pos, detected});
    }
    return trace;
}

inline TraceResult run_script(const ScenarioScript& script) {
    MachineConfig cfg;
    cfg.sign = script.sign;
    cfg.policy = script.policy;
    cfg.vehicle_length_m = script.vehicle.length_m;
    cfg.frames_to_memorize =
        static_cast<int>(std::ceil(script.memorize_time_s * script.frame_rate_hz));
    return run_trace(script_to_trace(script), cfg);
}

struct DisplayExperimentOptions {
    double frame_rate_hz = 20.0;
    double memorize_time_s = 1.0;
    double sign_ahead_m = 5.0;
    double drive_speed_mps = 10.0;
    double vehicle_length_m = 4.5;
};

/// The stationary-then-drive protocol: show the sign for display_time_s,
/// hide it for disappear_time_s, then drive past the original sign position
/// and read whether the display behavior indicates memorization.
inline bool run_display_experiment(double display_time_s, double disappear_time_s,
                                   const MemorizationPolicy& policy, SignSemantics semantics,
                                   const DisplayExperimentOptions& opts = {}) {
    if (!(display_time_s > 0.0))
        throw validation_error(errc::script_error, "display time must be positive");
    if (disappear_time_s < 0.0)
        throw validation_error(errc::script_error, "disappear time must be non-negative");

    ScenarioScript script;
    script.sign = SignInstance{semantics, opts.sign_ahead_m};
    script.policy = policy;
    script.vehicle = VehicleParams{opts.vehicle_length_m, opts.drive_speed_mps, 0.0,
                                   display_time_s + disappear_time_s};
    script.visibility = {{0.0, true}, {display_time_s, false}};
    script.frame_rate_hz = opts.frame_rate_hz;
    script.memorize_time_s = opts.memorize_time_s;
    return run_script(script).memorization_indicated;
}

}  // namespace sysmem
