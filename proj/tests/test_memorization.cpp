#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "sysmem/memorization.hpp"
#include "sysmem/metrics.hpp"
#include "sysmem/oracle.hpp"

using namespace sysmem;

namespace {

MachineConfig stop_cfg(MemorizationPolicy policy, double sign_at = 30.0,
                       int frames_to_memorize = 1) {
    MachineConfig cfg;
    cfg.sign = SignInstance{SignSemantics::stop, sign_at};
    cfg.policy = policy;
    cfg.frames_to_memorize = frames_to_memorize;
    return cfg;
}

/// Straight 10 m/s drive from 0 to end_m at 20 Hz with a detection
/// predicate over vehicle position.
template <typename DetectedAt>
DriveTrace drive(double end_m, DetectedAt&& detected_at) {
    DriveTrace trace;
    for (int k = 0;; ++k) {
        const double t = k * 0.05;
        const double pos = 10.0 * t;
        if (pos > end_m) break;
        trace.rows.push_back(TraceRow{t, pos, detected_at(pos)});
    }
    return trace;
}

}  // namespace

TEST_CASE("step rejects out-of-order events", "[memorization]") {
    const auto cfg = stop_cfg(MemorizationPolicy::spatial());
    DisplayState s;
    s = step(s, DetectionFrame{1.0, true}, cfg);
    CHECK_THROWS_AS(step(s, DetectionFrame{0.5, true}, cfg), validation_error);
    s = step(s, VehicleMoved{2.0, 5.0}, cfg);
    CHECK_THROWS_AS(step(s, VehicleMoved{3.0, 4.0}, cfg), validation_error);
}

TEST_CASE("memorization requires the consecutive-frame trigger", "[memorization]") {
    const auto cfg = stop_cfg(MemorizationPolicy::spatial(), 30.0, 3);
    DisplayState s;
    s = step(s, DetectionFrame{0.00, true}, cfg);
    s = step(s, DetectionFrame{0.05, true}, cfg);
    CHECK_FALSE(s.memorized.has_value());
    s = step(s, DetectionFrame{0.10, false}, cfg);  // run broken
    s = step(s, DetectionFrame{0.15, true}, cfg);
    s = step(s, DetectionFrame{0.20, true}, cfg);
    CHECK_FALSE(s.memorized.has_value());
    s = step(s, DetectionFrame{0.25, true}, cfg);  // third in a row
    REQUIRE(s.memorized.has_value());
    CHECK(s.memorized->first_memorized_at_s == 0.25);
    CHECK(s.memorized->position_m == 30.0);
}

TEST_CASE("spatial policy keeps the record regardless of elapsed time", "[memorization]") {
    const auto cfg = stop_cfg(MemorizationPolicy::spatial());
    DisplayState s;
    s = step(s, DetectionFrame{0.0, true}, cfg);
    REQUIRE(s.memorized.has_value());
    CHECK(s.displaying);

    // One hour idle, nothing detected, vehicle still before the sign.
    s = step(s, DetectionFrame{3600.0, false}, cfg);
    CHECK(s.memorized.has_value());
    CHECK(s.displaying);

    s = step(s, VehicleMoved{3601.0, 29.9}, cfg);
    CHECK(s.displaying);

    // Passing the sign retires the record and ends the display.
    s = step(s, VehicleMoved{3602.0, 30.0}, cfg);
    CHECK_FALSE(s.memorized.has_value());
    CHECK(s.cleared);
    CHECK_FALSE(s.displaying);
}

TEST_CASE("temporal policy expires after its window", "[memorization]") {
    const auto cfg = stop_cfg(MemorizationPolicy::temporal(3.0));
    DisplayState s;
    s = step(s, DetectionFrame{0.0, true}, cfg);
    REQUIRE(s.memorized.has_value());

    s = step(s, DetectionFrame{2.9, false}, cfg);
    CHECK(s.memorized.has_value());  // still inside the window
    CHECK(s.displaying);

    s = step(s, DetectionFrame{3.1, false}, cfg);
    CHECK_FALSE(s.memorized.has_value());  // 3.1 > 3.0 after last detection
    CHECK_FALSE(s.displaying);

    // A fresh detection run can re-memorize after expiry.
    s = step(s, DetectionFrame{20.0, true}, cfg);
    CHECK(s.memorized.has_value());
}

TEST_CASE("real-time-only display mirrors the current frame", "[memorization]") {
    const auto cfg = stop_cfg(MemorizationPolicy::real_time_only());
    DisplayState s;
    s = step(s, DetectionFrame{0.0, true}, cfg);
    CHECK_FALSE(s.memorized.has_value());
    CHECK(s.displaying);
    s = step(s, DetectionFrame{0.05, false}, cfg);
    CHECK_FALSE(s.displaying);
}

TEST_CASE("speed limit display latches at halfway past", "[memorization]") {
    MachineConfig cfg;
    cfg.sign = SignInstance{SignSemantics::speed_limit, 30.0};
    cfg.policy = MemorizationPolicy::spatial();
    cfg.vehicle_length_m = 4.5;

    DisplayState s;
    s = step(s, DetectionFrame{0.0, true}, cfg);
    REQUIRE(s.memorized.has_value());
    CHECK_FALSE(s.displaying);  // not before the halfway point

    s = step(s, VehicleMoved{1.0, 30.0}, cfg);
    CHECK_FALSE(s.displaying);  // at the sign is not yet halfway past

    s = step(s, VehicleMoved{2.0, 32.25}, cfg);  // sign + length/2
    CHECK(s.displaying);
    CHECK(s.limit_latched);
    CHECK(s.cleared);

    s = step(s, VehicleMoved{3.0, 50.0}, cfg);
    CHECK(s.displaying);  // latched
}

TEST_CASE("run_trace reproduces the reaction-task reading", "[memorization]") {
    SECTION("stop: single detection burst mid-approach means display before pass") {
        const auto cfg = stop_cfg(MemorizationPolicy::spatial(), 30.0, 1);
        const auto trace = drive(36.0, [](double pos) { return pos >= 14.0 && pos < 14.5; });
        const auto result = run_trace(trace, cfg);
        CHECK(result.reaction_satisfied);
        CHECK(result.memorization_indicated);  // display survives to the pass
        REQUIRE(result.memorized_at_s.has_value());
        CHECK(result.cleared_at_s.has_value());
        REQUIRE_FALSE(result.display_intervals.empty());
    }

    SECTION("stop: no detection at all never displays") {
        const auto cfg = stop_cfg(MemorizationPolicy::spatial());
        const auto trace = drive(36.0, [](double) { return false; });
        const auto result = run_trace(trace, cfg);
        CHECK_FALSE(result.reaction_satisfied);
        CHECK_FALSE(result.memorization_indicated);
        CHECK(result.display_intervals.empty());
    }

    SECTION("speed limit: detection in the far half still latches at halfway-past") {
        MachineConfig cfg;
        cfg.sign = SignInstance{SignSemantics::speed_limit, 30.0};
        cfg.policy = MemorizationPolicy::spatial();
        const auto trace = drive(36.0, [](double pos) { return pos < 15.0; });
        const auto result = run_trace(trace, cfg);
        CHECK(result.reaction_satisfied);
        CHECK(result.memorization_indicated);
    }

    SECTION("speed limit: real-time-only policy cannot reach the halfway point") {
        MachineConfig cfg;
        cfg.sign = SignInstance{SignSemantics::speed_limit, 30.0};
        cfg.policy = MemorizationPolicy::real_time_only();
        const auto trace = drive(36.0, [](double pos) { return pos < 15.0; });
        const auto result = run_trace(trace, cfg);
        CHECK_FALSE(result.reaction_satisfied);
    }
}

TEST_CASE("reaction_task_outcome flips with the attack goal", "[memorization]") {
    const SignInstance stop{SignSemantics::stop, 30.0};
    const auto spatial = MemorizationPolicy::spatial();
    const auto detected_once = drive(36.0, [](double pos) { return pos >= 10.0 && pos < 10.5; });
    const auto never_detected = drive(36.0, [](double) { return false; });

    CHECK(reaction_task_outcome(detected_once, stop, spatial, AttackGoal::hiding) ==
          AttackOutcome::system_level_failure);
    CHECK(reaction_task_outcome(never_detected, stop, spatial, AttackGoal::hiding) ==
          AttackOutcome::system_level_success);
    CHECK(reaction_task_outcome(detected_once, stop, spatial, AttackGoal::appearing) ==
          AttackOutcome::system_level_success);
    CHECK(reaction_task_outcome(never_detected, stop, spatial, AttackGoal::appearing) ==
          AttackOutcome::system_level_failure);

    SECTION("trace must span the reaction point") {
        const auto short_trace = drive(20.0, [](double) { return true; });
        CHECK_THROWS_AS(reaction_task_outcome(short_trace, stop, spatial, AttackGoal::hiding),
                        validation_error);

        const SignInstance limit{SignSemantics::speed_limit, 30.0};
        const auto to_sign_only = drive(31.0, [](double) { return true; });
        // Reaches the sign but not sign + length/2.
        CHECK_THROWS_AS(reaction_task_outcome(to_sign_only, limit, spatial, AttackGoal::hiding),
                        validation_error);
    }
}

TEST_CASE("display-true intervals nest by policy strength", "[memorization]") {
    // RealTimeOnly subset of Temporal(w) subset of Spatial, per frame, for stop.
    const auto rto_cfg = stop_cfg(MemorizationPolicy::real_time_only(), 30.0, 2);
    const auto tmp_cfg = stop_cfg(MemorizationPolicy::temporal(3.0), 30.0, 2);
    const auto spa_cfg = stop_cfg(MemorizationPolicy::spatial(), 30.0, 2);

    for (std::uint64_t trial = 0; trial < 200; ++trial) {
        DisplayState rto, tmp, spa;
        double pos = 0.0;
        double t = 0.0;
        for (int k = 0; k < 200 && pos < 36.0; ++k) {
            const bool detected = oracle::rng::unit(31337, trial, k) < 0.25;
            // occasional long idle gaps exercise the temporal window
            t += oracle::rng::unit(31337, trial, 1000 + k) < 0.05 ? 7.0 : 0.05;
            pos = std::min(36.0, pos + oracle::rng::unit(31337, trial, 2000 + k));

            rto = step(rto, VehicleMoved{t, pos}, rto_cfg);
            rto = step(rto, DetectionFrame{t, detected}, rto_cfg);
            tmp = step(tmp, VehicleMoved{t, pos}, tmp_cfg);
            tmp = step(tmp, DetectionFrame{t, detected}, tmp_cfg);
            spa = step(spa, VehicleMoved{t, pos}, spa_cfg);
            spa = step(spa, DetectionFrame{t, detected}, spa_cfg);

            if (rto.displaying) REQUIRE(tmp.displaying);
            if (tmp.displaying) REQUIRE(spa.displaying);
        }
    }
}

TEST_CASE("segment-aligned traces reproduce the exact oracle per trial", "[memorization]") {
    // d = 30 m, v = 10 m/s, t = 0.5 s: m = 6 spatial slices, 10 frames each.
    const auto sc = DriveScenario::checked(30.0, 10.0, 0.5, 20.0);
    const std::vector<double> rates{0.3, 0.8, 0.5, 0.9, 0.2, 0.6};
    std::vector<RawSegment> raw;
    for (std::size_t j = 0; j < rates.size(); ++j)
        raw.push_back({5.0 * j, 5.0 * (j + 1), rates[j]});

    const std::uint64_t seed = 2024;
    const std::uint64_t trials = 1000;

    for (AttackGoal goal : {AttackGoal::hiding, AttackGoal::appearing}) {
        const auto profile = validate_profile(goal, raw);
        const auto spatial = map_to_spatial_segments(profile, sc);
        REQUIRE(spatial.count == 6);

        const SignInstance sign{goal == AttackGoal::hiding ? SignSemantics::stop
                                                           : SignSemantics::speed_limit,
                                30.0};
        MachineConfig cfg;
        cfg.sign = sign;
        cfg.policy = MemorizationPolicy::spatial();
        cfg.frames_to_memorize = 10;  // ceil(t * r)

        std::uint64_t machine_successes = 0;
        for (std::uint64_t trial = 0; trial < trials; ++trial) {
            // The same (seed, trial, segment) draws monte_carlo_drive uses.
            bool segment_success[6];
            for (std::size_t j = 0; j < 6; ++j)
                segment_success[j] = oracle::rng::bernoulli(spatial.rates[j], seed, trial, j);

            const auto trace = drive(36.0, [&](double pos) {
                if (pos >= 30.0) return false;  // sign passed, out of view
                const auto j = std::min<std::size_t>(
                    5, static_cast<std::size_t>((30.0 - pos) / 5.0));
                // hiding: a failed attack segment is detected; appearing: a
                // successful one conjures the phantom sign.
                return goal == AttackGoal::hiding ? !segment_success[j] : segment_success[j];
            });

            const bool machine_success =
                reaction_task_outcome(trace, sign, cfg.policy, goal, cfg) ==
                AttackOutcome::system_level_success;

            bool all = true, any = false;
            for (bool b : segment_success) {
                all = all && b;
                any = any || b;
            }
            const bool oracle_success = goal == AttackGoal::hiding ? all : any;
            REQUIRE(machine_success == oracle_success);
            if (machine_success) ++machine_successes;
        }

        // Aggregate equality with the segment-level Monte Carlo oracle.
        const auto mc = oracle::monte_carlo_drive(profile, sc, goal, trials, seed);
        CHECK(mc.rate ==
              static_cast<double>(machine_successes) / static_cast<double>(trials));
    }
}

TEST_CASE("scripted display experiments reproduce the observed cells", "[memorization]") {
    const auto spatial = MemorizationPolicy::spatial();
    const auto rto = MemorizationPolicy::real_time_only();

    for (double display : {1.0, 3.0}) {
        for (double disappear : {20.0, 40.0, 60.0}) {
            CAPTURE(display, disappear);
            // real-time-only vehicles never indicate memorization
            CHECK_FALSE(run_display_experiment(display, disappear, rto, SignSemantics::stop));
            // spatial vehicles always do, for either semantics
            CHECK(run_display_experiment(display, disappear, spatial, SignSemantics::stop));
            CHECK(run_display_experiment(display, disappear, spatial,
                                         SignSemantics::speed_limit));
        }
    }

    SECTION("temporal window behavior distinguishes short and long gaps") {
        const auto temporal = MemorizationPolicy::temporal(3.0);
        CHECK(run_display_experiment(1.0, 2.0, temporal, SignSemantics::stop));
        CHECK_FALSE(run_display_experiment(1.0, 20.0, temporal, SignSemantics::stop));
    }

    SECTION("argument validation") {
        CHECK_THROWS_AS(run_display_experiment(0.0, 20.0, spatial, SignSemantics::stop),
                        validation_error);
        CHECK_THROWS_AS(run_display_experiment(1.0, -1.0, spatial, SignSemantics::stop),
                        validation_error);
    }
}

TEST_CASE("script to trace validates its timeline", "[memorization]") {
    ScenarioScript script;
    script.sign = SignInstance{SignSemantics::stop, 5.0};
    script.policy = MemorizationPolicy::spatial();
    script.visibility = {{0.0, true}, {1.0, false}};

    SECTION("well-formed script round-trips through run_script") {
        script.vehicle.depart_t_s = 61.0;
        const auto result = run_script(script);
        CHECK(result.memorization_indicated);
    }
    SECTION("no visibility entries") {
        script.visibility.clear();
        CHECK_THROWS_AS(script_to_trace(script), validation_error);
    }
    SECTION("timeline out of order") {
        script.visibility = {{1.0, true}, {0.5, false}};
        CHECK_THROWS_AS(script_to_trace(script), validation_error);
    }
    SECTION("vehicle starts beyond the sign") {
        script.vehicle.start_position_m = 20.0;
        CHECK_THROWS_AS(script_to_trace(script), validation_error);
    }
}

TEST_CASE("spatial records survive fuzzed idle gaps", "[memorization]") {
    // Scaled-down version of the persistence fuzz: random gaps up to 1e4 s
    // between events never drop a spatial record before the pass event.
    const auto cfg = stop_cfg(MemorizationPolicy::spatial());
    for (std::uint64_t trial = 0; trial < 500; ++trial) {
        DisplayState s;
        s = step(s, DetectionFrame{0.0, true}, cfg);
        REQUIRE(s.memorized.has_value());

        double t = 0.0;
        double pos = 0.0;
        const int hops = 1 + static_cast<int>(oracle::rng::unit(99, trial, 0) * 8.0);
        for (int h = 1; h <= hops; ++h) {
            t += oracle::rng::unit(99, trial, h) * 1e4;
            pos += oracle::rng::unit(99, trial, 100 + h) * (29.9 - pos);
            s = step(s, VehicleMoved{t, pos}, cfg);
            s = step(s, DetectionFrame{t, false}, cfg);
            REQUIRE(s.memorized.has_value());
            REQUIRE(s.displaying);
        }
        s = step(s, VehicleMoved{t + 1.0, 30.0}, cfg);
        REQUIRE_FALSE(s.memorized.has_value());
        REQUIRE(s.cleared);
        REQUIRE_FALSE(s.displaying);
    }
}
