#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "sysmem/core.hpp"
#include "sysmem/errors.hpp"
#include "sysmem/memorization.hpp"
#include "sysmem/metrics.hpp"

namespace sysmem::oracle {

enum class OracleMethod { exact, enumeration, monte_carlo, frame_level };

inline const char* to_string(OracleMethod m) {
    switch (m) {
        case OracleMethod::exact: return "exact";
        case OracleMethod::enumeration: return "enumeration";
        case OracleMethod::monte_carlo: return "monte_carlo";
        case OracleMethod::frame_level: return "frame_level";
    }
    return "?";
}

struct OracleResult {
    double rate = 0.0;
    OracleMethod method = OracleMethod::exact;
    std::optional<std::uint64_t> trials;
    std::optional<double> ci_halfwidth;  // 95% normal approximation
};

// --- counter-based deterministic generator -------------------------------
//
// Every Bernoulli draw is keyed by (seed, trial, draw index), so results do
// not depend on evaluation order and trials can run in parallel.

namespace rng {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Uniform double in [0,1) for counter (seed, trial, draw).
inline double unit(std::uint64_t seed, std::uint64_t trial, std::uint64_t draw) noexcept {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ splitmix64(trial + 0x517cc1b727220a95ULL));
    h = splitmix64(h ^ draw);
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

inline bool bernoulli(double p, std::uint64_t seed, std::uint64_t trial,
                      std::uint64_t draw) noexcept {
    return unit(seed, trial, draw) < p;
}

}  // namespace rng

inline double normal_ci_halfwidth(double p_hat, std::uint64_t trials) noexcept {
    return 1.959963984540054 * std::sqrt(p_hat * (1.0 - p_hat) / static_cast<double>(trials));
}

// --- oracles -------------------------------------------------------------

/// Each spatial segment as one Bernoulli trial (exponent 1):
/// hiding needs success in all of them, appearing in any.
inline OracleResult exact_segment_oracle(const SpatialSegmentation& spatial, AttackGoal goal) {
    double prod = 1.0;
    if (goal == AttackGoal::hiding) {
        for (double f : spatial.rates) prod *= f;
        return {prod, OracleMethod::exact, std::nullopt, std::nullopt};
    }
    for (double f : spatial.rates) prod *= 1.0 - f;
    return {1.0 - prod, OracleMethod::exact, std::nullopt, std::nullopt};
}

/// Brute-force appearing probability: sum over every non-empty subset A of
/// spatial segments of prod_{j in A} f_j * prod_{j not in A} (1 - f_j).
inline OracleResult subset_enumeration(const SpatialSegmentation& spatial) {
    const std::size_t m = spatial.count;
    if (m > 20)
        throw validation_error(errc::too_many_segments,
                               "power-set enumeration capped at 20 segments, got " +
                                   std::to_string(m));
    double sum = 0.0;
    const std::uint64_t subsets = 1ULL << m;
    for (std::uint64_t mask = 1; mask < subsets; ++mask) {  // skip the empty set
        double term = 1.0;
        for (std::size_t j = 0; j < m; ++j) {
            const double f = spatial.rates[j];
            term *= (mask >> j) & 1ULL ? f : 1.0 - f;
        }
        sum += term;
    }
    return {sum, OracleMethod::enumeration, std::nullopt, std::nullopt};
}

/// Sampled drive: per trial one Bernoulli(f_j) per spatial segment; success
/// means all succeed (hiding) or any succeeds (appearing).
inline OracleResult monte_carlo_drive(const SegmentProfile& profile, const DriveScenario& scenario,
                                      AttackGoal goal, std::uint64_t trials, std::uint64_t seed) {
    if (trials < 1) throw validation_error(errc::bad_counts, "trials must be >= 1");
    const SpatialSegmentation spatial = map_to_spatial_segments(profile, scenario);

    std::uint64_t successes = 0;
    for (std::uint64_t trial = 0; trial < trials; ++trial) {
        bool all = true;
        bool any = false;
        for (std::size_t j = 0; j < spatial.count; ++j) {
            const bool hit = rng::bernoulli(spatial.rates[j], seed, trial, j);
            all = all && hit;
            any = any || hit;
        }
        if (goal == AttackGoal::hiding ? all : any) ++successes;
    }
    const double p_hat = static_cast<double>(successes) / static_cast<double>(trials);
    return {p_hat, OracleMethod::monte_carlo, trials, normal_ci_halfwidth(p_hat, trials)};
}

/// Exploratory frame-by-frame simulation. Per frame the sign is detected
/// with probability 1-rate_k (hiding input; rate = attack success) or rate_k
/// (appearing); memorization needs ceil(t*r) consecutive detected frames and
/// the display state machine judges the reaction-task outcome.
inline OracleResult frame_level_drive(const std::vector<Rate>& per_frame_rates,
                                      const DriveScenario& scenario, AttackGoal goal,
                                      const MemorizationPolicy& policy, SignSemantics semantics,
                                      std::uint64_t trials, std::uint64_t seed) {
    if (trials < 1) throw validation_error(errc::bad_counts, "trials must be >= 1");
    const double frame_dt = 1.0 / scenario.frame_rate_hz;
    const auto expected_frames = static_cast<std::size_t>(
        std::ceil(scenario.detection_distance_m / scenario.speed_mps * scenario.frame_rate_hz));
    if (per_frame_rates.size() != expected_frames)
        throw validation_error(errc::length_mismatch,
                               "expected " + std::to_string(expected_frames) + " frames, got " +
                                   std::to_string(per_frame_rates.size()));

    const double d = scenario.detection_distance_m;
    MachineConfig cfg;
    cfg.sign = SignInstance{semantics, d};
    cfg.policy = policy;
    cfg.frames_to_memorize =
        static_cast<int>(std::ceil(scenario.memorize_time_s * scenario.frame_rate_hz));

    // Run past the sign far enough for the halfway-past reaction point.
    const auto total_frames = expected_frames + static_cast<std::size_t>(std::ceil(
                                                    (cfg.vehicle_length_m + 1.0) /
                                                    (scenario.speed_mps * frame_dt)));

    std::uint64_t successes = 0;
    for (std::uint64_t trial = 0; trial < trials; ++trial) {
        DriveTrace trace;
        trace.rows.reserve(total_frames);
        for (std::size_t k = 0; k < total_frames; ++k) {
            const double t = static_cast<double>(k) * frame_dt;
            bool detected = false;
            if (k < expected_frames) {
                const double rate = per_frame_rates[k].value();
                const double p_detect = goal == AttackGoal::hiding ? 1.0 - rate : rate;
                detected = rng::bernoulli(p_detect, seed, trial, k);
            }
            trace.rows.push_back(TraceRow{t, scenario.speed_mps * t, detected});
        }
        const AttackOutcome outcome = reaction_task_outcome(trace, cfg.sign, policy, goal, cfg);
        if (outcome == AttackOutcome::system_level_success) ++successes;
    }
    const double p_hat = static_cast<double>(successes) / static_cast<double>(trials);
    return {p_hat, OracleMethod::frame_level, trials, normal_ci_halfwidth(p_hat, trials)};
}

}  // namespace sysmem::oracle
