#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "sysmem/core.hpp"
#include "sysmem/errors.hpp"

namespace sysmem {

/// The measurement profile resampled onto the spatial memorization grid:
/// count equal-width slices of length ~v*t, one aggregated rate each.
struct SpatialSegmentation {
    std::size_t count = 0;
    double width_m = 0.0;
    std::vector<double> rates;
    /// |d/(v t) - count| left over by rounding to a whole segment count.
    double rounding_residual = 0.0;
};

/// Width-weighted mean of the segment rates. Equals the plain mean for
/// equal-width profiles, i.e. the "Ave." column of a measurement table.
inline Rate model_level_rate(const SegmentProfile& profile) {
    double weighted = 0.0;
    for (const Segment& s : profile.segments()) weighted += s.width() * s.rate.value();
    return Rate(weighted / profile.detection_distance());
}

/// Resample the profile onto round(d/(v t)) equal spatial segments. Where a
/// spatial segment spans several measurement segments, its rate is the
/// overlap-length-weighted average of theirs.
inline SpatialSegmentation map_to_spatial_segments(const SegmentProfile& profile,
                                                   const DriveScenario& scenario) {
    const double d = scenario.detection_distance_m;
    if (std::abs(profile.detection_distance() - d) > 1e-9 * std::max(1.0, d))
        throw validation_error(errc::segmentation_mismatch,
                               "profile covers " + std::to_string(profile.detection_distance()) +
                                   " m but scenario expects " + std::to_string(d) + " m");

    const double m_real = scenario.segment_count();
    const auto m_int = static_cast<long long>(std::llround(m_real));
    if (m_int < 1)
        throw validation_error(errc::degenerate_count,
                               "d/(v t) = " + std::to_string(m_real) +
                                   " rounds to zero spatial segments; scenario too coarse");

    SpatialSegmentation out;
    out.count = static_cast<std::size_t>(m_int);
    out.width_m = d / static_cast<double>(m_int);
    out.rounding_residual = std::abs(m_real - static_cast<double>(m_int));
    out.rates.reserve(out.count);

    for (std::size_t j = 0; j < out.count; ++j) {
        const double lo = static_cast<double>(j) * out.width_m;
        const double hi = (j + 1 == out.count) ? d : lo + out.width_m;
        double acc = 0.0;
        double covered = 0.0;
        for (const Segment& s : profile.segments()) {
            const double overlap = std::min(hi, s.far_m) - std::max(lo, s.near_m);
            if (overlap > 0.0) {
                acc += overlap * s.rate.value();
                covered += overlap;
            }
        }
        out.rates.push_back(acc / covered);
    }
    return out;
}

namespace detail {

inline void require_equal_widths(const SegmentProfile& profile) {
    if (!profile.equal_widths())
        throw validation_error(errc::unequal_widths,
                               "closed forms assume an equal n-way division of d");
}

inline void require_goal(const SegmentProfile& profile, AttackGoal expected) {
    if (profile.goal() != expected)
        throw validation_error(errc::wrong_goal, std::string("profile goal is ") +
                                                     to_string(profile.goal()) + ", expected " +
                                                     to_string(expected));
}

// prod_i x_i^e evaluated in log-space; exponents reach ~9 at t=0.05 s and
// naive products underflow. Zero factors short-circuit.
inline double product_pow(const std::vector<double>& xs, double e) {
    double log_sum = 0.0;
    for (double x : xs) {
        if (x == 0.0) return 0.0;
        log_sum += std::log(x);
    }
    return std::exp(e * log_sum);
}

}  // namespace detail

/// Surrogate system-level hiding success: prod_i (f_i)^(d/(n v t)).
inline Rate sys_ha(const SegmentProfile& profile, const DriveScenario& scenario) {
    detail::require_goal(profile, AttackGoal::hiding);
    detail::require_equal_widths(profile);
    const double e = scenario.exponent(profile.size());
    return Rate(detail::product_pow(profile.rates(), e));
}

/// Surrogate system-level appearing success: 1 - prod_i (1 - f_i)^(d/(n v t)).
inline Rate sys_aa(const SegmentProfile& profile, const DriveScenario& scenario) {
    detail::require_goal(profile, AttackGoal::appearing);
    detail::require_equal_widths(profile);
    const double e = scenario.exponent(profile.size());
    std::vector<double> complements = profile.rates();
    for (double& x : complements) x = 1.0 - x;
    return Rate(1.0 - detail::product_pow(complements, e));
}

/// sys_aa - sys_ha over a shared segmentation. Non-negative whenever the
/// per-segment rates agree; signed in general.
inline double sys_gap(const SegmentProfile& profile_ha, const SegmentProfile& profile_aa,
                      const DriveScenario& scenario) {
    if (!profile_ha.same_segmentation(profile_aa))
        throw validation_error(errc::segmentation_mismatch,
                               "hiding and appearing profiles use different segmentations");
    return sys_aa(profile_aa, scenario).value() - sys_ha(profile_ha, scenario).value();
}

}  // namespace sysmem
