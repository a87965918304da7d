#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sysmem/errors.hpp"

namespace sysmem {

// mph -> m/s, the exact legal conversion factor.
inline constexpr double kMphToMps = 0.44704;

/// A probability in [0,1]. Construction validates the range.
class Rate {
public:
    Rate() = default;

    explicit Rate(double v) : value_(v) {
        if (!(v >= 0.0 && v <= 1.0))
            throw validation_error(errc::rate_out_of_range,
                                   "rate must lie in [0,1], got " + std::to_string(v));
    }

    double value() const noexcept { return value_; }

    friend bool operator==(Rate a, Rate b) noexcept { return a.value_ == b.value_; }

private:
    double value_ = 0.0;
};

enum class AttackGoal { hiding, appearing };

inline const char* to_string(AttackGoal g) {
    return g == AttackGoal::hiding ? "hiding" : "appearing";
}

enum class SignSemantics { stop, speed_limit };

inline const char* to_string(SignSemantics s) {
    return s == SignSemantics::stop ? "stop" : "speed_limit";
}

/// One distance bin of the measurement profile. Distances are measured
/// from the sign outward, so near_m < far_m and the first segment starts
/// at the sign itself.
struct Segment {
    double near_m = 0.0;
    double far_m = 0.0;
    Rate rate;

    double width() const noexcept { return far_m - near_m; }
};

struct RawSegment {
    double near_m = 0.0;
    double far_m = 0.0;
    double rate = 0.0;
};

/// Ordered per-distance-segment attack success rates for one attack goal.
///
/// Invariants enforced at construction: segments contiguous from 0 with
/// positive widths, every rate in [0,1], at least one segment. Ordering is
/// near-to-far from the sign; the vehicle traverses them far-to-near.
class SegmentProfile {
public:
    static SegmentProfile validate(AttackGoal goal, std::vector<RawSegment> raw) {
        if (raw.empty())
            throw validation_error(errc::gap_or_overlap, "profile needs at least one segment");
        std::sort(raw.begin(), raw.end(),
                  [](const RawSegment& a, const RawSegment& b) { return a.near_m < b.near_m; });

        std::vector<Segment> segments;
        segments.reserve(raw.size());
        double expected_near = 0.0;
        for (const RawSegment& r : raw) {
            if (!(r.far_m > r.near_m))
                throw validation_error(errc::non_positive_width,
                                       "segment [" + std::to_string(r.near_m) + "," +
                                           std::to_string(r.far_m) + ") has non-positive width");
            if (std::abs(r.near_m - expected_near) > contiguity_tol(expected_near))
                throw validation_error(errc::gap_or_overlap,
                                       "segment starting at " + std::to_string(r.near_m) +
                                           " does not continue from " + std::to_string(expected_near));
            segments.push_back(Segment{r.near_m, r.far_m, Rate(r.rate)});
            expected_near = r.far_m;
        }
        return SegmentProfile(goal, std::move(segments));
    }

    AttackGoal goal() const noexcept { return goal_; }
    std::span<const Segment> segments() const noexcept { return segments_; }
    std::size_t size() const noexcept { return segments_.size(); }

    /// Total detection distance covered, i.e. far_m of the last segment.
    double detection_distance() const noexcept { return segments_.back().far_m; }

    bool equal_widths(double rel_tol = 1e-9) const noexcept {
        const double nominal = detection_distance() / static_cast<double>(segments_.size());
        for (const Segment& s : segments_)
            if (std::abs(s.width() - nominal) > rel_tol * detection_distance()) return false;
        return true;
    }

    std::vector<double> rates() const {
        std::vector<double> out;
        out.reserve(segments_.size());
        for (const Segment& s : segments_) out.push_back(s.rate.value());
        return out;
    }

    bool same_segmentation(const SegmentProfile& other, double tol = 1e-9) const noexcept {
        if (size() != other.size()) return false;
        for (std::size_t i = 0; i < size(); ++i) {
            if (std::abs(segments_[i].near_m - other.segments_[i].near_m) > tol) return false;
            if (std::abs(segments_[i].far_m - other.segments_[i].far_m) > tol) return false;
        }
        return true;
    }

    friend bool operator==(const SegmentProfile& a, const SegmentProfile& b) {
        if (a.goal_ != b.goal_ || a.size() != b.size()) return false;
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (a.segments_[i].near_m != b.segments_[i].near_m) return false;
            if (a.segments_[i].far_m != b.segments_[i].far_m) return false;
            if (!(a.segments_[i].rate == b.segments_[i].rate)) return false;
        }
        return true;
    }

private:
    SegmentProfile(AttackGoal goal, std::vector<Segment> segments)
        : goal_(goal), segments_(std::move(segments)) {}

    static double contiguity_tol(double at) noexcept {
        return 1e-9 * std::max(1.0, std::abs(at));
    }

    AttackGoal goal_;
    std::vector<Segment> segments_;
};

/// Free-function form of SegmentProfile::validate.
inline SegmentProfile validate_profile(AttackGoal goal, std::vector<RawSegment> raw) {
    return SegmentProfile::validate(goal, std::move(raw));
}

inline double mph_to_mps(double speed_mph) {
    if (!(speed_mph > 0.0))
        throw validation_error(errc::non_positive_speed,
                               "speed must be positive, got " + std::to_string(speed_mph));
    return speed_mph * kMphToMps;
}

/// One drive past the sign: detection distance d, vehicle speed v, minimum
/// spatial-memorization time t, camera frame rate r.
struct DriveScenario {
    double detection_distance_m = 0.0;  // d
    double speed_mps = 0.0;             // v
    double memorize_time_s = 0.0;       // t
    double frame_rate_hz = 20.0;        // r

    static DriveScenario checked(double d_m, double v_mps, double t_s, double r_hz = 20.0) {
        auto positive = [](double x, const char* name) {
            if (!(x > 0.0))
                throw validation_error(errc::non_positive_scenario_field,
                                       std::string(name) + " must be positive, got " +
                                           std::to_string(x));
        };
        positive(d_m, "detection distance");
        positive(v_mps, "speed");
        positive(t_s, "memorization time");
        positive(r_hz, "frame rate");
        return DriveScenario{d_m, v_mps, t_s, r_hz};
    }

    /// Real-valued spatial memorization segment count m = d/(v t).
    double segment_count() const noexcept {
        return detection_distance_m / (speed_mps * memorize_time_s);
    }

    /// Exponent e(n) = d/(n v t) applied per measurement segment.
    double exponent(std::size_t n_measurement_segments) const noexcept {
        return segment_count() / static_cast<double>(n_measurement_segments);
    }
};

/// Speed x memorization-time combinations for system-level aggregation.
struct SweepGrid {
    std::vector<double> speeds_mps;
    std::vector<double> times_s;

    static SweepGrid checked(std::vector<double> speeds, std::vector<double> times) {
        if (speeds.empty() || times.empty())
            throw validation_error(errc::bad_grid, "sweep grid must be non-empty");
        for (double v : speeds)
            if (!(v > 0.0))
                throw validation_error(errc::bad_grid, "grid speed must be positive");
        for (double t : times)
            if (!(t > 0.0))
                throw validation_error(errc::bad_grid, "grid time must be positive");
        return SweepGrid{std::move(speeds), std::move(times)};
    }

    /// The aggregation protocol default: 25/30/35 mph crossed with
    /// t = 0.05 s .. 1.00 s in steps of 0.05 s (60 combinations).
    static SweepGrid default_grid() {
        std::vector<double> speeds;
        for (double mph : {25.0, 30.0, 35.0}) speeds.push_back(mph * kMphToMps);
        std::vector<double> times;
        for (int k = 1; k <= 20; ++k) times.push_back(k * 0.05);
        return SweepGrid{std::move(speeds), std::move(times)};
    }

    std::size_t point_count() const noexcept { return speeds_mps.size() * times_s.size(); }
};

/// How the display layer forgets a detection.
///   spatial        - cleared only when the vehicle passes the memorized
///                    position, regardless of elapsed time
///   temporal       - forgotten window_s seconds after the last detection
///   real_time_only - display mirrors the current frame
struct MemorizationPolicy {
    enum class Kind { spatial, temporal, real_time_only };

    Kind kind = Kind::spatial;
    double window_s = 3.0;  // temporal only

    static MemorizationPolicy spatial() { return {Kind::spatial, 0.0}; }
    static MemorizationPolicy temporal(double window_s = 3.0) {
        if (!(window_s > 0.0))
            throw validation_error(errc::non_positive_scenario_field,
                                   "temporal window must be positive");
        return {Kind::temporal, window_s};
    }
    static MemorizationPolicy real_time_only() { return {Kind::real_time_only, 0.0}; }
};

inline std::string to_string(const MemorizationPolicy& p) {
    switch (p.kind) {
        case MemorizationPolicy::Kind::spatial: return "spatial";
        case MemorizationPolicy::Kind::temporal:
            return "temporal(" + std::to_string(p.window_s) + "s)";
        case MemorizationPolicy::Kind::real_time_only: return "real_time_only";
    }
    return "?";
}

}  // namespace sysmem
