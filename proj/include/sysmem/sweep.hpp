#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "sysmem/core.hpp"
#include "sysmem/errors.hpp"
#include "sysmem/metrics.hpp"

namespace sysmem::sweep {

struct AnalysisPoint {
    double x = 0.0;       // per-segment rate, also the model-level value
    double f = 0.0;       // model-level metric (= x)
    double sys_ha = 0.0;  // x^m
    double sys_aa = 0.0;  // 1 - (1-x)^m
};

/// The uniform-rate series behind the metric comparison charts, n = m.
struct AnalysisSeries {
    int m = 1;
    std::vector<AnalysisPoint> points;
};

inline AnalysisSeries numerical_analysis_series(int m, double x_step) {
    if (m < 1 || m > 64)
        throw validation_error(errc::bad_step, "m must lie in [1,64], got " + std::to_string(m));
    if (!(x_step > 0.0 && x_step <= 0.5))
        throw validation_error(errc::bad_step,
                               "x step must lie in (0, 0.5], got " + std::to_string(x_step));

    AnalysisSeries series;
    series.m = m;
    const auto steps = static_cast<std::size_t>(std::floor(1.0 / x_step + 1e-9));
    series.points.reserve(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k) {
        const double x = std::min(1.0, static_cast<double>(k) * x_step);
        series.points.push_back(AnalysisPoint{
            x, x, std::pow(x, m), 1.0 - std::pow(1.0 - x, m)});
    }
    if (series.points.back().x < 1.0)
        series.points.push_back(AnalysisPoint{1.0, 1.0, 1.0, 1.0});
    return series;
}

struct GapMaximum {
    double x_star = 0.5;
    double gap = 0.0;
};

/// Maximizer of SysAA - SysHA = 1 - (1-x)^m - x^m over x in [0,1], found by
/// grid refinement. Analytically x* = 0.5 with gap 1 - 2*(0.5)^m.
inline GapMaximum max_gap(int m) {
    if (m < 1) throw validation_error(errc::bad_step, "m must be >= 1");
    if (m == 1) return {0.5, 0.0};  // gap is identically zero; x* by convention

    auto gap_at = [m](double x) { return 1.0 - std::pow(1.0 - x, m) - std::pow(x, m); };

    double lo = 0.0, hi = 1.0;
    double best_x = 0.5, best_gap = gap_at(0.5);
    for (int level = 0; level < 4; ++level) {
        const int steps = 1000;
        const double h = (hi - lo) / steps;
        for (int k = 0; k <= steps; ++k) {
            const double x = lo + k * h;
            const double g = gap_at(x);
            if (g > best_gap) {
                best_gap = g;
                best_x = x;
            }
        }
        lo = std::max(0.0, best_x - h);
        hi = std::min(1.0, best_x + h);
    }
    return {best_x, best_gap};
}

struct GridPointValue {
    double speed_mps = 0.0;
    double time_s = 0.0;
    double m_real = 0.0;  // d/(v t) at this point
    double value = 0.0;   // sys_ha or sys_aa, per profile goal
};

struct MetricReport {
    AttackGoal goal = AttackGoal::hiding;
    double detection_distance_m = 0.0;
    double model_level = 0.0;
    double aggregate = 0.0;  // arithmetic mean over the grid
    std::vector<GridPointValue> per_point;
    std::size_t fractional_m_points = 0;  // diagnostics: points where d/(v t) is not whole
    bool unequal_widths = false;
};

/// Evaluate the system-level metric for the profile's goal at every (v, t)
/// combination and average uniformly across them.
inline MetricReport aggregate_over_grid(const SegmentProfile& profile, const SweepGrid& grid,
                                        double detection_distance_m) {
    if (grid.speeds_mps.empty() || grid.times_s.empty())
        throw validation_error(errc::bad_grid, "sweep grid must be non-empty");

    MetricReport report;
    report.goal = profile.goal();
    report.detection_distance_m = detection_distance_m;
    report.model_level = model_level_rate(profile).value();
    report.unequal_widths = !profile.equal_widths();
    report.per_point.reserve(grid.point_count());

    for (double v : grid.speeds_mps) {
        for (double t : grid.times_s) {
            const DriveScenario scenario = DriveScenario::checked(detection_distance_m, v, t);
            const double value = profile.goal() == AttackGoal::hiding
                                     ? sys_ha(profile, scenario).value()
                                     : sys_aa(profile, scenario).value();
            const double m_real = scenario.segment_count();
            if (std::abs(m_real - std::round(m_real)) > 1e-9) ++report.fractional_m_points;
            report.per_point.push_back(GridPointValue{v, t, m_real, value});
        }
    }
    // Sorted accumulation keeps the mean independent of grid ordering.
    std::vector<double> values;
    values.reserve(report.per_point.size());
    for (const auto& p : report.per_point) values.push_back(p.value);
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double value : values) sum += value;
    report.aggregate = sum / static_cast<double>(report.per_point.size());
    return report;
}

}  // namespace sysmem::sweep
