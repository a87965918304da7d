#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include "sysmem/sweep.hpp"

using namespace sysmem;

namespace {

SegmentProfile make_profile(AttackGoal goal, const std::vector<double>& rates,
                            double total = 30.0) {
    std::vector<RawSegment> raw;
    const double width = total / static_cast<double>(rates.size());
    double near = 0.0;
    for (double r : rates) {
        raw.push_back({near, near + width, r});
        near += width;
    }
    return validate_profile(goal, std::move(raw));
}

}  // namespace

TEST_CASE("analysis series tabulates the uniform-x closed forms", "[sweep]") {
    const auto series = sweep::numerical_analysis_series(5, 0.25);
    REQUIRE(series.m == 5);
    REQUIRE(series.points.size() == 5);  // x = 0, .25, .5, .75, 1
    for (const auto& p : series.points) {
        CHECK(p.f == p.x);
        CHECK(p.sys_ha == Catch::Approx(std::pow(p.x, 5.0)).margin(1e-12));
        CHECK(p.sys_aa == Catch::Approx(1.0 - std::pow(1.0 - p.x, 5.0)).margin(1e-12));
    }
    CHECK(series.points.front().x == 0.0);
    CHECK(series.points.back().x == 1.0);

    const auto collapse = sweep::numerical_analysis_series(1, 0.5);
    for (const auto& p : collapse.points) {
        CHECK(p.sys_ha == Catch::Approx(p.x).margin(1e-15));
        CHECK(p.sys_aa == Catch::Approx(p.x).margin(1e-15));
    }

    CHECK_THROWS_AS(sweep::numerical_analysis_series(0, 0.1), validation_error);
    CHECK_THROWS_AS(sweep::numerical_analysis_series(65, 0.1), validation_error);
    CHECK_THROWS_AS(sweep::numerical_analysis_series(5, 0.0), validation_error);
    CHECK_THROWS_AS(sweep::numerical_analysis_series(5, 0.6), validation_error);
}

TEST_CASE("metric separation is strict between the extremes", "[sweep]") {
    for (int m : {2, 3, 5, 8, 13}) {
        for (double x : {0.05, 0.25, 0.5, 0.75, 0.95}) {
            const double ha = std::pow(x, static_cast<double>(m));
            const double aa = 1.0 - std::pow(1.0 - x, static_cast<double>(m));
            CAPTURE(m, x);
            CHECK(aa > x);
            CHECK(x > ha);
        }
    }
}

TEST_CASE("max gap matches the closed form 1 - 2*(1/2)^m", "[sweep]") {
    const auto g1 = sweep::max_gap(1);
    CHECK(g1.gap == 0.0);
    CHECK(g1.x_star == 0.5);

    const auto g2 = sweep::max_gap(2);
    CHECK(std::abs(g2.gap - 0.5) <= 1e-9);
    CHECK(std::abs(g2.x_star - 0.5) <= 1e-6);

    const auto g5 = sweep::max_gap(5);
    CHECK(std::abs(g5.gap - 0.9375) <= 1e-9);

    for (int m = 2; m <= 16; ++m) {
        const auto g = sweep::max_gap(m);
        CHECK(std::abs(g.gap - (1.0 - 2.0 * std::pow(0.5, m))) <= 1e-9);
    }
}

TEST_CASE("grid aggregation reproduces frozen desk values", "[sweep]") {
    const auto grid = SweepGrid::default_grid();

    const auto rp2 = make_profile(AttackGoal::hiding, {0.418, 0.10, 0.238, 0.654, 0.999, 1.0});
    const auto rp2_report = sweep::aggregate_over_grid(rp2, grid, 30.0);
    CHECK(rp2_report.aggregate == Catch::Approx(0.0485917217119987).epsilon(1e-12));
    CHECK(rp2_report.model_level == Catch::Approx(0.568166666666667).epsilon(1e-12));
    CHECK(rp2_report.per_point.size() == 60);
    CHECK_FALSE(rp2_report.unequal_widths);

    const auto sib = make_profile(AttackGoal::hiding, {0.846, 0.566, 0.820, 0.992, 1.0, 1.0});
    CHECK(sweep::aggregate_over_grid(sib, grid, 30.0).aggregate ==
          Catch::Approx(0.44016107859229).epsilon(1e-12));

    const auto fte = make_profile(AttackGoal::hiding, {0.889, 0.571, 0.136, 0.031, 0.478, 0.745});
    CHECK(sweep::aggregate_over_grid(fte, grid, 30.0).aggregate ==
          Catch::Approx(0.0183790900526589).epsilon(1e-12));

    const auto aa_flat = make_profile(AttackGoal::appearing,
                                      {0.291, 0.291, 0.291, 0.291, 0.291, 0.291});
    CHECK(sweep::aggregate_over_grid(aa_flat, grid, 30.0).aggregate ==
          Catch::Approx(0.779144650130467).epsilon(1e-12));
}

TEST_CASE("grid aggregation is permutation invariant", "[sweep]") {
    const auto profile =
        make_profile(AttackGoal::hiding, {0.418, 0.10, 0.238, 0.654, 0.999, 1.0});
    const auto base = SweepGrid::default_grid();

    std::vector<double> speeds = base.speeds_mps;
    std::vector<double> times = base.times_s;
    std::mt19937 gen(12345);
    std::shuffle(speeds.begin(), speeds.end(), gen);
    std::shuffle(times.begin(), times.end(), gen);
    const auto shuffled = SweepGrid::checked(speeds, times);

    CHECK(sweep::aggregate_over_grid(profile, base, 30.0).aggregate ==
          sweep::aggregate_over_grid(profile, shuffled, 30.0).aggregate);
}

TEST_CASE("single-point grids collapse to the closed form", "[sweep]") {
    const auto profile =
        make_profile(AttackGoal::hiding, {0.418, 0.10, 0.238, 0.654, 0.999, 1.0});
    const auto grid = SweepGrid::checked({mph_to_mps(25.0)}, {0.5});
    const auto report = sweep::aggregate_over_grid(profile, grid, 30.0);
    REQUIRE(report.per_point.size() == 1);
    const auto sc = DriveScenario::checked(30.0, mph_to_mps(25.0), 0.5);
    CHECK(report.aggregate == sys_ha(profile, sc).value());
    CHECK(report.aggregate == Catch::Approx(0.0110416887425578).epsilon(1e-12));
}

TEST_CASE("fractional-m diagnostics count the non-integer grid points", "[sweep]") {
    const auto profile = make_profile(AttackGoal::hiding, {0.5, 0.5, 0.5});
    // v=10, t=0.5 gives m=6 exactly; v=10, t=0.7 gives m~4.29.
    const auto grid = SweepGrid::checked({10.0}, {0.5, 0.7});
    const auto report = sweep::aggregate_over_grid(profile, grid, 30.0);
    CHECK(report.fractional_m_points == 1);
}
