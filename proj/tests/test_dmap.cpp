#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "lateral_chemostat/dmap.hpp"
#include "oracles.hpp"
#include "random_configs.hpp"

using namespace latchem;

namespace {
ChemostatConfig cfg(double V1, double V2) {
    return ChemostatConfig{V1, V2, 1.0, 10.0, 1.0, GrowthModel::monod(1.0, 0.5)};
}
}  // namespace

TEST(DiffusionCase, Classification) {
    EXPECT_EQ(diffusion_case(cfg(0.4, 0.4)), DiffusionCase::I);
    EXPECT_EQ(diffusion_case(cfg(0.6, 0.6)), DiffusionCase::II);
    EXPECT_EQ(diffusion_case(cfg(2.0, 1.0)), DiffusionCase::III);
    EXPECT_THROW(diffusion_case(cfg(0.0, 1.0)), DomainError);
}

TEST(DBar, FrozenValueAndEdges) {
    const auto c = cfg(0.4, 0.4);
    EXPECT_NEAR(d_bar(c), 0.9904761904761905, 1e-14);
    EXPECT_TRUE(positive_equilibrium(c.with_d(0.5 * d_bar(c))).has_value());
    EXPECT_FALSE(positive_equilibrium(c.with_d(2.0 * d_bar(c))).has_value());
    EXPECT_THROW(d_bar(cfg(0.6, 0.6)), UndefinedCaseError);
}

TEST(ExistenceRange, ZeroOnlyInCaseThree) {
    EXPECT_TRUE(existence_range(cfg(2.0, 1.0)).contains(0.0));
    EXPECT_FALSE(existence_range(cfg(0.6, 0.6)).contains(0.0));
    EXPECT_TRUE(existence_range(cfg(0.6, 0.6)).contains(1e6));
    EXPECT_FALSE(existence_range(cfg(0.4, 0.4)).contains(1.0));
}

TEST(Limits, LargeDiffusionMergesTanks) {
    const auto c = cfg(0.6, 0.6);
    const auto lim = limits(c);
    ASSERT_TRUE(lim.s1_star_inf);
    EXPECT_FALSE(lim.s1_star_0);
    EXPECT_NEAR(*lim.s1_star_inf, mu_inverse(c.growth, 1.0 / 1.2), 1e-14);
    const auto eq = positive_equilibrium_at(c, 1e6);
    EXPECT_NEAR(eq.state.s1, *lim.s1_star_inf, 1e-4);
}

TEST(Limits, SmallDiffusionCaseThree) {
    const auto c = cfg(2.0, 1.0);
    const auto lim = limits(c);
    ASSERT_TRUE(lim.s1_star_0);
    EXPECT_DOUBLE_EQ(*lim.s1_star_0, 0.5);
    EXPECT_NEAR(positive_equilibrium_at(c, 1e-7).state.s1, 0.5, 1e-5);
}

TEST(Limits, CaseOneApproachesInflowAtTheEdge) {
    const auto c = cfg(0.4, 0.4);
    const double db = d_bar(c);
    EXPECT_GT(positive_equilibrium_at(c, 0.9999 * db).state.s1, 9.9);
    EXPECT_THROW(positive_equilibrium_at(c, 1.5 * db), UndefinedCaseError);
}

TEST(DStar, FrozenCaseOne) {
    const auto c = cfg(0.4, 0.4);
    const auto ds = find_d_star(c);
    ASSERT_EQ(ds.kind, DStarKind::Interior);
    EXPECT_NEAR(*ds.d_star, 0.6198600962376166, 1e-9);
    EXPECT_NEAR(positive_equilibrium_at(c, *ds.d_star).state.s2, s_hat(c.growth, c.s_in), 1e-9);
}

TEST(DStar, IsTheMinimiserOfS1) {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 12; ++i) {
        const auto c = testing_support::random_config(rng, testing_support::case_of_index(i));
        const auto ds = find_d_star(c);
        if (ds.kind != DStarKind::Interior) continue;
        const auto s1 = [&](double d) { return positive_equilibrium_at(c, d).state.s1; };
        const double at = s1(*ds.d_star);
        EXPECT_LE(at, s1(*ds.d_star * 0.98) + 1e-12);
        const auto range = existence_range(c);
        const double up = std::min(*ds.d_star * 1.02, 0.5 * (*ds.d_star + range.d_hi));
        EXPECT_LE(at, s1(up) + 1e-12);
    }
}

TEST(Sensitivity, MatchesFiniteDifferences) {
    std::mt19937_64 rng(9);
    for (int i = 0; i < 24; ++i) {
        const auto c = testing_support::random_config(rng, testing_support::case_of_index(i));
        const auto eq = positive_equilibrium_at(c, c.d);
        const auto sens = ds_dd(c, eq);
        const double h = 1e-5 * c.d;
        const double fd1 = oracle::central_difference(
            [&](double d) { return positive_equilibrium_at(c, d).state.s1; }, c.d, h);
        const double fd2 = oracle::central_difference(
            [&](double d) { return positive_equilibrium_at(c, d).state.s2; }, c.d, h);
        EXPECT_NEAR(sens.ds1_dd, fd1, 1e-5 * std::max(1.0, std::abs(fd1)));
        EXPECT_NEAR(sens.ds2_dd, fd2, 1e-5 * std::max(1.0, std::abs(fd2)));
        // The sign of ds1/dd follows s2* - s_hat.
        const double sh = s_hat(c.growth, c.s_in);
        if (std::abs(eq.state.s2 - sh) > 1e-6 * c.s_in) {
            EXPECT_EQ(sens.ds1_dd > 0.0, eq.state.s2 > sh);
        }
    }
}

TEST(Sensitivity, RejectsDegenerateInput) {
    const auto c = cfg(0.6, 0.6);
    const auto eq = positive_equilibrium_at(c, 1.0);
    EXPECT_THROW(ds_dd(c.with_d(0.0), eq), DomainError);
    EXPECT_THROW(ds_dd(c, washout_equilibrium(c)), DomainError);
}

TEST(Sweep, DefaultGridStaysInsideRange) {
    const auto c = cfg(0.4, 0.4);
    const auto grid = default_d_grid(c, 50);
    ASSERT_EQ(grid.size(), 50u);
    EXPECT_LT(grid.back(), d_bar(c));
    for (std::size_t i = 1; i < grid.size(); ++i) EXPECT_GT(grid[i], grid[i - 1]);
}

TEST(Sweep, SamplesAndFlags) {
    const auto c = cfg(0.4, 0.4);
    const double db = d_bar(c);
    const auto prof = sweep(c, {0.0, 0.3 * db, 0.7 * db, 1.2 * db});
    EXPECT_EQ(prof.diffusion_case, DiffusionCase::I);
    ASSERT_TRUE(prof.d_bar);
    EXPECT_FALSE(prof.samples[0].valid);
    EXPECT_TRUE(prof.samples[1].valid);
    EXPECT_TRUE(prof.samples[2].valid);
    EXPECT_FALSE(prof.samples[3].valid);
    EXPECT_FALSE(prof.samples[3].note.empty());
    for (const auto& s : prof.samples) {
        if (!s.valid) continue;
        EXPECT_LT(s.s2_star, s.s1_star);
        EXPECT_TRUE(std::isfinite(s.ds1_dd));
    }
}

TEST(Sweep, ParallelMatchesSerial) {
    const auto c = cfg(0.6, 0.6);
    const auto grid = default_d_grid(c, 40);
    const auto a = sweep(c, grid, {1});
    const auto b = sweep(c, grid, {4});
    for (std::size_t i = 0; i < grid.size(); ++i) {
        EXPECT_EQ(a.samples[i].s1_star, b.samples[i].s1_star);
        EXPECT_EQ(a.samples[i].ds1_dd, b.samples[i].ds1_dd);
    }
}

TEST(Sweep, CaseThreeIncludesZero) {
    const auto c = cfg(2.0, 1.0);
    const auto prof = sweep(c, {0.0, 1.0});
    ASSERT_TRUE(prof.samples[0].valid);
    EXPECT_DOUBLE_EQ(prof.samples[0].s1_star, 0.5);
    EXPECT_TRUE(std::isnan(prof.samples[0].ds1_dd));
}
