#include <cmath>

#include <gtest/gtest.h>

#include "lateral_chemostat/roots.hpp"

using namespace latchem;

TEST(Bisect, FindsSquareRootOfTwo) {
    const double r = roots::bisect([](double x) { return x * x - 2.0; }, 0.0, 2.0, {.abs_tol = 1e-14});
    EXPECT_NEAR(r, std::sqrt(2.0), 1e-14);
}

TEST(Bisect, ReturnsExactEndpointZero) {
    EXPECT_EQ(roots::bisect([](double x) { return x - 1.0; }, 1.0, 3.0), 1.0);
    EXPECT_EQ(roots::bisect([](double x) { return x - 3.0; }, 1.0, 3.0), 3.0);
}

TEST(Bisect, ThrowsWithoutSignChange) {
    EXPECT_THROW(roots::bisect([](double x) { return x * x + 1.0; }, -1.0, 1.0), BracketError);
}

TEST(Bisect, RespectsIterationCap) {
    const double r = roots::bisect([](double x) { return x - 0.3; }, 0.0, 1.0, {.abs_tol = 0.0, .max_iter = 3});
    EXPECT_NEAR(r, 0.3, 1.0 / 8.0);
}

TEST(Illinois, PolishesToRounding) {
    const auto r = roots::illinois([](double x) { return std::exp(x) - 3.0; }, 1.0, 1.2);
    ASSERT_TRUE(r.has_value());
    EXPECT_NEAR(*r, std::log(3.0), 4e-16);
}

TEST(Illinois, NoSignChangeGivesNothing) {
    EXPECT_FALSE(roots::illinois([](double x) { return x * x + 1.0; }, -1.0, 1.0).has_value());
}

TEST(GoldenSection, MinimisesParabola) {
    const double x = roots::golden_section_min([](double v) { return (v - 0.7) * (v - 0.7); }, 0.0, 2.0, 1e-10);
    EXPECT_NEAR(x, 0.7, 1e-8);
}
