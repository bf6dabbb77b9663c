#include <gtest/gtest.h>

#include <cmath>

#include <blowuplab/model.hpp>
#include <blowuplab/truncation.hpp>

#include "test_util.hpp"

using namespace blowuplab;
using blowuplab::testing::params;
using blowuplab::testing::random_vector;

namespace {

TEST(Smoothstep, EndpointsAndMidpoint)
{
    EXPECT_EQ(truncation::smoothstep(0.0), 1.0);
    EXPECT_EQ(truncation::smoothstep(1.0), 0.0);
    EXPECT_DOUBLE_EQ(truncation::smoothstep(0.5), 0.5);
    EXPECT_THROW(truncation::smoothstep(-1e-9), std::invalid_argument);
    EXPECT_THROW(truncation::smoothstep(1.0 + 1e-9), std::invalid_argument);
    for (double t = 0.05; t < 1.0; t += 0.05)
        EXPECT_NEAR(truncation::smoothstep(t) + truncation::smoothstep(1.0 - t), 1.0, 1e-14);
}

TEST(TruncationLevel, RejectsNonPositive)
{
    EXPECT_THROW(TruncationLevel(0), std::invalid_argument);
    EXPECT_NO_THROW(TruncationLevel(1));
}

TEST(CutoffPotential, Examples)
{
    const TruncationLevel n(10);
    EXPECT_DOUBLE_EQ(truncation::cutoff_potential(n, 2.0, 5.0), 125.0 / 3.0 - 25.0 / 2.0);
    EXPECT_DOUBLE_EQ(truncation::cutoff_potential(n, 2.0, 25.0), -625.0 / 2.0);
    EXPECT_EQ(truncation::cutoff_potential(n, 2.0, 0.0), 0.0);
    EXPECT_DOUBLE_EQ(truncation::cutoff_potential(n, 2.0, -25.0), -625.0 / 2.0);
}

TEST(CutoffPotential, TwiceContinuouslyDifferentiable)
{
    // Across a kink of G'' the jump of the difference quotient stays O(1)
    // as the step shrinks; for a C^2 function it shrinks with the step.
    for (int level : {1, 3, 10})
    {
        const TruncationLevel n(level);
        auto G = [&](double x) { return truncation::cutoff_potential(n, 2.5, x); };
        for (double x0 : {static_cast<double>(level), 2.0 * level})
        {
            auto jump = [&](double step) {
                auto g2 = [&](double x) { return (G(x + step) - 2.0 * G(x) + G(x - step)) / (step * step); };
                return std::abs(g2(x0 + 3.0 * step) - g2(x0 - 3.0 * step));
            };
            const double coarse = jump(1e-3 * level);
            const double fine = jump(2.5e-4 * level);
            EXPECT_LE(fine, 0.3 * coarse + 1e-5 * std::pow(2.0 * level, 2.5)) << "level " << level << " at x=" << x0;
        }
    }
}

TEST(TruncatedEnergy, AgreesInsideAndIsCoerciveOnConstants)
{
    RandomStream rs(3);
    const auto prm = params(4, 1.5, 2.0);
    for (int k = 0; k < 500; ++k)
    {
        const int level = 1 + static_cast<int>(rs.uniform() * 8);
        auto u = random_vector(rs, 4, -3.0 * level, 3.0 * level);
        u[3] = (2.0 * rs.uniform() - 1.0) * level;
        EXPECT_EQ(truncation::energy(prm, TruncationLevel(level), State(u)), model::phi(prm, u));
    }
    for (int level : {1, 2, 5})
        for (double c : {2.0 * level, 3.0 * level + 0.5, 100.0})
            EXPECT_DOUBLE_EQ(truncation::energy(prm, TruncationLevel(level), State::constant(4, c)),
                             c * c / prm.h);
    EXPECT_EQ(truncation::energy(prm, TruncationLevel(2), State::constant(4, 0.0)), 0.0);
}

TEST(TruncatedDrift, IdenticalToDriftOnPiN)
{
    RandomStream rs(5);
    for (DriftMode mode : {DriftMode::PaperDrift, DriftMode::GradientExact})
    {
        const auto prm = params(5, 0.9, 2.5, mode);
        for (int k = 0; k < 1000; ++k)
        {
            const int n = 1 + static_cast<int>(rs.uniform() * 6);
            const int m = n + static_cast<int>(rs.uniform() * 6);
            auto u = random_vector(rs, 5, -10.0, 10.0);
            u[4] = (2.0 * rs.uniform() - 1.0) * n;
            const auto b = model::drift(prm, State(u));
            EXPECT_EQ(truncation::drift(prm, TruncationLevel(n), State(u)), b);
            EXPECT_EQ(truncation::drift(prm, TruncationLevel(m), State(u)), b);
        }
    }
}

TEST(TruncatedDrift, SuperlinearTermGoneBeyondTwoN)
{
    const auto prm = params(3, 1.0, 2.0);
    const TruncationLevel n(2);
    const State u({0.3, -1.0, 7.0});
    const auto b = truncation::drift(prm, n, u);
    const double h2 = prm.h * prm.h;
    EXPECT_DOUBLE_EQ(b[0], (2.0 / h2) * (-0.3 - 1.0));
    EXPECT_DOUBLE_EQ(b[1], (1.0 / h2) * (7.0 + 2.0 + 0.3));
    EXPECT_DOUBLE_EQ(b[2], (2.0 / h2) * (-7.0 - 1.0 + prm.h * (-7.0)));
    for (double x : truncation::drift(prm, n, State::constant(3, 0.0))) EXPECT_EQ(x, 0.0);
}

TEST(TruncatedDrift, IsMinusWeightedGradientOfTruncatedEnergy)
{
    RandomStream rs(9);
    const auto prm = params(3, 1.0, 2.0);
    const auto w = model::dissipation_weights(prm);
    const TruncationLevel n(2);
    for (int k = 0; k < 200; ++k)
    {
        auto u = random_vector(rs, 3, -5.0, 5.0);
        const auto b = truncation::drift(prm, n, State(u));
        for (std::size_t i = 0; i < 3; ++i)
        {
            const double step = 1e-6;
            auto up = u, dn = u;
            up[i] += step;
            dn[i] -= step;
            const double fd = (truncation::energy_of(prm, n, up) - truncation::energy_of(prm, n, dn)) / (2 * step);
            EXPECT_NEAR(-fd, w[i] * b[i], 1e-6 * std::max(1.0, std::abs(fd)));
        }
    }
}

TEST(Lipschitz, SampledQuotientsBelowBound)
{
    RandomStream rs(17);
    for (DriftMode mode : {DriftMode::PaperDrift, DriftMode::GradientExact})
        for (int level : {1, 2, 4, 8})
        {
            const auto prm = params(2, 1.0, 2.0, mode);
            const TruncationLevel n(level);
            const double L = truncation::lipschitz_bound(prm, n);
            double worst = 0.0;
            for (int k = 0; k < 10000; ++k)
            {
                auto u = random_vector(rs, 2, -3.0 * level, 3.0 * level);
                std::vector<double> v(u);
                const double r = (k % 2 == 0) ? 1e-3 * level : 1.0 * level;
                for (double& x : v) x += r * (2.0 * rs.uniform() - 1.0);
                const auto bu = truncation::drift(prm, n, State(u));
                const auto bv = truncation::drift(prm, n, State(v));
                double num = 0.0, den = 0.0;
                for (std::size_t i = 0; i < 2; ++i)
                {
                    num += (bu[i] - bv[i]) * (bu[i] - bv[i]);
                    den += (u[i] - v[i]) * (u[i] - v[i]);
                }
                if (den > 0.0) worst = std::max(worst, std::sqrt(num / den));
            }
            EXPECT_LE(worst, L) << "level " << level;
            EXPECT_GT(worst, 0.05 * L) << "bound is uselessly loose at level " << level;
        }
}

TEST(Lipschitz, MonotoneInLevelAndHandEvaluated)
{
    const auto prm = params(4, 1.0, 2.5);
    double prev = 0.0;
    for (int level = 1; level <= 32; level *= 2)
    {
        const double L = truncation::lipschitz_bound(prm, TruncationLevel(level));
        EXPECT_GE(L, prev);
        prev = L;
    }
    // hand evaluation at p = 2, n = 1, h = 1: band terms 60 sqrt3/18 * 8/3, 2 * 1.875 * 4, 2 * 2
    const auto sq = params(4, 1.0, 2.0);
    const double band = 60.0 * std::sqrt(3.0) / 18.0 * 8.0 / 3.0 + 15.0 + 4.0;
    EXPECT_NEAR(truncation::lipschitz_bound(sq, TruncationLevel(1)), model::linear_part_norm_bound(sq) + 2.0 * band,
                1e-12);
    // p -> 1+: the superlinear contribution settles to a finite constant
    auto excess = [](double p) {
        const auto prm = params(4, 1.0, p);
        return truncation::lipschitz_bound(prm, TruncationLevel(3)) - model::linear_part_norm_bound(prm);
    };
    EXPECT_TRUE(std::isfinite(excess(1.0 + 1e-9)));
    EXPECT_NEAR(excess(1.0 + 1e-9), excess(1.0 + 1e-6), 1e-3 * excess(1.0 + 1e-6));
    EXPECT_LT(excess(1.0 + 1e-9), excess(2.0));
}

TEST(Coercivity, PositiveBeyondRadius)
{
    RandomStream rs(23);
    for (std::size_t d : {2u, 5u})
        for (int level : {1, 3, 8})
        {
            const auto prm = params(d, 1.0, 2.0);
            const TruncationLevel n(level);
            const double R = truncation::coercivity_radius(prm, n);
            double worst = std::numeric_limits<double>::infinity();
            for (int k = 0; k < 1000; ++k)
            {
                std::vector<double> dir(d);
                for (double& x : dir) x = rs.normal();
                const double nn = model::euclidean_norm(dir);
                for (double rad : {10.0 * R, 100.0 * R})
                {
                    std::vector<double> u(d);
                    for (std::size_t i = 0; i < d; ++i) u[i] = rad * dir[i] / nn;
                    worst = std::min(worst, truncation::energy_of(prm, n, u) / rad);
                }
            }
            EXPECT_GT(worst, 0.0) << "d=" << d << " level=" << level;
        }
}

TEST(InvariantDensity, LogDensityIdentities)
{
    const auto prm = params(2, 2.0, 2.0, DriftMode::GradientExact);
    const TruncationLevel n(3);
    EXPECT_EQ(truncation::log_invariant_density(prm, n, 0.8, State::constant(2, 0.0)), 0.0);
    const State u({0.4, -0.2}), v({1.5, 2.5});
    const double ratio = std::exp(truncation::log_invariant_density(prm, n, 0.8, u) -
                                  truncation::log_invariant_density(prm, n, 0.8, v));
    const double expect = std::exp(-2.0 * (truncation::energy(prm, n, u) - truncation::energy(prm, n, v)) / 0.64);
    EXPECT_NEAR(ratio, expect, 1e-12 * expect);
    EXPECT_THROW(truncation::log_invariant_density(prm, n, 0.0, u), std::invalid_argument);
}

}  // namespace
