#include <gtest/gtest.h>

#include <cmath>

#include <blowuplab/model.hpp>

#include "test_util.hpp"

using namespace blowuplab;
using blowuplab::testing::params;
using blowuplab::testing::random_vector;

namespace {

const DriftMode kModes[] = {DriftMode::PaperDrift, DriftMode::GradientExact};

TEST(Reaction, Examples)
{
    EXPECT_EQ(model::reaction(2.0, 0.0), 0.0);
    EXPECT_EQ(model::reaction(2.0, 1.0), 0.0);
    EXPECT_EQ(model::reaction(2.0, 2.0), 2.0);
    EXPECT_EQ(model::reaction(2.0, -3.0), 3.0);
    EXPECT_DOUBLE_EQ(model::reaction(2.5, 4.0), 32.0 - 4.0);
}

TEST(ModelParams, Validation)
{
    EXPECT_THROW(params(1, 1.0, 2.0).validate(), std::invalid_argument);
    EXPECT_THROW(params(2, 0.0, 2.0).validate(), std::invalid_argument);
    EXPECT_THROW(params(2, 1.0, 1.0).validate(), std::invalid_argument);
    EXPECT_NO_THROW(params(2, 1.0, 1.5).validate());
    EXPECT_EQ(drift_mode_from_string("gradient"), DriftMode::GradientExact);
    EXPECT_THROW(drift_mode_from_string("nope"), std::invalid_argument);
}

TEST(State, InfinityIsRejectedByEvaluations)
{
    const auto prm = params(3, 1.0, 2.0);
    EXPECT_THROW(model::drift(prm, State::infinity()), std::invalid_argument);
    EXPECT_THROW(model::energy(prm, State::infinity()), std::invalid_argument);
    EXPECT_THROW(model::grad_energy(prm, State::infinity()), std::invalid_argument);
    EXPECT_THROW(model::drift(prm, State::constant(2, 0.0)), std::invalid_argument);
    EXPECT_THROW(State({1.0, std::nan("")}), std::invalid_argument);
}

TEST(Drift, EquilibriaAreExact)
{
    for (std::size_t d : {2u, 3u, 5u, 10u})
        for (double h : {0.5, 1.0, 2.0})
            for (double p : {2.0, 3.0, 2.5})
                for (DriftMode m : kModes)
                {
                    const auto prm = params(d, h, p, m);
                    for (double x : model::drift(prm, State::constant(d, 0.0))) EXPECT_EQ(x, 0.0);
                    for (double x : model::drift(prm, State::constant(d, 1.0))) EXPECT_EQ(x, 0.0);
                    for (double x : model::grad_energy(prm, State::constant(d, 1.0))) EXPECT_EQ(x, 0.0);
                }
}

TEST(Drift, HandEvaluatedRows)
{
    const auto b = model::drift(params(2, 1.0, 2.0), State({0.0, 2.0}));
    EXPECT_DOUBLE_EQ(b[0], 4.0);
    EXPECT_DOUBLE_EQ(b[1], 0.0);
    // d = 3, h = 1: rows 2(u2-u1), u3-2u2+u1, 2(-u3+u2+g(u3))
    const auto c = model::drift(params(3, 1.0, 2.0), State({1.0, 0.0, 3.0}));
    EXPECT_DOUBLE_EQ(c[0], -2.0);
    EXPECT_DOUBLE_EQ(c[1], 4.0);
    EXPECT_DOUBLE_EQ(c[2], 2.0 * (-3.0 + 0.0 + 6.0));
}

TEST(Energy, Examples)
{
    EXPECT_EQ(model::energy(params(4, 1.0, 2.0), State::constant(4, 0.0)).phi, 0.0);
    EXPECT_NEAR(model::energy(params(2, 2.0, 2.0), State::constant(2, 1.0)).phi, 1.0 / 6.0, 1e-15);
    const auto e = model::energy(params(2, 1.0, 2.0), State({0.0, 2.0}));
    EXPECT_DOUBLE_EQ(e.quad, 4.0);
    EXPECT_DOUBLE_EQ(e.reaction, 4.0 / 3.0);
    EXPECT_DOUBLE_EQ(e.phi, 8.0 / 3.0);
}

TEST(Energy, DecompositionIsExact)
{
    RandomStream rs(11);
    for (int k = 0; k < 200; ++k)
    {
        const auto prm = params(5, 0.7, 2.5);
        const auto e = model::energy(prm, State(random_vector(rs, 5, -3.0, 3.0)));
        EXPECT_EQ(e.phi, e.quad - e.reaction);
    }
}

TEST(Gradient, MatchesCentralDifferences)
{
    RandomStream rs(2024);
    for (std::size_t d : {2u, 5u, 10u})
        for (double h : {0.5, 1.0, 2.0})
            for (double p : {2.0, 3.0})
            {
                const auto prm = params(d, h, p);
                for (int k = 0; k < 100; ++k)
                {
                    auto u = random_vector(rs, d, -2.0, 2.0);
                    const auto g = model::grad_energy(prm, State(u));
                    for (std::size_t i = 0; i < d; ++i)
                    {
                        const double step = 1e-6;
                        auto up = u, dn = u;
                        up[i] += step;
                        dn[i] -= step;
                        const double fd = (model::phi(prm, up) - model::phi(prm, dn)) / (2.0 * step);
                        EXPECT_LE(std::abs(fd - g[i]), 1e-6 * std::max(1.0, std::abs(g[i])))
                            << "d=" << d << " h=" << h << " p=" << p << " i=" << i;
                    }
                }
            }
}

TEST(Gradient, WeightedIdentityHolds)
{
    RandomStream rs(7);
    for (std::size_t d : {2u, 3u, 5u, 10u})
    {
        const auto prm = params(d, 0.5 + rs.uniform() * 1.5, 2.0 + rs.uniform());
        const auto w = model::dissipation_weights(prm);
        for (int k = 0; k < 1000 / 4; ++k)
        {
            const auto u = random_vector(rs, d, -4.0, 4.0);
            const auto g = model::grad_energy(prm, State(u));
            const auto b = model::drift(prm, State(u));
            const auto bg = model::drift(prm.with_mode(DriftMode::GradientExact), State(u));
            for (std::size_t i = 0; i < d; ++i)
            {
                // magnitude of the summands entering row i
                double scale = (2.0 / (prm.h * prm.h)) * 4.0 * model::max_abs(u);
                if (i + 1 == d) scale += (2.0 / prm.h) * (std::pow(std::abs(u[i]), prm.p) + std::abs(u[i]));
                scale = std::max(scale, 1.0);
                EXPECT_LE(std::abs(g[i] + w[i] * b[i]), 1e-12 * scale);
                EXPECT_LE(std::abs(bg[i] - w[i] * b[i]), 1e-12 * scale);
                EXPECT_LE(std::abs(bg[i] + g[i]), 1e-12 * scale);
            }
        }
    }
}

TEST(DissipationWeights, Shape)
{
    EXPECT_EQ(model::dissipation_weights(params(2, 1, 2)), (std::vector<double>{1, 1}));
    EXPECT_EQ(model::dissipation_weights(params(3, 1, 2)), (std::vector<double>{1, 2, 1}));
    EXPECT_EQ(model::dissipation_weights(params(5, 1, 2)), (std::vector<double>{1, 2, 2, 2, 1}));
}

TEST(Delta, Examples)
{
    EXPECT_NEAR(model::delta(params(2, 2.0, 2.0)), 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(model::delta(params(2, 1.0, 3.0)), 1.0, 1e-15);
    const double small = model::delta(params(2, 1.0, 1.0 + 1e-6));
    EXPECT_GT(small, 0.0);
    EXPECT_LT(small, 1e-5);
    // twice the potential at the saddle
    const auto prm = params(6, 0.8, 2.7);
    EXPECT_NEAR(model::delta(prm), 2.0 * model::energy(prm, State::constant(6, 1.0)).phi, 1e-14);
}

TEST(Confinement, MinEigenvalueMatchesPowerIteration)
{
    // The Hessian of phi at 0 is (2/h^2) L + (2/h) e_d e_d^T; compare with
    // inverse-free power iteration on (sigma I - H).
    for (std::size_t d : {2u, 4u, 7u})
    {
        const auto prm = params(d, 1.3, 2.0);
        const double a = 2.0 / (prm.h * prm.h);
        std::vector<std::vector<double>> H(d, std::vector<double>(d, 0.0));
        for (std::size_t i = 0; i + 1 < d; ++i)
        {
            H[i][i] += a;
            H[i + 1][i + 1] += a;
            H[i][i + 1] -= a;
            H[i + 1][i] -= a;
        }
        H[d - 1][d - 1] += 2.0 / prm.h;
        const double sigma = 4.0 * a + 2.0 / prm.h;
        std::vector<double> v(d, 1.0), w(d);
        double lambda = 0.0;
        for (int it = 0; it < 20000; ++it)
        {
            for (std::size_t i = 0; i < d; ++i)
            {
                w[i] = sigma * v[i];
                for (std::size_t j = 0; j < d; ++j) w[i] -= H[i][j] * v[j];
            }
            const double n = model::euclidean_norm(w);
            lambda = n;
            for (std::size_t i = 0; i < d; ++i) v[i] = w[i] / n;
        }
        EXPECT_NEAR(model::confinement_min_eigenvalue(prm), sigma - lambda, 1e-9);
    }
}

}  // namespace
