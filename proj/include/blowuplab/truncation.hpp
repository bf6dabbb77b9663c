#pragma once

// Localized potentials phi^n and globally Lipschitz drifts b^n that agree
// with the true ones on {|u_d| < n}.

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "model.hpp"

namespace blowuplab {

struct TruncationLevel
{
    int n = 1;

    explicit TruncationLevel(int level) : n(level)
    {
        if (level < 1) throw std::invalid_argument("TruncationLevel: n must be >= 1");
    }
};

namespace truncation {

/// 1 - (10t^3 - 15t^4 + 6t^5): C^2 step from 1 down to 0 on [0, 1].
inline double smoothstep(double t)
{
    if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("smoothstep: t outside [0, 1]");
    return 1.0 - t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

namespace detail {

// derivatives of S(t) = 10t^3 - 15t^4 + 6t^5
inline double quintic_d1(double t) { return 30.0 * t * t * (1.0 - t) * (1.0 - t); }
inline double quintic_d2(double t) { return 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t); }

// max |S'| at t = 1/2, max |S''| at t = (1 +- 1/sqrt 3)/2
inline constexpr double kQuinticD1Max = 1.875;
inline const double kQuinticD2Max = 60.0 * std::sqrt(3.0) / 18.0;

struct Profile
{
    double s;    // cutoff value
    double ds;   // d/dx
    double d2s;  // d^2/dx^2
};

inline Profile profile(int n, double x)
{
    const double ax = std::abs(x);
    const double nn = static_cast<double>(n);
    if (ax <= nn) return {1.0, 0.0, 0.0};
    if (ax >= 2.0 * nn) return {0.0, 0.0, 0.0};
    const double t = (ax - nn) / nn;
    const double sign = x > 0.0 ? 1.0 : -1.0;
    return {smoothstep(t), -quintic_d1(t) * sign / nn, -quintic_d2(t) / (nn * nn)};
}

/// Truncated boundary reaction g_n = G_n'.
inline double truncated_reaction(int n, double p, double x)
{
    if (std::abs(x) <= static_cast<double>(n)) return model::reaction(p, x);
    const Profile s = profile(n, x);
    const double sup = model::positive_power(x, p + 1.0) / (p + 1.0);
    return s.ds * sup + s.s * model::positive_power(x, p) - x;
}

}  // namespace detail

/// G_n(x) = s_n(x) (x^+)^{p+1}/(p+1) - x^2/2
inline double cutoff_potential(TruncationLevel n, double p, double x)
{
    if (!(p > 1.0)) throw std::invalid_argument("cutoff_potential: p must exceed 1");
    if (std::abs(x) <= static_cast<double>(n.n)) return model::boundary_potential(p, x);
    const double s = detail::profile(n.n, x).s;
    return s * model::positive_power(x, p + 1.0) / (p + 1.0) - 0.5 * x * x;
}

inline double energy_of(const ModelParams& prm, TruncationLevel n, std::span<const double> u)
{
    return model::dirichlet_form(prm, u) -
           (2.0 / prm.h) * cutoff_potential(n, prm.p, u[prm.d - 1]);
}

inline double energy(const ModelParams& params, TruncationLevel n, const State& u)
{
    model::require_finite(params, u);
    return energy_of(params, n, u.values());
}

inline void drift_into(const ModelParams& prm, TruncationLevel n, std::span<const double> u,
                       std::span<double> out)
{
    const double p = prm.p;
    const int level = n.n;
    model::drift_with(prm, u, out,
                      [p, level](double x) { return detail::truncated_reaction(level, p, x); });
}

inline std::vector<double> drift(const ModelParams& params, TruncationLevel n, const State& u)
{
    model::require_finite(params, u);
    std::vector<double> out(params.d);
    drift_into(params, n, u.values(), out);
    return out;
}

/// Upper bound on the Jacobian operator norm of the truncated drift:
/// bound on the linear part plus (2/h) sup |(s_n H)''| with
/// H(x) = (x^+)^{p+1}/(p+1), each term of the product rule bounded over the
/// transition band [n, 2n].
inline double lipschitz_bound(const ModelParams& params, TruncationLevel n)
{
    params.validate();
    const double p = params.p;
    const double nn = static_cast<double>(n.n);
    const double x2 = 2.0 * nn;
    const double inner = p * std::pow(nn, p - 1.0);
    const double band = detail::kQuinticD2Max / (nn * nn) * std::pow(x2, p + 1.0) / (p + 1.0) +
                        2.0 * detail::kQuinticD1Max / nn * std::pow(x2, p) +
                        p * std::pow(x2, p - 1.0);
    return model::linear_part_norm_bound(params) + (2.0 / params.h) * std::max(inner, band);
}

/// Radius beyond which phi^n(u) >= c |u| for some c > 0, from
/// phi^n >= (mu/2)|u|^2 - (2/h) sup H on [0, 2n].
inline double coercivity_radius(const ModelParams& params, TruncationLevel n)
{
    const double mu = model::confinement_min_eigenvalue(params);
    const double nn = static_cast<double>(n.n);
    const double bound = (2.0 / params.h) * std::pow(2.0 * nn, params.p + 1.0) / (params.p + 1.0);
    return std::sqrt(2.0 * bound / mu) + 1.0;
}

/// Unnormalized log density of the invariant law, -2 phi^n / eps^2.
inline double log_invariant_density(const ModelParams& params, TruncationLevel n, double eps,
                                    const State& u)
{
    if (!(eps > 0.0)) throw std::invalid_argument("log_invariant_density: eps must be positive");
    return -2.0 * energy(params, n, u) / (eps * eps);
}

}  // namespace truncation
}  // namespace blowuplab
