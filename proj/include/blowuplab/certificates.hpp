#pragma once

#include <cmath>
#include <span>
#include <stdexcept>

#include "model.hpp"

namespace blowuplab {

struct CertificateLevels
{
    /// level m where (2/h)m^p - (4/h^2 + 2/h)m >= (1/h)m^p starts to hold
    double unsafe_level = 0.0;
    /// explosion certificate threshold, twice the unsafe level
    double M_star = 0.0;
    /// radius of a Euclidean ball from which the flow provably converges to 0
    double r_conv = 0.0;
    /// smallest eigenvalue of the Hessian of phi at the origin
    double mu = 0.0;
};

namespace phase {

/// The last coordinate satisfies u_d' >= (1/h) u_d^p once it dominates all
/// others and exceeds (4/h + 2)^{1/(p-1)}. For the convergence ball, in the
/// metric sum w_i u_i^2 (w the dissipation weights, between 1 and 2)
///   d/dt |u|_w^2 / 2 <= -mu |u|^2 + (2/h) |u|^{p+1},
/// so the w-ball of radius r is invariant and contracting once
/// (sqrt(2) r)^{p-1} < mu h / 2. We take half of that margin.
inline CertificateLevels certificate_levels(const ModelParams& params)
{
    params.validate();
    CertificateLevels c;
    c.unsafe_level = std::pow(4.0 / params.h + 2.0, 1.0 / (params.p - 1.0));
    c.M_star = 2.0 * c.unsafe_level;
    c.mu = model::confinement_min_eigenvalue(params);
    if (!(c.mu > 0.0))
        throw std::logic_error("certificate_levels: linearization at 0 is not strictly stable");
    c.r_conv = std::pow(0.25 * c.mu * params.h, 1.0 / (params.p - 1.0)) / std::sqrt(2.0);
    return c;
}

inline bool explosion_certificate_of(const CertificateLevels& lv, std::span<const double> u)
{
    const double ud = u.back();
    if (!(ud >= lv.M_star)) return false;
    for (double x : u)
    {
        if (std::abs(x) > ud) return false;
    }
    return true;
}

inline bool explosion_certificate(const ModelParams& params, const State& u)
{
    model::require_finite(params, u);
    return explosion_certificate_of(certificate_levels(params), u.values());
}

}  // namespace phase
}  // namespace blowuplab
