#pragma once

// Deterministic phase portrait: attraction/explosion verdicts and the
// critical scaling along rays of nonnegative data.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "certificates.hpp"
#include "integrator.hpp"
#include "model.hpp"

namespace blowuplab {

struct Classification
{
    enum class Kind
    {
        DomainOfAttraction,
        DomainOfExplosion,
        Undecided
    };

    Kind kind = Kind::Undecided;
    double decided_at = 0.0;
    /// "convergence_ball", "explosion_certificate" or "horizon"
    std::string certificate;
};

inline std::string_view to_string(Classification::Kind k)
{
    switch (k)
    {
        case Classification::Kind::DomainOfAttraction: return "DomainOfAttraction";
        case Classification::Kind::DomainOfExplosion: return "DomainOfExplosion";
        case Classification::Kind::Undecided: return "Undecided";
    }
    return "unknown";
}

namespace phase {

/// Tolerances used for verdicts when the caller does not supply any.
inline DetConfig default_classify_config()
{
    DetConfig cfg;
    cfg.rel_tol = 1e-10;
    cfg.abs_tol = 1e-13;
    cfg.dt_max = 0.25;
    cfg.T_max = 1e3;
    cfg.record_stride = 0;
    return cfg;
}

inline Classification classify_values(const ModelParams& params, std::span<const double> u,
                                      const DetConfig& cfg)
{
    integrator::detail::DetOptions opt;
    opt.stop_at_certificate = true;
    const auto raw = integrator::detail::run_deterministic(params, u, cfg, nullptr, nullptr, opt);
    using S = integrator::detail::DetStop;
    switch (raw.stop)
    {
        case S::Converged:
            return {Classification::Kind::DomainOfAttraction, raw.time, "convergence_ball"};
        case S::CertificateFired:
        case S::Exploded:
            return {Classification::Kind::DomainOfExplosion, raw.time, "explosion_certificate"};
        case S::Survived: break;
    }
    return {Classification::Kind::Undecided, raw.time, "horizon"};
}

inline Classification classify(const ModelParams& params, const State& u, const DetConfig& cfg)
{
    params.validate();
    cfg.validate();
    model::require_finite(params, u);
    return classify_values(params, u.values(), cfg);
}

inline Classification classify(const ModelParams& params, const State& u)
{
    return classify(params, u, default_classify_config());
}

/// Critical scaling lambda_c of the ray {lambda u}: attraction below,
/// explosion above. Undecided verdicts mark the numerically unresolvable band
/// around lambda_c; the two edges of that band are bisected separately and
/// the midpoint of [last attracting, first exploding] is returned.
inline double lambda_crit(const ModelParams& params, const State& u, double tol,
                          const DetConfig& cfg)
{
    params.validate();
    cfg.validate();
    model::require_finite(params, u);
    if (!(tol > 0.0)) throw std::invalid_argument("lambda_crit: tol must be positive");
    bool nonzero = false;
    for (double x : u.values())
    {
        if (x < 0.0) throw std::invalid_argument("lambda_crit: u must be nonnegative");
        if (x > 0.0) nonzero = true;
    }
    if (!nonzero) throw std::invalid_argument("lambda_crit: u must be nonzero");

    using K = Classification::Kind;
    const std::size_t d = params.d;
    std::vector<double> x(d);
    auto verdict = [&](double lambda) {
        for (std::size_t i = 0; i < d; ++i) x[i] = lambda * u[i];
        return classify_values(params, x, cfg).kind;
    };

    // Bracket: lo attracts, hi explodes, [ulo, uhi] hull of undecided points.
    double lo = -1.0, hi = -1.0, ulo = -1.0, uhi = -1.0;
    auto note = [&](double lambda, K k) {
        if (k == K::DomainOfAttraction)
            lo = std::max(lo, lambda);
        else if (k == K::DomainOfExplosion)
            hi = hi < 0.0 ? lambda : std::min(hi, lambda);
        else
        {
            ulo = ulo < 0.0 ? lambda : std::min(ulo, lambda);
            uhi = std::max(uhi, lambda);
        }
    };

    note(1.0, verdict(1.0));
    for (int i = 1; hi < 0.0; ++i)
    {
        if (i > 60) throw std::runtime_error("lambda_crit: no exploding scale within 60 doublings");
        const double l = std::ldexp(1.0, i);
        note(l, verdict(l));
    }
    for (int i = 1; lo < 0.0; ++i)
    {
        if (i > 60) throw std::runtime_error("lambda_crit: no attracting scale within 60 halvings");
        const double l = std::ldexp(1.0, -i);
        note(l, verdict(l));
    }
    if (lo >= hi) throw std::runtime_error("lambda_crit: verdicts are not monotone along the ray");

    const double width_tol = 0.5 * tol;
    for (int it = 0; it < 400; ++it)
    {
        const bool has_band = ulo >= 0.0 && ulo > lo && uhi < hi;
        if (!has_band)
        {
            if (hi - lo <= tol) break;
            const double m = 0.5 * (lo + hi);
            note(m, verdict(m));
            continue;
        }
        if (ulo - lo > width_tol)
        {
            const double m = 0.5 * (lo + ulo);
            note(m, verdict(m));
        }
        else if (hi - uhi > width_tol)
        {
            const double m = 0.5 * (uhi + hi);
            note(m, verdict(m));
        }
        else
            break;
    }
    return 0.5 * (lo + hi);
}

inline double lambda_crit(const ModelParams& params, const State& u, double tol)
{
    return lambda_crit(params, u, tol, default_classify_config());
}

}  // namespace phase
}  // namespace blowuplab
