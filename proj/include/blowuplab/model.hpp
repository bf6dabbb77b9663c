#pragma once

// Deterministic part of the discretized heat equation with a nonlinear
// Neumann flux at the right end: vector field, reaction term, potential and
// its gradient, plus the constants derived from them.

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace blowuplab {

/// Raised when an integration produces a non-finite state or a collapsed
/// step before any termination criterion fired.
class NumericalFailure : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

enum class DriftMode
{
    PaperDrift,    ///< literal right-hand side of the semi-discrete system
    GradientExact  ///< exact negative gradient of the potential
};

inline std::string_view to_string(DriftMode mode)
{
    return mode == DriftMode::PaperDrift ? "paper" : "gradient";
}

inline DriftMode drift_mode_from_string(std::string_view s)
{
    if (s == "paper" || s == "PaperDrift") return DriftMode::PaperDrift;
    if (s == "gradient" || s == "GradientExact") return DriftMode::GradientExact;
    throw std::invalid_argument("unknown drift mode '" + std::string(s) + "'");
}

struct ModelParams
{
    std::size_t d = 2;
    double h = 2.0;
    double p = 2.0;
    DriftMode mode = DriftMode::PaperDrift;

    void validate() const
    {
        if (d < 2) throw std::invalid_argument("ModelParams: d must be >= 2");
        if (!(h > 0.0) || !std::isfinite(h))
            throw std::invalid_argument("ModelParams: h must be positive");
        if (!(p > 1.0) || !std::isfinite(p))
            throw std::invalid_argument("ModelParams: p must exceed 1");
    }

    ModelParams with_mode(DriftMode m) const
    {
        ModelParams out = *this;
        out.mode = m;
        return out;
    }
};

/// A point of R^d or the absorbing marker Infinity.
class State
{
  public:
    State() : infinite_(true) {}

    explicit State(std::vector<double> u) : u_(std::move(u)), infinite_(false)
    {
        for (double x : u_)
        {
            if (!std::isfinite(x))
                throw std::invalid_argument("State: coordinates must be finite");
        }
    }

    static State infinity() { return State(); }

    static State constant(std::size_t d, double value)
    {
        return State(std::vector<double>(d, value));
    }

    bool is_infinite() const noexcept { return infinite_; }
    bool is_finite() const noexcept { return !infinite_; }

    std::size_t size() const noexcept { return u_.size(); }

    std::span<const double> values() const
    {
        if (infinite_) throw std::invalid_argument("State: Infinity has no coordinates");
        return u_;
    }

    double operator[](std::size_t i) const { return values()[i]; }

    friend bool operator==(const State&, const State&) = default;

  private:
    std::vector<double> u_;
    bool infinite_;
};

struct EnergyReport
{
    double phi = 0.0;
    double quad = 0.0;
    double reaction = 0.0;
};

namespace model {

/// (x^+)^p with small-integer exponents evaluated by multiplication.
inline double positive_power(double x, double p)
{
    if (x <= 0.0) return 0.0;
    if (p == 2.0) return x * x;
    if (p == 3.0) return x * x * x;
    return std::pow(x, p);
}

/// g(x) = (x^+)^p - x
inline double reaction(double p, double x)
{
    return positive_power(x, p) - x;
}

inline void require_finite(const ModelParams& params, const State& u)
{
    if (u.is_infinite()) throw std::invalid_argument("state is Infinity");
    if (u.size() != params.d)
        throw std::invalid_argument("state dimension does not match d");
}

/// Drift kernel parameterized by the boundary reaction so that truncated
/// drifts share the code path bit for bit.
template <class Reaction>
void drift_with(const ModelParams& prm, std::span<const double> u, std::span<double> out,
                Reaction&& react)
{
    const std::size_t d = prm.d;
    const double inv_h2 = 1.0 / (prm.h * prm.h);
    const double two_inv_h2 = 2.0 * inv_h2;
    const double gd = react(u[d - 1]);
    if (prm.mode == DriftMode::PaperDrift)
    {
        out[0] = two_inv_h2 * (-u[0] + u[1]);
        for (std::size_t i = 1; i + 1 < d; ++i)
            out[i] = inv_h2 * (u[i + 1] - 2.0 * u[i] + u[i - 1]);
        out[d - 1] = two_inv_h2 * (-u[d - 1] + u[d - 2] + prm.h * gd);
    }
    else
    {
        // -grad phi, written so that node 1 and node d coincide with the
        // literal rows and interior rows are exactly twice them.
        out[0] = two_inv_h2 * (u[1] - u[0]);
        for (std::size_t i = 1; i + 1 < d; ++i)
            out[i] = two_inv_h2 * ((u[i + 1] - u[i]) + (u[i - 1] - u[i]));
        out[d - 1] = two_inv_h2 * (-u[d - 1] + u[d - 2] + prm.h * gd);
    }
}

inline void drift_into(const ModelParams& prm, std::span<const double> u, std::span<double> out)
{
    const double p = prm.p;
    drift_with(prm, u, out, [p](double x) { return reaction(p, x); });
}

/// Linear part of the drift (superlinear term removed): the
/// Ornstein-Uhlenbeck comparison field.
inline void linear_drift_into(const ModelParams& prm, std::span<const double> u,
                              std::span<double> out)
{
    drift_with(prm, u, out, [](double x) { return -x; });
}

inline std::vector<double> drift(const ModelParams& params, const State& u)
{
    require_finite(params, u);
    std::vector<double> out(params.d);
    drift_into(params, u.values(), out);
    return out;
}

inline double dirichlet_form(const ModelParams& prm, std::span<const double> u)
{
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < prm.d; ++i)
    {
        const double diff = u[i + 1] - u[i];
        s += diff * diff;
    }
    return s / (prm.h * prm.h);
}

/// Boundary antiderivative (x^+)^{p+1}/(p+1) - x^2/2.
inline double boundary_potential(double p, double x)
{
    return positive_power(x, p + 1.0) / (p + 1.0) - 0.5 * x * x;
}

inline EnergyReport energy_of(const ModelParams& prm, std::span<const double> u)
{
    EnergyReport r;
    r.quad = dirichlet_form(prm, u);
    r.reaction = (2.0 / prm.h) * boundary_potential(prm.p, u[prm.d - 1]);
    r.phi = r.quad - r.reaction;
    return r;
}

inline EnergyReport energy(const ModelParams& params, const State& u)
{
    require_finite(params, u);
    return energy_of(params, u.values());
}

inline double phi(const ModelParams& prm, std::span<const double> u)
{
    return energy_of(prm, u).phi;
}

inline void grad_energy_into(const ModelParams& prm, std::span<const double> u,
                             std::span<double> out)
{
    const std::size_t d = prm.d;
    const double c = 2.0 / (prm.h * prm.h);
    out[0] = c * (u[0] - u[1]);
    for (std::size_t i = 1; i + 1 < d; ++i)
        out[i] = c * ((u[i] - u[i - 1]) + (u[i] - u[i + 1]));
    out[d - 1] = c * (u[d - 1] - u[d - 2]) - (2.0 / prm.h) * reaction(prm.p, u[d - 1]);
}

inline std::vector<double> grad_energy(const ModelParams& params, const State& u)
{
    require_finite(params, u);
    std::vector<double> out(params.d);
    grad_energy_into(params, u.values(), out);
    return out;
}

/// Weights w with grad phi = -diag(w) * (literal drift).
inline std::vector<double> dissipation_weights(const ModelParams& params)
{
    std::vector<double> w(params.d, 2.0);
    w.front() = 1.0;
    w.back() = 1.0;
    return w;
}

/// Barrier 2(phi(1) - phi(0)).
inline double delta(const ModelParams& params)
{
    return (4.0 / params.h) * (0.5 - 1.0 / (params.p + 1.0));
}

/// Smallest eigenvalue of a symmetric tridiagonal matrix by Sturm-sequence
/// bisection.
inline double tridiagonal_min_eigenvalue(std::span<const double> diag,
                                         std::span<const double> off)
{
    const std::size_t n = diag.size();
    double lo = diag[0], hi = diag[0];
    for (std::size_t i = 0; i < n; ++i)
    {
        double r = 0.0;
        if (i > 0) r += std::abs(off[i - 1]);
        if (i + 1 < n) r += std::abs(off[i]);
        lo = std::min(lo, diag[i] - r);
        hi = std::max(hi, diag[i] + r);
    }
    // count of eigenvalues strictly below x
    auto count_below = [&](double x) {
        std::size_t count = 0;
        double q = diag[0] - x;
        if (q < 0.0) ++count;
        for (std::size_t i = 1; i < n; ++i)
        {
            if (q == 0.0) q = std::numeric_limits<double>::epsilon() * (std::abs(hi) + std::abs(lo));
            q = diag[i] - x - off[i - 1] * off[i - 1] / q;
            if (q < 0.0) ++count;
        }
        return count;
    };
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it)
    {
        const double mid = 0.5 * (lo + hi);
        if (count_below(mid) >= 1)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

/// Smallest eigenvalue of the Hessian of phi at the origin, i.e. of the
/// quadratic confinement (Dirichlet form plus u_d^2/h).
inline double confinement_min_eigenvalue(const ModelParams& prm)
{
    const std::size_t d = prm.d;
    const double c = 2.0 / (prm.h * prm.h);
    std::vector<double> diag(d, 2.0 * c), off(d - 1, -c);
    diag.front() = c;
    diag.back() = c + 2.0 / prm.h;
    return tridiagonal_min_eigenvalue(diag, off);
}

/// Upper bound on the spectral norm of the linear part of the drift,
/// sqrt(||L||_1 ||L||_inf).
inline double linear_part_norm_bound(const ModelParams& prm)
{
    const std::size_t d = prm.d;
    std::vector<double> row_sum(d, 0.0), col_sum(d, 0.0);
    std::vector<double> e(d, 0.0), col(d, 0.0);
    for (std::size_t j = 0; j < d; ++j)
    {
        e.assign(d, 0.0);
        e[j] = 1.0;
        linear_drift_into(prm, e, col);
        for (std::size_t i = 0; i < d; ++i)
        {
            col_sum[j] += std::abs(col[i]);
            row_sum[i] += std::abs(col[i]);
        }
    }
    double n1 = 0.0, ninf = 0.0;
    for (std::size_t i = 0; i < d; ++i)
    {
        n1 = std::max(n1, col_sum[i]);
        ninf = std::max(ninf, row_sum[i]);
    }
    return std::sqrt(n1 * ninf);
}

inline double euclidean_norm(std::span<const double> u)
{
    double s = 0.0;
    for (double x : u) s += x * x;
    return std::sqrt(s);
}

inline double max_abs(std::span<const double> u)
{
    double m = 0.0;
    for (double x : u) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace model
}  // namespace blowuplab
