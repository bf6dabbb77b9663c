#pragma once

// Time integration: adaptive Dormand-Prince run with blow-up extrapolation,
// Euler-Maruyama with noise freezing past the explosion certificate, and the
// Ornstein-Uhlenbeck comparison process.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "certificates.hpp"
#include "model.hpp"
#include "random.hpp"

namespace blowuplab {

struct DetConfig
{
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    double dt_init = 1e-4;
    double dt_max = 0.05;  // further capped at h^2/8
    double U_big = 1e6;
    double T_max = 1e3;
    /// keep every k-th accepted step; 0 keeps only the endpoints
    std::size_t record_stride = 1;

    void validate() const
    {
        if (!(rel_tol > 0.0 && abs_tol > 0.0 && dt_init > 0.0 && dt_max > 0.0 && T_max > 0.0))
            throw std::invalid_argument("DetConfig: all parameters must be positive");
        if (!(rel_tol <= 1e-3 && abs_tol <= 1e-3))
            throw std::invalid_argument("DetConfig: tolerances must not exceed 1e-3");
        if (!(U_big >= 1e3)) throw std::invalid_argument("DetConfig: U_big must be >= 1e3");
    }
};

struct SdeConfig
{
    double eps = 0.0;
    double dt = 1e-3;
    /// noise-freeze level; 0 selects twice the certificate level M*
    double M_freeze = 0.0;
    double T_cap = 1e6;
    /// keep every k-th Euler-Maruyama step; 0 keeps only the endpoints
    std::size_t record_stride = 0;
    /// a base step is bisected until (reaction rate) * substep <= refine_rate
    double refine_rate = 0.1;
    int max_refine = 20;
    /// settings for the frozen deterministic continuation
    DetConfig finish{.rel_tol = 1e-9, .abs_tol = 1e-12, .dt_init = 1e-5, .dt_max = 0.05,
                     .U_big = 1e6, .T_max = 1e3, .record_stride = 0};

    double resolved_freeze(const ModelParams& params) const
    {
        return M_freeze > 0.0 ? M_freeze : 2.0 * phase::certificate_levels(params).M_star;
    }

    void validate(const ModelParams& params) const
    {
        if (!(eps >= 0.0) || !std::isfinite(eps))
            throw std::invalid_argument("SdeConfig: eps must be >= 0");
        if (!(dt > 0.0)) throw std::invalid_argument("SdeConfig: dt must be positive");
        if (!(T_cap > 0.0)) throw std::invalid_argument("SdeConfig: T_cap must be positive");
        if (M_freeze > 0.0 && M_freeze < phase::certificate_levels(params).M_star)
            throw std::invalid_argument("SdeConfig: M_freeze below the certificate level M*");
        if (!(refine_rate > 0.0) || max_refine < 0)
            throw std::invalid_argument("SdeConfig: invalid refinement settings");
        finish.validate();
    }
};

struct Outcome
{
    enum class Kind
    {
        Exploded,
        Converged,
        Survived
    };

    Kind kind = Kind::Survived;
    /// tau_hat, time of entry into the convergence ball, or the horizon
    double time = 0.0;

    static Outcome exploded(double tau_hat) { return {Kind::Exploded, tau_hat}; }
    static Outcome converged(double t) { return {Kind::Converged, t}; }
    static Outcome survived(double horizon) { return {Kind::Survived, horizon}; }

    bool is_exploded() const noexcept { return kind == Kind::Exploded; }
    bool is_converged() const noexcept { return kind == Kind::Converged; }
    bool is_survived() const noexcept { return kind == Kind::Survived; }

    double tau_hat() const
    {
        if (!is_exploded()) throw std::logic_error("Outcome: not exploded");
        return time;
    }
};

inline std::string_view to_string(Outcome::Kind k)
{
    switch (k)
    {
        case Outcome::Kind::Exploded: return "exploded";
        case Outcome::Kind::Converged: return "converged";
        case Outcome::Kind::Survived: return "survived";
    }
    return "unknown";
}

struct PathRecord
{
    std::vector<double> times;
    std::vector<State> states;
    /// first time |X(t)| >= n (Euclidean norm)
    std::map<int, double> tau_n_crossings;
    /// tagged events, e.g. "pi_4" for the first time |u_d| >= 4, "freeze"
    std::vector<std::pair<std::string, double>> region_hits;

    void push(double t, State s)
    {
        if (!times.empty() && !(t > times.back()))
            throw std::logic_error("PathRecord: times must be strictly increasing");
        times.push_back(t);
        states.push_back(std::move(s));
    }

    bool ends_infinite() const { return !states.empty() && states.back().is_infinite(); }
};

/// Default levels n for the tau^n / pi^n bookkeeping: powers of two up to 2^20.
inline const std::vector<int>& default_crossing_levels()
{
    static const std::vector<int> levels = [] {
        std::vector<int> v;
        for (int n = 1; n <= (1 << 20); n *= 2) v.push_back(n);
        return v;
    }();
    return levels;
}

namespace integrator {

namespace detail {

class CrossingTracker
{
  public:
    explicit CrossingTracker(PathRecord& rec) : rec_(rec) {}

    void start(std::span<const double> u, double t)
    {
        prev_norm_ = model::euclidean_norm(u);
        prev_ud_ = std::abs(u.back());
        advance(prev_norm_, prev_ud_, t, t);
    }

    void step(double t0, double t1, std::span<const double> u1)
    {
        const double norm = model::euclidean_norm(u1);
        const double ud = std::abs(u1.back());
        advance(norm, ud, t0, t1);
        prev_norm_ = norm;
        prev_ud_ = ud;
    }

  private:
    static double interp(double t0, double t1, double a, double b, double level)
    {
        if (!(b > a)) return t1;
        const double f = std::clamp((level - a) / (b - a), 0.0, 1.0);
        return t0 + f * (t1 - t0);
    }

    void advance(double norm, double ud, double t0, double t1)
    {
        const auto& lv = default_crossing_levels();
        while (next_tau_ < lv.size() && norm >= lv[next_tau_])
        {
            const double level = lv[next_tau_];
            double t = interp(t0, t1, prev_norm_, norm, level);
            if (!rec_.tau_n_crossings.empty()) t = std::max(t, rec_.tau_n_crossings.rbegin()->second);
            rec_.tau_n_crossings.emplace(lv[next_tau_], t);
            ++next_tau_;
        }
        while (next_pi_ < lv.size() && ud >= lv[next_pi_])
        {
            const double t = interp(t0, t1, prev_ud_, ud, lv[next_pi_]);
            rec_.region_hits.emplace_back("pi_" + std::to_string(lv[next_pi_]), t);
            ++next_pi_;
        }
    }

    PathRecord& rec_;
    std::size_t next_tau_ = 0;
    std::size_t next_pi_ = 0;
    double prev_norm_ = 0.0;
    double prev_ud_ = 0.0;
};

enum class DetStop
{
    Exploded,
    Converged,
    Survived,
    CertificateFired
};

struct DetRaw
{
    DetStop stop = DetStop::Survived;
    double time = 0.0;
    double tau_hat = 0.0;
    std::vector<double> state;
    std::size_t steps = 0;
};

struct DetOptions
{
    double t0 = 0.0;
    bool record_initial = true;
    bool stop_at_certificate = false;
};

// Dormand-Prince 5(4) tableau
struct Dopri
{
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
};

inline bool all_finite(std::span<const double> u)
{
    for (double x : u)
    {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

inline double remaining_blowup_time(const ModelParams& prm, double ud)
{
    return prm.h * std::pow(ud, 1.0 - prm.p) / (2.0 * (prm.p - 1.0));
}

inline DetRaw run_deterministic(const ModelParams& prm, std::span<const double> u0,
                                const DetConfig& cfg, PathRecord* rec, CrossingTracker* tracker,
                                const DetOptions& opt)
{
    using D = Dopri;
    const std::size_t d = prm.d;
    const CertificateLevels lv = phase::certificate_levels(prm);
    const double dt_cap = std::min(cfg.dt_max, prm.h * prm.h / 8.0);
    const double t_end = opt.t0 + cfg.T_max;

    std::vector<double> y(u0.begin(), u0.end()), y_new(d), tmp(d), err_v(d);
    std::array<std::vector<double>, 7> k;
    for (auto& v : k) v.assign(d, 0.0);

    DetRaw out;
    double t = opt.t0;
    if (rec && opt.record_initial) rec->push(t, State(y));
    if (tracker && opt.record_initial) tracker->start(y, t);

    auto finish = [&](DetStop stop) {
        out.stop = stop;
        out.time = t;
        out.state = y;
        if (rec && (rec->times.empty() || rec->times.back() < t)) rec->push(t, State(y));
        return out;
    };

    auto check = [&]() -> std::optional<DetStop> {
        if (model::euclidean_norm(y) <= lv.r_conv) return DetStop::Converged;
        const bool cert = phase::explosion_certificate_of(lv, y);
        if (cert && opt.stop_at_certificate) return DetStop::CertificateFired;
        if (cert && y[d - 1] >= cfg.U_big)
        {
            out.tau_hat = t + remaining_blowup_time(prm, y[d - 1]);
            return DetStop::Exploded;
        }
        if (t >= t_end) return DetStop::Survived;
        return std::nullopt;
    };

    if (auto s = check())
    {
        auto r = finish(*s);
        if (r.stop == DetStop::Exploded && rec) rec->push(r.tau_hat, State::infinity());
        return r;
    }

    model::drift_into(prm, y, k[0]);
    double dt = std::min(cfg.dt_init, dt_cap);
    double err_prev = 1e-4;
    std::size_t since_record = 0;

    while (true)
    {
        const double dt_min = 1e-15 * std::max(1.0, std::abs(t));
        dt = std::min({dt, dt_cap, t_end - t});
        if (dt < dt_min)
        {
            if (t_end - t < dt_min) t = t_end;
            else throw NumericalFailure("deterministic step size underflow at t=" + std::to_string(t));
            if (auto s = check()) return finish(*s);
        }

        auto stage = [&](std::vector<double>& dst, std::initializer_list<std::pair<double, int>> terms) {
            for (std::size_t i = 0; i < d; ++i)
            {
                double acc = 0.0;
                for (auto [a, j] : terms) acc += a * k[j][i];
                tmp[i] = y[i] + dt * acc;
            }
            model::drift_into(prm, tmp, dst);
        };
        stage(k[1], {{D::a21, 0}});
        stage(k[2], {{D::a31, 0}, {D::a32, 1}});
        stage(k[3], {{D::a41, 0}, {D::a42, 1}, {D::a43, 2}});
        stage(k[4], {{D::a51, 0}, {D::a52, 1}, {D::a53, 2}, {D::a54, 3}});
        stage(k[5], {{D::a61, 0}, {D::a62, 1}, {D::a63, 2}, {D::a64, 3}, {D::a65, 4}});
        for (std::size_t i = 0; i < d; ++i)
        {
            y_new[i] = y[i] + dt * (D::b1 * k[0][i] + D::b3 * k[2][i] + D::b4 * k[3][i] +
                                    D::b5 * k[4][i] + D::b6 * k[5][i]);
        }
        double err = std::numeric_limits<double>::infinity();
        if (all_finite(y_new))
        {
            model::drift_into(prm, y_new, k[6]);
            double s = 0.0;
            for (std::size_t i = 0; i < d; ++i)
            {
                const double e = dt * (D::e1 * k[0][i] + D::e3 * k[2][i] + D::e4 * k[3][i] +
                                       D::e5 * k[4][i] + D::e6 * k[5][i] + D::e7 * k[6][i]);
                const double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y[i]), std::abs(y_new[i]));
                s += (e / sc) * (e / sc);
            }
            err = std::sqrt(s / static_cast<double>(d));
            if (!std::isfinite(err)) err = std::numeric_limits<double>::infinity();
        }

        if (err <= 1.0)
        {
            const double t_prev = t;
            t = (dt == t_end - t) ? t_end : t + dt;
            y.swap(y_new);
            std::swap(k[0], k[6]);
            ++out.steps;
            if (tracker) tracker->step(t_prev, t, y);
            if (rec && cfg.record_stride > 0 && ++since_record >= cfg.record_stride)
            {
                rec->push(t, State(y));
                since_record = 0;
            }
            // PI step control
            const double e = std::max(err, 1e-10);
            const double fac = 0.9 * std::pow(e, -0.17) * std::pow(err_prev, 0.04);
            dt *= std::clamp(fac, 0.2, 10.0);
            err_prev = std::max(err, 1e-4);
            if (auto s = check())
            {
                auto r = finish(*s);
                if (r.stop == DetStop::Exploded && rec) rec->push(r.tau_hat, State::infinity());
                return r;
            }
        }
        else
        {
            const double fac = std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.2;
            dt *= fac;
            if (dt < dt_min && !all_finite(y_new))
                throw NumericalFailure("non-finite state in deterministic integration at t=" +
                                       std::to_string(t));
        }
    }
}

inline Outcome outcome_of(const DetRaw& raw)
{
    switch (raw.stop)
    {
        case DetStop::Exploded: return Outcome::exploded(raw.tau_hat);
        case DetStop::Converged: return Outcome::converged(raw.time);
        case DetStop::Survived: return Outcome::survived(raw.time);
        case DetStop::CertificateFired: break;
    }
    throw std::logic_error("outcome_of: certificate stop has no outcome");
}

}  // namespace detail

struct DetRun
{
    Outcome outcome;
    PathRecord path;
    std::size_t steps = 0;
};

/// Blow-up time of u' = (2/h) u^p started from u_d at time t.
inline double blowup_extrapolate(const ModelParams& params, double u_d, double t)
{
    params.validate();
    const double level = phase::certificate_levels(params).M_star;
    if (!(u_d >= level))
        throw std::invalid_argument("blowup_extrapolate: u_d below the certificate level");
    return t + detail::remaining_blowup_time(params, u_d);
}

inline DetRun integrate_deterministic(const ModelParams& params, const State& u0,
                                      const DetConfig& cfg)
{
    params.validate();
    cfg.validate();
    model::require_finite(params, u0);
    DetRun run;
    detail::CrossingTracker tracker(run.path);
    const auto raw = detail::run_deterministic(params, u0.values(), cfg, &run.path, &tracker, {});
    run.outcome = detail::outcome_of(raw);
    run.steps = raw.steps;
    return run;
}

struct SdeRun
{
    Outcome outcome;
    PathRecord path;
    std::size_t steps = 0;
    std::optional<double> freeze_time;
};

/// Observer that ignores every step.
struct NoObserver
{
    void operator()(double, std::span<const double>, double, std::span<const double>) const {}
};

/// Euler-Maruyama for dU = b(U) dt + eps dW. Base increments are drawn from
/// `stream` (d normals per base step, in coordinate order); when a step is
/// refined, the base increment is split by a Brownian bridge whose extra
/// normals come from a child stream, so the base path W is the same whatever
/// the refinement. Once the certificate holds with u_d >= M_freeze the noise
/// is frozen and the deterministic solver finishes the trajectory.
template <class Observer>
SdeRun integrate_sde_observed(const ModelParams& prm, const State& u0, const SdeConfig& cfg,
                              RandomStream& stream, Observer&& observe)
{
    prm.validate();
    cfg.validate(prm);
    model::require_finite(prm, u0);
    const std::size_t d = prm.d;

    SdeRun run;
    detail::CrossingTracker tracker(run.path);

    if (cfg.eps == 0.0)
    {
        DetConfig det = cfg.finish;
        det.T_max = cfg.T_cap;
        det.record_stride = cfg.record_stride;
        const auto raw = detail::run_deterministic(prm, u0.values(), det, &run.path, &tracker, {});
        run.outcome = detail::outcome_of(raw);
        run.steps = raw.steps;
        return run;
    }

    const CertificateLevels lv = phase::certificate_levels(prm);
    const double freeze = cfg.resolved_freeze(prm);
    const double dt = cfg.dt;
    const double sqdt = std::sqrt(dt);
    RandomStream bridge = stream.split(0xB0D6Eull);

    std::vector<double> u(u0.values().begin(), u0.values().end()), u_new(d), b(d), dw(d);
    std::vector<double> sub;  // refined increments, row-major [piece][coordinate]
    double t = 0.0;
    std::size_t base_index = 0;
    std::size_t since_record = 0;

    run.path.push(t, State(u));
    tracker.start(u, t);

    auto em_step = [&](double t0, double t1, double h, const double* inc) {
        model::drift_into(prm, u, b);
        for (std::size_t i = 0; i < d; ++i) u_new[i] = u[i] + b[i] * h + cfg.eps * inc[i];
        if (!detail::all_finite(u_new))
            throw NumericalFailure("non-finite state in Euler-Maruyama at t=" + std::to_string(t1));
        observe(t0, std::span<const double>(u), t1, std::span<const double>(u_new));
        tracker.step(t0, t1, u_new);
        u.swap(u_new);
        ++run.steps;
        if (cfg.record_stride > 0 && ++since_record >= cfg.record_stride)
        {
            run.path.push(t1, State(u));
            since_record = 0;
        }
    };

    auto frozen = [&]() { return u[d - 1] >= freeze && phase::explosion_certificate_of(lv, u); };

    while (!frozen())
    {
        if (t >= cfg.T_cap)
        {
            if (run.path.times.back() < t) run.path.push(t, State(u));
            run.outcome = Outcome::survived(cfg.T_cap);
            return run;
        }
        for (std::size_t i = 0; i < d; ++i) dw[i] = sqdt * stream.normal();

        const double rate = (2.0 / prm.h) * prm.p * model::positive_power(u[d - 1], prm.p - 1.0);
        int level = 0;
        while (level < cfg.max_refine && std::ldexp(dt, -level) * rate > cfg.refine_rate) ++level;

        const double t_base = static_cast<double>(base_index) * dt;
        const double t_next = static_cast<double>(base_index + 1) * dt;
        if (level == 0)
        {
            em_step(t, t_next, dt, dw.data());
            t = t_next;
        }
        else
        {
            const std::size_t pieces = std::size_t{1} << level;
            sub.assign(pieces * d, 0.0);
            for (std::size_t i = 0; i < d; ++i) sub[i] = dw[i];
            // Breadth-first bridge: at each level split every piece in two.
            for (std::size_t width = 1; width < pieces; width *= 2)
            {
                const double len = dt / static_cast<double>(width);
                const double sd = std::sqrt(len) * 0.5;
                for (std::size_t j = width; j-- > 0;)
                {
                    for (std::size_t i = 0; i < d; ++i)
                    {
                        const double total = sub[j * d + i];
                        const double left = 0.5 * total + sd * bridge.normal();
                        sub[(2 * j) * d + i] = left;
                        sub[(2 * j + 1) * d + i] = total - left;
                    }
                }
            }
            const double h = std::ldexp(dt, -level);
            for (std::size_t j = 0; j < pieces; ++j)
            {
                const double t1 = (j + 1 == pieces) ? t_next : t_base + static_cast<double>(j + 1) * h;
                em_step(t, t1, h, &sub[j * d]);
                t = t1;
                if (frozen()) break;
            }
        }
        ++base_index;
        if (frozen()) break;
    }

    run.freeze_time = t;
    run.path.region_hits.emplace_back("freeze", t);
    if (run.path.times.back() < t) run.path.push(t, State(u));

    detail::DetOptions opt;
    opt.t0 = t;
    opt.record_initial = false;
    const auto raw = detail::run_deterministic(prm, u, cfg.finish, &run.path, &tracker, opt);
    run.steps += raw.steps;
    if (raw.stop != detail::DetStop::Exploded)
        throw NumericalFailure("frozen continuation did not explode");
    run.outcome = Outcome::exploded(raw.tau_hat);
    return run;
}

inline SdeRun integrate_sde(const ModelParams& params, const State& u0, const SdeConfig& cfg,
                            RandomStream& stream)
{
    return integrate_sde_observed(params, u0, cfg, stream, NoObserver{});
}

/// Euler-Maruyama for dY = (linear part of the drift) dt + eps dW on
/// [0, cfg.T_cap]. Consumes the stream exactly like the base increments of
/// integrate_sde, so the two can be driven by the same noise.
inline PathRecord integrate_ou(const ModelParams& prm, const State& y0, double eps,
                               const SdeConfig& cfg, RandomStream& stream)
{
    prm.validate();
    model::require_finite(prm, y0);
    if (!(eps >= 0.0)) throw std::invalid_argument("integrate_ou: eps must be >= 0");
    if (!(cfg.dt > 0.0 && cfg.T_cap > 0.0)) throw std::invalid_argument("integrate_ou: bad config");
    const std::size_t d = prm.d;
    const double dt = cfg.dt;
    const double sqdt = std::sqrt(dt);
    std::vector<double> y(y0.values().begin(), y0.values().end()), b(d), dw(d);
    PathRecord rec;
    rec.push(0.0, State(y));
    std::size_t since_record = 0;
    for (std::size_t n = 0;; ++n)
    {
        const double t = static_cast<double>(n) * dt;
        if (t >= cfg.T_cap) break;
        for (std::size_t i = 0; i < d; ++i) dw[i] = sqdt * stream.normal();
        model::linear_drift_into(prm, y, b);
        for (std::size_t i = 0; i < d; ++i) y[i] += b[i] * dt + eps * dw[i];
        if (!detail::all_finite(y)) throw NumericalFailure("non-finite state in OU integration");
        if (cfg.record_stride > 0 && ++since_record >= cfg.record_stride)
        {
            rec.push(static_cast<double>(n + 1) * dt, State(y));
            since_record = 0;
        }
    }
    return rec;
}

/// First recorded time at which `region` holds, refined by bisection along
/// the straight segment from the previous recorded state.
template <class Region>
std::optional<double> hitting_time(const PathRecord& record, Region&& region)
{
    for (std::size_t k = 0; k < record.states.size(); ++k)
    {
        if (!region(record.states[k])) continue;
        if (k == 0) return record.times[0];
        const State& a = record.states[k - 1];
        const State& b = record.states[k];
        if (a.is_infinite() || b.is_infinite()) return record.times[k];
        double lo = 0.0, hi = 1.0;
        std::vector<double> x(a.size());
        for (int it = 0; it < 60; ++it)
        {
            const double mid = 0.5 * (lo + hi);
            for (std::size_t i = 0; i < x.size(); ++i) x[i] = a[i] + mid * (b[i] - a[i]);
            if (region(State(x)))
                hi = mid;
            else
                lo = mid;
        }
        return record.times[k - 1] + hi * (record.times[k] - record.times[k - 1]);
    }
    return std::nullopt;
}

/// CSV with columns t,u_1..u_d and trailing '#' metadata lines.
inline void write_path_csv(std::ostream& os, const PathRecord& rec, std::size_t d,
                           const Outcome& outcome)
{
    os << "t";
    for (std::size_t i = 1; i <= d; ++i) os << ",u_" << i;
    os << '\n';
    os << std::setprecision(17);
    for (std::size_t k = 0; k < rec.times.size(); ++k)
    {
        os << rec.times[k];
        for (std::size_t i = 0; i < d; ++i)
        {
            os << ',';
            if (rec.states[k].is_infinite())
                os << "inf";
            else
                os << rec.states[k][i];
        }
        os << '\n';
    }
    os << "# outcome=" << to_string(outcome.kind) << '\n';
    if (outcome.is_exploded())
        os << "# tau_hat=" << outcome.time << '\n';
    else
        os << "# time=" << outcome.time << '\n';
    for (const auto& [n, t] : rec.tau_n_crossings) os << "# tau_" << n << '=' << t << '\n';
}

}  // namespace integrator
}  // namespace blowuplab
