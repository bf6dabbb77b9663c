#pragma once

// Seeded epsilon sweeps over replicas and the estimators applied to them.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <iomanip>
#include <istream>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "domain_g.hpp"
#include "integrator.hpp"
#include "model.hpp"
#include "parallel.hpp"
#include "random.hpp"

namespace blowuplab {

enum class Experiment
{
    ExplosionTime,
    ExitFromG
};

inline std::string_view to_string(Experiment e)
{
    return e == Experiment::ExplosionTime ? "explosion" : "exit";
}

inline Experiment experiment_from_string(std::string_view s)
{
    if (s == "explosion") return Experiment::ExplosionTime;
    if (s == "exit") return Experiment::ExitFromG;
    throw std::invalid_argument("unknown experiment '" + std::string(s) + "' (expected explosion|exit)");
}

struct SweepSpec
{
    ModelParams model;
    std::vector<double> eps_list;
    std::size_t N = 100;
    State u0 = State::constant(2, 0.0);
    std::uint64_t seed = 0;
    SdeConfig sde;
    Experiment experiment = Experiment::ExplosionTime;
    std::shared_ptr<const DomainG> domain;
    unsigned workers = 1;

    void validate() const
    {
        model.validate();
        if (eps_list.empty()) throw std::invalid_argument("SweepSpec: eps_list is empty");
        for (std::size_t i = 0; i < eps_list.size(); ++i)
        {
            if (!(eps_list[i] >= 0.0) || !std::isfinite(eps_list[i]))
                throw std::invalid_argument("SweepSpec: eps values must be finite and >= 0");
            if (i > 0 && !(eps_list[i] < eps_list[i - 1]))
                throw std::invalid_argument("SweepSpec: eps_list must be strictly decreasing");
        }
        if (N < 2) throw std::invalid_argument("SweepSpec: N must be at least 2");
        model::require_finite(model, u0);
        SdeConfig probe = sde;
        probe.eps = eps_list.front();
        probe.validate(model);
        if (experiment == Experiment::ExitFromG)
        {
            if (!domain) throw std::invalid_argument("SweepSpec: exit experiment needs a domain");
            if (model.d != 2) throw std::invalid_argument("SweepSpec: exit experiment needs d = 2");
        }
    }
};

enum class RowOutcome
{
    Exploded,
    Converged,
    Survived,
    Failed
};

inline std::string_view to_string(RowOutcome o)
{
    switch (o)
    {
        case RowOutcome::Exploded: return "exploded";
        case RowOutcome::Converged: return "converged";
        case RowOutcome::Survived: return "survived";
        case RowOutcome::Failed: return "failed";
    }
    return "unknown";
}

inline RowOutcome row_outcome_from_string(std::string_view s)
{
    if (s == "exploded") return RowOutcome::Exploded;
    if (s == "converged") return RowOutcome::Converged;
    if (s == "survived") return RowOutcome::Survived;
    if (s == "failed") return RowOutcome::Failed;
    throw std::invalid_argument("unknown outcome '" + std::string(s) + "'");
}

struct SampleRow
{
    double eps = 0.0;
    std::size_t replica = 0;
    RowOutcome outcome = RowOutcome::Failed;
    /// explosion time; the cap T_cap when the row is survived
    std::optional<double> tau_hat;
    /// exit time from G; the cap when the path never left G
    std::optional<double> exit_time;
    /// set only for observed exits
    std::optional<bool> exit_in_partial1;
    std::size_t steps = 0;

    bool operator==(const SampleRow&) const = default;
};

struct SampleTable
{
    std::vector<SampleRow> rows;

    bool operator==(const SampleTable&) const = default;
};

/// A time sample that may be right-censored: the true value exceeds `value`.
struct Observation
{
    double value = 0.0;
    bool censored = false;
};

namespace montecarlo {

namespace detail {

struct ExitWatcher
{
    const DomainG* domain = nullptr;
    std::optional<double> exit_time;
    std::optional<bool> in_partial1;

    void operator()(double t0, std::span<const double> a, double t1, std::span<const double> b)
    {
        if (exit_time || domain->contains(b[0], b[1])) return;
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 40; ++it)
        {
            const double mid = 0.5 * (lo + hi);
            if (domain->contains(a[0] + mid * (b[0] - a[0]), a[1] + mid * (b[1] - a[1])))
                lo = mid;
            else
                hi = mid;
        }
        exit_time = t0 + hi * (t1 - t0);
        in_partial1 = domain->nearest_vertex_in_partial1(a[0] + hi * (b[0] - a[0]),
                                                         a[1] + hi * (b[1] - a[1]));
    }
};

inline SampleRow simulate_row(const SweepSpec& spec, std::size_t eps_index, std::size_t replica)
{
    SampleRow row;
    row.eps = spec.eps_list[eps_index];
    row.replica = replica;
    SdeConfig cfg = spec.sde;
    cfg.eps = row.eps;
    cfg.record_stride = 0;
    RandomStream stream = RandomStream::derive(spec.seed, {eps_index, replica});
    try
    {
        integrator::SdeRun run;
        ExitWatcher watcher{spec.domain.get(), std::nullopt, std::nullopt};
        if (spec.experiment == Experiment::ExitFromG)
        {
            if (!spec.domain->contains(spec.u0[0], spec.u0[1]))
                throw std::invalid_argument("run_sweep: u0 is outside G");
            run = integrator::integrate_sde_observed(spec.model, spec.u0, cfg, stream, std::ref(watcher));
        }
        else
            run = integrator::integrate_sde(spec.model, spec.u0, cfg, stream);
        row.steps = run.steps;
        switch (run.outcome.kind)
        {
            case Outcome::Kind::Exploded:
                row.outcome = RowOutcome::Exploded;
                row.tau_hat = run.outcome.time;
                break;
            case Outcome::Kind::Converged: row.outcome = RowOutcome::Converged; break;
            case Outcome::Kind::Survived:
                row.outcome = RowOutcome::Survived;
                row.tau_hat = run.outcome.time;
                break;
        }
        if (spec.experiment == Experiment::ExitFromG)
        {
            if (watcher.exit_time)
            {
                row.exit_time = watcher.exit_time;
                row.exit_in_partial1 = watcher.in_partial1;
            }
            else if (row.outcome == RowOutcome::Survived)
                row.exit_time = cfg.T_cap;
            else
                throw NumericalFailure("path left the state space without crossing the boundary"
                                       " of G");
        }
    }
    catch (const NumericalFailure&)
    {
        row = SampleRow{};
        row.eps = spec.eps_list[eps_index];
        row.replica = replica;
        row.outcome = RowOutcome::Failed;
    }
    return row;
}

}  // namespace detail

/// Runs every (eps, replica) pair; rows are ordered by (eps index, replica)
/// and do not depend on the worker count.
inline SampleTable run_sweep(const SweepSpec& spec)
{
    spec.validate();
    const std::size_t n_eps = spec.eps_list.size();
    SampleTable table;
    table.rows.resize(n_eps * spec.N);
    parallel_for(table.rows.size(), spec.workers, [&](std::size_t i) {
        table.rows[i] = detail::simulate_row(spec, i / spec.N, i % spec.N);
    });
    return table;
}

/// Smallest order statistic x_(k) with k >= ceil(N q).
inline std::size_t quantile_rank(std::size_t n, double q)
{
    const double kq = std::ceil(static_cast<double>(n) * q - 1e-12);
    return std::clamp<std::size_t>(static_cast<std::size_t>(kq), 1, n);
}

inline double one_minus_inv_e() { return 1.0 - std::exp(-1.0); }

/// Empirical (1 - 1/e)-quantile of sorted positive samples.
inline double estimate_beta(std::span<const double> sorted)
{
    if (sorted.size() < 2) throw std::invalid_argument("estimate_beta: need at least 2 samples");
    for (std::size_t i = 0; i < sorted.size(); ++i)
    {
        if (!(sorted[i] > 0.0) || !std::isfinite(sorted[i]))
            throw std::invalid_argument("estimate_beta: samples must be positive and finite");
        if (i > 0 && sorted[i] < sorted[i - 1])
            throw std::invalid_argument("estimate_beta: samples must be sorted");
    }
    return sorted[quantile_rank(sorted.size(), one_minus_inv_e()) - 1];
}

/// Quantile with right-censoring: the k-th order statistic is known exactly
/// only if no censored value lies at or below it.
inline std::optional<double> censored_quantile(std::vector<Observation> obs, double q)
{
    if (obs.size() < 2) return std::nullopt;
    std::sort(obs.begin(), obs.end(), [](const Observation& a, const Observation& b) {
        if (a.value != b.value) return a.value < b.value;
        return a.censored > b.censored;
    });
    const std::size_t k = quantile_rank(obs.size(), q);
    for (std::size_t i = 0; i < k; ++i)
    {
        if (obs[i].censored) return std::nullopt;
    }
    return obs[k - 1].value;
}

inline std::optional<double> estimate_beta_censored(const std::vector<Observation>& obs)
{
    return censored_quantile(obs, one_minus_inv_e());
}

struct ExponentFit
{
    double delta_hat = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

/// Least squares of log beta against eps^-2.
inline ExponentFit fit_exponent(std::span<const double> eps, std::span<const double> beta)
{
    if (eps.size() != beta.size()) throw std::invalid_argument("fit_exponent: size mismatch");
    if (eps.size() < 3) throw std::invalid_argument("fit_exponent: need at least 3 points");
    const std::size_t n = eps.size();
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        if (!std::isfinite(eps[i]) || !std::isfinite(beta[i]))
            throw std::invalid_argument("fit_exponent: non-finite input");
        if (!(eps[i] > 0.0) || !(beta[i] > 0.0))
            throw std::invalid_argument("fit_exponent: inputs must be positive");
        x[i] = 1.0 / (eps[i] * eps[i]);
        y[i] = std::log(beta[i]);
    }
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i)
    {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (!(sxx > 0.0)) throw std::invalid_argument("fit_exponent: eps values must differ");
    ExponentFit f;
    f.delta_hat = sxy / sxx;
    f.intercept = my - f.delta_hat * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < n; ++i)
    {
        const double r = y[i] - (f.intercept + f.delta_hat * x[i]);
        ss_res += r * r;
    }
    f.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    return f;
}

/// Kolmogorov-Smirnov distance to Exp(1).
inline double ks_exp1(std::vector<double> x)
{
    if (x.empty()) throw std::invalid_argument("ks_exp1: empty sample");
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        const double f = x[i] > 0.0 ? -std::expm1(-x[i]) : 0.0;
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

struct BootstrapInterval
{
    double lo = 0.0;
    double hi = 0.0;
    /// zero-width interval from a degenerate sample
    bool degenerate = false;
    std::size_t valid_resamples = 0;
};

/// Percentile bootstrap. Resamples where the statistic is absent are
/// skipped; fewer than half valid resamples gives no interval.
template <class T, class Statistic>
std::optional<BootstrapInterval> bootstrap_interval(const std::vector<T>& samples,
                                                    Statistic&& statistic, std::size_t B,
                                                    double level, RandomStream& stream)
{
    if (B < 200) throw std::invalid_argument("bootstrap_interval: B must be at least 200");
    if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("bootstrap_interval: bad level");
    if (samples.empty()) throw std::invalid_argument("bootstrap_interval: empty sample");
    const std::size_t n = samples.size();
    std::vector<double> stats;
    stats.reserve(B);
    std::vector<T> re(n);
    for (std::size_t b = 0; b < B; ++b)
    {
        for (std::size_t i = 0; i < n; ++i)
            re[i] = samples[static_cast<std::size_t>(stream.uniform() * static_cast<double>(n)) % n];
        const std::optional<double> s = statistic(re);
        if (s && std::isfinite(*s)) stats.push_back(*s);
    }
    if (stats.size() * 2 < B) return std::nullopt;
    std::sort(stats.begin(), stats.end());
    BootstrapInterval iv;
    iv.valid_resamples = stats.size();
    iv.lo = stats[quantile_rank(stats.size(), 0.5 * (1.0 - level)) - 1];
    iv.hi = stats[quantile_rank(stats.size(), 0.5 * (1.0 + level)) - 1];
    iv.degenerate = iv.lo == iv.hi;
    return iv;
}

struct EpsSummary
{
    double eps = 0.0;
    std::size_t n = 0;
    std::size_t censored = 0;
    std::size_t failed = 0;
    std::optional<double> mean;
    std::optional<double> median;
    std::optional<double> beta_hat;
    std::optional<double> ks_exp1;
    std::optional<double> partial1_fraction;
    std::optional<BootstrapInterval> beta_interval;
};

struct SummaryStats
{
    /// "tau_hat" or "exit_time"
    std::string quantity = "tau_hat";
    std::vector<EpsSummary> per_eps;
    std::optional<double> delta_hat;
    std::optional<double> intercept;
    std::optional<double> r2;
    std::optional<BootstrapInterval> delta_interval;
};

struct SummaryOptions
{
    std::size_t B = 1000;
    double level = 0.95;
    std::uint64_t seed = 0;
};

inline bool is_exit_table(const SampleTable& t)
{
    return std::any_of(t.rows.begin(), t.rows.end(),
                       [](const SampleRow& r) { return r.exit_time.has_value(); });
}

/// Per eps, the sample of the analyzed time with censoring marks. Failed
/// rows count as censored at 0, so they block every quantile.
inline std::vector<std::pair<double, std::vector<Observation>>> observations(const SampleTable& t)
{
    const bool exits = is_exit_table(t);
    std::vector<std::pair<double, std::vector<Observation>>> out;
    for (const auto& r : t.rows)
    {
        if (out.empty() || out.back().first != r.eps) out.emplace_back(r.eps, std::vector<Observation>{});
        Observation o;
        if (r.outcome == RowOutcome::Failed)
            o = {0.0, true};
        else if (exits)
            o = r.exit_in_partial1 ? Observation{*r.exit_time, false}
                                   : Observation{r.exit_time.value_or(0.0), true};
        else if (r.outcome == RowOutcome::Exploded)
            o = {*r.tau_hat, false};
        else if (r.outcome == RowOutcome::Survived)
            o = {r.tau_hat.value_or(0.0), true};
        else
            o = {std::numeric_limits<double>::infinity(), true};
        out.back().second.push_back(o);
    }
    return out;
}

inline SummaryStats summarize(const SampleTable& table, const SummaryOptions& opt = {})
{
    SummaryStats s;
    s.quantity = is_exit_table(table) ? "exit_time" : "tau_hat";
    const auto groups = observations(table);
    RandomStream root = RandomStream::derive(opt.seed, {0xB007ull});

    std::size_t g = 0;
    for (const auto& [eps, obs] : groups)
    {
        EpsSummary e;
        e.eps = eps;
        e.n = obs.size();
        std::vector<double> values;
        for (const auto& o : obs)
        {
            if (o.censored)
                ++e.censored;
            else
                values.push_back(o.value);
        }
        for (const auto& r : table.rows)
        {
            if (r.eps == eps && r.outcome == RowOutcome::Failed) ++e.failed;
        }
        if (e.censored == 0 && !values.empty())
            e.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
        e.median = censored_quantile(obs, 0.5);
        e.beta_hat = estimate_beta_censored(obs);
        if (e.beta_hat && e.censored == 0 && *e.beta_hat > 0.0)
        {
            std::vector<double> norm(values);
            for (double& v : norm) v /= *e.beta_hat;
            e.ks_exp1 = ks_exp1(norm);
        }
        if (s.quantity == "exit_time")
        {
            std::size_t exits = 0, p1 = 0;
            for (const auto& r : table.rows)
            {
                if (r.eps != eps || !r.exit_in_partial1) continue;
                ++exits;
                p1 += *r.exit_in_partial1 ? 1 : 0;
            }
            if (exits > 0) e.partial1_fraction = static_cast<double>(p1) / static_cast<double>(exits);
        }
        if (e.beta_hat)
        {
            RandomStream rs = root.split(g);
            e.beta_interval = bootstrap_interval(
                obs, [](const std::vector<Observation>& v) { return estimate_beta_censored(v); },
                opt.B, opt.level, rs);
        }
        s.per_eps.push_back(e);
        ++g;
    }

    std::vector<double> fe, fb;
    std::vector<const std::vector<Observation>*> fobs;
    for (std::size_t i = 0; i < s.per_eps.size(); ++i)
    {
        if (s.per_eps[i].eps > 0.0 && s.per_eps[i].beta_hat && *s.per_eps[i].beta_hat > 0.0)
        {
            fe.push_back(s.per_eps[i].eps);
            fb.push_back(*s.per_eps[i].beta_hat);
            fobs.push_back(&groups[i].second);
        }
    }
    if (fe.size() >= 3)
    {
        const ExponentFit f = fit_exponent(fe, fb);
        s.delta_hat = f.delta_hat;
        s.intercept = f.intercept;
        s.r2 = f.r2;

        // Resample within every eps level and refit.
        RandomStream rs = root.split(0xDE17Aull);
        std::vector<double> slopes;
        std::vector<double> bb(fe.size());
        for (std::size_t b = 0; b < opt.B; ++b)
        {
            bool ok = true;
            for (std::size_t j = 0; j < fe.size() && ok; ++j)
            {
                const auto& src = *fobs[j];
                std::vector<Observation> re(src.size());
                for (auto& o : re)
                    o = src[static_cast<std::size_t>(rs.uniform() * static_cast<double>(src.size())) %
                            src.size()];
                const auto beta = estimate_beta_censored(re);
                ok = beta && *beta > 0.0;
                if (ok) bb[j] = *beta;
            }
            if (ok) slopes.push_back(fit_exponent(fe, bb).delta_hat);
        }
        if (slopes.size() * 2 >= opt.B)
        {
            std::sort(slopes.begin(), slopes.end());
            BootstrapInterval iv;
            iv.valid_resamples = slopes.size();
            iv.lo = slopes[quantile_rank(slopes.size(), 0.5 * (1.0 - opt.level)) - 1];
            iv.hi = slopes[quantile_rank(slopes.size(), 0.5 * (1.0 + opt.level)) - 1];
            iv.degenerate = iv.lo == iv.hi;
            s.delta_interval = iv;
        }
    }
    return s;
}

// ---- serialization ----

inline const char* samples_header() { return "eps,replica,outcome,tau_hat,exit_time,exit_in_partial1,steps"; }

inline std::string format_double(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline void write_samples_csv(std::ostream& os, const SampleTable& t)
{
    os << samples_header() << '\n';
    for (const auto& r : t.rows)
    {
        os << format_double(r.eps) << ',' << r.replica << ',' << to_string(r.outcome) << ',';
        if (r.tau_hat) os << format_double(*r.tau_hat);
        os << ',';
        if (r.exit_time) os << format_double(*r.exit_time);
        os << ',';
        if (r.exit_in_partial1) os << (*r.exit_in_partial1 ? 1 : 0);
        os << ',' << r.steps << '\n';
    }
}

inline SampleTable read_samples_csv(std::istream& is)
{
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("samples.csv: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != samples_header()) throw std::runtime_error("samples.csv: unexpected header '" + line + "'");
    SampleTable t;
    std::size_t lineno = 1;
    auto parse_double = [&](const std::string& s) {
        std::size_t pos = 0;
        double v = 0.0;
        try
        {
            v = std::stod(s, &pos);
        }
        catch (const std::exception&)
        {
            pos = std::string::npos;
        }
        if (pos != s.size())
            throw std::runtime_error("samples.csv line " + std::to_string(lineno) + ": bad number '" + s + "'");
        return v;
    };
    while (std::getline(is, line))
    {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::size_t start = 0;
        while (true)
        {
            const std::size_t comma = line.find(',', start);
            f.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (f.size() != 7)
            throw std::runtime_error("samples.csv line " + std::to_string(lineno) + ": expected 7 columns");
        SampleRow r;
        r.eps = parse_double(f[0]);
        r.replica = static_cast<std::size_t>(parse_double(f[1]));
        try
        {
            r.outcome = row_outcome_from_string(f[2]);
        }
        catch (const std::invalid_argument& e)
        {
            throw std::runtime_error("samples.csv line " + std::to_string(lineno) + ": " + e.what());
        }
        if (!f[3].empty()) r.tau_hat = parse_double(f[3]);
        if (!f[4].empty()) r.exit_time = parse_double(f[4]);
        if (!f[5].empty())
        {
            if (f[5] != "0" && f[5] != "1")
                throw std::runtime_error("samples.csv line " + std::to_string(lineno) + ": bad flag");
            r.exit_in_partial1 = f[5] == "1";
        }
        r.steps = static_cast<std::size_t>(parse_double(f[6]));
        t.rows.push_back(r);
    }
    return t;
}

inline nlohmann::json interval_json(const std::optional<BootstrapInterval>& iv)
{
    if (!iv) return nullptr;
    return {{"lo", iv->lo}, {"hi", iv->hi}, {"degenerate", iv->degenerate},
            {"valid_resamples", iv->valid_resamples}};
}

inline nlohmann::json summary_json(const SummaryStats& s)
{
    auto opt = [](const std::optional<double>& v) -> nlohmann::json {
        if (v) return *v;
        return nullptr;
    };
    nlohmann::json per = nlohmann::json::array();
    nlohmann::json beta_iv = nlohmann::json::array();
    for (const auto& e : s.per_eps)
    {
        per.push_back({{"eps", e.eps},
                       {"n", e.n},
                       {"mean", opt(e.mean)},
                       {"median", opt(e.median)},
                       {"beta_hat", opt(e.beta_hat)},
                       {"ks_exp1", opt(e.ks_exp1)},
                       {"censored", e.censored},
                       {"failed", e.failed},
                       {"partial1_fraction", opt(e.partial1_fraction)}});
        beta_iv.push_back({{"eps", e.eps}, {"interval", interval_json(e.beta_interval)}});
    }
    return {{"quantity", s.quantity},
            {"per_eps", per},
            {"delta_hat", opt(s.delta_hat)},
            {"intercept", opt(s.intercept)},
            {"r2", opt(s.r2)},
            {"intervals", {{"beta_hat", beta_iv}, {"delta_hat", interval_json(s.delta_interval)}}}};
}

/// Fraction of paths whose sup over [0, T] of |U^eps - U^0| exceeds delta.
/// The reference path is the adaptive deterministic solution, linearly
/// interpolated at the Euler-Maruyama times.
inline double deviation_fraction(const ModelParams& params, const State& u0, double eps, double T,
                                 double delta, std::size_t N, double dt, std::uint64_t seed,
                                 unsigned workers = 1)
{
    DetConfig det;
    det.dt_max = std::min(dt, det.dt_max);
    det.T_max = T;
    const integrator::DetRun ref = integrator::integrate_deterministic(params, u0, det);
    if (!ref.outcome.is_survived() && !ref.outcome.is_converged())
        throw std::invalid_argument("deviation_fraction: reference path explodes");
    const auto& rt = ref.path.times;
    const std::size_t d = params.d;
    auto reference = [&](double t, std::size_t i) {
        if (t >= rt.back()) return ref.path.states.back()[i];
        const auto it = std::upper_bound(rt.begin(), rt.end(), t);
        const std::size_t k = static_cast<std::size_t>(it - rt.begin());
        const double w = (t - rt[k - 1]) / (rt[k] - rt[k - 1]);
        return (1.0 - w) * ref.path.states[k - 1][i] + w * ref.path.states[k][i];
    };

    std::vector<char> exceeded(N, 0);
    parallel_for(N, workers, [&](std::size_t r) {
        SdeConfig cfg;
        cfg.eps = eps;
        cfg.dt = dt;
        cfg.T_cap = T;
        RandomStream stream = RandomStream::derive(seed, {r});
        bool hit = false;
        auto obs = [&](double, std::span<const double>, double t1, std::span<const double> u) {
            if (hit || t1 > T) return;
            double s = 0.0;
            for (std::size_t i = 0; i < d; ++i)
            {
                const double e = u[i] - reference(t1, i);
                s += e * e;
            }
            if (std::sqrt(s) > delta) hit = true;
        };
        const integrator::SdeRun run = integrator::integrate_sde_observed(params, u0, cfg, stream, obs);
        exceeded[r] = (hit || run.outcome.is_exploded()) ? 1 : 0;
    });
    return static_cast<double>(std::count(exceeded.begin(), exceeded.end(), 1)) / static_cast<double>(N);
}

}  // namespace montecarlo
}  // namespace blowuplab
