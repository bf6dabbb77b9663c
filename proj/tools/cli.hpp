#pragma once

// Command-line front end. run_cli is the whole program minus main(), so the
// tests can drive it in-process.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <blowuplab/blowuplab.hpp>

namespace blowuplab::cli {

namespace fs = std::filesystem;
using nlohmann::json;

enum ExitCode : int
{
    kOk = 0,
    kUsage = 1,
    kNumerical = 2,
    kUndecided = 3
};

struct UsageError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

enum class Kind
{
    Int,
    Real,
    Text,
    RealList
};

struct Key
{
    std::string name;
    Kind kind;
    std::string fallback;
    std::string help;
};

inline std::string flag_of(const std::string& key)
{
    std::string f = key;
    for (char& c : f)
        if (c == '_') c = '-';
    return "--" + f;
}

inline std::string normalize_key(std::string k)
{
    for (char& c : k)
        if (c == '-') c = '_';
    return k;
}

inline std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::string fmt(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// Loads a flat key=value file or a flat JSON object into strings.
inline std::map<std::string, std::string> load_config_file(const fs::path& path)
{
    const std::string text = io::read_file(path);
    std::map<std::string, std::string> out;
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{')
    {
        json j;
        try
        {
            j = json::parse(text);
        }
        catch (const json::exception& e)
        {
            throw UsageError("config " + path.string() + ": " + e.what());
        }
        for (const auto& [k, v] : j.items())
        {
            std::string s;
            if (v.is_string())
                s = v.get<std::string>();
            else if (v.is_number_integer())
                s = std::to_string(v.get<long long>());
            else if (v.is_number())
                s = fmt(v.get<double>());
            else if (v.is_array())
            {
                for (std::size_t i = 0; i < v.size(); ++i)
                {
                    if (!v[i].is_number()) throw UsageError("config key '" + k + "': expected numbers");
                    if (i) s += ',';
                    s += fmt(v[i].get<double>());
                }
            }
            else if (v.is_null())
                continue;
            else
                throw UsageError("config key '" + k + "': unsupported value");
            out[normalize_key(k)] = s;
        }
        return out;
    }
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line))
    {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw UsageError("config " + path.string() + " line " + std::to_string(lineno) + ": expected key=value");
        out[normalize_key(trim(line.substr(0, eq)))] = trim(line.substr(eq + 1));
    }
    return out;
}

/// Settings of one subcommand, resolved as flags > config file > defaults.
class Settings
{
  public:
    Settings(CLI::App& sub, std::string command, std::vector<Key> keys)
        : command_(std::move(command)), keys_(std::move(keys))
    {
        // -h would collide with the mesh size --h
        sub.set_help_flag("--help", "Print this help message and exit");
        for (const auto& k : keys_)
        {
            auto* opt = sub.add_option(flag_of(k.name), raw_[k.name], k.help);
            if (!k.fallback.empty()) opt->default_str(k.fallback);
            opts_[k.name] = opt;
        }
        sub.add_option("--config", config_path_, "key=value or JSON configuration file");
    }

    void resolve()
    {
        std::map<std::string, std::string> file;
        if (!config_path_.empty())
        {
            file = load_config_file(config_path_);
            if (auto it = file.find("command"); it != file.end())
            {
                if (it->second != command_)
                    throw UsageError("config is for command '" + it->second + "', not '" + command_ + "'");
                file.erase(it);
            }
        }
        for (const auto& [k, v] : file)
        {
            if (!has(k)) throw UsageError("unknown config key '" + k + "' for " + command_);
        }
        for (const auto& k : keys_)
        {
            if (opts_[k.name]->count() > 0)
                values_[k.name] = raw_[k.name];
            else if (auto it = file.find(k.name); it != file.end())
                values_[k.name] = it->second;
            else
                values_[k.name] = k.fallback;
        }
    }

    bool has(const std::string& k) const
    {
        for (const auto& key : keys_)
            if (key.name == k) return true;
        return false;
    }

    const std::string& text(const std::string& k) const { return values_.at(k); }

    double real(const std::string& k) const
    {
        const std::string& s = text(k);
        try
        {
            std::size_t pos = 0;
            const double v = std::stod(s, &pos);
            if (pos == s.size()) return v;
        }
        catch (const std::exception&)
        {
        }
        throw UsageError(flag_of(k) + ": expected a number, got '" + s + "'");
    }

    long long integer(const std::string& k) const
    {
        const std::string& s = text(k);
        try
        {
            std::size_t pos = 0;
            const long long v = std::stoll(s, &pos);
            if (pos == s.size()) return v;
        }
        catch (const std::exception&)
        {
        }
        throw UsageError(flag_of(k) + ": expected an integer, got '" + s + "'");
    }

    std::uint64_t seed(const std::string& k) const
    {
        const std::string& s = text(k);
        try
        {
            std::size_t pos = 0;
            const unsigned long long v = std::stoull(s, &pos, 0);
            if (pos == s.size() && s.front() != '-') return v;
        }
        catch (const std::exception&)
        {
        }
        throw UsageError(flag_of(k) + ": expected an unsigned integer, got '" + s + "'");
    }

    std::vector<double> reals(const std::string& k) const
    {
        std::vector<double> out;
        std::stringstream ss(text(k));
        std::string cell;
        while (std::getline(ss, cell, ','))
        {
            cell = trim(cell);
            try
            {
                std::size_t pos = 0;
                out.push_back(std::stod(cell, &pos));
                if (pos != cell.size()) throw std::invalid_argument("trailing");
            }
            catch (const std::exception&)
            {
                throw UsageError(flag_of(k) + ": bad list element '" + cell + "'");
            }
        }
        if (out.empty()) throw UsageError(flag_of(k) + ": empty list");
        return out;
    }

    json echo() const
    {
        json j = json::object();
        j["command"] = command_;
        for (const auto& k : keys_)
        {
            const std::string& v = values_.at(k.name);
            switch (k.kind)
            {
                case Kind::Int: j[k.name] = v.empty() ? json(nullptr) : json(integer(k.name)); break;
                case Kind::Real: j[k.name] = v.empty() ? json(nullptr) : json(real(k.name)); break;
                case Kind::Text: j[k.name] = v; break;
                case Kind::RealList: j[k.name] = v.empty() ? json::array() : json(reals(k.name)); break;
            }
        }
        return j;
    }

  private:
    std::string command_;
    std::vector<Key> keys_;
    std::map<std::string, std::string> raw_;
    std::map<std::string, CLI::Option*> opts_;
    std::map<std::string, std::string> values_;
    std::string config_path_;
};

inline std::vector<Key> model_keys()
{
    return {{"d", Kind::Int, "2", "number of nodes"},
            {"h", Kind::Real, "2", "mesh size"},
            {"p", Kind::Real, "2", "reaction exponent"},
            {"drift", Kind::Text, "paper", "drift mode: paper|gradient"}};
}

inline std::vector<Key> det_keys(const std::string& t_max)
{
    return {{"rel_tol", Kind::Real, "1e-10", "relative tolerance"},
            {"abs_tol", Kind::Real, "1e-13", "absolute tolerance"},
            {"dt_max", Kind::Real, "0.25", "largest deterministic step"},
            {"u_big", Kind::Real, "1e6", "switch to blow-up extrapolation"},
            {"t_max", Kind::Real, t_max, "deterministic horizon"}};
}

inline std::vector<Key> concat(std::vector<Key> a, const std::vector<Key>& b)
{
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

inline ModelParams model_of(const Settings& s)
{
    ModelParams m;
    const long long d = s.integer("d");
    if (d < 2) throw UsageError("--d must be at least 2");
    m.d = static_cast<std::size_t>(d);
    m.h = s.real("h");
    m.p = s.real("p");
    try
    {
        m.mode = drift_mode_from_string(s.text("drift"));
    }
    catch (const std::invalid_argument& e)
    {
        throw UsageError(e.what());
    }
    try
    {
        m.validate();
    }
    catch (const std::invalid_argument& e)
    {
        throw UsageError(e.what());
    }
    return m;
}

inline DetConfig det_of(const Settings& s)
{
    DetConfig c;
    c.rel_tol = s.real("rel_tol");
    c.abs_tol = s.real("abs_tol");
    c.dt_max = s.real("dt_max");
    c.U_big = s.real("u_big");
    c.T_max = s.real("t_max");
    c.record_stride = 0;
    if (s.has("stride"))
    {
        const long long k = s.integer("stride");
        if (k < 0) throw UsageError("--stride must be >= 0");
        c.record_stride = static_cast<std::size_t>(k);
    }
    return c;
}

/// Either a comma-separated list of d values or "lambda*ones:<lambda>".
inline State parse_u0(const std::string& spec, std::size_t d)
{
    const std::string prefix = "lambda*ones:";
    if (spec.rfind(prefix, 0) == 0)
    {
        const std::string v = spec.substr(prefix.size());
        try
        {
            std::size_t pos = 0;
            const double lambda = std::stod(v, &pos);
            if (pos == v.size() && std::isfinite(lambda)) return State::constant(d, lambda);
        }
        catch (const std::exception&)
        {
        }
        throw UsageError("--u0: bad scale in '" + spec + "'");
    }
    std::vector<double> u;
    std::stringstream ss(spec);
    std::string cell;
    while (std::getline(ss, cell, ','))
    {
        cell = trim(cell);
        try
        {
            std::size_t pos = 0;
            u.push_back(std::stod(cell, &pos));
            if (pos != cell.size() || !std::isfinite(u.back())) throw std::invalid_argument("bad");
        }
        catch (const std::exception&)
        {
            throw UsageError("--u0: bad coordinate '" + cell + "'");
        }
    }
    if (u.size() != d)
        throw UsageError("--u0: expected " + std::to_string(d) + " coordinates, got " + std::to_string(u.size()));
    return State(u);
}

inline unsigned threads_of(const Settings& s)
{
    if (s.text("threads").empty()) return default_worker_count();
    const long long n = s.integer("threads");
    if (n < 1) throw UsageError("--threads must be positive");
    return static_cast<unsigned>(n);
}

inline fs::path out_dir(const Settings& s)
{
    if (s.text("out").empty()) throw UsageError("--out is required");
    return fs::path(s.text("out"));
}

inline void write_json(const fs::path& p, const json& j)
{
    io::atomic_write(p, j.dump(2) + "\n");
}

inline json vec_json(std::span<const double> v) { return json(std::vector<double>(v.begin(), v.end())); }

inline json outcome_json(const Outcome& o)
{
    json j{{"outcome", to_string(o.kind)}};
    if (o.is_exploded())
        j["tau_hat"] = o.time;
    else
        j["time"] = o.time;
    return j;
}

inline int finish_outcome(const Outcome& o) { return o.is_survived() ? kUndecided : kOk; }

// ---- commands ----

inline int cmd_simulate(const Settings& s, std::ostream& out)
{
    const ModelParams m = model_of(s);
    const State u0 = parse_u0(s.text("u0"), m.d);
    const fs::path dir = out_dir(s);
    const std::string mode = s.text("mode");
    DetConfig det = det_of(s);
    json result;
    PathRecord path;
    Outcome outcome;
    if (mode == "det")
    {
        integrator::DetRun run = integrator::integrate_deterministic(m, u0, det);
        outcome = run.outcome;
        path = std::move(run.path);
        result = outcome_json(outcome);
        result["steps"] = run.steps;
    }
    else if (mode == "sde")
    {
        SdeConfig cfg;
        cfg.eps = s.real("eps");
        cfg.dt = s.real("dt");
        cfg.T_cap = s.real("t_cap");
        cfg.M_freeze = s.real("m_freeze");
        cfg.record_stride = static_cast<std::size_t>(std::max<long long>(0, s.integer("stride")));
        cfg.finish.rel_tol = det.rel_tol;
        cfg.finish.abs_tol = det.abs_tol;
        cfg.finish.U_big = det.U_big;
        cfg.finish.T_max = det.T_max;
        try
        {
            cfg.validate(m);
        }
        catch (const std::invalid_argument& e)
        {
            throw UsageError(e.what());
        }
        RandomStream stream = RandomStream::derive(s.seed("seed"), {0});
        integrator::SdeRun run = integrator::integrate_sde(m, u0, cfg, stream);
        outcome = run.outcome;
        path = std::move(run.path);
        result = outcome_json(outcome);
        result["steps"] = run.steps;
        if (run.freeze_time) result["freeze_time"] = *run.freeze_time;
    }
    else
        throw UsageError("--mode must be det or sde");

    json tau_n = json::object();
    for (const auto& [n, t] : path.tau_n_crossings) tau_n[std::to_string(n)] = t;
    result["tau_n"] = tau_n;
    json hits = json::array();
    for (const auto& [tag, t] : path.region_hits) hits.push_back({{"region", tag}, {"time", t}});
    result["region_hits"] = hits;

    write_json(dir / "config.json", s.echo());
    io::atomic_write(dir / "path.csv",
                     [&](std::ostream& os) { integrator::write_path_csv(os, path, m.d, outcome); });
    write_json(dir / "outcome.json", result);
    out << to_string(outcome.kind);
    if (outcome.is_exploded()) out << " tau_hat=" << fmt(outcome.time);
    out << '\n';
    return finish_outcome(outcome);
}

inline int cmd_classify(const Settings& s, std::ostream& out)
{
    const ModelParams m = model_of(s);
    const State u0 = parse_u0(s.text("u0"), m.d);
    const Classification c = phase::classify(m, u0, det_of(s));
    const json j{{"verdict", to_string(c.kind)}, {"decided_at", c.decided_at}, {"certificate", c.certificate}};
    if (!s.text("out").empty())
    {
        write_json(out_dir(s) / "config.json", s.echo());
        write_json(out_dir(s) / "classification.json", j);
    }
    out << to_string(c.kind) << " decided_at=" << fmt(c.decided_at) << " certificate=" << c.certificate << '\n';
    return c.kind == Classification::Kind::Undecided ? kUndecided : kOk;
}

inline int cmd_lambda_crit(const Settings& s, std::ostream& out)
{
    const ModelParams m = model_of(s);
    const State u0 = parse_u0(s.text("u0"), m.d);
    const double tol = s.real("tol");
    double lc = 0.0;
    try
    {
        lc = phase::lambda_crit(m, u0, tol, det_of(s));
    }
    catch (const std::invalid_argument& e)
    {
        throw UsageError(e.what());
    }
    const json j{{"lambda_crit", lc}, {"tol", tol}};
    if (!s.text("out").empty())
    {
        write_json(out_dir(s) / "config.json", s.echo());
        write_json(out_dir(s) / "lambda_crit.json", j);
    }
    out << "lambda_crit=" << fmt(lc) << '\n';
    return kOk;
}

inline DomainG build_domain(const Settings& s, const ModelParams& m, unsigned workers)
{
    if (m.d != 2) throw UsageError("domain construction needs --d 2");
    DomainGOptions opt;
    opt.alpha = s.real("alpha");
    const long long rays = s.integer("n_rays");
    if (rays < 64) throw UsageError("--n-rays must be at least 64");
    opt.n_rays = static_cast<std::size_t>(rays);
    opt.tol = s.real("tol");
    opt.det = det_of(s);
    opt.workers = workers;
    try
    {
        return phase::build_domain_G(m, opt);
    }
    catch (const std::invalid_argument& e)
    {
        throw UsageError(e.what());
    }
}

inline void write_domain(const fs::path& dir, const DomainG& g, const phase::DomainGReport* rep)
{
    io::atomic_write(dir / "domain_g.csv", [&](std::ostream& os) { write_domain_csv(os, g); });
    json h = domain_header_json(g);
    if (rep)
    {
        h["checks"] = {{"ball_inside", rep->ball_inside},
                       {"min_phi_partial1", rep->min_phi_partial1},
                       {"min_phi_rest", rep->min_phi_rest},
                       {"margin", rep->margin},
                       {"min_on_partial1", rep->min_on_partial1},
                       {"partial1_explosive", rep->partial1_explosive},
                       {"partial1_vertices", rep->partial1_vertices}};
    }
    write_json(dir / "domain_g.json", h);
}

inline int cmd_domain_g(const Settings& s, std::ostream& out)
{
    const ModelParams m = model_of(s);
    const unsigned workers = threads_of(s);
    const fs::path dir = out_dir(s);
    const DomainG g = build_domain(s, m, workers);
    const auto rep = phase::check_domain_G(m, g, det_of(s), workers);
    write_json(dir / "config.json", s.echo());
    write_domain(dir, g, &rep);
    out << "c=" << fmt(g.c) << " eta=" << fmt(g.eta) << " partial1_vertices=" << rep.partial1_vertices
        << " margin=" << fmt(rep.margin) << " invariants=" << (rep.ok() ? "ok" : "violated") << '\n';
    return rep.ok() ? kOk : kUndecided;
}

inline int cmd_sweep(const Settings& s, std::ostream& out, std::ostream& err)
{
    SweepSpec spec;
    spec.model = model_of(s);
    spec.eps_list = s.reals("eps_list");
    const long long n = s.integer("n");
    if (n < 2) throw UsageError("--n must be at least 2");
    spec.N = static_cast<std::size_t>(n);
    spec.u0 = parse_u0(s.text("u0"), spec.model.d);
    spec.seed = s.seed("seed");
    spec.sde.dt = s.real("dt");
    spec.sde.T_cap = s.real("t_cap");
    spec.sde.M_freeze = s.real("m_freeze");
    spec.workers = threads_of(s);
    try
    {
        spec.experiment = experiment_from_string(s.text("experiment"));
    }
    catch (const std::invalid_argument& e)
    {
        throw UsageError(e.what());
    }
    const fs::path dir = out_dir(s);
    if (spec.experiment == Experiment::ExitFromG)
    {
        auto g = std::make_shared<DomainG>(build_domain(s, spec.model, spec.workers));
        write_domain(dir, *g, nullptr);
        spec.domain = g;
    }
    try
    {
        spec.validate();
    }
    catch (const std::invalid_argument& e)
    {
        throw UsageError(e.what());
    }
    const SampleTable table = montecarlo::run_sweep(spec);
    write_json(dir / "config.json", s.echo());
    io::atomic_write(dir / "samples.csv", [&](std::ostream& os) { montecarlo::write_samples_csv(os, table); });
    std::size_t failed = 0;
    for (const auto& r : table.rows) failed += r.outcome == RowOutcome::Failed ? 1 : 0;
    if (failed > 0) err << "warning: " << failed << " rows failed numerically\n";
    out << "rows=" << table.rows.size() << " failed=" << failed << '\n';
    return kOk;
}

inline void write_plot_files(const fs::path& dir, const SampleTable& table, const montecarlo::SummaryStats& st)
{
    io::atomic_write(dir / "beta_fit.dat", [&](std::ostream& os) {
        os << "# eps^-2 log(beta_hat)\n";
        for (const auto& e : st.per_eps)
        {
            if (e.beta_hat && e.eps > 0.0 && *e.beta_hat > 0.0)
                os << fmt(1.0 / (e.eps * e.eps)) << ' ' << fmt(std::log(*e.beta_hat)) << '\n';
        }
        if (st.delta_hat)
        {
            double lo = std::numeric_limits<double>::infinity(), hi = -lo;
            for (const auto& e : st.per_eps)
            {
                if (!e.beta_hat || !(e.eps > 0.0)) continue;
                lo = std::min(lo, 1.0 / (e.eps * e.eps));
                hi = std::max(hi, 1.0 / (e.eps * e.eps));
            }
            os << "\n\n# fitted line: slope " << fmt(*st.delta_hat) << '\n';
            for (double x : {lo, hi}) os << fmt(x) << ' ' << fmt(*st.intercept + *st.delta_hat * x) << '\n';
        }
    });
    const auto groups = montecarlo::observations(table);
    io::atomic_write(dir / "survival.dat", [&](std::ostream& os) {
        double tmax = 1.0;
        for (std::size_t g = 0; g < groups.size(); ++g)
        {
            const auto& e = st.per_eps[g];
            if (!e.beta_hat || e.censored > 0 || !(*e.beta_hat > 0.0)) continue;
            std::vector<double> v;
            for (const auto& o : groups[g].second) v.push_back(o.value / *e.beta_hat);
            std::sort(v.begin(), v.end());
            os << "# eps=" << fmt(e.eps) << " t/beta_hat empirical_survival\n";
            os << 0 << ' ' << 1 << '\n';
            for (std::size_t i = 0; i < v.size(); ++i)
                os << fmt(v[i]) << ' ' << fmt(1.0 - static_cast<double>(i + 1) / static_cast<double>(v.size())) << '\n';
            tmax = std::max(tmax, v.back());
            os << "\n\n";
        }
        os << "# reference exp(-t)\n";
        for (int i = 0; i <= 100; ++i)
        {
            const double t = tmax * i / 100.0;
            os << fmt(t) << ' ' << fmt(std::exp(-t)) << '\n';
        }
    });
}

inline int cmd_analyze(const Settings& s, std::ostream& out)
{
    const fs::path samples = s.text("samples");
    if (samples.empty()) throw UsageError("--samples is required");
    std::ifstream is(samples);
    if (!is) throw UsageError("cannot open " + samples.string());
    SampleTable table;
    try
    {
        table = montecarlo::read_samples_csv(is);
    }
    catch (const std::runtime_error& e)
    {
        throw UsageError(e.what());
    }
    if (table.rows.empty()) throw UsageError("samples.csv has no rows");
    montecarlo::SummaryOptions opt;
    const long long B = s.integer("bootstrap");
    if (B < 200) throw UsageError("--bootstrap must be at least 200");
    opt.B = static_cast<std::size_t>(B);
    opt.level = s.real("level");
    if (!(opt.level > 0.0 && opt.level < 1.0)) throw UsageError("--level must lie in (0, 1)");
    opt.seed = s.seed("seed");
    const montecarlo::SummaryStats st = montecarlo::summarize(table, opt);
    const fs::path dir = s.text("out").empty() ? samples.parent_path() : fs::path(s.text("out"));
    write_json(dir / "summary.json", montecarlo::summary_json(st));
    write_plot_files(dir, table, st);
    if (!s.text("out").empty()) write_json(dir / "analyze_config.json", s.echo());
    for (const auto& e : st.per_eps)
    {
        out << "eps=" << fmt(e.eps) << " n=" << e.n << " censored=" << e.censored << " beta_hat=";
        if (e.beta_hat)
            out << fmt(*e.beta_hat);
        else
            out << "absent";
        out << '\n';
    }
    out << "delta_hat=" << (st.delta_hat ? fmt(*st.delta_hat) : std::string("absent"));
    if (st.r2) out << " r2=" << fmt(*st.r2);
    out << '\n';
    return kOk;
}

inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Blow-up laboratory: deterministic and stochastic explosion experiments", "blowuplab"};
    app.require_subcommand(1);

    const std::vector<Key> common = {{"out", Kind::Text, "", "output directory"},
                                     {"threads", Kind::Text, "", "worker threads (default: BLOWUPLAB_THREADS or all cores)"}};

    auto* sim = app.add_subcommand("simulate", "integrate one trajectory");
    Settings sim_s(*sim, "simulate",
                   concat(concat(concat(model_keys(), det_keys("1000")),
                                 {{"mode", Kind::Text, "det", "det|sde"},
                                  {"eps", Kind::Real, "0", "noise intensity"},
                                  {"u0", Kind::Text, "lambda*ones:0.5", "initial state"},
                                  {"seed", Kind::Text, "0", "random seed"},
                                  {"dt", Kind::Real, "0.001", "Euler-Maruyama base step"},
                                  {"t_cap", Kind::Real, "1e6", "stochastic horizon"},
                                  {"m_freeze", Kind::Real, "0", "noise-freeze level (0: twice M*)"},
                                  {"stride", Kind::Int, "1", "record every k-th step"}}),
                          {common[0]}));

    auto* cls = app.add_subcommand("classify", "attraction or explosion verdict");
    Settings cls_s(*cls, "classify",
                   concat(concat(model_keys(), det_keys("1000")),
                          {{"u0", Kind::Text, "lambda*ones:0", "initial state"}, common[0]}));

    auto* lc = app.add_subcommand("lambda-crit", "critical scaling along a ray");
    Settings lc_s(*lc, "lambda-crit",
                  concat(concat(model_keys(), det_keys("1000")),
                         {{"u0", Kind::Text, "lambda*ones:1", "ray direction (nonnegative)"},
                          {"tol", Kind::Real, "1e-6", "bracket width"},
                          common[0]}));

    auto* dg = app.add_subcommand("domain-g", "construct the auxiliary domain G (d = 2)");
    Settings dg_s(*dg, "domain-g",
                  concat(concat(model_keys(), det_keys("1000")),
                         {{"alpha", Kind::Real, "0.05", "radial expansion"},
                          {"n_rays", Kind::Int, "720", "number of rays"},
                          {"tol", Kind::Real, "1e-6", "bisection tolerance"},
                          common[0],
                          common[1]}));

    auto* sw = app.add_subcommand("sweep", "Monte Carlo sweep over eps");
    Settings sw_s(*sw, "sweep",
                  concat(concat(model_keys(), det_keys("1000")),
                         {{"experiment", Kind::Text, "explosion", "explosion|exit"},
                          {"eps_list", Kind::RealList, "0.3,0.28,0.26", "decreasing noise levels"},
                          {"n", Kind::Int, "100", "replicas per eps"},
                          {"u0", Kind::Text, "lambda*ones:0", "initial state"},
                          {"seed", Kind::Text, "0", "random seed"},
                          {"dt", Kind::Real, "0.01", "Euler-Maruyama base step"},
                          {"t_cap", Kind::Real, "1e6", "stochastic horizon"},
                          {"m_freeze", Kind::Real, "0", "noise-freeze level (0: twice M*)"},
                          {"alpha", Kind::Real, "0.05", "radial expansion of G"},
                          {"n_rays", Kind::Int, "720", "rays of G"},
                          {"tol", Kind::Real, "1e-6", "bisection tolerance for G"},
                          common[0],
                          common[1]}));

    auto* an = app.add_subcommand("analyze", "estimators on samples.csv");
    Settings an_s(*an, "analyze",
                  {{"samples", Kind::Text, "", "path to samples.csv"},
                   {"bootstrap", Kind::Int, "1000", "bootstrap resamples"},
                   {"level", Kind::Real, "0.95", "interval level"},
                   {"seed", Kind::Text, "0", "bootstrap seed"},
                   {"out", Kind::Text, "", "output directory (default: next to samples)"}});

    std::vector<std::string> argv_store{"blowuplab"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : argv_store) argv.push_back(a.c_str());

    try
    {
        app.parse(static_cast<int>(argv.size()), argv.data());
    }
    catch (const CLI::CallForHelp&)
    {
        out << app.help();
        return kOk;
    }
    catch (const CLI::CallForAllHelp&)
    {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    }
    catch (const CLI::ParseError& e)
    {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }

    try
    {
        if (sim->parsed())
        {
            sim_s.resolve();
            return cmd_simulate(sim_s, out);
        }
        if (cls->parsed())
        {
            cls_s.resolve();
            return cmd_classify(cls_s, out);
        }
        if (lc->parsed())
        {
            lc_s.resolve();
            return cmd_lambda_crit(lc_s, out);
        }
        if (dg->parsed())
        {
            dg_s.resolve();
            return cmd_domain_g(dg_s, out);
        }
        if (sw->parsed())
        {
            sw_s.resolve();
            return cmd_sweep(sw_s, out, err);
        }
        if (an->parsed())
        {
            an_s.resolve();
            return cmd_analyze(an_s, out);
        }
    }
    catch (const UsageError& e)
    {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }
    catch (const NumericalFailure& e)
    {
        err << "numerical failure: " << e.what() << '\n';
        return kNumerical;
    }
    catch (const std::invalid_argument& e)
    {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }
    catch (const std::exception& e)
    {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }
    err << "error: no command\n";
    return kUsage;
}

}  // namespace blowuplab::cli
