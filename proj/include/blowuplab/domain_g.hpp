#pragma once

// Auxiliary bounded domain G around the origin in d = 2: star-shaped with
// respect to 0, bounded by the stable manifold of the saddle on a cap around
// the diagonal and by a level curve of phi elsewhere, then expanded radially.
// The expanded cap is the low-barrier part of the boundary.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <limits>
#include <istream>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "integrator.hpp"
#include "model.hpp"
#include "parallel.hpp"
#include "phase.hpp"

namespace blowuplab {

struct DomainRay
{
    double angle = 0.0;
    /// point of the circle of radius c in this direction
    std::array<double, 2> base{};
    /// stable-manifold crossing in units of `base`, when the ray is in the cap V
    std::optional<double> lambda_bar;
    double lambda_star = 0.0;
    std::array<double, 2> boundary_point{};
    bool in_partial1 = false;
};

class DomainG
{
  public:
    double c = 0.0;
    double eta = 0.0;
    double alpha = 0.0;
    std::vector<DomainRay> rays;

    /// Recomputes the lookup radius after `rays` is filled.
    void finalize()
    {
        if (rays.size() < 3) throw std::invalid_argument("DomainG: need at least 3 rays");
        inner_radius_ = std::numeric_limits<double>::infinity();
        for (const auto& r : rays)
            inner_radius_ = std::min(inner_radius_, std::hypot(r.boundary_point[0], r.boundary_point[1]));
        inner_radius_ *= std::cos(std::numbers::pi / static_cast<double>(rays.size()));
    }

    std::size_t segment_of(double x, double y) const
    {
        double th = std::atan2(y, x);
        if (th < 0.0) th += 2.0 * std::numbers::pi;
        const double step = 2.0 * std::numbers::pi / static_cast<double>(rays.size());
        auto i = static_cast<std::size_t>(th / step);
        return i % rays.size();
    }

    /// Distance from 0 to the boundary polygon in the direction of (x, y).
    double boundary_radius(double x, double y) const
    {
        const std::size_t i = segment_of(x, y);
        const auto& a = rays[i].boundary_point;
        const auto& b = rays[(i + 1) % rays.size()].boundary_point;
        const double r = std::hypot(x, y);
        const double dx = x / r, dy = y / r;
        const double ex = b[0] - a[0], ey = b[1] - a[1];
        const double den = dx * ey - dy * ex;
        if (std::abs(den) < 1e-300) return std::max(std::hypot(a[0], a[1]), std::hypot(b[0], b[1]));
        return (a[0] * ey - a[1] * ex) / den;
    }

    bool contains(double x, double y) const
    {
        const double r = std::hypot(x, y);
        if (r < inner_radius_) return true;
        return r < boundary_radius(x, y);
    }

    /// The flag of the boundary vertex nearest to (x, y) among the two
    /// spanning the polygon edge in that direction.
    bool nearest_vertex_in_partial1(double x, double y) const
    {
        const std::size_t i = segment_of(x, y);
        const auto& a = rays[i];
        const auto& b = rays[(i + 1) % rays.size()];
        const double da = std::hypot(x - a.boundary_point[0], y - a.boundary_point[1]);
        const double db = std::hypot(x - b.boundary_point[0], y - b.boundary_point[1]);
        return da <= db ? a.in_partial1 : b.in_partial1;
    }

    std::size_t partial1_count() const
    {
        std::size_t n = 0;
        for (const auto& r : rays) n += r.in_partial1 ? 1 : 0;
        return n;
    }

  private:
    double inner_radius_ = 0.0;
};

struct DomainGOptions
{
    double alpha = 0.05;
    std::size_t n_rays = 720;
    double tol = 1e-6;
    DetConfig det = phase::default_classify_config();
    unsigned workers = 1;
};

namespace phase {

namespace detail {

inline double phi2(const ModelParams& prm, double x, double y)
{
    const std::array<double, 2> u{x, y};
    return model::phi(prm, u);
}

inline double sup_phi_on_disk(const ModelParams& prm, double radius)
{
    double sup = 0.0;
    constexpr int kRadii = 48, kAngles = 360;
    for (int j = 1; j <= kRadii; ++j)
    {
        const double r = radius * j / kRadii;
        for (int a = 0; a < kAngles; ++a)
        {
            const double th = 2.0 * std::numbers::pi * a / kAngles;
            sup = std::max(sup, phi2(prm, r * std::cos(th), r * std::sin(th)));
        }
    }
    return sup;
}

/// First lambda >= 1 with phi(lambda * base) = level: march, then bisect.
inline double first_level_crossing(const ModelParams& prm, const std::array<double, 2>& base,
                                   double level)
{
    constexpr double kStep = 0.005;
    constexpr double kMax = 1e4;
    double lo = 1.0;
    if (phi2(prm, base[0], base[1]) >= level)
        throw std::runtime_error("build_domain_G: level already exceeded on the inner circle");
    double hi = lo;
    while (true)
    {
        hi = lo + kStep * std::max(1.0, lo);
        if (hi > kMax) throw std::runtime_error("build_domain_G: ray never reaches the level eta");
        if (phi2(prm, hi * base[0], hi * base[1]) >= level) break;
        lo = hi;
    }
    for (int it = 0; it < 100 && hi - lo > 1e-14 * hi; ++it)
    {
        const double mid = 0.5 * (lo + hi);
        if (phi2(prm, mid * base[0], mid * base[1]) >= level)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace detail

inline DomainG build_domain_G(const ModelParams& params, const DomainGOptions& opt)
{
    params.validate();
    if (params.d != 2) throw std::invalid_argument("build_domain_G: implemented for d = 2 only");
    if (!(opt.alpha > 0.0)) throw std::invalid_argument("build_domain_G: alpha must be positive");
    if (opt.n_rays < 64) throw std::invalid_argument("build_domain_G: need at least 64 rays");

    const double phi_saddle = model::phi(params, std::vector<double>(2, 1.0));

    // (a) inner radius: largest 2^{k/8} with sup over the disk below phi(1)
    double c = 0.0;
    for (int k = 16; k >= -160; --k)
    {
        const double r = std::exp2(k / 8.0);
        if (detail::sup_phi_on_disk(params, r) < phi_saddle)
        {
            c = r;
            break;
        }
    }
    if (c == 0.0) throw std::runtime_error("build_domain_G: no admissible inner radius");

    DomainG g;
    g.c = c;
    g.alpha = opt.alpha;
    const std::size_t n = opt.n_rays;
    g.rays.resize(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        auto& r = g.rays[i];
        r.angle = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
        r.base = {c * std::cos(r.angle), c * std::sin(r.angle)};
    }

    // (b) stable-manifold crossings for rays into the open positive quadrant
    std::vector<std::optional<double>> crossing(n);
    parallel_for(n, opt.workers, [&](std::size_t i) {
        const auto& r = g.rays[i];
        if (!(r.base[0] > 1e-12 * c && r.base[1] > 1e-12 * c)) return;
        try
        {
            crossing[i] = lambda_crit(params, State({r.base[0], r.base[1]}), opt.tol, opt.det);
        }
        catch (const std::runtime_error&)
        {
        }
    });

    // cap V: maximal contiguous run of converged crossings around the diagonal
    const std::size_t diag = static_cast<std::size_t>(std::llround(static_cast<double>(n) / 8.0));
    if (!crossing[diag]) throw std::runtime_error("build_domain_G: cap is empty");
    std::size_t v_lo = diag, v_hi = diag;
    while (v_lo > 0 && crossing[v_lo - 1]) --v_lo;
    while (v_hi + 1 < n && crossing[v_hi + 1]) ++v_hi;
    if (v_lo == v_hi) throw std::runtime_error("build_domain_G: cap is empty");
    for (std::size_t i = v_lo; i <= v_hi; ++i) g.rays[i].lambda_bar = crossing[i];

    auto phi_on_manifold = [&](std::size_t i) {
        const auto& r = g.rays[i];
        return detail::phi2(params, *r.lambda_bar * r.base[0], *r.lambda_bar * r.base[1]);
    };
    g.eta = std::min(phi_on_manifold(v_lo), phi_on_manifold(v_hi));
    if (!(g.eta > phi_saddle))
        throw std::runtime_error("build_domain_G: rim level does not exceed phi(1)");

    // V*: contiguous rays around the diagonal with phi on the manifold <= eta
    std::size_t s_lo = diag, s_hi = diag;
    while (s_lo > v_lo && phi_on_manifold(s_lo - 1) <= g.eta) --s_lo;
    while (s_hi < v_hi && phi_on_manifold(s_hi + 1) <= g.eta) ++s_hi;

    // (c), (d)
    parallel_for(n, opt.workers, [&](std::size_t i) {
        auto& r = g.rays[i];
        const bool cap = i >= s_lo && i <= s_hi;
        r.lambda_star = cap ? *r.lambda_bar : detail::first_level_crossing(params, r.base, g.eta);
        const double s = (1.0 + g.alpha) * r.lambda_star;
        r.boundary_point = {s * r.base[0], s * r.base[1]};
        r.in_partial1 = cap;
    });
    g.finalize();
    return g;
}

inline DomainG build_domain_G(const ModelParams& params, double alpha, std::size_t n_rays,
                              const DetConfig& cfg)
{
    DomainGOptions opt;
    opt.alpha = alpha;
    opt.n_rays = n_rays;
    opt.det = cfg;
    return build_domain_G(params, opt);
}

struct DomainGReport
{
    bool ball_inside = false;
    double min_phi_partial1 = 0.0;
    double min_phi_rest = 0.0;
    bool min_on_partial1 = false;
    double margin = 0.0;
    bool partial1_explosive = false;
    std::size_t partial1_vertices = 0;

    bool ok() const { return ball_inside && min_on_partial1 && margin > 0.0 && partial1_explosive; }
};

/// Checks B_c in G, the boundary minimum of phi on the cap with a positive
/// margin, and explosion from every cap vertex.
inline DomainGReport check_domain_G(const ModelParams& params, const DomainG& g,
                                    const DetConfig& cfg, unsigned workers = 1)
{
    DomainGReport rep;
    rep.ball_inside = true;
    rep.min_phi_partial1 = std::numeric_limits<double>::infinity();
    rep.min_phi_rest = std::numeric_limits<double>::infinity();
    for (const auto& r : g.rays)
    {
        if (!((1.0 + g.alpha) * r.lambda_star > 1.0)) rep.ball_inside = false;
        const double v = detail::phi2(params, r.boundary_point[0], r.boundary_point[1]);
        if (r.in_partial1)
            rep.min_phi_partial1 = std::min(rep.min_phi_partial1, v);
        else
            rep.min_phi_rest = std::min(rep.min_phi_rest, v);
    }
    rep.partial1_vertices = g.partial1_count();
    rep.min_on_partial1 = rep.min_phi_partial1 <= rep.min_phi_rest;
    rep.margin = rep.min_phi_rest - rep.min_phi_partial1;

    std::vector<char> explosive(g.rays.size(), 1);
    parallel_for(g.rays.size(), workers, [&](std::size_t i) {
        const auto& r = g.rays[i];
        if (!r.in_partial1) return;
        const auto c = classify(params, State({r.boundary_point[0], r.boundary_point[1]}), cfg);
        explosive[i] = c.kind == Classification::Kind::DomainOfExplosion ? 1 : 0;
    });
    rep.partial1_explosive = rep.partial1_vertices > 0;
    for (char e : explosive) rep.partial1_explosive = rep.partial1_explosive && e;
    return rep;
}

}  // namespace phase

inline void write_domain_csv(std::ostream& os, const DomainG& g)
{
    os << "angle,lambda_bar,lambda_star,x,y,in_partial1\n";
    os << std::setprecision(17);
    for (const auto& r : g.rays)
    {
        os << r.angle << ',';
        if (r.lambda_bar) os << *r.lambda_bar;
        os << ',' << r.lambda_star << ',' << r.boundary_point[0] << ',' << r.boundary_point[1]
           << ',' << (r.in_partial1 ? 1 : 0) << '\n';
    }
}

inline nlohmann::json domain_header_json(const DomainG& g)
{
    return {{"c", g.c}, {"eta", g.eta}, {"alpha", g.alpha}, {"n_rays", g.rays.size()}};
}

inline DomainG read_domain(std::istream& csv, const nlohmann::json& header)
{
    DomainG g;
    g.c = header.at("c").get<double>();
    g.eta = header.at("eta").get<double>();
    g.alpha = header.at("alpha").get<double>();
    std::string line;
    if (!std::getline(csv, line) || line != "angle,lambda_bar,lambda_star,x,y,in_partial1")
        throw std::runtime_error("domain CSV: unexpected header");
    while (std::getline(csv, line))
    {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (f.size() != 6) throw std::runtime_error("domain CSV: expected 6 columns");
        DomainRay r;
        r.angle = std::stod(f[0]);
        if (!f[1].empty()) r.lambda_bar = std::stod(f[1]);
        r.lambda_star = std::stod(f[2]);
        r.boundary_point = {std::stod(f[3]), std::stod(f[4])};
        r.in_partial1 = f[5] == "1";
        r.base = {g.c * std::cos(r.angle), g.c * std::sin(r.angle)};
        g.rays.push_back(r);
    }
    g.finalize();
    return g;
}

}  // namespace blowuplab
