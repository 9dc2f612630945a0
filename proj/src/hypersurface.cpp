#include "grb/hypersurface.hpp"

#include <cmath>

namespace grb {

Vec3 Hypersurface::grad_tau(const Vec3& xs) const {
    Vec3 g{};
    for (int a = 0; a < 3; ++a) {
        const double h = std::max(1e-6, 1e-8 * std::fabs(xs[a]));
        Vec3 p = xs, m = xs;
        p[a] += h;
        m[a] -= h;
        g[a] = (tau_(p) - tau_(m)) / (2.0 * h);
    }
    return g;
}

Vec4 Hypersurface::normal(const Chart& chart, const Vec4& m) const {
    const Vec3 xs{m[1], m[2], m[3]};
    const Vec3 dt = grad_tau(xs);
    const Vec4 conormal{1.0, -dt[0], -dt[1], -dt[2]};
    const Mat4 ginv = chart.inverse_metric(m);
    Vec4 n{};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) n[i] += ginv[i][j] * conormal[j];
    const double nn = inner(chart.metric(m), n, n);
    if (!(nn > 0.0))
        throw std::runtime_error("hypersurface '" + name_ +
                                 "' is not spacelike at the queried point");
    Vec4 w = (1.0 / std::sqrt(nn)) * n;
    if (inner(chart.metric(m), w, chart.future_hint()) < 0.0) w = -1.0 * w;
    return w;
}

bool Hypersurface::is_spacelike(const Chart& chart,
                                const std::vector<Vec3>& probes) const {
    for (const Vec3& y : probes) {
        const Vec4 m = project(Vec4{0.0, y[0], y[1], y[2]});
        const Vec3 dt = grad_tau(y);
        const Mat4 g = chart.metric(m);
        std::array<Vec4, 3> tangent;
        for (int a = 0; a < 3; ++a) {
            tangent[a] = Vec4{dt[a], 0.0, 0.0, 0.0};
            tangent[a][a + 1] = 1.0;
        }
        // induced Riemannian metric h_ab = -g(T_a, T_b): positive-definite
        std::array<std::array<double, 3>, 3> h{};
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) h[a][b] = -inner(g, tangent[a], tangent[b]);
        if (h[0][0] <= 0.0) return false;
        if (h[0][0] * h[1][1] - h[0][1] * h[1][0] <= 0.0) return false;
        if (det3(h) <= 0.0) return false;
    }
    return true;
}

Hypersurface make_flat_surface(double t0) {
    return Hypersurface("flat", [t0](const Vec3&) { return t0; });
}

Hypersurface make_tilted_surface(double alpha, double t0) {
    return Hypersurface("tilted",
                        [alpha, t0](const Vec3& x) { return t0 + alpha * x[0]; });
}

Hypersurface make_bump_surface(double amplitude, double width, double t0) {
    return Hypersurface("bump", [amplitude, width, t0](const Vec3& x) {
        const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        return t0 + amplitude * std::exp(-r2 / (width * width));
    });
}

Hypersurface make_ring_bump_surface(double amplitude, double width, double t0) {
    return Hypersurface("ring_bump", [amplitude, width, t0](const Vec3& x) {
        const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        return t0 + amplitude * r2 * std::exp(-r2 / (width * width));
    });
}

Hypersurface make_surface(const std::string& name,
                          const std::map<std::string, double>& params) {
    auto get = [&params](const std::string& key, double fallback) {
        auto it = params.find(key);
        return it == params.end() ? fallback : it->second;
    };
    const double t0 = get("t0", 0.0);
    if (name == "flat") return make_flat_surface(t0);
    if (name == "tilted") return make_tilted_surface(get("alpha", 0.0), t0);
    if (name == "bump")
        return make_bump_surface(get("amplitude", 0.1), get("width", 1.0), t0);
    if (name == "ring_bump")
        return make_ring_bump_surface(get("amplitude", 0.1), get("width", 1.0),
                                      t0);
    throw std::invalid_argument("unknown hypersurface: " + name);
}

double gamma_bar(const Chart& chart, const Hypersurface& v,
                 const PhasePoint& phi) {
    return chart.metric_product(phi.x, v.normal(chart, phi.x), phi.u);
}

Vec4 normal_variation(const Chart& chart, const Hypersurface& v, const Vec4& m,
                      double eps, double ds) {
    if (eps == 0.0) return m;
    const PhasePoint start{m, v.normal(chart, m)};
    const Direction dir = eps > 0.0 ? Direction::future : Direction::past;
    return geodesic_advance(chart, start, std::fabs(eps), ds, dir).x;
}

void validate_variation(const Chart& chart, const Hypersurface& v,
                        const std::vector<Vec3>& probes, double eta,
                        double tol) {
    for (double eps : {-eta, eta}) {
        std::vector<Vec4> images;
        for (const Vec3& y : probes) {
            const Vec4 m = v.project(Vec4{0.0, y[0], y[1], y[2]});
            images.push_back(normal_variation(chart, v, m, eps));
        }
        for (size_t i = 0; i < images.size(); ++i)
            for (size_t j = i + 1; j < images.size(); ++j)
                if (max_abs(images[i] - images[j]) < tol)
                    throw VariationFold(
                        "normal variation folds; shrink eta");
    }
}

VariationDensity variation_density(const Chart& chart, const Hypersurface& v,
                                   const Vec4& m, double eps, double h) {
    auto surface_density = [&](double e) {
        const Vec3 y{m[1], m[2], m[3]};
        std::array<Vec4, 3> tangent;
        for (int a = 0; a < 3; ++a) {
            Vec3 yp = y, ym = y;
            yp[a] += h;
            ym[a] -= h;
            const Vec4 ip = normal_variation(
                chart, v, v.project(Vec4{0.0, yp[0], yp[1], yp[2]}), e);
            const Vec4 im = normal_variation(
                chart, v, v.project(Vec4{0.0, ym[0], ym[1], ym[2]}), e);
            tangent[a] = (1.0 / (2.0 * h)) * (ip - im);
        }
        const Vec4 base = normal_variation(chart, v, v.project(m), e);
        const Mat4 g = chart.metric(base);
        std::array<std::array<double, 3>, 3> ind{};
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                ind[a][b] = -inner(g, tangent[a], tangent[b]);
        return std::sqrt(det3(ind));
    };
    const double base = surface_density(0.0);
    VariationDensity out;
    out.value = surface_density(eps) / base;
    out.deps =
        (surface_density(eps + h) - surface_density(eps - h)) / (2.0 * h * base);
    return out;
}

Hit refine_crossing(const Chart& chart, const Hypersurface& v,
                    const PathSample& before, const PathSample& after,
                    Direction dir) {
    const double lv0 = v.level(before.phi.x);
    double lo = 0.0, hi = after.s - before.s;
    while (hi - lo > 1e-10) {
        const double mid = 0.5 * (lo + hi);
        const PhasePoint pm = geodesic_step(chart, before.phi, mid, dir);
        if (v.level(pm.x) * lv0 > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    const double sh = 0.5 * (lo + hi);
    Hit hit;
    hit.s = before.s + sh;
    hit.phi = sh > 0.0 ? geodesic_step(chart, before.phi, sh, dir) : before.phi;
    return hit;
}

Hit hitting_time(const Chart& chart, const std::vector<PathSample>& path,
                 const Hypersurface& v, Direction dir) {
    for (size_t i = 0; i + 1 < path.size(); ++i) {
        const double a = v.level(path[i].phi.x);
        const double b = v.level(path[i + 1].phi.x);
        if (a == 0.0) return Hit{path[i].s, path[i].phi};
        if (a * b <= 0.0)
            return refine_crossing(chart, v, path[i], path[i + 1], dir);
    }
    throw NoCrossing("path never crosses the hypersurface");
}

double lemma_check(const Chart& chart, const Hypersurface& v,
                   const std::function<double(double, const Vec3&)>& f_test,
                   const std::function<double(double, const Vec3&)>& h_test,
                   const std::vector<Vec3>& probes, double eta, int n_eps,
                   double fd_h) {
    if (n_eps % 2) ++n_eps;
    const double de = 2.0 * eta / n_eps;
    const double fd = fd_h > 0.0 ? fd_h : 0.5 * de;

    double lhs = 0.0, rhs = 0.0;
    for (const Vec3& y : probes) {
        const Vec4 m = v.project(Vec4{0.0, y[0], y[1], y[2]});
        // boundary term of the integration by parts at eps = +-eta
        for (double sign : {1.0, -1.0}) {
            const double eps = sign * eta;
            const VariationDensity G = variation_density(chart, v, m, eps, fd);
            rhs += sign * f_test(eps, y) * h_test(eps, y) * G.value;
        }
        for (int i = 0; i <= n_eps; ++i) {
            const double eps = -eta + i * de;
            const double w =
                de / 3.0 * (i == 0 || i == n_eps ? 1.0 : (i % 2 ? 4.0 : 2.0));
            const VariationDensity G = variation_density(chart, v, m, eps, fd);
            const double f = f_test(eps, y);
            const double h = h_test(eps, y);
            const double df =
                (f_test(eps + fd, y) - f_test(eps - fd, y)) / (2.0 * fd);
            const double dh =
                (h_test(eps + fd, y) - h_test(eps - fd, y)) / (2.0 * fd);
            lhs += w * f * dh * G.value;
            rhs -= w * (df * h * G.value + f * h * G.deps);
        }
    }
    const double scale = std::max({std::fabs(lhs), std::fabs(rhs), 1e-300});
    return std::fabs(lhs - rhs) / scale;
}

}  // namespace grb
