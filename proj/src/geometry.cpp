#include "grb/geometry.hpp"

#include <cmath>
#include <utility>

namespace grb {

Chart::Chart(std::string name, CoordBounds bounds, MetricFn metric,
             ChristoffelFn analytic_christoffel, Vec4 future_hint)
    : name_(std::move(name)),
      bounds_(bounds),
      metric_(std::move(metric)),
      analytic_(std::move(analytic_christoffel)),
      future_hint_(future_hint) {}

bool Chart::in_domain(const Vec4& m, double margin) const {
    for (int i = 0; i < 4; ++i) {
        if (!(m[i] >= bounds_.lo[i] + margin && m[i] <= bounds_.hi[i] - margin))
            return false;
    }
    return true;
}

void Chart::require_in_domain(const Vec4& m, double margin) const {
    if (!in_domain(m, margin))
        throw OutOfDomain("point outside domain of chart '" + name_ + "'");
}

Mat4 Chart::metric(const Vec4& m) const {
    require_in_domain(m);
    Mat4 g = metric_(m);
    // enforce exact symmetry
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j) {
            const double s = 0.5 * (g[i][j] + g[j][i]);
            g[i][j] = g[j][i] = s;
        }
    return g;
}

Mat4 Chart::inverse_metric(const Vec4& m) const { return inverse(metric(m)); }

double Chart::fd_step(const Vec4& m, int i) const {
    return std::max(1e-5, 1e-7 * std::fabs(m[i]));
}

double Chart::stencil_margin(const Vec4& m) const {
    double h = 0.0;
    for (int i = 0; i < 4; ++i) h = std::max(h, fd_step(m, i));
    return h;
}

Gamma4 Chart::christoffel_finite_difference(const Vec4& m) const {
    require_in_domain(m, stencil_margin(m));
    const Mat4 ginv = inverse_metric(m);

    // dg[i][j][l] = d_i g_jl
    std::array<Mat4, 4> dg{};
    for (int i = 0; i < 4; ++i) {
        const double h = fd_step(m, i);
        Vec4 mp = m, mm = m;
        mp[i] += h;
        mm[i] -= h;
        const Mat4 gp = metric(mp);
        const Mat4 gm = metric(mm);
        for (int j = 0; j < 4; ++j)
            for (int l = 0; l < 4; ++l)
                dg[i][j][l] = (gp[j][l] - gm[j][l]) / (2.0 * h);
    }

    Gamma4 out{};
    for (int k = 0; k < 4; ++k)
        for (int i = 0; i < 4; ++i)
            for (int j = i; j < 4; ++j) {
                double s = 0.0;
                for (int l = 0; l < 4; ++l)
                    s += ginv[k][l] * (dg[i][j][l] + dg[j][i][l] - dg[l][i][j]);
                out[k][i][j] = out[k][j][i] = 0.5 * s;
            }
    return out;
}

Gamma4 Chart::christoffel(const Vec4& m) const {
    if (analytic_) {
        require_in_domain(m);
        return analytic_(m);
    }
    return christoffel_finite_difference(m);
}

Tetrad build_tetrad(const Chart& chart, const Vec4& m, const Vec4& e0_hint) {
    return build_tetrad(chart, m, e0_hint, Vec4{0.0, 0.0, 0.0, 0.0});
}

Tetrad build_tetrad(const Chart& chart, const Vec4& m, const Vec4& e0_hint,
                    const Vec4& e1_hint) {
    const Mat4 g = chart.metric(m);
    const double n0 = inner(g, e0_hint, e0_hint);
    if (n0 <= 0.0) throw NotTimelike("e0 hint is not timelike");

    Tetrad t;
    t.base = m;
    Vec4 e0 = (1.0 / std::sqrt(n0)) * e0_hint;
    if (inner(g, e0, chart.future_hint()) < 0.0) e0 = -1.0 * e0;
    t.e[0] = e0;

    // candidate spatial seeds: optional hint first, then coordinate axes
    std::array<Vec4, 5> seeds{};
    seeds[0] = e1_hint;
    for (int i = 0; i < 4; ++i) {
        Vec4 axis{};
        axis[(i + 1) % 4] = 1.0;  // x,y,z then t as last resort
        seeds[i + 1] = axis;
    }

    int built = 1;
    for (const Vec4& seed : seeds) {
        if (built == 4) break;
        Vec4 v = seed;
        // subtract projections; e0 has norm +1, spatial legs have norm -1.
        // The second pass cleans up the digits lost at large boosts.
        for (int pass = 0; pass < 2; ++pass) {
            v = v - inner(g, v, t.e[0]) * t.e[0];
            for (int a = 1; a < built; ++a)
                v = v + inner(g, v, t.e[a]) * t.e[a];
        }
        const double n = -inner(g, v, v);
        if (n < 1e-12) continue;  // degenerate seed, try next
        t.e[built++] = (1.0 / std::sqrt(n)) * v;
    }
    if (built != 4) throw SingularMetric("tetrad construction failed");
    return t;
}

void tetrad_components(const Chart& chart, const Tetrad& t, const Vec4& v,
                       double& p0, Vec3& p) {
    const Mat4 g = chart.metric(t.base);
    p0 = inner(g, v, t.e[0]);
    for (int i = 0; i < 3; ++i) p[i] = -inner(g, v, t.e[i + 1]);
}

Chart make_minkowski() {
    auto metric = [](const Vec4&) {
        Mat4 g{};
        g[0][0] = 1.0;
        g[1][1] = g[2][2] = g[3][3] = -1.0;
        return g;
    };
    auto gamma = [](const Vec4&) { return Gamma4{}; };
    return Chart("minkowski", CoordBounds{}, metric, gamma);
}

Chart make_schwarzschild(double mass) {
    CoordBounds b;
    b.lo = {-1e300, 2.1 * mass, 1e-3, -1e300};
    b.hi = {1e300, 1e300, M_PI - 1e-3, 1e300};

    auto metric = [mass](const Vec4& m) {
        const double r = m[1], th = m[2];
        const double f = 1.0 - 2.0 * mass / r;
        Mat4 g{};
        g[0][0] = f;
        g[1][1] = -1.0 / f;
        g[2][2] = -r * r;
        g[3][3] = -r * r * std::sin(th) * std::sin(th);
        return g;
    };
    auto gamma = [mass](const Vec4& m) {
        const double r = m[1], th = m[2];
        const double f = 1.0 - 2.0 * mass / r;
        const double st = std::sin(th), ct = std::cos(th);
        Gamma4 G{};
        G[0][0][1] = G[0][1][0] = mass / (r * r * f);
        G[1][0][0] = mass * f / (r * r);
        G[1][1][1] = -mass / (r * r * f);
        G[1][2][2] = -(r - 2.0 * mass);
        G[1][3][3] = -(r - 2.0 * mass) * st * st;
        G[2][1][2] = G[2][2][1] = 1.0 / r;
        G[2][3][3] = -st * ct;
        G[3][1][3] = G[3][3][1] = 1.0 / r;
        G[3][2][3] = G[3][3][2] = ct / st;
        return G;
    };
    return Chart("schwarzschild", b, metric, gamma);
}

Chart make_flrw(std::function<double(double)> a,
                std::function<double(double)> adot) {
    CoordBounds b;
    b.lo[0] = 1e-6;
    if (!adot) {
        auto acopy = a;
        adot = [acopy](double t) {
            const double h = std::max(1e-6, 1e-8 * std::fabs(t));
            return (acopy(t + h) - acopy(t - h)) / (2.0 * h);
        };
    }
    auto metric = [a](const Vec4& m) {
        const double s = a(m[0]);
        Mat4 g{};
        g[0][0] = 1.0;
        g[1][1] = g[2][2] = g[3][3] = -s * s;
        return g;
    };
    auto gamma = [a, adot](const Vec4& m) {
        const double s = a(m[0]), sd = adot(m[0]);
        Gamma4 G{};
        for (int i = 1; i < 4; ++i) {
            G[0][i][i] = s * sd;
            G[i][0][i] = G[i][i][0] = sd / s;
        }
        return G;
    };
    return Chart("flrw", b, metric, gamma);
}

Chart make_chart(const std::string& name,
                 const std::map<std::string, double>& params) {
    auto get = [&params](const std::string& key, double fallback) {
        auto it = params.find(key);
        return it == params.end() ? fallback : it->second;
    };
    if (name == "minkowski") return make_minkowski();
    if (name == "schwarzschild") return make_schwarzschild(get("M", 1.0));
    if (name == "flrw") {
        const double p = get("a_power", 1.0);
        return make_flrw([p](double t) { return std::pow(t, p); },
                         [p](double t) { return p * std::pow(t, p - 1.0); });
    }
    throw std::invalid_argument("unknown chart: " + name);
}

}  // namespace grb
