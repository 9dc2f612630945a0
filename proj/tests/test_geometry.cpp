#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "grb/geometry.hpp"
#include "grb/rng.hpp"

using namespace grb;

namespace {

const Mat4 kEta = {{{1, 0, 0, 0}, {0, -1, 0, 0}, {0, 0, -1, 0}, {0, 0, 0, -1}}};

double max_gamma_diff(const Gamma4& a, const Gamma4& b) {
    double d = 0.0;
    for (int k = 0; k < 4; ++k)
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                d = std::max(d, std::fabs(a[k][i][j] - b[k][i][j]));
    return d;
}

}  // namespace

TEST_CASE("minkowski metric and christoffels") {
    const Chart chart = make_minkowski();
    Rng rng(7, 0);
    for (int n = 0; n < 100; ++n) {
        Vec4 m;
        for (int i = 0; i < 4; ++i) m[i] = rng.uniform(-10.0, 10.0);
        const Mat4 g = chart.metric(m);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                CHECK(g[i][j] == doctest::Approx(kEta[i][j]).epsilon(1e-14));
        const Gamma4 gamma = chart.christoffel(m);
        for (int k = 0; k < 4; ++k)
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j)
                    CHECK(std::fabs(gamma[k][i][j]) < 1e-9);
    }
}

TEST_CASE("schwarzschild analytic vs finite-difference christoffels") {
    const Chart chart = make_schwarzschild(1.0);
    REQUIRE(chart.has_analytic_christoffel());
    const Chart fd("schwarzschild-fd", chart.bounds(),
                   [&chart](const Vec4& m) { return chart.metric(m); });
    Rng rng(11, 0);
    double worst = 0.0;
    for (int n = 0; n < 1000; ++n) {
        const Vec4 m{rng.uniform(-1.0, 1.0), rng.uniform(2.5, 20.0),
                     rng.uniform(0.4, M_PI - 0.4), rng.uniform(0.0, 2 * M_PI)};
        worst = std::max(worst,
                         max_gamma_diff(chart.christoffel(m), fd.christoffel(m)));
    }
    CHECK(worst <= 1e-6);
}

TEST_CASE("schwarzschild christoffel values at r=6, M=1") {
    // frozen from Gamma^t_tr = M/(r^2 f), Gamma^r_tt = M f/r^2,
    // Gamma^r_rr = -M/(r^2 f), Gamma^r_thth = -(r-2M), Gamma^th_rth = 1/r
    const Chart chart = make_schwarzschild(1.0);
    const Vec4 m{0.0, 6.0, M_PI / 2.0, 0.3};
    const Gamma4 g = chart.christoffel(m);
    CHECK(g[0][0][1] == doctest::Approx(1.0 / 24.0).epsilon(1e-12));
    CHECK(g[0][1][0] == doctest::Approx(1.0 / 24.0).epsilon(1e-12));
    CHECK(g[1][0][0] == doctest::Approx(1.0 / 54.0).epsilon(1e-12));
    CHECK(g[1][1][1] == doctest::Approx(-1.0 / 24.0).epsilon(1e-12));
    CHECK(g[1][2][2] == doctest::Approx(-4.0).epsilon(1e-12));
    CHECK(g[2][1][2] == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
    // equatorial plane: Gamma^r_phph = -(r-2M) sin^2 th = -4
    CHECK(g[1][3][3] == doctest::Approx(-4.0).epsilon(1e-12));
}

TEST_CASE("flrw metric and christoffels, a(t) = t^2") {
    const Chart chart = make_chart("flrw", {{"a_power", 2.0}});
    const Vec4 m{2.0, 0.3, -0.1, 0.8};
    const Mat4 g = chart.metric(m);
    CHECK(g[0][0] == doctest::Approx(1.0));
    CHECK(g[1][1] == doctest::Approx(-16.0));
    CHECK(g[2][2] == doctest::Approx(-16.0));
    CHECK(g[3][3] == doctest::Approx(-16.0));

    // Gamma^t_xx = a adot = 16, Gamma^x_tx = adot/a = 1
    const Gamma4 gamma = chart.christoffel(m);
    CHECK(gamma[0][1][1] == doctest::Approx(16.0).epsilon(1e-6));
    CHECK(gamma[1][0][1] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(gamma[2][0][2] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(std::fabs(gamma[0][1][2]) < 1e-6);
}

TEST_CASE("inverse metric") {
    const Chart chart = make_schwarzschild(1.0);
    const Vec4 m{0.0, 8.0, 1.2, 0.4};
    const Mat4 g = chart.metric(m);
    const Mat4 gi = chart.inverse_metric(m);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            double s = 0.0;
            for (int k = 0; k < 4; ++k) s += gi[i][k] * g[k][j];
            CHECK(s == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12));
        }
}

TEST_CASE("tetrads are orthonormal and reproduce components") {
    const Chart chart = make_schwarzschild(1.0);
    Rng rng(3, 0);
    for (int n = 0; n < 50; ++n) {
        const Vec4 m{rng.uniform(-1.0, 1.0), rng.uniform(3.0, 15.0),
                     rng.uniform(0.5, M_PI - 0.5), rng.uniform(0.0, 2 * M_PI)};
        // random future timelike hint
        Vec4 hint{1.0, rng.uniform(-0.1, 0.1), rng.uniform(-0.05, 0.05),
                  rng.uniform(-0.05, 0.05)};
        const Tetrad t = build_tetrad(chart, m, hint);
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) {
                const double expect = a == b ? (a == 0 ? 1.0 : -1.0) : 0.0;
                CHECK(chart.metric_product(m, t.e[a], t.e[b]) ==
                      doctest::Approx(expect).epsilon(1e-10));
            }
        // e0 is future oriented
        CHECK(chart.metric_product(m, t.e[0], chart.future_hint()) > 0.0);

        const Vec3 p{rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0),
                     rng.uniform(-2.0, 2.0)};
        const double p0 = std::sqrt(1.0 + p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
        const Vec4 v = t.vector(p0, p);
        double q0;
        Vec3 q;
        tetrad_components(chart, t, v, q0, q);
        CHECK(q0 == doctest::Approx(p0).epsilon(1e-10));
        for (int i = 0; i < 3; ++i)
            CHECK(q[i] == doctest::Approx(p[i]).epsilon(1e-10));
    }
}

TEST_CASE("error paths") {
    const Chart chart = make_schwarzschild(1.0);
    CHECK_THROWS_AS(chart.require_in_domain(Vec4{0.0, 2.05, 1.0, 0.0}),
                    OutOfDomain);
    CHECK_THROWS_AS(
        build_tetrad(chart, Vec4{0.0, 6.0, 1.0, 0.0}, Vec4{0.0, 1.0, 0.0, 0.0}),
        NotTimelike);
    CHECK_THROWS_AS(make_chart("kruskal", {}), std::invalid_argument);
}
