#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "grb/geodesic.hpp"

using namespace grb;

TEST_CASE("minkowski geodesics are exact straight lines") {
    const Chart chart = make_minkowski();
    Rng rng(3, 0);
    for (int n = 0; n < 20; ++n) {
        const Vec3 p{rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0),
                     rng.uniform(-2.0, 2.0)};
        const double p0 = std::sqrt(1 + p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
        const PhasePoint phi0{{0, 0, 0, 0}, {p0, p[0], p[1], p[2]}};
        const double s = 10.0;
        const PhasePoint end =
            geodesic_advance(chart, phi0, s, 0.05, Direction::future);
        for (int i = 0; i < 4; ++i) {
            CHECK(std::fabs(end.x[i] - s * phi0.u[i]) <= 1e-12);
            CHECK(std::fabs(end.u[i] - phi0.u[i]) <= 1e-12);
        }
    }
}

TEST_CASE("schwarzschild circular orbit at r=6M conserves E and L") {
    const double M = 1.0;
    const Chart chart = make_schwarzschild(M);
    const double r = 6.0;
    // circular orbit: u^t = 1/sqrt(1-3M/r), u^ph = sqrt(M/r^3) u^t
    const double ut = 1.0 / std::sqrt(1.0 - 3.0 * M / r);
    const double uph = std::sqrt(M / (r * r * r)) * ut;
    PhasePoint phi{{0.0, r, M_PI / 2.0, 0.0}, {ut, 0.0, 0.0, uph}};
    CHECK(shell_error(chart, phi) < 1e-14);

    const double f = 1.0 - 2.0 * M / r;
    const double e0 = f * ut;       // = 2 sqrt(2)/3
    const double l0 = r * r * uph;  // = 2 sqrt(3)
    CHECK(e0 == doctest::Approx(2.0 * std::sqrt(2.0) / 3.0).epsilon(1e-14));
    CHECK(l0 == doctest::Approx(2.0 * std::sqrt(3.0)).epsilon(1e-14));

    const double orbit = 2.0 * M_PI / uph;  // proper time of one revolution
    double max_de = 0.0, max_dl = 0.0, max_shell = 0.0;
    const auto path = geodesic_flow(chart, phi, orbit, 1e-3, Direction::future,
                                    [&](double, const PhasePoint& q) {
                                        const double fe =
                                            (1.0 - 2.0 * M / q.x[1]) * q.u[0];
                                        const double le =
                                            q.x[1] * q.x[1] *
                                            std::sin(q.x[2]) * std::sin(q.x[2]) *
                                            q.u[3];
                                        max_de = std::max(max_de,
                                                          std::fabs(fe - e0));
                                        max_dl = std::max(max_dl,
                                                          std::fabs(le - l0));
                                    });
    for (const auto& sample : path)
        max_shell = std::max(max_shell, sample.shell_err);
    CHECK(max_de <= 1e-8);
    CHECK(max_dl <= 1e-8);
    CHECK(max_shell <= 1e-9);

    // after one revolution phi advanced by 2 pi at the same radius
    const PhasePoint& end = path.back().phi;
    CHECK(end.x[1] == doctest::Approx(r).epsilon(1e-6));
    CHECK(end.x[3] == doctest::Approx(2.0 * M_PI).epsilon(1e-6));
}

TEST_CASE("rk4 convergence slope") {
    // eccentric orbit: a circular one is too symmetric and hides the error
    const Chart chart = make_schwarzschild(1.0);
    const double r = 6.0, f = 1.0 - 2.0 / r;
    const double uph = std::sqrt(1.0 / 216.0) / std::sqrt(0.5);
    const double ur = 0.3;
    const double ut = std::sqrt((1.0 + ur * ur / f + r * r * uph * uph) / f);
    const PhasePoint phi{{0.0, r, M_PI / 2.0, 0.0}, {ut, ur, 0.0, uph}};
    REQUIRE(shell_error(chart, phi) < 1e-13);
    const double s = 2.0;
    const PhasePoint ref =
        geodesic_advance(chart, phi, s, 1e-4, Direction::future);
    auto err = [&](double ds) {
        const PhasePoint e = geodesic_advance(chart, phi, s, ds, Direction::future);
        double d = 0.0;
        for (int i = 0; i < 4; ++i) d = std::max(d, std::fabs(e.x[i] - ref.x[i]));
        return d;
    };
    const double slope = std::log2(err(0.16) / err(0.08));
    CHECK(slope == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("flrw momentum redshift") {
    // flat FLRW with a(t)=t: the covariant spatial momentum a^2 u^x is
    // conserved, so the physical momentum a u^x falls off as 1/a
    const Chart chart = make_chart("flrw", {{"a_power", 1.0}});
    const double t0 = 1.0;
    const double px = 2.0;  // physical momentum at t0 (a=1)
    const PhasePoint phi{{t0, 0, 0, 0},
                         {std::sqrt(1.0 + px * px), px, 0.0, 0.0}};
    CHECK(shell_error(chart, phi) < 1e-12);
    const PhasePoint end = geodesic_advance(chart, phi, 3.0, 1e-3,
                                            Direction::future);
    const double a_end = end.x[0];
    CHECK(a_end * a_end * end.u[1] == doctest::Approx(px).epsilon(1e-8));
    CHECK(shell_error(chart, end) < 1e-9);
}

TEST_CASE("past integration reverses future integration") {
    const Chart chart = make_schwarzschild(1.0);
    const double r = 6.0, f = 1.0 - 2.0 / r;
    const double uph = std::sqrt(1.0 / 216.0) / std::sqrt(0.5);
    const double ur = 0.05;
    const double ut = std::sqrt((1.0 + ur * ur / f + r * r * uph * uph) / f);
    const PhasePoint phi{{0.0, r, M_PI / 2.0, 0.0}, {ut, ur, 0.0, uph}};
    REQUIRE(shell_error(chart, phi) < 1e-13);
    const PhasePoint fwd = geodesic_advance(chart, phi, 1.5, 1e-3,
                                            Direction::future);
    const PhasePoint back = geodesic_advance(chart, fwd, 1.5, 1e-3,
                                             Direction::past);
    for (int i = 0; i < 4; ++i) {
        CHECK(back.x[i] == doctest::Approx(phi.x[i]).epsilon(1e-9));
        CHECK(back.u[i] == doctest::Approx(phi.u[i]).epsilon(1e-9));
    }
}

TEST_CASE("leaving the domain raises LeftDomain") {
    const Chart chart = make_schwarzschild(1.0);
    // radial infall from rest at r=6
    const PhasePoint phi{{0.0, 6.0, M_PI / 2.0, 0.0},
                         {1.0 / std::sqrt(1.0 - 1.0 / 3.0), 0.0, 0.0, 0.0}};
    CHECK(shell_error(chart, phi) < 1e-14);
    CHECK_THROWS_AS(
        geodesic_advance(chart, phi, 50.0, 1e-2, Direction::future), LeftDomain);
}

TEST_CASE("flow includes the start and dumps csv") {
    const Chart chart = make_minkowski();
    const PhasePoint phi{{0, 0, 0, 0}, {1, 0, 0, 0}};
    const auto path = geodesic_flow(chart, phi, 0.5, 0.1, Direction::future);
    REQUIRE(path.size() >= 6);
    CHECK(path.front().s == 0.0);
    CHECK(path.back().s == doctest::Approx(0.5));

    dump_path_csv("geodesic-path.csv", path);
    std::ifstream in("geodesic-path.csv");
    std::string header;
    std::getline(in, header);
    if (header.rfind("#", 0) == 0) std::getline(in, header);
    CHECK(header.find("s") != std::string::npos);
    int rows = 0;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == static_cast<int>(path.size()));
}
