#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "grb/collision.hpp"

using namespace grb;

namespace {

PhasePoint random_state(const Chart& chart, const Vec4& m, Rng& rng,
                        double p_scale = 2.0) {
    const Tetrad t = build_tetrad(chart, m, chart.future_hint());
    const Vec3 p{rng.uniform(-p_scale, p_scale), rng.uniform(-p_scale, p_scale),
                 rng.uniform(-p_scale, p_scale)};
    return lift_to_shell(chart, t, p);
}

void conservation_suite(const Chart& chart, const Vec4& m, uint64_t seed) {
    Rng rng(seed, 0);
    double worst_cons = 0.0, worst_shell = 0.0, worst_sym = 0.0;
    const auto hs = kernel_hard_sphere(1.0, 20.0);
    const auto cons = kernel_constant(1.0);
    for (int n = 0; n < 100000; ++n) {
        const Vec4 p = random_state(chart, m, rng).u;
        const Vec4 pp = random_state(chart, m, rng).u;
        const ScatterAngle angle = sample_angle(rng);
        const CollisionOutcome out = collide(chart, m, p, pp, angle);
        for (int i = 0; i < 4; ++i)
            worst_cons = std::max(
                worst_cons, std::fabs(out.p[i] + out.pp[i] - p[i] - pp[i]));
        worst_shell = std::max(worst_shell, shell_error(chart, {m, out.p}));
        worst_shell = std::max(worst_shell, shell_error(chart, {m, out.pp}));
        // kernel symmetry under (incoming pair) -> (outgoing pair)
        for (const auto& k : {hs, cons})
            worst_sym = std::max(
                worst_sym, std::fabs(k->eval(chart, m, p, pp, angle) -
                                     k->eval(chart, m, out.p, out.pp, angle)));
    }
    CHECK(worst_cons <= 1e-12);
    CHECK(worst_shell <= 1e-12);
    CHECK(worst_sym <= 1e-12);
}

}  // namespace

TEST_CASE("conservation, shell and kernel symmetry: minkowski") {
    conservation_suite(make_minkowski(), {0, 0, 0, 0}, 2);
}

TEST_CASE("conservation, shell and kernel symmetry: schwarzschild") {
    conservation_suite(make_schwarzschild(1.0), {0.0, 7.0, 1.2, 0.4}, 3);
}

TEST_CASE("theta = 0 returns the inputs exactly") {
    const Chart chart = make_minkowski();
    Rng rng(5, 0);
    for (int n = 0; n < 100; ++n) {
        const Vec4 p = random_state(chart, {0, 0, 0, 0}, rng).u;
        const Vec4 pp = random_state(chart, {0, 0, 0, 0}, rng).u;
        const CollisionOutcome out =
            collide(chart, {0, 0, 0, 0}, p, pp, {0.0, rng.uniform(0.0, 6.28)});
        for (int i = 0; i < 4; ++i) {
            CHECK(out.p[i] == p[i]);
            CHECK(out.pp[i] == pp[i]);
        }
    }
}

TEST_CASE("cm scattering angle is realized") {
    const Chart chart = make_minkowski();
    const Mat4 eta = chart.metric({0, 0, 0, 0});
    Rng rng(7, 0);
    for (int n = 0; n < 1000; ++n) {
        const Vec4 p = random_state(chart, {0, 0, 0, 0}, rng).u;
        const Vec4 pp = random_state(chart, {0, 0, 0, 0}, rng).u;
        const ScatterAngle angle = sample_angle(rng);
        const CollisionOutcome out = collide(chart, {0, 0, 0, 0}, p, pp, angle);

        // q_in/q_out: momenta orthogonal to the total P; their angle is theta
        const Vec4 P = p + pp;
        const double P2 = inner(eta, P, P);
        auto project = [&](const Vec4& v) {
            const double c = inner(eta, v, P) / P2;
            return v + (-c) * P;
        };
        const Vec4 qi = project(p), qo = project(out.p);
        const double ci = -inner(eta, qi, qo) /
                          std::sqrt(inner(eta, qi, qi) * inner(eta, qo, qo));
        CHECK(ci == doctest::Approx(std::cos(angle.theta)).epsilon(1e-10));
        // gamma_rel conserved
        CHECK(inner(eta, out.p, out.pp) ==
              doctest::Approx(inner(eta, p, pp)).epsilon(1e-12));
    }
}

TEST_CASE("scattering invariants are boost invariant") {
    const Chart chart = make_minkowski();
    const Mat4 eta = chart.metric({0, 0, 0, 0});
    const double v = 0.6, gamma = 1.0 / std::sqrt(1.0 - v * v);
    auto boost = [&](const Vec4& u) {
        return Vec4{gamma * (u[0] + v * u[1]), gamma * (u[1] + v * u[0]), u[2],
                    u[3]};
    };
    Rng rng(11, 0);
    for (int n = 0; n < 1000; ++n) {
        const Vec4 p = random_state(chart, {0, 0, 0, 0}, rng).u;
        const Vec4 pp = random_state(chart, {0, 0, 0, 0}, rng).u;
        const ScatterAngle angle = sample_angle(rng);
        const CollisionOutcome a = collide(chart, {0, 0, 0, 0}, p, pp, angle);
        const CollisionOutcome b =
            collide(chart, {0, 0, 0, 0}, boost(p), boost(pp), angle);
        // the scalar data of the collision agree between frames
        CHECK(inner(eta, b.p, b.pp) ==
              doctest::Approx(inner(eta, a.p, a.pp)).epsilon(1e-10));
        CHECK(inner(eta, b.p, boost(p)) ==
              doctest::Approx(inner(eta, a.p, p)).epsilon(1e-10));
        CHECK(inner(eta, b.p, boost(pp)) ==
              doctest::Approx(inner(eta, a.p, pp)).epsilon(1e-10));
    }
}

TEST_CASE("degenerate pair") {
    const Chart chart = make_minkowski();
    const Vec4 p{std::sqrt(2.0), 1.0, 0.0, 0.0};
    CHECK_THROWS_AS(collide(chart, {0, 0, 0, 0}, p, p, {1.0, 0.5}),
                    DegeneratePair);
}

TEST_CASE("hard-sphere kernel value and rate bound") {
    const Chart chart = make_minkowski();
    const auto k = kernel_hard_sphere(2.0, 3.0);
    const Vec4 rest{1, 0, 0, 0};
    const Vec4 moving{std::sqrt(2.0), 1.0, 0.0, 0.0};
    // gamma_rel = sqrt(2): W = sigma/(4pi) sqrt(gamma^2-1) = 2/(4pi)
    CHECK(k->eval(chart, {0, 0, 0, 0}, rest, moving, {0.3, 0.1}) ==
          doctest::Approx(2.0 / (4.0 * M_PI)).epsilon(1e-12));
    // support bound: gamma_max = 1 + 2 * 3^2 = 19
    CHECK(k->rate_bound() ==
          doctest::Approx(2.0 / (4.0 * M_PI) * std::sqrt(19.0 * 19.0 - 1.0))
              .epsilon(1e-12));
}

TEST_CASE("total rate against quadrature oracles") {
    const Chart chart = make_minkowski();
    const JuttnerField f(chart, {2.0, {1, 0, 0, 0}});
    Rng rng(13, 0);

    // constant kernel: rate = c * n_f = K1(2)/K2(2)
    {
        double rate = 0.0, err = 0.0;
        total_rate(chart, {{0, 0, 0, 0}, {1, 0, 0, 0}}, f, *kernel_constant(1.0),
                   200000, rng, rate, err);
        CHECK(std::fabs(rate - 0.5511744053177438) < 3.0 * err);
        CHECK(rate == doctest::Approx(0.5511744053177438).epsilon(0.01));
    }
    // hard sphere at rest, frozen 1D quadrature
    {
        double rate = 0.0, err = 0.0;
        total_rate(chart, {{0, 0, 0, 0}, {1, 0, 0, 0}}, f,
                   *kernel_hard_sphere(1.0, 50.0), 200000, rng, rate, err);
        CHECK(std::fabs(rate - 0.7999807739492261) < 3.0 * err);
        CHECK(rate == doctest::Approx(0.7999807739492261).epsilon(0.02));
    }
    // hard sphere moving with p = (1,0,0), frozen 2D quadrature
    {
        double rate = 0.0, err = 0.0;
        total_rate(chart, {{0, 0, 0, 0}, {std::sqrt(2.0), 1, 0, 0}}, f,
                   *kernel_hard_sphere(1.0, 50.0), 200000, rng, rate, err);
        CHECK(std::fabs(rate - 1.2641000541554426) < 3.0 * err);
        CHECK(rate == doctest::Approx(1.2641000541554426).epsilon(0.02));
    }
}

TEST_CASE("collision integral annihilates the equilibrium") {
    const Chart chart = make_minkowski();
    const JuttnerField f(chart, {2.0, {1, 0, 0, 0}});
    Rng rng(17, 0);
    const Tetrad t = build_tetrad(chart, {0, 0, 0, 0}, {1, 0, 0, 0});
    const PhasePoint phi = lift_to_shell(chart, t, {0.5, -0.2, 0.3});

    // constant kernel: energy conservation makes the gain term deterministic,
    // so the cancellation is exact up to rounding
    double value = 0.0, err = 0.0;
    collision_integral(chart, phi, f, f, *kernel_constant(1.0), 50000, rng,
                       value, err);
    CHECK(std::fabs(value) <= 1e-14);

    // hard sphere: genuine variance, mean within 3 stderr of zero
    collision_integral(chart, phi, f, f, *kernel_hard_sphere(0.5, 50.0), 200000,
                       rng, value, err);
    CHECK(std::fabs(value) <= 3.0 * err);
    CHECK(err > 0.0);
}

TEST_CASE("kernel factory") {
    CHECK(make_kernel("zero", {})->rate_bound() == 0.0);
    CHECK(make_kernel("constant", {{"c", 2.0}})->rate_bound() ==
          doctest::Approx(2.0 / (4.0 * M_PI)));
    CHECK_THROWS_AS(make_kernel("coulomb", {}), std::invalid_argument);
}
