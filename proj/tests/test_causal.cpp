#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "grb/causal.hpp"
#include "grb/stats.hpp"

using namespace grb;

namespace {

SimConfig backward_config(uint64_t seed) {
    SimConfig cfg;
    cfg.ds = 0.02;
    cfg.lambda_bar = 1.0;
    cfg.seed = seed;
    cfg.workers = 4;
    return cfg;
}

}  // namespace

TEST_CASE("prop2: flat minkowski bound holds for every path") {
    const Chart chart = make_minkowski();
    const JuttnerField f(chart, {2.0, {1, 0, 0, 0}}, nullptr, 3.5);
    const auto kernel = make_kernel("constant", {{"c", 1.0}});
    const Hypersurface v = make_flat_surface(0.0);
    const SimConfig cfg = backward_config(51);
    const Vec4 m{1.0, 0.2, -0.1, 0.3};

    const Prop2Report rep =
        prop2_bound_check(chart, v, m, f, *kernel, 500, cfg);
    CHECK(rep.asserted);
    CHECK(rep.bound == doctest::Approx(1.0));
    CHECK(rep.violations == 0);
    CHECK(rep.max_hit > 0.0);
    CHECK(rep.max_hit <= rep.bound + 1e-9);
    CHECK(rep.n_paths == 500);
}

TEST_CASE("prop2: configured bound is asserted as given") {
    const Chart chart = make_minkowski();
    const JuttnerField f(chart, {2.0, {1, 0, 0, 0}}, nullptr, 3.5);
    const auto kernel = make_kernel("constant", {{"c", 1.0}});
    const Hypersurface v = make_flat_surface(0.0);
    SimConfig cfg = backward_config(53);
    cfg.hit_bound = 0.8;

    const Prop2Report rep =
        prop2_bound_check(chart, v, {0.7, 0, 0, 0}, f, *kernel, 200, cfg);
    CHECK(rep.asserted);
    CHECK(rep.bound == doctest::Approx(0.8));
    CHECK(rep.violations == 0);
}

TEST_CASE("prop2: pilot bound for surfaces without a theorem") {
    const Chart chart = make_minkowski();
    const JuttnerField f(chart, {2.0, {1, 0, 0, 0}}, nullptr, 3.5);
    const auto kernel = make_kernel("constant", {{"c", 1.0}});
    const Hypersurface v = make_tilted_surface(0.3);
    const SimConfig cfg = backward_config(57);

    const Prop2Report rep =
        prop2_bound_check(chart, v, {1.0, 0, 0, 0}, f, *kernel, 200, cfg);
    CHECK_FALSE(rep.asserted);
    CHECK(rep.bound > 0.0);
    CHECK(rep.max_hit <= rep.bound + 1e-9);
}

TEST_CASE("independence: flat and ring bump through the anchor agree") {
    const Chart chart = make_minkowski();
    const JuttnerField f(chart, {2.0, {1, 0, 0, 0}}, nullptr, 3.5);
    const auto kernel = make_kernel("constant", {{"c", 1.0}});
    // rest observer at t = 1: the free past geodesic lands at the origin of
    // t = 0, where the ring bump is flat with zero gradient
    const Hypersurface v1 = make_flat_surface(0.0);
    const Hypersurface v2 = make_ring_bump_surface(0.3, 1.0);
    const PhasePoint phi0{{1.0, 0, 0, 0}, {1.0, 0, 0, 0}};
    const SimConfig cfg = backward_config(59);

    const IndependenceReport rep = hypersurface_independence_check(
        chart, phi0, f, *kernel, v1, v2, f, 400, cfg);
    CHECK(rep.precondition_ok);
    CHECK(rep.note.empty());
    CHECK(rep.first.value > 0.0);
    CHECK(rep.agree);
}

TEST_CASE("independence: misaligned normal fails the precondition") {
    const Chart chart = make_minkowski();
    const JuttnerField f(chart, {2.0, {1, 0, 0, 0}}, nullptr, 3.5);
    const auto kernel = make_kernel("constant", {{"c", 1.0}});
    const Hypersurface v1 = make_flat_surface(0.0);
    const Hypersurface v2 = make_ring_bump_surface(0.3, 1.0);
    const Vec3 p{0.6, 0.0, 0.0};
    const double p0 = std::sqrt(1 + p[0] * p[0]);
    const PhasePoint phi0{{1.0, 0, 0, 0}, {p0, p[0], p[1], p[2]}};
    const SimConfig cfg = backward_config(61);

    const IndependenceReport rep = hypersurface_independence_check(
        chart, phi0, f, *kernel, v1, v2, f, 50, cfg);
    CHECK_FALSE(rep.precondition_ok);
    CHECK_FALSE(rep.note.empty());
}

TEST_CASE("hitting density histogram matches gamma_bar * f") {
    const Chart chart = make_minkowski();
    const JuttnerField f(chart, {2.0, {1, 0, 0, 0}});
    const auto kernel = make_kernel("constant", {{"c", 1.0}});
    const Hypersurface v = make_flat_surface(0.0);
    SimConfig cfg = backward_config(63);

    const int n_paths = 20000;
    const int bins = 8;
    const double e_max = 3.5;
    const HittingHistogram hist = hitting_density_histogram(
        chart, f, *kernel, v, -0.5, n_paths, bins, e_max, cfg);
    REQUIRE(hist.edges.size() == size_t(bins + 1));
    REQUIRE(hist.counts.size() == size_t(bins));
    // every path crosses; about 5% of crossing energies sit above e_max
    CHECK(hist.total >= int(0.90 * n_paths));
    double count_sum = 0.0;
    for (double c : hist.counts) count_sum += c;
    CHECK(count_sum == doctest::Approx(double(hist.total)));

    // mu = gamma_bar * f: on the flat slice the crossing-energy density
    // under VOL^1 is proportional to p(E) E e^{-beta E}
    const double beta = 2.0;
    auto mass = [beta](double a, double b) {
        return integrate_simpson(
            [beta](double e) {
                return std::sqrt(std::max(0.0, e * e - 1.0)) * e *
                       std::exp(-beta * e);
            },
            a, b, 200);
    };
    double norm = mass(1.0, e_max);
    std::vector<double> expected(bins);
    for (int b = 0; b < bins; ++b)
        expected[b] =
            hist.total * mass(hist.edges[b], hist.edges[b + 1]) / norm;
    CHECK(chi2_statistic(hist.counts, expected) <=
          chi2_critical(bins - 1, 0.01));
}
