#include "grb/causal.hpp"

#include <algorithm>
#include <cmath>

#include "grb/parallel.hpp"

namespace grb {

Prop2Report prop2_bound_check(const Chart& chart, const Hypersurface& v,
                              const Vec4& m, const DistributionField& f,
                              const CollisionKernel& kernel, int n_paths,
                              const SimConfig& cfg) {
    Prop2Report rep;
    rep.n_paths = n_paths;

    auto run_one = [&](uint64_t stream) {
        Rng rng(cfg.seed, stream);
        const PhasePoint phi0{m, f.sample_partner(m, rng)};
        return simulate_backward(chart, phi0, f, kernel, v, cfg, rng)
            .hit_time;
    };

    if (cfg.hit_bound >= 0.0) {
        rep.bound = cfg.hit_bound;
        rep.asserted = true;
    } else if (chart.name() == "minkowski" && v.name() == "flat") {
        // proper time to the surface is at most the coordinate-time gap,
        // since dt/ds = p0 >= 1
        rep.bound = v.level(m);
        rep.asserted = true;
    } else {
        const int pilot = std::max(50, n_paths / 20);
        double max_h = 0.0;
        for (int i = 0; i < pilot; ++i)
            max_h = std::max(max_h, run_one(1000000000ull + i));
        rep.bound = 1.5 * max_h;
        rep.asserted = false;
    }

    std::vector<double> hits(n_paths);
    parallel_for(n_paths, cfg.workers,
                 [&](int i) { hits[i] = run_one(static_cast<uint64_t>(i)); });
    for (double h : hits) {
        rep.max_hit = std::max(rep.max_hit, h);
        if (h > rep.bound + 1e-9) ++rep.violations;
    }
    return rep;
}

IndependenceReport hypersurface_independence_check(
    const Chart& chart, const PhasePoint& phi0, const DistributionField& f,
    const CollisionKernel& kernel, const Hypersurface& v1,
    const Hypersurface& v2, const DistributionField& f_initial, int n_paths,
    const SimConfig& cfg) {
    IndependenceReport rep;

    // anchor: where the free past geodesic from phi0 meets each surface
    Hit anchors[2];
    const Hypersurface* surfaces[2] = {&v1, &v2};
    for (int k = 0; k < 2; ++k) {
        const auto path = geodesic_flow(chart, phi0,
                                        4.0 * std::max(1.0, v1.level(phi0.x)),
                                        cfg.ds, Direction::past);
        anchors[k] = hitting_time(chart, path, *surfaces[k], Direction::past);
    }
    if (max_abs(anchors[0].phi.x - anchors[1].phi.x) > 1e-6) {
        rep.note = "surfaces do not share the anchor point";
        return rep;
    }
    for (int k = 0; k < 2; ++k) {
        const Vec4 w = surfaces[k]->normal(chart, anchors[k].phi.x);
        const double align =
            chart.metric_product(anchors[k].phi.x, w, anchors[k].phi.u);
        if (std::fabs(align - 1.0) > 1e-6) {
            rep.note = "surface " + std::to_string(k + 1) +
                       " is not orthogonal to the transported velocity";
            return rep;
        }
    }
    rep.precondition_ok = true;

    rep.first = estimate_f(chart, phi0, f, kernel, v1, f_initial, n_paths, cfg);
    rep.second = estimate_f(chart, phi0, f, kernel, v2, f_initial, n_paths, cfg);
    const double combined = std::max(
        std::hypot(rep.first.std_error, rep.second.std_error), 1e-12);
    rep.agree = std::fabs(rep.first.value - rep.second.value) <= 3.0 * combined;
    return rep;
}

HittingHistogram hitting_density_histogram(const Chart& chart,
                                           const JuttnerField& equilibrium,
                                           const CollisionKernel& kernel,
                                           const Hypersurface& v,
                                           double start_time, int n_paths,
                                           int bins, double e_max,
                                           const SimConfig& cfg) {
    HittingHistogram hist;
    hist.edges.resize(bins + 1);
    for (int b = 0; b <= bins; ++b)
        hist.edges[b] = 1.0 + (e_max - 1.0) * b / bins;
    hist.counts.assign(bins, 0.0);

    std::vector<double> energies(n_paths, -1.0);
    parallel_for(n_paths, cfg.workers, [&](int i) {
        Rng rng(cfg.seed, static_cast<uint64_t>(i));
        Vec4 x{start_time, rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
               rng.uniform(-1.0, 1.0)};
        PhasePoint phi{x, equilibrium.sample_snapshot(x, rng)};
        double s = 0.0;
        const double s_stop = 2.0 * std::fabs(start_time) + 2.0;
        while (s < s_stop) {
            const double gap = cfg.lambda_bar > 0.0
                                   ? rng.exponential(cfg.lambda_bar)
                                   : 1e300;
            const double s_next = s + gap;
            bool crossed = false;
            while (s < s_next && s < s_stop) {
                const double step = std::min(cfg.ds, s_next - s);
                const PathSample before{s, phi, 0.0};
                phi = geodesic_step(chart, phi, step, Direction::future);
                s += step;
                if (v.level(phi.x) * v.level(before.phi.x) <= 0.0) {
                    const Hit hit = refine_crossing(
                        chart, v, before, {s, phi, 0.0}, Direction::future);
                    energies[i] = gamma_bar(chart, v, hit.phi);
                    crossed = true;
                    break;
                }
            }
            if (crossed || s >= s_stop) break;

            const Vec4 partner = equilibrium.sample_partner(phi.x, rng);
            const ScatterAngle angle = sample_angle(rng);
            const double w = kernel.eval(chart, phi.x, phi.u, partner, angle);
            const double accept = 4.0 * M_PI * w *
                                  equilibrium.local_norm(phi.x) /
                                  cfg.lambda_bar;
            if (accept > 1.0 + 1e-9)
                throw ThinningViolation("hitting-density run: raise lambda_bar");
            if (rng.uniform() < accept)
                phi.u = collide(chart, phi.x, phi.u, partner, angle).p;
        }
    });

    for (double e : energies) {
        if (e < 1.0 || e >= e_max) continue;
        const int b = std::min(bins - 1, static_cast<int>((e - 1.0) /
                                                          (e_max - 1.0) * bins));
        hist.counts[b] += 1.0;
        ++hist.total;
    }
    return hist;
}

}  // namespace grb
