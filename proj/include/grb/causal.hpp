// Checks tying the past-directed process to the causal structure: the
// hitting-time bound, estimator independence of the hypersurface choice, and
// the hitting-density relation mu = gamma_bar * f.
#pragma once

#include "grb/process.hpp"

namespace grb {

struct Prop2Report {
    double bound = 0.0;     // the asserted bound T(m)
    double max_hit = 0.0;   // largest observed hitting time
    int violations = 0;     // paths with H > bound (plus tolerance)
    bool asserted = false;  // true when the bound is a theorem for the chart
    int n_paths = 0;
};

// Simulates n_paths backward paths from m with partner-law initial momenta
// and checks every hitting time against the bound. For charts without a
// configured bound a pilot run fixes bound = 1.5 * max pilot H (reported,
// not asserted).
Prop2Report prop2_bound_check(const Chart& chart, const Hypersurface& v,
                              const Vec4& m, const DistributionField& f,
                              const CollisionKernel& kernel, int n_paths,
                              const SimConfig& cfg);

struct IndependenceReport {
    bool precondition_ok = false;  // both surfaces admissible for phi0
    std::string note;
    Estimate first;
    Estimate second;
    bool agree = false;  // |e1 - e2| <= 3 combined stderr
};

// estimate_f against two hypersurfaces that the free geodesic from phi0
// meets at the same anchor point with normal equal to the transported
// velocity; runs share random streams.
IndependenceReport hypersurface_independence_check(
    const Chart& chart, const PhasePoint& phi0, const DistributionField& f,
    const CollisionKernel& kernel, const Hypersurface& v1,
    const Hypersurface& v2, const DistributionField& f_initial, int n_paths,
    const SimConfig& cfg);

struct HittingHistogram {
    std::vector<double> edges;   // energy bin edges, size bins+1
    std::vector<double> counts;  // observed crossings per bin
    int total = 0;
};

// Forward-propagates a fixed-time snapshot of the equilibrium gas across V
// and histograms the crossing energies in the surface-normal frame. Under
// the relation mu = gamma_bar * f the expected bin masses follow
// gamma_bar * f integrated over the bin under VOL^1.
HittingHistogram hitting_density_histogram(const Chart& chart,
                                           const JuttnerField& equilibrium,
                                           const CollisionKernel& kernel,
                                           const Hypersurface& v,
                                           double start_time, int n_paths,
                                           int bins, double e_max,
                                           const SimConfig& cfg);

}  // namespace grb
