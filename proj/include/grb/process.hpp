// The forward Markov process (geodesic flight plus collision jumps via
// thinning), the past-directed process with Feynman-Kac weights, the causal
// estimator of the one-particle distribution, and stationarity checks.
#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <unordered_map>

#include "grb/collision.hpp"
#include "grb/hypersurface.hpp"

namespace grb {

struct ThinningViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NoHit : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class EventKind { flight, jump, hit, abort_path };

const char* event_kind_name(EventKind k);

struct PathEvent {
    double s = 0.0;  // elapsed proper time, nondecreasing
    EventKind kind = EventKind::flight;
    PhasePoint before;
    PhasePoint after;
    double weight_log = 0.0;  // accumulated Feynman-Kac log-weight
};

struct SimConfig {
    double ds = 0.01;         // base geodesic step
    double s_max = 10.0;      // proper-time horizon (forward process)
    double lambda_bar = 1.0;  // thinning majorant rate
    int n_rate = 400;         // samples per rate estimate
    uint64_t seed = 1;
    int workers = 1;
    double hit_bound = -1.0;   // Prop.-2 style bound; < 0: coordinate-time gap
    double no_hit_factor = 10.0;  // NoHit when s exceeds factor * hit_bound
    double cell_size_x = 0.25;    // rate-cache granularity
    double cell_size_p = 0.125;
};

// Validates lambda_bar >= 4 pi W_bar sup n_f by sampling positions; throws
// ThinningViolation when violated.
void validate_majorant(const Chart& chart, const DistributionField& f,
                       const CollisionKernel& kernel, const SimConfig& cfg,
                       const std::vector<Vec4>& probe_positions);

// Cached Monte Carlo estimates of the gain-loss rate imbalance
// c(phi) = Lambda(phi) - L(phi), a diagnostic of how strongly the backward
// jump weights depart from 1 around phi. Values are keyed by quantized
// phase-space cells and computed with a cell-keyed RNG stream, so they do
// not depend on which path or worker first requests them.
class RateCache {
  public:
    RateCache(const Chart& chart, const DistributionField& f,
              const CollisionKernel& kernel, const SimConfig& cfg);

    double potential(const PhasePoint& phi) const;

  private:
    uint64_t cell_key(const PhasePoint& phi) const;
    double compute(const PhasePoint& phi, uint64_t key) const;

    const Chart* chart_;
    const DistributionField* f_;
    const CollisionKernel* kernel_;
    SimConfig cfg_;
    mutable std::mutex mutex_;
    mutable std::unordered_map<uint64_t, double> cache_;
};

// Forward process from phi0 over [0, s_max]: thinning against a Poisson
// candidate stream of rate lambda_bar, acceptance 4 pi W n_f / lambda_bar.
std::vector<PathEvent> simulate_forward(const Chart& chart,
                                        const PhasePoint& phi0,
                                        const DistributionField& f,
                                        const CollisionKernel& kernel,
                                        const SimConfig& cfg, Rng& rng);

struct BackwardResult {
    PhasePoint phi_hit;
    double hit_time = 0.0;
    double weight_log = 0.0;
    std::vector<PathEvent> events;
    // requested mid-path snapshots (phi, weight_log) at s ^ H
    std::vector<std::pair<PhasePoint, double>> snapshots;
};

// Past-directed process from phi0 down to the hitting of V. Jumps are
// proposed from the forward law and each accepted jump multiplies the
// Feynman-Kac weight by the likelihood ratio f(p')/f(mdot') of the
// gain-side jump density against the proposal; flights leave the weight
// unchanged. snapshot_times, when given, must be increasing.
BackwardResult simulate_backward(const Chart& chart, const PhasePoint& phi0,
                                 const DistributionField& f,
                                 const CollisionKernel& kernel,
                                 const Hypersurface& v, const SimConfig& cfg,
                                 Rng& rng,
                                 const std::vector<double>& snapshot_times = {});

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
    int n = 0;
};

// f(phi0) as the weighted mean of f_initial at the hitting point over
// n_paths backward paths. Path i uses the RNG stream (cfg.seed, i).
Estimate estimate_f(const Chart& chart, const PhasePoint& phi0,
                    const DistributionField& f, const CollisionKernel& kernel,
                    const Hypersurface& v, const DistributionField& f_initial,
                    int n_paths, const SimConfig& cfg);

struct PairedEstimate {
    Estimate base;
    Estimate bumped;
    Estimate diff;  // paired per-path difference on shared streams
};

// Two initial-data functionals evaluated along the same backward paths.
PairedEstimate estimate_f_paired(const Chart& chart, const PhasePoint& phi0,
                                 const DistributionField& f,
                                 const CollisionKernel& kernel,
                                 const Hypersurface& v,
                                 const DistributionField& f_a,
                                 const DistributionField& f_b, int n_paths,
                                 const SimConfig& cfg);

struct MartingaleRow {
    double s;
    double mean;
    double std_error;
};

// Mean of weight_s * candidate(psi_{s ^ H}) on a grid of proper times; the
// dynamics and weights are driven by the background field.
std::vector<MartingaleRow> martingale_check(
    const Chart& chart, const PhasePoint& phi0,
    const DistributionField& background, const DistributionField& candidate,
    const CollisionKernel& kernel, const Hypersurface& v, const SimConfig& cfg,
    int n_paths, const std::vector<double>& s_grid);

struct Region {
    Vec4 lo;
    Vec4 hi;
    double coordinate_volume() const {
        double vol = 1.0;
        for (int i = 0; i < 4; ++i) vol *= hi[i] - lo[i];
        return vol;
    }
};

// Monte Carlo estimate of int g (G h) dVOL over the region: the weak-form
// stationarity integral. Positions are sampled uniformly in the coordinate
// box, momenta from the partner law of the background field.
void weak_stationarity_check(const Chart& chart,
                             const DistributionField& background,
                             const DistributionField& candidate,
                             const CollisionKernel& kernel,
                             const std::function<double(const PhasePoint&)>& h,
                             const Region& region, int n_samples, int n_inner,
                             Rng& rng, double& integral, double& err);

void save_events_csv(const std::string& path,
                     const std::vector<PathEvent>& events);

}  // namespace grb
