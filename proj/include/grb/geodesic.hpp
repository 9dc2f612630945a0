// Free fall on the unit tangent bundle: RK4 steps of the geodesic field with
// post-step mass-shell renormalization, forward or past-directed.
#pragma once

#include <functional>
#include <vector>

#include "grb/phase_space.hpp"

namespace grb {

enum class Direction { future, past };

struct LeftDomain : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct StepRejected : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct H0Rhs {
    Vec4 dx;   // = mdot
    Vec4 du;   // = -Gamma^k_ij mdot^i mdot^j
};

H0Rhs h0_rhs(const Chart& chart, const PhasePoint& phi);

// One RK4 step of size ds (>0), negated field for the past direction, then
// rescale u onto the shell. The renormalization magnitude |factor - 1| is
// written to *renorm when given; StepRejected when it exceeds 1e-6.
PhasePoint geodesic_step(const Chart& chart, const PhasePoint& phi, double ds,
                         Direction dir, double* renorm = nullptr);

struct PathSample {
    double s;  // proper time from the start, nonnegative
    PhasePoint phi;
    double shell_err;
};

using StepObserver = std::function<void(double s, const PhasePoint&)>;

// Iterated geodesic_step with step halving on rejection (at most 20 halvings
// per step). The returned path includes the initial point.
std::vector<PathSample> geodesic_flow(const Chart& chart, const PhasePoint& phi0,
                                      double s_total, double ds, Direction dir,
                                      const StepObserver& observer = nullptr);

// Same integration without storing the path; returns the end point.
PhasePoint geodesic_advance(const Chart& chart, const PhasePoint& phi0,
                            double s_total, double ds, Direction dir);

void dump_path_csv(const std::string& path,
                   const std::vector<PathSample>& samples);

}  // namespace grb
