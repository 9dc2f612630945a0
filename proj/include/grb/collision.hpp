// Binary elastic collisions: center-of-momentum kinematics, collision
// kernels with the microreversibility symmetry, total rate and the
// gain-minus-loss collision integral.
#pragma once

#include <functional>
#include <memory>

#include "grb/phase_space.hpp"

namespace grb {

struct DegeneratePair : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ScatterAngle {
    double theta = 0.0;    // polar, [0, pi], measured from the incoming
                           // relative direction in the CM frame
    double azimuth = 0.0;  // [0, 2 pi)
};

inline ScatterAngle sample_angle(Rng& rng) {
    return ScatterAngle{std::acos(rng.uniform(-1.0, 1.0)),
                        rng.uniform(0.0, 2.0 * M_PI)};
}

struct CollisionOutcome {
    Vec4 p;   // outgoing tangent of the tracked particle
    Vec4 pp;  // outgoing tangent of the partner
};

// Elastic outcome with total tangent conserved componentwise and both
// outgoing vectors on the unit shell. theta = 0 returns the inputs.
CollisionOutcome collide(const Chart& chart, const Vec4& m, const Vec4& mdot,
                         const Vec4& mdot_partner, const ScatterAngle& angle);

class CollisionKernel {
  public:
    virtual ~CollisionKernel() = default;
    virtual double eval(const Chart& chart, const Vec4& m, const Vec4& mdot,
                        const Vec4& mdot_partner,
                        const ScatterAngle& angle) const = 0;
    // W <= rate_bound on the configured momentum support.
    virtual double rate_bound() const = 0;
};

// W = c / (4 pi): unit total angular mass per unit partner density.
std::shared_ptr<CollisionKernel> kernel_constant(double c);

// W = sigma/(4 pi) * sqrt(gamma_rel^2 - 1), Moller-type flux factor.
// p_support bounds |p_spatial| of either particle in any frame where the
// bound is applied; it fixes rate_bound.
std::shared_ptr<CollisionKernel> kernel_hard_sphere(double sigma,
                                                    double p_support);

std::shared_ptr<CollisionKernel> make_kernel(
    const std::string& name, const std::map<std::string, double>& params);

// Monte Carlo estimate of the total collision rate at phi against background
// f: int W dtheta f(m, mdot') VOL^1(dmdot').
void total_rate(const Chart& chart, const PhasePoint& phi,
                const DistributionField& f, const CollisionKernel& kernel,
                int n_samples, Rng& rng, double& rate, double& err);

// Monte Carlo estimate of C(f, g)(phi), importance-sampled from the partner
// law of f and uniform scattering angles.
void collision_integral(const Chart& chart, const PhasePoint& phi,
                        const DistributionField& f, const DistributionField& g,
                        const CollisionKernel& kernel, int n_samples, Rng& rng,
                        double& value, double& err);

}  // namespace grb
