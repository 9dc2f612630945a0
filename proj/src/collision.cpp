#include "grb/collision.hpp"

#include <cmath>

namespace grb {

CollisionOutcome collide(const Chart& chart, const Vec4& m, const Vec4& mdot,
                         const Vec4& mdot_partner, const ScatterAngle& angle) {
    if (angle.theta == 0.0) return {mdot, mdot_partner};
    const Mat4 g = chart.metric(m);
    const double gamma_rel = inner(g, mdot, mdot_partner);
    if (gamma_rel < 1.0 + 1e-12)
        throw DegeneratePair("identical momenta: CM direction undefined");

    const Vec4 total = mdot + mdot_partner;
    // CM frame: e0 along the total tangent, e1 along the incoming relative
    // direction, azimuth measured from e2 (deterministic axis convention via
    // the tetrad seed order).
    const Tetrad cm = build_tetrad(chart, m, total, mdot);

    const double e_cm = 0.5 * std::sqrt(2.0 * (1.0 + gamma_rel));
    const double q = std::sqrt(0.5 * (gamma_rel - 1.0));

    const double ct = std::cos(angle.theta), st = std::sin(angle.theta);
    const double ca = std::cos(angle.azimuth), sa = std::sin(angle.azimuth);
    const Vec3 dir{ct, st * ca, st * sa};

    CollisionOutcome out;
    out.p = cm.vector(e_cm, Vec3{q * dir[0], q * dir[1], q * dir[2]});
    out.pp = cm.vector(e_cm, Vec3{-q * dir[0], -q * dir[1], -q * dir[2]});
    return out;
}

namespace {

class ConstantKernel : public CollisionKernel {
  public:
    explicit ConstantKernel(double c) : w_(c / (4.0 * M_PI)) {}
    double eval(const Chart&, const Vec4&, const Vec4&, const Vec4&,
                const ScatterAngle&) const override {
        return w_;
    }
    double rate_bound() const override { return w_; }

  private:
    double w_;
};

class HardSphereKernel : public CollisionKernel {
  public:
    HardSphereKernel(double sigma, double p_support)
        : sigma_(sigma), p_support_(p_support) {
        const double gamma_max = 1.0 + 2.0 * p_support * p_support;
        bound_ = sigma_ / (4.0 * M_PI) *
                 std::sqrt(gamma_max * gamma_max - 1.0);
    }
    double eval(const Chart& chart, const Vec4& m, const Vec4& mdot,
                const Vec4& partner, const ScatterAngle&) const override {
        const double gamma = chart.metric_product(m, mdot, partner);
        return sigma_ / (4.0 * M_PI) *
               std::sqrt(std::max(0.0, gamma * gamma - 1.0));
    }
    double rate_bound() const override { return bound_; }

  private:
    double sigma_;
    double p_support_;
    double bound_;
};

}  // namespace

std::shared_ptr<CollisionKernel> kernel_constant(double c) {
    return std::make_shared<ConstantKernel>(c);
}

std::shared_ptr<CollisionKernel> kernel_hard_sphere(double sigma,
                                                    double p_support) {
    return std::make_shared<HardSphereKernel>(sigma, p_support);
}

std::shared_ptr<CollisionKernel> make_kernel(
    const std::string& name, const std::map<std::string, double>& params) {
    auto get = [&params](const std::string& key, double fallback) {
        auto it = params.find(key);
        return it == params.end() ? fallback : it->second;
    };
    if (name == "zero") return kernel_constant(0.0);
    if (name == "constant") return kernel_constant(get("c", 1.0));
    if (name == "hard_sphere")
        return kernel_hard_sphere(get("sigma", 1.0), get("p_support", 10.0));
    throw std::invalid_argument("unknown kernel: " + name);
}

void total_rate(const Chart& chart, const PhasePoint& phi,
                const DistributionField& f, const CollisionKernel& kernel,
                int n_samples, Rng& rng, double& rate, double& err) {
    const double norm = f.local_norm(phi.x);
    rate = err = 0.0;
    if (norm == 0.0) return;
    double sum = 0.0, sumsq = 0.0;
    for (int k = 0; k < n_samples; ++k) {
        const Vec4 partner = f.sample_partner(phi.x, rng);
        const ScatterAngle angle = sample_angle(rng);
        const double v = 4.0 * M_PI * norm *
                         kernel.eval(chart, phi.x, phi.u, partner, angle);
        sum += v;
        sumsq += v * v;
    }
    rate = sum / n_samples;
    const double var = std::max(0.0, sumsq / n_samples - rate * rate);
    err = std::sqrt(var / n_samples);
}

void collision_integral(const Chart& chart, const PhasePoint& phi,
                        const DistributionField& f, const DistributionField& g,
                        const CollisionKernel& kernel, int n_samples, Rng& rng,
                        double& value, double& err) {
    const double norm = f.local_norm(phi.x);
    value = err = 0.0;
    if (norm == 0.0) return;
    const double g_here = g.eval(phi);
    double sum = 0.0, sumsq = 0.0;
    // gain and loss sides use independent draws, so the estimator keeps a
    // genuine per-sample variance at equilibrium instead of cancelling
    // pointwise
    for (int k = 0; k < n_samples; ++k) {
        double v = 0.0;
        {
            const Vec4 partner = f.sample_partner(phi.x, rng);
            const ScatterAngle angle = sample_angle(rng);
            const double w = kernel.eval(chart, phi.x, phi.u, partner, angle);
            if (w != 0.0) {
                const CollisionOutcome oc =
                    collide(chart, phi.x, phi.u, partner, angle);
                const double f_in = f.eval(PhasePoint{phi.x, partner});
                v += 4.0 * M_PI * norm * w *
                     g.eval(PhasePoint{phi.x, oc.p}) *
                     f.eval(PhasePoint{phi.x, oc.pp}) / f_in;
            }
        }
        {
            const Vec4 partner = f.sample_partner(phi.x, rng);
            const ScatterAngle angle = sample_angle(rng);
            const double w = kernel.eval(chart, phi.x, phi.u, partner, angle);
            v -= 4.0 * M_PI * norm * w * g_here;
        }
        sum += v;
        sumsq += v * v;
    }
    value = sum / n_samples;
    const double var = std::max(0.0, sumsq / n_samples - value * value);
    err = std::sqrt(var / n_samples);
}

}  // namespace grb
