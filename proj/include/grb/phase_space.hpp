// Points of the unit future tangent bundle, the hyperboloid measure,
// distribution fields with partner samplers, and moment estimators.
#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "grb/geometry.hpp"
#include "grb/rng.hpp"

namespace grb {

struct PhasePoint {
    Vec4 x;  // base point, chart coordinates
    Vec4 u;  // unit future tangent, chart components
};

// |g(u,u) - 1| at the base point.
double shell_error(const Chart& chart, const PhasePoint& phi);

// u = p0 e0 + p^i e_i with p0 = sqrt(1 + |p|^2).
PhasePoint lift_to_shell(const Chart& chart, const Tetrad& tetrad,
                         const Vec3& p_spatial);

// Density of the hyperboloid volume VOL^1 in tetrad momentum coordinates:
// d^3p / p0.
double vol1_density(const Vec3& p_spatial);

// Composite Simpson rule (n subintervals, rounded up to even).
double integrate_simpson(const std::function<double(double)>& f, double a,
                         double b, int n);

class DistributionField {
  public:
    virtual ~DistributionField() = default;
    virtual double eval(const PhasePoint& phi) const = 0;
    // Unit tangent at m distributed as eval(m,.)/local_norm(m) under VOL^1.
    virtual Vec4 sample_partner(const Vec4& m, Rng& rng) const = 0;
    // n_f(m) = integral of eval(m,.) over the fiber.
    virtual double local_norm(const Vec4& m) const = 0;
};

struct JuttnerParams {
    double beta = 1.0;
    Vec4 u = {1.0, 0.0, 0.0, 0.0};  // rest frame 4-velocity
};

// Equilibrium closure f = Z^-1 exp(-beta g(u, mdot)) with Z = 4 pi K2(beta)/beta
// (unit spatial density in the u frame). Optional smooth position modulation
// and momentum support cutoff |p| <= p_max in the u frame.
class JuttnerField : public DistributionField {
  public:
    JuttnerField(const Chart& chart, JuttnerParams params,
                 std::function<double(const Vec4&)> modulation = nullptr,
                 double p_max = 1e300);

    double eval(const PhasePoint& phi) const override;
    Vec4 sample_partner(const Vec4& m, Rng& rng) const override;
    double local_norm(const Vec4& m) const override;

    // Momentum distributed as exp(-beta E) d^3p in the u frame: the momentum
    // law of a fixed-time snapshot of the equilibrium gas.
    Vec4 sample_snapshot(const Vec4& m, Rng& rng) const;

    const JuttnerParams& params() const { return params_; }
    double partition() const { return z_; }
    double p_max() const { return p_max_; }
    const Chart& chart() const { return *chart_; }
    Tetrad frame_at(const Vec4& m) const;

  private:
    double sample_radial(Rng& rng, bool weight_inverse_energy) const;

    const Chart* chart_;
    JuttnerParams params_;
    std::function<double(const Vec4&)> modulation_;
    double p_max_;
    double e_max_;
    double z_;           // 4 pi K2(beta)/beta
    double fiber_norm_;  // integral of eval over a fiber at modulation 1
    double envelope_max_;      // sup_p exp(-beta(E-p))/E
    double envelope_max_lab_;  // sup_p exp(-beta(E-p))
    bool frame_constant_;
    Tetrad cached_frame_;
};

class ZeroField : public DistributionField {
  public:
    explicit ZeroField(const Chart& chart) : chart_(&chart) {}
    double eval(const PhasePoint&) const override { return 0.0; }
    Vec4 sample_partner(const Vec4& m, Rng&) const override;
    double local_norm(const Vec4&) const override { return 0.0; }

  private:
    const Chart* chart_;
};

// a1*f1 + a2*f2 + ... with nonnegative coefficients.
class SumField : public DistributionField {
  public:
    void add(std::shared_ptr<const DistributionField> f, double coeff);
    double eval(const PhasePoint& phi) const override;
    Vec4 sample_partner(const Vec4& m, Rng& rng) const override;
    double local_norm(const Vec4& m) const override;

  private:
    std::vector<std::pair<std::shared_ptr<const DistributionField>, double>>
        terms_;
};

// Histogram over a tetrad momentum grid in a fixed frame; nearest-cell
// evaluation, alias-method partner sampling.
class TabulatedField : public DistributionField {
  public:
    TabulatedField(const Chart& chart, Vec4 frame_u, Vec3 p_lo, Vec3 p_hi,
                   std::array<int, 3> cells, std::vector<double> values);

    // Fill from another field by cell-center evaluation.
    static TabulatedField from_field(const Chart& chart, const Vec4& m,
                                     Vec4 frame_u, Vec3 p_lo, Vec3 p_hi,
                                     std::array<int, 3> cells,
                                     const DistributionField& f);

    double eval(const PhasePoint& phi) const override;
    Vec4 sample_partner(const Vec4& m, Rng& rng) const override;
    double local_norm(const Vec4&) const override { return norm_; }

    void save_csv(const std::string& path) const;
    static TabulatedField load_csv(const Chart& chart, const std::string& path);

  private:
    int cell_index(const Vec3& p) const;  // -1 when outside the grid
    Vec3 cell_center(int idx) const;
    void build_alias();

    const Chart* chart_;
    Vec4 frame_u_;
    Vec3 p_lo_, p_hi_;
    std::array<int, 3> cells_;
    std::vector<double> values_;
    double norm_ = 0.0;
    // alias table
    std::vector<double> alias_prob_;
    std::vector<int> alias_idx_;
};

struct MomentEstimate {
    Vec4 value;
    Vec4 std_error;
};

// Monte Carlo estimate of the particle current j(m).
MomentEstimate current(const Chart& chart, const Vec4& m,
                       const DistributionField& f, int n_samples, Rng& rng);

// g(j(m), varpi) for a unit future timelike varpi.
void spatial_density(const Chart& chart, const Vec4& m,
                     const DistributionField& f, const Vec4& varpi,
                     int n_samples, Rng& rng, double& value, double& err);

}  // namespace grb
