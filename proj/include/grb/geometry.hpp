// Lorentzian charts with signature (+,-,-,-), Christoffel symbols and
// orthonormal tetrads. Built-in spacetimes: Minkowski, exterior
// Schwarzschild, spatially flat FLRW.
#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include "grb/linalg.hpp"

namespace grb {

struct OutOfDomain : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NotTimelike : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CoordBounds {
    std::array<double, 4> lo{-1e300, -1e300, -1e300, -1e300};
    std::array<double, 4> hi{1e300, 1e300, 1e300, 1e300};
};

class Chart {
  public:
    using MetricFn = std::function<Mat4(const Vec4&)>;
    using ChristoffelFn = std::function<Gamma4(const Vec4&)>;

    Chart(std::string name, CoordBounds bounds, MetricFn metric,
          ChristoffelFn analytic_christoffel = nullptr,
          Vec4 future_hint = {1.0, 0.0, 0.0, 0.0});

    const std::string& name() const { return name_; }
    const CoordBounds& bounds() const { return bounds_; }
    // Coordinate direction that increases toward the future; used to orient
    // timelike vectors.
    const Vec4& future_hint() const { return future_hint_; }
    bool has_analytic_christoffel() const { return analytic_ != nullptr; }

    bool in_domain(const Vec4& m, double margin = 0.0) const;
    void require_in_domain(const Vec4& m, double margin = 0.0) const;

    Mat4 metric(const Vec4& m) const;
    Mat4 inverse_metric(const Vec4& m) const;
    double metric_product(const Vec4& m, const Vec4& a, const Vec4& b) const {
        return inner(metric(m), a, b);
    }

    // Analytic closure when present, otherwise central finite differences of
    // the metric. Exactly symmetric in the two lower indices.
    Gamma4 christoffel(const Vec4& m) const;
    Gamma4 christoffel_finite_difference(const Vec4& m) const;

    // Step used by the finite-difference stencil in direction i at m.
    double fd_step(const Vec4& m, int i) const;
    // Margin required so the full stencil stays inside the domain.
    double stencil_margin(const Vec4& m) const;

  private:
    std::string name_;
    CoordBounds bounds_;
    MetricFn metric_;
    ChristoffelFn analytic_;
    Vec4 future_hint_;
};

struct Tetrad {
    Vec4 base;                 // chart coordinates of the base point
    std::array<Vec4, 4> e;     // e[0] timelike future, e[1..3] spacelike

    // tangent vector with tetrad components (p0, p)
    Vec4 vector(double p0, const Vec3& p) const {
        Vec4 v = p0 * e[0];
        for (int i = 0; i < 3; ++i) v += p[i] * e[i + 1];
        return v;
    }
};

// Gram-Schmidt against g at m. e0 is the normalization of e0_hint; the
// spatial legs are built from the coordinate axes (skipping near-degenerate
// ones).
Tetrad build_tetrad(const Chart& chart, const Vec4& m, const Vec4& e0_hint);

// Same, but with a preferred first spatial direction (used by the
// center-of-momentum frame construction).
Tetrad build_tetrad(const Chart& chart, const Vec4& m, const Vec4& e0_hint,
                    const Vec4& e1_hint);

// Tetrad components (p0, p) of a tangent vector v at the tetrad's base.
void tetrad_components(const Chart& chart, const Tetrad& t, const Vec4& v,
                       double& p0, Vec3& p);

// Built-in spacetimes.
Chart make_minkowski();
Chart make_schwarzschild(double mass);
// a and adot are the scale factor and its derivative; when adot is absent it
// is taken by central differences of a.
Chart make_flrw(std::function<double(double)> a,
                std::function<double(double)> adot = nullptr);

// Chart by name ("minkowski", "schwarzschild", "flrw") with parameters
// (schwarzschild: M; flrw: a_power for a(t) = t^a_power).
Chart make_chart(const std::string& name,
                 const std::map<std::string, double>& params);

}  // namespace grb
