// Spacelike hypersurfaces as coordinate graphs t = tau(x), their future unit
// normals, the normal variation and its volume density, and hitting-time
// detection along paths.
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "grb/geodesic.hpp"

namespace grb {

struct NoCrossing : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct VariationFold : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class Hypersurface {
  public:
    using GraphFn = std::function<double(const Vec3&)>;

    Hypersurface(std::string name, GraphFn tau) : name_(std::move(name)), tau_(std::move(tau)) {}

    const std::string& name() const { return name_; }
    double tau(const Vec3& xs) const { return tau_(xs); }
    Vec3 grad_tau(const Vec3& xs) const;

    // signed time offset from the surface; zero on V, positive above
    double level(const Vec4& m) const {
        return m[0] - tau_(Vec3{m[1], m[2], m[3]});
    }
    // the graph point over the spatial part of m
    Vec4 project(const Vec4& m) const {
        return {tau_(Vec3{m[1], m[2], m[3]}), m[1], m[2], m[3]};
    }

    // unit future timelike normal at m in V
    Vec4 normal(const Chart& chart, const Vec4& m) const;

    // induced metric negative-definite at every probe point
    bool is_spacelike(const Chart& chart, const std::vector<Vec3>& probes) const;

  private:
    std::string name_;
    GraphFn tau_;
};

Hypersurface make_flat_surface(double t0);
Hypersurface make_tilted_surface(double alpha, double t0 = 0.0);  // t = t0 + alpha*x
// t = t0 + amplitude * exp(-|x|^2/width^2)
Hypersurface make_bump_surface(double amplitude, double width, double t0 = 0.0);
// t = t0 + amplitude * |x|^2 exp(-|x|^2/width^2): flat through the origin
Hypersurface make_ring_bump_surface(double amplitude, double width,
                                    double t0 = 0.0);
Hypersurface make_surface(const std::string& name,
                          const std::map<std::string, double>& params);

// gamma_bar = g(varpi(m), mdot), >= 1 on the unit shell
double gamma_bar(const Chart& chart, const Hypersurface& v,
                 const PhasePoint& phi);

// position at proper time eps of the geodesic leaving V orthogonally
Vec4 normal_variation(const Chart& chart, const Hypersurface& v, const Vec4& m,
                      double eps, double ds = 1e-3);

// throws VariationFold when two probe images collapse within tol
void validate_variation(const Chart& chart, const Hypersurface& v,
                        const std::vector<Vec3>& probes, double eta,
                        double tol = 1e-6);

struct VariationDensity {
    double value;  // G_eps
    double deps;   // d G_eps / d eps
};

// Jacobian density of the normal variation restricted to the surface, with
// fibers identified through normal-adapted tetrads (hyperboloid factor 1).
VariationDensity variation_density(const Chart& chart, const Hypersurface& v,
                                   const Vec4& m, double eps, double h);

struct Hit {
    double s;  // proper time of the crossing, from the path start
    PhasePoint phi;
};

// Refine a sign change of level() between two path samples by bisection on
// geodesic_step, to |ds| <= 1e-10.
Hit refine_crossing(const Chart& chart, const Hypersurface& v,
                    const PathSample& before, const PathSample& after,
                    Direction dir);

// First crossing of V along a stored path.
Hit hitting_time(const Chart& chart, const std::vector<PathSample>& path,
                 const Hypersurface& v, Direction dir);

// Relative residual of the duality identity behind the normal-variation
// lemma: int f (d_eps h) G deps vs [f h G] - int (d_eps f) h G
// - int f h (d_eps G), summed over probe points, with composite Simpson in
// eps.
// f_test and h_test are closures of (eps, spatial probe point).
double lemma_check(const Chart& chart, const Hypersurface& v,
                   const std::function<double(double, const Vec3&)>& f_test,
                   const std::function<double(double, const Vec3&)>& h_test,
                   const std::vector<Vec3>& probes, double eta, int n_eps,
                   double fd_h = 0.0);

}  // namespace grb
