#include "grb/geodesic.hpp"

#include <cmath>
#include <fstream>

namespace grb {

H0Rhs h0_rhs(const Chart& chart, const PhasePoint& phi) {
    const Gamma4 G = chart.christoffel(phi.x);
    H0Rhs rhs;
    rhs.dx = phi.u;
    for (int k = 0; k < 4; ++k) {
        double s = 0.0;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) s += G[k][i][j] * phi.u[i] * phi.u[j];
        rhs.du[k] = -s;
    }
    return rhs;
}

namespace {

H0Rhs directed_rhs(const Chart& chart, const PhasePoint& phi, double sign) {
    H0Rhs r = h0_rhs(chart, phi);
    if (sign < 0.0) {
        r.dx = -1.0 * r.dx;
        r.du = -1.0 * r.du;
    }
    return r;
}

PhasePoint offset(const PhasePoint& phi, const H0Rhs& k, double h) {
    return PhasePoint{phi.x + h * k.dx, phi.u + h * k.du};
}

}  // namespace

PhasePoint geodesic_step(const Chart& chart, const PhasePoint& phi, double ds,
                         Direction dir, double* renorm) {
    const double sign = (dir == Direction::future) ? 1.0 : -1.0;
    PhasePoint out;
    try {
        const H0Rhs k1 = directed_rhs(chart, phi, sign);
        const H0Rhs k2 = directed_rhs(chart, offset(phi, k1, 0.5 * ds), sign);
        const H0Rhs k3 = directed_rhs(chart, offset(phi, k2, 0.5 * ds), sign);
        const H0Rhs k4 = directed_rhs(chart, offset(phi, k3, ds), sign);
        for (int i = 0; i < 4; ++i) {
            out.x[i] = phi.x[i] + ds / 6.0 *
                                      (k1.dx[i] + 2.0 * k2.dx[i] +
                                       2.0 * k3.dx[i] + k4.dx[i]);
            out.u[i] = phi.u[i] + ds / 6.0 *
                                      (k1.du[i] + 2.0 * k2.du[i] +
                                       2.0 * k3.du[i] + k4.du[i]);
        }
        chart.require_in_domain(out.x, chart.stencil_margin(out.x));
        const double norm = chart.metric_product(out.x, out.u, out.u);
        if (!(norm > 0.0)) throw StepRejected("left the timelike cone");
        const double factor = 1.0 / std::sqrt(norm);
        if (std::fabs(factor - 1.0) > 1e-6)
            throw StepRejected("shell renormalization too large");
        if (renorm) *renorm = std::fabs(factor - 1.0);
        out.u = factor * out.u;
    } catch (const OutOfDomain& e) {
        throw LeftDomain(e.what());
    }
    return out;
}

namespace {

// one accepted step with halving policy; updates phi and returns the step
// actually taken
double adaptive_step(const Chart& chart, PhasePoint& phi, double ds,
                     Direction dir, double* renorm) {
    for (int tries = 0; tries <= 20; ++tries) {
        try {
            phi = geodesic_step(chart, phi, ds, dir, renorm);
            return ds;
        } catch (const StepRejected&) {
            ds *= 0.5;
        }
    }
    throw StepRejected("step halved 20 times without acceptance");
}

}  // namespace

std::vector<PathSample> geodesic_flow(const Chart& chart,
                                      const PhasePoint& phi0, double s_total,
                                      double ds, Direction dir,
                                      const StepObserver& observer) {
    std::vector<PathSample> path;
    PhasePoint phi = phi0;
    double s = 0.0;
    path.push_back({s, phi, shell_error(chart, phi)});
    while (s < s_total - 1e-15 * std::max(1.0, s_total)) {
        const double want = std::min(ds, s_total - s);
        double renorm = 0.0;
        const double took = adaptive_step(chart, phi, want, dir, &renorm);
        s += took;
        path.push_back({s, phi, shell_error(chart, phi)});
        if (observer) observer(s, phi);
    }
    return path;
}

PhasePoint geodesic_advance(const Chart& chart, const PhasePoint& phi0,
                            double s_total, double ds, Direction dir) {
    PhasePoint phi = phi0;
    double s = 0.0;
    while (s < s_total - 1e-15 * std::max(1.0, s_total)) {
        const double want = std::min(ds, s_total - s);
        s += adaptive_step(chart, phi, want, dir, nullptr);
    }
    return phi;
}

void dump_path_csv(const std::string& file,
                   const std::vector<PathSample>& samples) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write " + file);
    out.precision(17);
    out << "s,x0,x1,x2,x3,mdot0,mdot1,mdot2,mdot3,shell_error\n";
    for (const auto& ps : samples) {
        out << ps.s;
        for (double v : ps.phi.x) out << ',' << v;
        for (double v : ps.phi.u) out << ',' << v;
        out << ',' << ps.shell_err << "\n";
    }
}

}  // namespace grb
