#include "grb/phase_space.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace grb {

double shell_error(const Chart& chart, const PhasePoint& phi) {
    return std::fabs(chart.metric_product(phi.x, phi.u, phi.u) - 1.0);
}

PhasePoint lift_to_shell(const Chart& chart, const Tetrad& tetrad,
                         const Vec3& p) {
    (void)chart;
    const double p0 = std::sqrt(1.0 + p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
    return PhasePoint{tetrad.base, tetrad.vector(p0, p)};
}

double vol1_density(const Vec3& p) {
    return 1.0 / std::sqrt(1.0 + p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
}

double integrate_simpson(const std::function<double(double)>& f, double a,
                         double b, int n) {
    if (n % 2) ++n;
    const double h = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

// ---------------------------------------------------------------------------
// Juttner

JuttnerField::JuttnerField(const Chart& chart, JuttnerParams params,
                           std::function<double(const Vec4&)> modulation,
                           double p_max)
    : chart_(&chart),
      params_(params),
      modulation_(std::move(modulation)),
      p_max_(p_max) {
    const double beta = params_.beta;
    if (!(beta > 0.0)) throw std::invalid_argument("juttner: beta <= 0");
    z_ = 4.0 * M_PI * std::cyl_bessel_k(2, beta) / beta;

    const bool truncated = p_max_ < 1e100;
    e_max_ = truncated ? std::sqrt(1.0 + p_max_ * p_max_) : 1e300;
    if (truncated) {
        const double i1 = integrate_simpson(
            [beta](double e) {
                return std::sqrt(std::max(0.0, e * e - 1.0)) *
                       std::exp(-beta * e);
            },
            1.0, e_max_, 4000);
        fiber_norm_ = 4.0 * M_PI * i1 / z_;
    } else {
        fiber_norm_ = std::cyl_bessel_k(1, beta) / std::cyl_bessel_k(2, beta);
    }

    // envelope for rejection from a Gamma(3, beta) radial proposal
    const double p_cap = std::min(p_max_, std::max(20.0, 4.0 * beta));
    envelope_max_ = 0.0;
    const int n_scan = 8000;
    for (int i = 1; i <= n_scan; ++i) {
        const double p = p_cap * i / n_scan;
        const double e = std::sqrt(1.0 + p * p);
        envelope_max_ =
            std::max(envelope_max_, std::exp(-beta * (e - p)) / e);
    }
    envelope_max_ *= 1.0 + 1e-9;
    envelope_max_lab_ = 1.0;

    frame_constant_ = (chart_->name() == "minkowski");
    if (frame_constant_)
        cached_frame_ = build_tetrad(*chart_, Vec4{0, 0, 0, 0}, params_.u);
}

Tetrad JuttnerField::frame_at(const Vec4& m) const {
    if (frame_constant_) {
        Tetrad t = cached_frame_;
        t.base = m;
        return t;
    }
    return build_tetrad(*chart_, m, params_.u);
}

double JuttnerField::eval(const PhasePoint& phi) const {
    const Mat4 g = chart_->metric(phi.x);
    const double uu = inner(g, params_.u, params_.u);
    const double energy = inner(g, params_.u, phi.u) / std::sqrt(uu);
    if (energy > e_max_ * (1.0 + 1e-12)) return 0.0;
    const double mod = modulation_ ? modulation_(phi.x) : 1.0;
    return mod / z_ * std::exp(-params_.beta * energy);
}

double JuttnerField::local_norm(const Vec4& m) const {
    const double mod = modulation_ ? modulation_(m) : 1.0;
    return mod * fiber_norm_;
}

double JuttnerField::sample_radial(Rng& rng, bool weight_inverse_energy) const {
    const double beta = params_.beta;
    const double env = weight_inverse_energy ? envelope_max_ : envelope_max_lab_;
    for (;;) {
        const double p =
            -std::log(rng.uniform() * rng.uniform() * rng.uniform()) / beta;
        if (p > p_max_) continue;
        const double e = std::sqrt(1.0 + p * p);
        double h = std::exp(-beta * (e - p));
        if (weight_inverse_energy) h /= e;
        if (rng.uniform() * env < h) return p;
    }
}

Vec4 JuttnerField::sample_partner(const Vec4& m, Rng& rng) const {
    const Tetrad t = frame_at(m);
    const double p = sample_radial(rng, true);
    const Vec3 dir = rng.unit_vector3();
    return lift_to_shell(*chart_, t, Vec3{p * dir[0], p * dir[1], p * dir[2]})
        .u;
}

Vec4 JuttnerField::sample_snapshot(const Vec4& m, Rng& rng) const {
    const Tetrad t = frame_at(m);
    const double p = sample_radial(rng, false);
    const Vec3 dir = rng.unit_vector3();
    return lift_to_shell(*chart_, t, Vec3{p * dir[0], p * dir[1], p * dir[2]})
        .u;
}

// ---------------------------------------------------------------------------

Vec4 ZeroField::sample_partner(const Vec4& m, Rng&) const {
    return build_tetrad(*chart_, m, chart_->future_hint()).e[0];
}

void SumField::add(std::shared_ptr<const DistributionField> f, double coeff) {
    if (coeff < 0.0) throw std::invalid_argument("sum field: negative coeff");
    terms_.emplace_back(std::move(f), coeff);
}

double SumField::eval(const PhasePoint& phi) const {
    double s = 0.0;
    for (const auto& [f, a] : terms_) s += a * f->eval(phi);
    return s;
}

double SumField::local_norm(const Vec4& m) const {
    double s = 0.0;
    for (const auto& [f, a] : terms_) s += a * f->local_norm(m);
    return s;
}

Vec4 SumField::sample_partner(const Vec4& m, Rng& rng) const {
    const double total = local_norm(m);
    double pick = rng.uniform() * total;
    for (const auto& [f, a] : terms_) {
        const double w = a * f->local_norm(m);
        if (pick < w || &*f == &*terms_.back().first)
            return f->sample_partner(m, rng);
        pick -= w;
    }
    throw std::logic_error("sum field: empty");
}

// ---------------------------------------------------------------------------
// Tabulated field

TabulatedField::TabulatedField(const Chart& chart, Vec4 frame_u, Vec3 p_lo,
                               Vec3 p_hi, std::array<int, 3> cells,
                               std::vector<double> values)
    : chart_(&chart),
      frame_u_(frame_u),
      p_lo_(p_lo),
      p_hi_(p_hi),
      cells_(cells),
      values_(std::move(values)) {
    const size_t n =
        size_t(cells_[0]) * size_t(cells_[1]) * size_t(cells_[2]);
    if (values_.size() != n)
        throw std::invalid_argument("tabulated field: value count mismatch");
    for (double v : values_)
        if (v < 0.0)
            throw std::invalid_argument("tabulated field: negative value");
    build_alias();
}

TabulatedField TabulatedField::from_field(const Chart& chart, const Vec4& m,
                                          Vec4 frame_u, Vec3 p_lo, Vec3 p_hi,
                                          std::array<int, 3> cells,
                                          const DistributionField& f) {
    std::vector<double> vals;
    vals.reserve(size_t(cells[0]) * cells[1] * cells[2]);
    const Tetrad t = build_tetrad(chart, m, frame_u);
    for (int k = 0; k < cells[2]; ++k)
        for (int j = 0; j < cells[1]; ++j)
            for (int i = 0; i < cells[0]; ++i) {
                const Vec3 p{
                    p_lo[0] + (i + 0.5) * (p_hi[0] - p_lo[0]) / cells[0],
                    p_lo[1] + (j + 0.5) * (p_hi[1] - p_lo[1]) / cells[1],
                    p_lo[2] + (k + 0.5) * (p_hi[2] - p_lo[2]) / cells[2]};
                vals.push_back(f.eval(lift_to_shell(chart, t, p)));
            }
    return TabulatedField(chart, frame_u, p_lo, p_hi, cells, std::move(vals));
}

int TabulatedField::cell_index(const Vec3& p) const {
    int idx[3];
    for (int a = 0; a < 3; ++a) {
        const double w = (p_hi_[a] - p_lo_[a]) / cells_[a];
        const int i = static_cast<int>(std::floor((p[a] - p_lo_[a]) / w));
        if (i < 0 || i >= cells_[a]) return -1;
        idx[a] = i;
    }
    return (idx[2] * cells_[1] + idx[1]) * cells_[0] + idx[0];
}

Vec3 TabulatedField::cell_center(int idx) const {
    const int i = idx % cells_[0];
    const int j = (idx / cells_[0]) % cells_[1];
    const int k = idx / (cells_[0] * cells_[1]);
    return {p_lo_[0] + (i + 0.5) * (p_hi_[0] - p_lo_[0]) / cells_[0],
            p_lo_[1] + (j + 0.5) * (p_hi_[1] - p_lo_[1]) / cells_[1],
            p_lo_[2] + (k + 0.5) * (p_hi_[2] - p_lo_[2]) / cells_[2]};
}

void TabulatedField::build_alias() {
    const size_t n = values_.size();
    const Vec3 w{(p_hi_[0] - p_lo_[0]) / cells_[0],
                 (p_hi_[1] - p_lo_[1]) / cells_[1],
                 (p_hi_[2] - p_lo_[2]) / cells_[2]};
    const double vol = w[0] * w[1] * w[2];

    // cell mass under VOL^1: value * int_cell d^3p / p0, 3-point per axis
    std::vector<double> mass(n);
    norm_ = 0.0;
    for (size_t c = 0; c < n; ++c) {
        const Vec3 pc = cell_center(static_cast<int>(c));
        double avg = 0.0;
        const double offs[3] = {-0.5, 0.0, 0.5};
        const double wts[3] = {1.0 / 6.0, 4.0 / 6.0, 1.0 / 6.0};
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                for (int d = 0; d < 3; ++d)
                    avg += wts[a] * wts[b] * wts[d] *
                           vol1_density(Vec3{pc[0] + offs[a] * w[0],
                                             pc[1] + offs[b] * w[1],
                                             pc[2] + offs[d] * w[2]});
        mass[c] = values_[c] * vol * avg;
        norm_ += mass[c];
    }
    if (norm_ <= 0.0) return;

    // Walker alias table
    alias_prob_.assign(n, 1.0);
    alias_idx_.assign(n, 0);
    std::vector<double> scaled(n);
    std::vector<int> small, large;
    for (size_t c = 0; c < n; ++c) {
        scaled[c] = mass[c] * n / norm_;
        (scaled[c] < 1.0 ? small : large).push_back(static_cast<int>(c));
    }
    while (!small.empty() && !large.empty()) {
        const int s = small.back();
        const int l = large.back();
        small.pop_back();
        alias_prob_[s] = scaled[s];
        alias_idx_[s] = l;
        scaled[l] -= 1.0 - scaled[s];
        if (scaled[l] < 1.0) {
            large.pop_back();
            small.push_back(l);
        }
    }
}

double TabulatedField::eval(const PhasePoint& phi) const {
    const Tetrad t = build_tetrad(*chart_, phi.x, frame_u_);
    double p0;
    Vec3 p;
    tetrad_components(*chart_, t, phi.u, p0, p);
    const int c = cell_index(p);
    return c < 0 ? 0.0 : values_[c];
}

Vec4 TabulatedField::sample_partner(const Vec4& m, Rng& rng) const {
    if (norm_ <= 0.0) throw std::runtime_error("tabulated field: zero norm");
    const Tetrad t = build_tetrad(*chart_, m, frame_u_);
    const Vec3 w{(p_hi_[0] - p_lo_[0]) / cells_[0],
                 (p_hi_[1] - p_lo_[1]) / cells_[1],
                 (p_hi_[2] - p_lo_[2]) / cells_[2]};
    for (;;) {
        const size_t n = values_.size();
        size_t c = std::min(n - 1, static_cast<size_t>(rng.uniform() * n));
        if (rng.uniform() >= alias_prob_[c]) c = alias_idx_[c];
        const Vec3 pc = cell_center(static_cast<int>(c));
        const Vec3 p{pc[0] + (rng.uniform() - 0.5) * w[0],
                     pc[1] + (rng.uniform() - 0.5) * w[1],
                     pc[2] + (rng.uniform() - 0.5) * w[2]};
        // flatten the within-cell 1/p0 weight by rejection against the cell
        // minimum energy
        double e_min_sq = 1.0;
        for (int a = 0; a < 3; ++a) {
            const double lo = pc[a] - 0.5 * w[a], hi = pc[a] + 0.5 * w[a];
            double d = 0.0;
            if (lo > 0.0) d = lo;
            else if (hi < 0.0) d = -hi;
            e_min_sq += d * d;
        }
        const double e =
            std::sqrt(1.0 + p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
        if (rng.uniform() < std::sqrt(e_min_sq) / e)
            return lift_to_shell(*chart_, t, p).u;
    }
}

void TabulatedField::save_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.precision(17);
    out << "# schema_version=1 frame=" << frame_u_[0] << ',' << frame_u_[1]
        << ',' << frame_u_[2] << ',' << frame_u_[3] << " lo=" << p_lo_[0]
        << ',' << p_lo_[1] << ',' << p_lo_[2] << " hi=" << p_hi_[0] << ','
        << p_hi_[1] << ',' << p_hi_[2] << " cells=" << cells_[0] << ','
        << cells_[1] << ',' << cells_[2] << "\n";
    out << "p1,p2,p3,value\n";
    for (size_t c = 0; c < values_.size(); ++c) {
        const Vec3 p = cell_center(static_cast<int>(c));
        out << p[0] << ',' << p[1] << ',' << p[2] << ',' << values_[c] << "\n";
    }
}

TabulatedField TabulatedField::load_csv(const Chart& chart,
                                        const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::string header;
    std::getline(in, header);
    auto grab = [&header](const std::string& key) {
        const auto pos = header.find(key + "=");
        if (pos == std::string::npos)
            throw std::runtime_error("tabulated csv: missing " + key);
        return header.substr(pos + key.size() + 1);
    };
    auto nums = [](const std::string& s, int n) {
        std::vector<double> out;
        std::istringstream ss(s);
        std::string tok;
        for (int i = 0; i < n; ++i) {
            if (!std::getline(ss, tok, ',') && !(i == n - 1))
                throw std::runtime_error("tabulated csv: bad header");
            out.push_back(std::stod(tok));
        }
        return out;
    };
    const auto fu = nums(grab("frame"), 4);
    const auto lo = nums(grab("lo"), 3);
    const auto hi = nums(grab("hi"), 3);
    const auto nc = nums(grab("cells"), 3);

    std::string line;
    std::getline(in, line);  // column header
    const std::array<int, 3> cells{int(nc[0]), int(nc[1]), int(nc[2])};
    std::vector<double> values;
    values.reserve(size_t(cells[0]) * cells[1] * cells[2]);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto pos = line.rfind(',');
        values.push_back(std::stod(line.substr(pos + 1)));
    }
    return TabulatedField(chart, Vec4{fu[0], fu[1], fu[2], fu[3]},
                          Vec3{lo[0], lo[1], lo[2]}, Vec3{hi[0], hi[1], hi[2]},
                          cells, std::move(values));
}

// ---------------------------------------------------------------------------
// Moments

MomentEstimate current(const Chart&, const Vec4& m,
                       const DistributionField& f, int n_samples, Rng& rng) {
    const double norm = f.local_norm(m);
    MomentEstimate est{};
    if (norm == 0.0) return est;

    Vec4 sum{}, sumsq{};
    for (int k = 0; k < n_samples; ++k) {
        const Vec4 u = f.sample_partner(m, rng);
        for (int i = 0; i < 4; ++i) {
            sum[i] += u[i];
            sumsq[i] += u[i] * u[i];
        }
    }
    for (int i = 0; i < 4; ++i) {
        const double mean = sum[i] / n_samples;
        const double var =
            std::max(0.0, sumsq[i] / n_samples - mean * mean);
        est.value[i] = norm * mean;
        est.std_error[i] = norm * std::sqrt(var / n_samples);
    }
    return est;
}

void spatial_density(const Chart& chart, const Vec4& m,
                     const DistributionField& f, const Vec4& varpi,
                     int n_samples, Rng& rng, double& value, double& err) {
    const double norm = f.local_norm(m);
    value = err = 0.0;
    if (norm == 0.0) return;
    const Mat4 g = chart.metric(m);
    double sum = 0.0, sumsq = 0.0;
    for (int k = 0; k < n_samples; ++k) {
        const double v = inner(g, f.sample_partner(m, rng), varpi);
        sum += v;
        sumsq += v * v;
    }
    const double mean = sum / n_samples;
    const double var = std::max(0.0, sumsq / n_samples - mean * mean);
    value = norm * mean;
    err = norm * std::sqrt(var / n_samples);
}

}  // namespace grb
