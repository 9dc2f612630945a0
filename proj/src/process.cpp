#include "grb/process.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "grb/parallel.hpp"

namespace grb {

const char* event_kind_name(EventKind k) {
    switch (k) {
        case EventKind::flight: return "flight";
        case EventKind::jump: return "jump";
        case EventKind::hit: return "hit";
        case EventKind::abort_path: return "abort";
    }
    return "?";
}

void validate_majorant(const Chart&, const DistributionField& f,
                       const CollisionKernel& kernel, const SimConfig& cfg,
                       const std::vector<Vec4>& probe_positions) {
    double sup_n = 0.0;
    for (const Vec4& m : probe_positions)
        sup_n = std::max(sup_n, f.local_norm(m));
    const double needed = 4.0 * M_PI * kernel.rate_bound() * sup_n;
    if (cfg.lambda_bar < needed)
        throw ThinningViolation(
            "lambda_bar " + std::to_string(cfg.lambda_bar) +
            " below required majorant " + std::to_string(needed));
}

// ---------------------------------------------------------------------------
// RateCache

RateCache::RateCache(const Chart& chart, const DistributionField& f,
                     const CollisionKernel& kernel, const SimConfig& cfg)
    : chart_(&chart), f_(&f), kernel_(&kernel), cfg_(cfg) {}

namespace {

int64_t quantize(double x, double cell) {
    return static_cast<int64_t>(std::floor(x / cell));
}

// future unit tangent over x with the given spatial coordinate components
Vec4 lift_spatial_components(const Chart& chart, const Vec4& x,
                             const Vec3& us) {
    const Mat4 g = chart.metric(x);
    const Vec4 u{0.0, us[0], us[1], us[2]};
    const double a = g[0][0];
    double b = 0.0;
    for (int i = 1; i < 4; ++i) b += g[0][i] * us[i - 1];
    const double c = inner(g, u, u) - 1.0;
    const double disc = b * b - a * c;
    if (!(disc > 0.0) || !(a > 0.0))
        throw std::runtime_error("cannot lift cell representative to shell");
    double u0 = (-b + std::sqrt(disc)) / a;
    Vec4 out{u0, us[0], us[1], us[2]};
    if (inner(g, out, chart.future_hint()) < 0.0)
        out[0] = (-b - std::sqrt(disc)) / a;
    return out;
}

}  // namespace

uint64_t RateCache::cell_key(const PhasePoint& phi) const {
    // splitmix64 chaining; plain FNV collides on these small-integer inputs
    uint64_t h = 0x243F6A8885A308D3ull;
    auto mix = [&h](int64_t v) {
        h ^= static_cast<uint64_t>(v) + 0x9E3779B97F4A7C15ull;
        h = (h ^ (h >> 30)) * 0xBF58476D1CE4E5B9ull;
        h = (h ^ (h >> 27)) * 0x94D049BB133111EBull;
        h ^= h >> 31;
    };
    for (int i = 0; i < 4; ++i) mix(quantize(phi.x[i], cfg_.cell_size_x));
    for (int i = 1; i < 4; ++i) mix(quantize(phi.u[i], cfg_.cell_size_p));
    return h;
}

double RateCache::compute(const PhasePoint& phi, uint64_t key) const {
    // canonical cell representative, so the value is independent of which
    // path asked first
    Vec4 xc;
    for (int i = 0; i < 4; ++i)
        xc[i] = (quantize(phi.x[i], cfg_.cell_size_x) + 0.5) * cfg_.cell_size_x;
    Vec3 us;
    for (int i = 0; i < 3; ++i)
        us[i] =
            (quantize(phi.u[i + 1], cfg_.cell_size_p) + 0.5) * cfg_.cell_size_p;
    if (!chart_->in_domain(xc, chart_->stencil_margin(xc))) xc = phi.x;
    const PhasePoint rep{xc, lift_spatial_components(*chart_, xc, us)};

    const double norm = f_->local_norm(rep.x);
    if (norm == 0.0) return 0.0;
    Rng rng(cfg_.seed ^ 0x9E3779B97F4A7C15ull, key);
    double sum = 0.0;
    for (int k = 0; k < cfg_.n_rate; ++k) {
        const Vec4 partner = f_->sample_partner(rep.x, rng);
        const ScatterAngle angle = sample_angle(rng);
        const double w = kernel_->eval(*chart_, rep.x, rep.u, partner, angle);
        if (w == 0.0) continue;
        const CollisionOutcome oc =
            collide(*chart_, rep.x, rep.u, partner, angle);
        const double f_in = f_->eval(PhasePoint{rep.x, partner});
        const double f_out = f_->eval(PhasePoint{rep.x, oc.pp});
        sum += 4.0 * M_PI * norm * w * (f_out / f_in - 1.0);
    }
    return sum / cfg_.n_rate;
}

double RateCache::potential(const PhasePoint& phi) const {
    const uint64_t key = cell_key(phi);
    {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
    }
    const double value = compute(phi, key);
    std::lock_guard<std::mutex> lock(mutex_);
    cache_.emplace(key, value);
    return value;
}

// ---------------------------------------------------------------------------
// Forward process

std::vector<PathEvent> simulate_forward(const Chart& chart,
                                        const PhasePoint& phi0,
                                        const DistributionField& f,
                                        const CollisionKernel& kernel,
                                        const SimConfig& cfg, Rng& rng) {
    std::vector<PathEvent> events;
    PhasePoint phi = phi0;
    double s = 0.0;
    while (s < cfg.s_max) {
        const double gap =
            cfg.lambda_bar > 0.0 ? rng.exponential(cfg.lambda_bar) : 1e300;
        const double s_next = std::min(s + gap, cfg.s_max);
        PathEvent flight;
        flight.s = s_next;
        flight.kind = EventKind::flight;
        flight.before = phi;
        try {
            phi = geodesic_advance(chart, phi, s_next - s, cfg.ds,
                                   Direction::future);
        } catch (const LeftDomain&) {
            flight.kind = EventKind::abort_path;
            flight.after = phi;
            events.push_back(flight);
            return events;
        }
        flight.after = phi;
        events.push_back(flight);
        s = s_next;
        if (s >= cfg.s_max) break;

        const Vec4 partner = f.sample_partner(phi.x, rng);
        const ScatterAngle angle = sample_angle(rng);
        const double w = kernel.eval(chart, phi.x, phi.u, partner, angle);
        const double accept =
            4.0 * M_PI * w * f.local_norm(phi.x) / cfg.lambda_bar;
        if (accept > 1.0 + 1e-9)
            throw ThinningViolation(
                "thinning acceptance " + std::to_string(accept) +
                " exceeds 1; raise lambda_bar");
        if (rng.uniform() < accept) {
            const CollisionOutcome oc =
                collide(chart, phi.x, phi.u, partner, angle);
            PathEvent jump;
            jump.s = s;
            jump.kind = EventKind::jump;
            jump.before = phi;
            phi.u = oc.p;
            jump.after = phi;
            events.push_back(jump);
        }
    }
    return events;
}

// ---------------------------------------------------------------------------
// Backward process

BackwardResult simulate_backward(const Chart& chart, const PhasePoint& phi0,
                                 const DistributionField& f,
                                 const CollisionKernel& kernel,
                                 const Hypersurface& v, const SimConfig& cfg,
                                 Rng& rng,
                                 const std::vector<double>& snapshot_times) {
    BackwardResult res;
    PhasePoint phi = phi0;
    double s = 0.0;
    double weight_log = 0.0;
    size_t next_snap = 0;

    const double bound = cfg.hit_bound >= 0.0 ? cfg.hit_bound : v.level(phi0.x);
    const double s_limit = cfg.no_hit_factor * std::max(bound, 1e-12);

    while (next_snap < snapshot_times.size() && snapshot_times[next_snap] <= 0.0) {
        res.snapshots.emplace_back(phi, weight_log);
        ++next_snap;
    }

    auto finish = [&](const Hit& hit) {
        PathEvent ev;
        ev.s = hit.s;
        ev.kind = EventKind::hit;
        ev.before = phi;
        ev.after = hit.phi;
        ev.weight_log = weight_log;
        res.events.push_back(ev);
        res.phi_hit = hit.phi;
        res.hit_time = hit.s;
        res.weight_log = weight_log;
        for (; next_snap < snapshot_times.size(); ++next_snap)
            res.snapshots.emplace_back(hit.phi, weight_log);
        return res;
    };

    for (;;) {
        const double gap =
            cfg.lambda_bar > 0.0 ? rng.exponential(cfg.lambda_bar) : 1e300;
        const double s_candidate = s + gap;

        // flight, step by step, watching for crossings and snapshots
        while (s < s_candidate) {
            double step = std::min(cfg.ds, s_candidate - s);
            if (next_snap < snapshot_times.size())
                step = std::min(step, snapshot_times[next_snap] - s);
            step = std::max(step, 1e-14);
            const PathSample before{s, phi, 0.0};
            phi = geodesic_step(chart, phi, step, Direction::past);
            if (v.level(phi.x) * v.level(before.phi.x) <= 0.0) {
                const Hit hit =
                    refine_crossing(chart, v, before, {s + step, phi, 0.0},
                                    Direction::past);
                return finish(hit);
            }
            s += step;
            if (next_snap < snapshot_times.size() &&
                s >= snapshot_times[next_snap] - 1e-12) {
                res.snapshots.emplace_back(phi, weight_log);
                ++next_snap;
            }
            if (s > s_limit)
                throw NoHit("backward path exceeded " +
                            std::to_string(s_limit) +
                            " proper time without hitting the hypersurface");
        }

        // thinning candidate, proposed from the forward jump law. The jump
        // mdot -> p has target rate density W f(p'); dividing that by the
        // proposal density leaves the likelihood ratio f(p')/f(mdot'), which
        // goes into the multiplicative Feynman-Kac weight instead of the
        // acceptance so the acceptance stays bounded by the forward majorant.
        const Vec4 partner = f.sample_partner(phi.x, rng);
        const ScatterAngle angle = sample_angle(rng);
        const double w = kernel.eval(chart, phi.x, phi.u, partner, angle);
        const double accept =
            4.0 * M_PI * w * f.local_norm(phi.x) / cfg.lambda_bar;
        if (accept > 1.0 + 1e-9)
            throw ThinningViolation(
                "thinning acceptance " + std::to_string(accept) +
                " exceeds 1; raise lambda_bar");
        if (rng.uniform() < accept) {
            const CollisionOutcome oc =
                collide(chart, phi.x, phi.u, partner, angle);
            const double f_in = f.eval(PhasePoint{phi.x, partner});
            const double f_out = f.eval(PhasePoint{phi.x, oc.pp});
            if (f_out > 0.0)
                weight_log += std::log(f_out / f_in);
            else
                weight_log = -1e300;  // jump outside the support of f
            PathEvent jump;
            jump.s = s;
            jump.kind = EventKind::jump;
            jump.before = phi;
            phi.u = oc.p;
            jump.after = phi;
            jump.weight_log = weight_log;
            res.events.push_back(jump);
        }
    }
}

Estimate estimate_f(const Chart& chart, const PhasePoint& phi0,
                    const DistributionField& f, const CollisionKernel& kernel,
                    const Hypersurface& v, const DistributionField& f_initial,
                    int n_paths, const SimConfig& cfg) {
    std::vector<double> values(n_paths);
    parallel_for(n_paths, cfg.workers, [&](int i) {
        Rng rng(cfg.seed, static_cast<uint64_t>(i));
        const BackwardResult r =
            simulate_backward(chart, phi0, f, kernel, v, cfg, rng);
        values[i] = std::exp(r.weight_log) * f_initial.eval(r.phi_hit);
    });
    double sum = 0.0, sumsq = 0.0;
    for (double x : values) {
        sum += x;
        sumsq += x * x;
    }
    Estimate est;
    est.n = n_paths;
    est.value = sum / n_paths;
    const double var = std::max(0.0, sumsq / n_paths - est.value * est.value);
    est.std_error = std::sqrt(var / n_paths);
    return est;
}

PairedEstimate estimate_f_paired(const Chart& chart, const PhasePoint& phi0,
                                 const DistributionField& f,
                                 const CollisionKernel& kernel,
                                 const Hypersurface& v,
                                 const DistributionField& f_a,
                                 const DistributionField& f_b, int n_paths,
                                 const SimConfig& cfg) {
    std::vector<double> va(n_paths), vb(n_paths);
    parallel_for(n_paths, cfg.workers, [&](int i) {
        Rng rng(cfg.seed, static_cast<uint64_t>(i));
        const BackwardResult r =
            simulate_backward(chart, phi0, f, kernel, v, cfg, rng);
        const double w = std::exp(r.weight_log);
        va[i] = w * f_a.eval(r.phi_hit);
        vb[i] = w * f_b.eval(r.phi_hit);
    });
    auto reduce = [n_paths](const std::function<double(int)>& x) {
        double sum = 0.0, sumsq = 0.0;
        for (int i = 0; i < n_paths; ++i) {
            sum += x(i);
            sumsq += x(i) * x(i);
        }
        Estimate est;
        est.n = n_paths;
        est.value = sum / n_paths;
        const double var =
            std::max(0.0, sumsq / n_paths - est.value * est.value);
        est.std_error = std::sqrt(var / n_paths);
        return est;
    };
    PairedEstimate out;
    out.base = reduce([&](int i) { return va[i]; });
    out.bumped = reduce([&](int i) { return vb[i]; });
    out.diff = reduce([&](int i) { return vb[i] - va[i]; });
    return out;
}

std::vector<MartingaleRow> martingale_check(
    const Chart& chart, const PhasePoint& phi0,
    const DistributionField& background, const DistributionField& candidate,
    const CollisionKernel& kernel, const Hypersurface& v, const SimConfig& cfg,
    int n_paths, const std::vector<double>& s_grid) {
    const size_t ns = s_grid.size();
    std::vector<std::vector<double>> values(n_paths);
    parallel_for(n_paths, cfg.workers, [&](int i) {
        Rng rng(cfg.seed, static_cast<uint64_t>(i));
        const BackwardResult r = simulate_backward(
            chart, phi0, background, kernel, v, cfg, rng, s_grid);
        std::vector<double> row(ns);
        for (size_t k = 0; k < ns; ++k)
            row[k] = std::exp(r.snapshots[k].second) *
                     candidate.eval(r.snapshots[k].first);
        values[i] = std::move(row);
    });
    std::vector<MartingaleRow> rows(ns);
    for (size_t k = 0; k < ns; ++k) {
        double sum = 0.0, sumsq = 0.0;
        for (int i = 0; i < n_paths; ++i) {
            sum += values[i][k];
            sumsq += values[i][k] * values[i][k];
        }
        const double mean = sum / n_paths;
        const double var = std::max(0.0, sumsq / n_paths - mean * mean);
        rows[k] = {s_grid[k], mean, std::sqrt(var / n_paths)};
    }
    return rows;
}

void weak_stationarity_check(const Chart& chart,
                             const DistributionField& background,
                             const DistributionField& candidate,
                             const CollisionKernel& kernel,
                             const std::function<double(const PhasePoint&)>& h,
                             const Region& region, int n_samples, int n_inner,
                             Rng& rng, double& integral, double& err) {
    const double vol = region.coordinate_volume();
    const double fd = 1e-3;
    double sum = 0.0, sumsq = 0.0;
    for (int k = 0; k < n_samples; ++k) {
        Vec4 m;
        for (int i = 0; i < 4; ++i)
            m[i] = rng.uniform(region.lo[i], region.hi[i]);
        const Vec4 u = background.sample_partner(m, rng);
        const PhasePoint phi{m, u};
        const double f_b = background.eval(phi);
        const double n_b = background.local_norm(m);
        const double metric_vol = std::sqrt(std::fabs(det4(chart.metric(m))));

        // transport part by finite differences along the flow
        const PhasePoint fwd = geodesic_step(chart, phi, fd, Direction::future);
        const PhasePoint bwd = geodesic_step(chart, phi, fd, Direction::past);
        double gh = (h(fwd) - h(bwd)) / (2.0 * fd);

        // jump part
        const double h_here = h(phi);
        double jump = 0.0;
        for (int j = 0; j < n_inner; ++j) {
            const Vec4 partner = background.sample_partner(m, rng);
            const ScatterAngle angle = sample_angle(rng);
            const double w = kernel.eval(chart, m, u, partner, angle);
            if (w == 0.0) continue;
            const CollisionOutcome oc = collide(chart, m, u, partner, angle);
            jump += 4.0 * M_PI * n_b * w * (h(PhasePoint{m, oc.p}) - h_here);
        }
        gh += jump / n_inner;

        const double value =
            candidate.eval(phi) * gh * vol * metric_vol * n_b / f_b;
        sum += value;
        sumsq += value * value;
    }
    integral = sum / n_samples;
    const double var = std::max(0.0, sumsq / n_samples - integral * integral);
    err = std::sqrt(var / n_samples);
}

void save_events_csv(const std::string& path,
                     const std::vector<PathEvent>& events) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.precision(17);
    out << "s,kind,x0,x1,x2,x3,mdot0,mdot1,mdot2,mdot3,weight_log\n";
    for (const auto& ev : events) {
        out << ev.s << ',' << event_kind_name(ev.kind);
        for (double x : ev.after.x) out << ',' << x;
        for (double u : ev.after.u) out << ',' << u;
        out << ',' << ev.weight_log << "\n";
    }
}

}  // namespace grb
