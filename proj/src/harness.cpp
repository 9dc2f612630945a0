#include "grb/harness.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "grb/parallel.hpp"
#include "grb/stats.hpp"

namespace grb {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

}  // namespace

Config Config::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return parse(text.str(), path);
}

Config Config::parse(const std::string& text, const std::string& origin) {
    Config cfg;
    cfg.origin_ = origin;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(origin + ":" + std::to_string(lineno) +
                                  ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw ConfigError(origin + ":" + std::to_string(lineno) +
                                  ": empty section name");
            cfg.data_[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) +
                              ": expected key = value");
        if (section.empty())
            throw ConfigError(origin + ":" + std::to_string(lineno) +
                              ": key outside any [section]");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty())
            throw ConfigError(origin + ":" + std::to_string(lineno) +
                              ": empty key");
        cfg.data_[section][key] = Entry{trim(line.substr(eq + 1)), lineno};
    }
    return cfg;
}

const Config::Entry* Config::find(const std::string& sec,
                                  const std::string& key) const {
    const auto s = data_.find(sec);
    if (s == data_.end()) return nullptr;
    const auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
}

void Config::fail(const std::string& sec, const std::string& key,
                  const std::string& what) const {
    throw ConfigError(origin_ + ": [" + sec + "] " + key + ": " + what);
}

bool Config::has(const std::string& sec, const std::string& key) const {
    return find(sec, key) != nullptr;
}

bool Config::has_section(const std::string& sec) const {
    return data_.count(sec) > 0;
}

std::string Config::get_string(const std::string& sec,
                               const std::string& key) const {
    const Entry* e = find(sec, key);
    if (!e) fail(sec, key, "missing required key");
    return e->value;
}

std::string Config::get_string(const std::string& sec, const std::string& key,
                               const std::string& fallback) const {
    const Entry* e = find(sec, key);
    return e ? e->value : fallback;
}

double Config::get_double(const std::string& sec, const std::string& key) const {
    const Entry* e = find(sec, key);
    if (!e) fail(sec, key, "missing required key");
    try {
        size_t used = 0;
        const double v = std::stod(e->value, &used);
        if (used != e->value.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        fail(sec, key,
             "not a number (line " + std::to_string(e->line) + "): '" +
                 e->value + "'");
    }
}

double Config::get_double(const std::string& sec, const std::string& key,
                          double fallback) const {
    return has(sec, key) ? get_double(sec, key) : fallback;
}

int Config::get_int(const std::string& sec, const std::string& key,
                    int fallback) const {
    if (!has(sec, key)) return fallback;
    const double v = get_double(sec, key);
    if (v != std::floor(v)) fail(sec, key, "expected an integer");
    return static_cast<int>(v);
}

uint64_t Config::get_u64(const std::string& sec, const std::string& key,
                         uint64_t fallback) const {
    if (!has(sec, key)) return fallback;
    const Entry* e = find(sec, key);
    try {
        return std::stoull(e->value);
    } catch (const std::exception&) {
        fail(sec, key, "expected an unsigned integer: '" + e->value + "'");
    }
}

std::vector<std::string> Config::get_list(const std::string& sec,
                                          const std::string& key) const {
    std::vector<std::string> out;
    const Entry* e = find(sec, key);
    if (!e) return out;
    std::istringstream in(e->value);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::map<std::string, double> Config::numeric_params(
    const std::string& sec) const {
    std::map<std::string, double> out;
    const auto s = data_.find(sec);
    if (s == data_.end()) return out;
    for (const auto& [key, entry] : s->second) {
        try {
            size_t used = 0;
            const double v = std::stod(entry.value, &used);
            if (used == entry.value.size()) out[key] = v;
        } catch (const std::exception&) {
        }
    }
    return out;
}

// ---------------------------------------------------------------------------

namespace {

// cdf of the density (e^2-1)^{1/2} e^{e_pow} exp(-beta e) on [1, e_max]
class EnergyCdf {
  public:
    EnergyCdf(double beta, double e_max, int e_pow)
        : e_max_(e_max), cum_(kGrid + 1, 0.0) {
        const double de = (e_max - 1.0) / kGrid;
        auto dens = [&](double e) {
            return std::sqrt(std::max(0.0, e * e - 1.0)) *
                   std::pow(e, e_pow) * std::exp(-beta * (e - 1.0));
        };
        for (int i = 1; i <= kGrid; ++i) {
            const double a = 1.0 + (i - 1) * de, b = 1.0 + i * de;
            cum_[i] = cum_[i - 1] +
                      de / 6.0 * (dens(a) + 4.0 * dens(0.5 * (a + b)) + dens(b));
        }
        for (auto& c : cum_) c /= cum_.back();
    }

    double operator()(double e) const {
        if (e <= 1.0) return 0.0;
        if (e >= e_max_) return 1.0;
        const double t = (e - 1.0) / (e_max_ - 1.0) * kGrid;
        const int i = std::min(kGrid - 1, static_cast<int>(t));
        return cum_[i] + (t - i) * (cum_[i + 1] - cum_[i]);
    }

    // total mass of a bin relative to [1, e_max]
    double bin_mass(double a, double b) const { return (*this)(b) - (*this)(a); }

  private:
    static constexpr int kGrid = 4000;
    double e_max_;
    std::vector<double> cum_;
};

struct Ctx : ScenarioSetup {
    const Config* cfg = nullptr;
    std::string out_dir;
};

PhasePoint config_point(const Ctx& ctx) { return setup_point(*ctx.cfg, ctx); }

std::string artifact_path(const Ctx& ctx, const std::string& stem) {
    return ctx.out_dir + "/" + ctx.name + "-" + stem;
}

double rest_energy(const Ctx& ctx, const PhasePoint& phi) {
    return ctx.chart->metric_product(phi.x, ctx.field->params().u, phi.u);
}

// mean total collision rate of an equilibrium particle, for mean free times
double mean_collision_rate(const Ctx& ctx, const Vec4& x, int n, Rng& rng) {
    double sum = 0.0;
    const double nf = ctx.field->local_norm(x);
    for (int i = 0; i < n; ++i) {
        const Vec4 u = ctx.field->sample_partner(x, rng);
        const Vec4 partner = ctx.field->sample_partner(x, rng);
        sum += 4.0 * M_PI * nf *
               ctx.kernel->eval(*ctx.chart, x, u, partner, sample_angle(rng));
    }
    return sum / n;
}

using CheckFn = std::function<nlohmann::json(const Ctx&)>;

// --- checks ----------------------------------------------------------------

// forward process started from the stationary momentum law; KS of the final
// rest-frame energies against the equilibrium energy marginal
nlohmann::json check_forward_energy_ks(const Ctx& ctx) {
    const std::string sec = "check.forward_energy_ks";
    const int n_paths = ctx.cfg->get_int(sec, "n_paths", 20000);
    const double mft = ctx.cfg->get_double(sec, "mean_free_times", 5.0);
    const double beta = ctx.field->params().beta;
    const double e_max = std::sqrt(1.0 + ctx.field->p_max() * ctx.field->p_max());

    const PhasePoint origin = config_point(ctx);
    Rng pilot_rng(ctx.sim.seed, 0xfeedu);
    const double rate = mean_collision_rate(ctx, origin.x, 4000, pilot_rng);
    SimConfig sim = ctx.sim;
    sim.s_max = rate > 0.0 ? mft / rate : mft;

    std::vector<double> energy(n_paths);
    parallel_for(n_paths, sim.workers, [&](int i) {
        Rng rng(sim.seed, static_cast<uint64_t>(i));
        PhasePoint phi{origin.x, ctx.field->sample_partner(origin.x, rng)};
        const auto events =
            simulate_forward(*ctx.chart, phi, *ctx.field, *ctx.kernel, sim, rng);
        energy[i] = rest_energy(ctx, events.back().after);
    });

    const EnergyCdf cdf(beta, e_max, 0);
    const double ks = ks_statistic(energy, [&](double e) { return cdf(e); });
    const double threshold =
        ctx.cfg->get_double(sec, "threshold", ks_critical(n_paths, 0.01));
    nlohmann::json out;
    out["n_paths"] = n_paths;
    out["s_max"] = sim.s_max;
    out["mean_rate"] = rate;
    out["ks"] = ks;
    out["threshold"] = threshold;
    out["pass"] = ks <= threshold;
    return out;
}

// |C(f_eq, f_eq)| within 3 stderr at a few fiber points
nlohmann::json check_annihilation(const Ctx& ctx) {
    const std::string sec = "check.annihilation";
    const int n_samples = ctx.cfg->get_int(sec, "n_samples", 200000);
    const PhasePoint base = config_point(ctx);
    const std::vector<Vec3> momenta = {
        {0.0, 0.0, 0.0}, {0.5, 0.0, 0.0}, {0.0, 1.0, 0.0},
        {0.3, 0.3, 0.3}, {0.0, 0.0, 1.5}};

    nlohmann::json points = nlohmann::json::array();
    bool pass = true;
    for (size_t k = 0; k < momenta.size(); ++k) {
        const PhasePoint phi =
            lift_to_shell(*ctx.chart, ctx.field->frame_at(base.x), momenta[k]);
        Rng rng(ctx.sim.seed, 0xc0110000u + k);
        double value = 0.0, err = 0.0;
        collision_integral(*ctx.chart, phi, *ctx.field, *ctx.field, *ctx.kernel,
                           n_samples, rng, value, err);
        const bool ok = std::fabs(value) <= 3.0 * err;
        pass = pass && ok;
        points.push_back({{"p", momenta[k]},
                          {"value", value},
                          {"std_error", err},
                          {"pass", ok}});
    }
    return {{"n_samples", n_samples}, {"points", points}, {"pass", pass}};
}

// weak-form stationarity integral for three test functions, plus the
// rejection on a deliberately non-stationary candidate field
nlohmann::json check_weak_form(const Ctx& ctx) {
    const std::string sec = "check.weak_form";
    const int n_samples = ctx.cfg->get_int(sec, "n_samples", 20000);
    const int n_inner = ctx.cfg->get_int(sec, "n_inner", 64);
    const double wrong_beta =
        ctx.cfg->get_double(sec, "wrong_beta", 0.7 * ctx.field->params().beta);
    const PhasePoint base = config_point(ctx);

    Region region;
    region.lo = base.x + Vec4{-0.5, -1.0, -1.0, -1.0};
    region.hi = base.x + Vec4{0.5, 1.0, 1.0, 1.0};
    const Vec4 center = base.x;

    // C1 plateau bump: quintic ramps over the outer quarter of the region,
    // flat in the middle, so the zero-mean transport term contributes little
    // variance
    auto ramp = [](double t) {
        if (t <= 0.0) return 0.0;
        if (t >= 1.0) return 1.0;
        return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
    };
    auto bump = [&](const Vec4& m) {
        double v = 1.0;
        for (int i = 0; i < 4; ++i) {
            const double half = 0.5 * (region.hi[i] - region.lo[i]);
            const double xi = std::fabs(m[i] - center[i]) / half;
            if (xi >= 1.0) return 0.0;
            v *= ramp(4.0 * (1.0 - xi));
        }
        return v;
    };
    // collisions conserve particle number and energy, so test functions need
    // curvature in the energy to expose the jump part; the third one is a
    // narrow window where the rejection power concentrates
    const double window = ctx.cfg->get_double(sec, "window_center", 1.1);
    std::vector<std::function<double(const PhasePoint&)>> tests = {
        [&](const PhasePoint& phi) {
            return bump(phi.x) * std::exp(-0.3 * (rest_energy(ctx, phi) - 1.0));
        },
        [&](const PhasePoint& phi) { return bump(phi.x) * phi.u[1]; },
        [&](const PhasePoint& phi) {
            const double de = rest_energy(ctx, phi) - window;
            return bump(phi.x) * std::exp(-4.0 * de * de);
        }};

    // fiber integrals over the full mass shell: the configured momentum
    // truncation is a backward-path weight-variance device and would bias
    // the stationarity integral here
    JuttnerField bg(*ctx.chart, ctx.field->params());
    JuttnerField wrong(*ctx.chart, {wrong_beta, ctx.field->params().u});

    nlohmann::json rows = nlohmann::json::array();
    bool pass = true;
    double worst_reject = 0.0;
    for (size_t k = 0; k < tests.size(); ++k) {
        Rng rng(ctx.sim.seed, 0x3e00u + k);
        double integral = 0.0, err = 0.0;
        weak_stationarity_check(*ctx.chart, bg, bg, *ctx.kernel, tests[k],
                                region, n_samples, n_inner, rng, integral,
                                err);
        const bool ok = std::fabs(integral) <= 3.0 * err;
        pass = pass && ok;

        Rng rng2(ctx.sim.seed, 0x4000u + k);
        double bad = 0.0, bad_err = 0.0;
        weak_stationarity_check(*ctx.chart, bg, wrong, *ctx.kernel, tests[k],
                                region, n_samples, n_inner, rng2, bad,
                                bad_err);
        worst_reject = std::max(worst_reject, std::fabs(bad) / bad_err);
        rows.push_back({{"test", k},
                        {"integral", integral},
                        {"std_error", err},
                        {"pass", ok},
                        {"wrong_integral", bad},
                        {"wrong_std_error", bad_err}});
    }
    const bool rejected = worst_reject > 5.0;
    pass = pass && rejected;

    std::ofstream csv(artifact_path(ctx, "weak-form.csv"));
    csv << "# schema_version=1\n";
    csv << "test,integral,std_error,wrong_integral,wrong_std_error\n";
    csv.precision(17);
    for (const auto& r : rows)
        csv << r["test"] << ',' << double(r["integral"]) << ','
            << double(r["std_error"]) << ',' << double(r["wrong_integral"])
            << ',' << double(r["wrong_std_error"]) << "\n";

    return {{"n_samples", n_samples},
            {"rows", rows},
            {"rejection_sigmas", worst_reject},
            {"rejected", rejected},
            {"pass", pass}};
}

nlohmann::json check_martingale(const Ctx& ctx) {
    const std::string sec = "check.martingale";
    const int n_paths = ctx.cfg->get_int(sec, "n_paths", 4000);
    const double wrong_beta =
        ctx.cfg->get_double(sec, "wrong_beta", 0.6 * ctx.field->params().beta);
    const PhasePoint phi0 = config_point(ctx);

    const double span =
        ctx.cfg->get_double(sec, "s_span", 1.5 * ctx.surface->level(phi0.x));
    std::vector<double> grid(10);
    for (int i = 0; i < 10; ++i) grid[i] = span * i / 9.0;

    const auto rows =
        martingale_check(*ctx.chart, phi0, *ctx.field, *ctx.field, *ctx.kernel,
                         *ctx.surface, ctx.sim, n_paths, grid);
    JuttnerField wrong(*ctx.chart, {wrong_beta, ctx.field->params().u}, nullptr,
                      ctx.field->p_max());
    const auto bad_rows =
        martingale_check(*ctx.chart, phi0, *ctx.field, wrong, *ctx.kernel,
                         *ctx.surface, ctx.sim, n_paths, grid);

    bool constant = true;
    double drift_sigmas = 0.0;
    for (size_t k = 1; k < rows.size(); ++k) {
        const double se = std::hypot(rows[k].std_error, rows[0].std_error);
        if (std::fabs(rows[k].mean - rows[0].mean) > 3.0 * std::max(se, 1e-300))
            constant = false;
        const double bse =
            std::max(std::hypot(bad_rows[k].std_error, bad_rows[0].std_error),
                     1e-300);
        drift_sigmas = std::max(
            drift_sigmas, std::fabs(bad_rows[k].mean - bad_rows[0].mean) / bse);
    }
    const bool drifted = drift_sigmas > 5.0;

    std::ofstream csv(artifact_path(ctx, "martingale.csv"));
    csv << "# schema_version=1\n";
    csv << "s,mean,std_error,wrong_mean,wrong_std_error\n";
    csv.precision(17);
    nlohmann::json jrows = nlohmann::json::array();
    for (size_t k = 0; k < rows.size(); ++k) {
        csv << rows[k].s << ',' << rows[k].mean << ',' << rows[k].std_error
            << ',' << bad_rows[k].mean << ',' << bad_rows[k].std_error << "\n";
        jrows.push_back({{"s", rows[k].s},
                         {"mean", rows[k].mean},
                         {"std_error", rows[k].std_error}});
    }
    return {{"n_paths", n_paths},
            {"rows", jrows},
            {"constant", constant},
            {"drift_sigmas", drift_sigmas},
            {"pass", constant && drifted}};
}

nlohmann::json check_causality(const Ctx& ctx) {
    const std::string sec = "check.causality";
    const int n_paths = ctx.cfg->get_int(sec, "n_paths", 10000);
    const double amp = ctx.cfg->get_double(sec, "amplitude", 0.5);
    const double radius = ctx.cfg->get_double(sec, "radius", 0.5);
    const PhasePoint phi0 = config_point(ctx);
    const double gap = ctx.surface->level(phi0.x);
    const double outside_center =
        ctx.cfg->get_double(sec, "outside_center", gap + 2.0 * radius + 0.5);

    auto bumped_field = [&](const Vec3& center) {
        auto mod = [amp, radius, center](const Vec4& m) {
            const Vec3 d{m[1] - center[0], m[2] - center[1], m[3] - center[2]};
            const double r = norm3(d);
            if (r >= radius) return 1.0;
            const double c = std::cos(0.5 * M_PI * r / radius);
            return 1.0 + amp * c * c;
        };
        return std::make_shared<JuttnerField>(*ctx.chart, ctx.field->params(),
                                              mod, ctx.field->p_max());
    };
    const auto inside = bumped_field({phi0.x[1], phi0.x[2], phi0.x[3]});
    const auto outside =
        bumped_field({phi0.x[1] + outside_center, phi0.x[2], phi0.x[3]});

    const PairedEstimate out_pair =
        estimate_f_paired(*ctx.chart, phi0, *ctx.field, *ctx.kernel,
                          *ctx.surface, *ctx.field, *outside, n_paths, ctx.sim);
    const PairedEstimate in_pair =
        estimate_f_paired(*ctx.chart, phi0, *ctx.field, *ctx.kernel,
                          *ctx.surface, *ctx.field, *inside, n_paths, ctx.sim);

    const bool outside_flat =
        std::fabs(out_pair.diff.value) <= 3.0 * out_pair.diff.std_error;
    const bool inside_moves =
        std::fabs(in_pair.diff.value) >=
        5.0 * std::max(in_pair.diff.std_error, 1e-300);
    return {{"n_paths", n_paths},
            {"base", out_pair.base.value},
            {"outside_diff", out_pair.diff.value},
            {"outside_std_error", out_pair.diff.std_error},
            {"inside_diff", in_pair.diff.value},
            {"inside_std_error", in_pair.diff.std_error},
            {"pass", outside_flat && inside_moves}};
}

nlohmann::json check_prop2(const Ctx& ctx) {
    const std::string sec = "check.prop2";
    const int n_paths = ctx.cfg->get_int(sec, "n_paths", 10000);
    const PhasePoint phi0 = config_point(ctx);
    const Prop2Report rep =
        prop2_bound_check(*ctx.chart, *ctx.surface, phi0.x, *ctx.field,
                          *ctx.kernel, n_paths, ctx.sim);
    return {{"n_paths", rep.n_paths},
            {"bound", rep.bound},
            {"max_hit", rep.max_hit},
            {"violations", rep.violations},
            {"asserted", rep.asserted},
            {"pass", rep.violations == 0}};
}

nlohmann::json check_independence(const Ctx& ctx) {
    const std::string sec = "check.independence";
    const int n_paths = ctx.cfg->get_int(sec, "n_paths", 4000);
    const double amp = ctx.cfg->get_double(sec, "bump_amplitude", 0.3);
    const double width = ctx.cfg->get_double(sec, "bump_width", 1.0);
    const PhasePoint phi0 = config_point(ctx);

    const double t0 = ctx.surface->tau(Vec3{phi0.x[1], phi0.x[2], phi0.x[3]});
    const Hypersurface alt = make_ring_bump_surface(amp, width, t0);
    const IndependenceReport rep = hypersurface_independence_check(
        *ctx.chart, phi0, *ctx.field, *ctx.kernel, *ctx.surface, alt,
        *ctx.field, n_paths, ctx.sim);
    return {{"n_paths", n_paths},
            {"precondition_ok", rep.precondition_ok},
            {"note", rep.note},
            {"first", rep.first.value},
            {"first_std_error", rep.first.std_error},
            {"second", rep.second.value},
            {"second_std_error", rep.second.std_error},
            {"pass", rep.precondition_ok && rep.agree}};
}

nlohmann::json check_hitting_density(const Ctx& ctx) {
    const std::string sec = "check.hitting_density";
    const int n_paths = ctx.cfg->get_int(sec, "n_paths", 50000);
    const int bins = ctx.cfg->get_int(sec, "bins", 20);
    const double e_max = ctx.cfg->get_double(sec, "e_max", 3.5);
    const PhasePoint phi0 = config_point(ctx);
    const double start = ctx.cfg->get_double(
        sec, "start_time",
        ctx.surface->tau(Vec3{phi0.x[1], phi0.x[2], phi0.x[3]}) - 2.0);

    const HittingHistogram hist =
        hitting_density_histogram(*ctx.chart, *ctx.field, *ctx.kernel,
                                  *ctx.surface, start, n_paths, bins, e_max,
                                  ctx.sim);
    const double field_e_max =
        std::sqrt(1.0 + ctx.field->p_max() * ctx.field->p_max());
    const EnergyCdf cdf(ctx.field->params().beta,
                        std::min(e_max, field_e_max), 1);

    bool pass = hist.total > 0;
    int worst_bin = -1;
    double worst_sigmas = 0.0;
    std::ofstream csv(artifact_path(ctx, "hitting-density.csv"));
    csv << "# schema_version=1\n";
    csv << "e_lo,e_hi,count,expected,std_error\n";
    csv.precision(17);
    for (int b = 0; b < bins; ++b) {
        const double q = cdf.bin_mass(hist.edges[b], hist.edges[b + 1]);
        const double expected = hist.total * q;
        const double sigma =
            std::sqrt(std::max(hist.total * q * (1.0 - q), 1e-300));
        const double dev = std::fabs(hist.counts[b] - expected) / sigma;
        if (dev > worst_sigmas) {
            worst_sigmas = dev;
            worst_bin = b;
        }
        if (dev > 3.0) pass = false;
        csv << hist.edges[b] << ',' << hist.edges[b + 1] << ','
            << hist.counts[b] << ',' << expected << ',' << sigma << "\n";
    }
    return {{"n_paths", n_paths},
            {"hits", hist.total},
            {"bins", bins},
            {"worst_bin", worst_bin},
            {"worst_sigmas", worst_sigmas},
            {"pass", pass}};
}

nlohmann::json check_lemma(const Ctx& ctx) {
    const std::string sec = "check.lemma";
    const double eta = ctx.cfg->get_double(sec, "eta", 0.2);
    const int n_eps = ctx.cfg->get_int(sec, "n_eps", 40);
    const double fd = ctx.cfg->get_double(sec, "fd", 0.02);
    const double threshold = ctx.cfg->get_double(sec, "threshold", 1e-8);
    const bool want_slope = ctx.cfg->get_int(sec, "check_slope", 0) != 0;

    std::vector<Vec3> probes;
    for (double x : {-0.6, 0.0, 0.7})
        for (double y : {-0.5, 0.4})
            for (double z : {-0.3, 0.55}) probes.push_back(Vec3{x, y, z});

    auto f_test = [](double eps, const Vec3& xs) {
        return (1.0 + 0.5 * eps - 0.25 * eps * eps) *
               std::exp(-0.3 * (xs[0] * xs[0] + xs[1] * xs[1] + xs[2] * xs[2]));
    };
    auto h_test = [](double eps, const Vec3& xs) {
        return (0.7 - 0.4 * eps + 0.3 * eps * eps) *
               (1.0 + 0.2 * xs[0] - 0.1 * xs[1] * xs[2]);
    };

    const double res = lemma_check(*ctx.chart, *ctx.surface, f_test, h_test,
                                   probes, eta, n_eps, fd);
    nlohmann::json out;
    out["residual"] = res;
    out["threshold"] = threshold;
    bool pass = res <= threshold;
    if (want_slope) {
        const double res2 = lemma_check(*ctx.chart, *ctx.surface, f_test,
                                        h_test, probes, eta, n_eps, fd / 2.0);
        const double slope = std::log2(res / std::max(res2, 1e-300));
        out["residual_half_fd"] = res2;
        out["slope"] = slope;
        pass = slope >= 2.0 - 0.3;
    }
    out["pass"] = pass;
    return out;
}

const std::map<std::string, CheckFn>& check_registry() {
    static const std::map<std::string, CheckFn> reg = {
        {"forward_energy_ks", check_forward_energy_ks},
        {"annihilation", check_annihilation},
        {"weak_form", check_weak_form},
        {"martingale", check_martingale},
        {"causality", check_causality},
        {"prop2", check_prop2},
        {"independence", check_independence},
        {"hitting_density", check_hitting_density},
        {"lemma", check_lemma},
    };
    return reg;
}

}  // namespace

nlohmann::json strip_timings(nlohmann::json summary) {
    summary.erase("timings");
    return summary;
}

ScenarioSetup build_setup(const Config& cfg, const RunOverrides& overrides) {
    ScenarioSetup su;
    su.name = cfg.get_string("scenario", "name");

    su.chart = std::make_shared<Chart>(
        make_chart(cfg.get_string("chart", "name", "minkowski"),
                   cfg.numeric_params("chart")));
    JuttnerParams jp;
    jp.beta = cfg.get_double("field", "beta", 1.0);
    su.field = std::make_shared<JuttnerField>(
        *su.chart, jp, nullptr, cfg.get_double("field", "p_max", 1e300));
    su.kernel = make_kernel(cfg.get_string("kernel", "name", "constant"),
                            cfg.numeric_params("kernel"));
    su.surface = std::make_shared<Hypersurface>(
        make_surface(cfg.get_string("surface", "name", "flat"),
                     cfg.numeric_params("surface")));

    su.sim.ds = cfg.get_double("sim", "ds", 0.01);
    su.sim.s_max = cfg.get_double("sim", "s_max", 10.0);
    su.sim.lambda_bar = cfg.get_double("sim", "lambda_bar", 1.0);
    su.sim.n_rate = cfg.get_int("sim", "n_rate", 400);
    su.sim.seed = overrides.seed.value_or(cfg.get_u64("sim", "seed", 1));
    su.sim.workers = overrides.workers.value_or(cfg.get_int("sim", "workers", 1));
    su.sim.hit_bound = cfg.get_double("sim", "hit_bound", -1.0);
    su.sim.no_hit_factor = cfg.get_double("sim", "no_hit_factor", 10.0);
    su.sim.cell_size_x = cfg.get_double("sim", "cell_size_x", 0.25);
    su.sim.cell_size_p = cfg.get_double("sim", "cell_size_p", 0.125);

    // majorant guard: lambda_bar must dominate the total rate on the support
    const PhasePoint base = setup_point(cfg, su);
    std::vector<Vec4> probes = {base.x};
    for (int i = 1; i < 4; ++i) {
        Vec4 lo = base.x, hi = base.x;
        lo[i] -= 0.5;
        hi[i] += 0.5;
        probes.push_back(lo);
        probes.push_back(hi);
    }
    try {
        validate_majorant(*su.chart, *su.field, *su.kernel, su.sim, probes);
    } catch (const ThinningViolation& e) {
        throw ConfigError(std::string("[sim] lambda_bar: ") + e.what());
    }
    return su;
}

PhasePoint setup_point(const Config& cfg, const ScenarioSetup& setup) {
    Vec4 x{cfg.get_double("point", "x0", 1.0), cfg.get_double("point", "x1", 0.0),
           cfg.get_double("point", "x2", 0.0), cfg.get_double("point", "x3", 0.0)};
    Vec3 p{cfg.get_double("point", "p1", 0.0), cfg.get_double("point", "p2", 0.0),
           cfg.get_double("point", "p3", 0.0)};
    return lift_to_shell(*setup.chart, setup.field->frame_at(x), p);
}

ScenarioResult run_scenario(const Config& cfg, const RunOverrides& overrides) {
    Ctx ctx;
    static_cast<ScenarioSetup&>(ctx) = build_setup(cfg, overrides);
    ctx.cfg = &cfg;
    ctx.out_dir = overrides.out_dir.empty() ? "." : overrides.out_dir;
    std::filesystem::create_directories(ctx.out_dir);

    nlohmann::json summary;
    summary["schema_version"] = 1;
    summary["scenario"] = ctx.name;
    summary["seed"] = ctx.sim.seed;
    nlohmann::json checks = nlohmann::json::array();
    nlohmann::json timings;
    timings["workers"] = ctx.sim.workers;

    bool all_pass = true;
    const auto& registry = check_registry();
    for (const std::string& name : cfg.get_list("scenario", "checks")) {
        const auto it = registry.find(name);
        if (it == registry.end())
            throw ConfigError("[scenario] checks: unknown check '" + name + "'");
        const auto t0 = std::chrono::steady_clock::now();
        nlohmann::json result;
        try {
            result = it->second(ctx);
        } catch (const std::exception& e) {
            throw std::runtime_error("scenario " + ctx.name + ", check " +
                                     name + ": " + e.what());
        }
        const auto t1 = std::chrono::steady_clock::now();
        result["name"] = name;
        all_pass = all_pass && result.at("pass").get<bool>();
        checks.push_back(result);
        timings[name] =
            std::chrono::duration<double>(t1 - t0).count();
    }
    summary["checks"] = checks;
    summary["passed"] = all_pass;
    summary["timings"] = timings;

    std::ofstream out(ctx.out_dir + "/" + ctx.name + "-summary.json");
    out << summary.dump(2) << "\n";

    return ScenarioResult{summary, all_pass};
}

}  // namespace grb
