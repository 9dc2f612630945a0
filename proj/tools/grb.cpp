// Command-line front end: forward simulation, the backward estimator, the
// scenario check suites, and single-trajectory dumps.
#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "grb/harness.hpp"
#include "grb/parallel.hpp"

using namespace grb;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir = ".";
    uint64_t seed = 0;
    int workers = 0;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* workers_opt = nullptr;
};

void add_common(CLI::App* sub, CommonArgs& args) {
    sub->add_option("--config", args.config_path, "scenario config file")
        ->required();
    sub->add_option("--out-dir", args.out_dir, "output directory");
    args.seed_opt = sub->add_option("--seed", args.seed, "RNG seed override");
    args.workers_opt =
        sub->add_option("--workers", args.workers, "worker thread count");
}

RunOverrides overrides_from(const CommonArgs& args) {
    RunOverrides ov;
    ov.out_dir = args.out_dir;
    if (args.seed_opt->count()) ov.seed = args.seed;
    if (args.workers_opt->count()) ov.workers = args.workers;
    return ov;
}

int cmd_simulate(const CommonArgs& args, int n_paths) {
    const Config cfg = Config::load(args.config_path);
    const RunOverrides ov = overrides_from(args);
    const ScenarioSetup su = build_setup(cfg, ov);
    const PhasePoint origin = setup_point(cfg, su);
    std::filesystem::create_directories(args.out_dir);

    std::vector<std::vector<PathEvent>> paths(n_paths);
    parallel_for(n_paths, su.sim.workers, [&](int i) {
        Rng rng(su.sim.seed, static_cast<uint64_t>(i));
        PhasePoint phi{origin.x, su.field->sample_partner(origin.x, rng)};
        paths[i] = simulate_forward(*su.chart, phi, *su.field, *su.kernel,
                                    su.sim, rng);
    });

    const std::string stem = args.out_dir + "/" + su.name;
    std::ofstream csv(stem + "-forward.csv");
    csv << "# schema_version=1\n";
    csv << "path,s_end,jumps,x0,x1,x2,x3,mdot0,mdot1,mdot2,mdot3\n";
    csv.precision(17);
    double mean_jumps = 0.0;
    for (int i = 0; i < n_paths; ++i) {
        int jumps = 0;
        for (const auto& ev : paths[i])
            if (ev.kind == EventKind::jump) ++jumps;
        mean_jumps += jumps;
        const PathEvent& last = paths[i].back();
        csv << i << ',' << last.s << ',' << jumps;
        for (double x : last.after.x) csv << ',' << x;
        for (double u : last.after.u) csv << ',' << u;
        csv << "\n";
    }
    mean_jumps /= std::max(1, n_paths);
    save_events_csv(stem + "-events.csv", paths.front());

    nlohmann::json summary = {{"schema_version", 1},
                              {"scenario", su.name},
                              {"seed", su.sim.seed},
                              {"n_paths", n_paths},
                              {"s_max", su.sim.s_max},
                              {"mean_jumps", mean_jumps}};
    std::ofstream js(stem + "-simulate.json");
    js << summary.dump(2) << "\n";
    std::cout << summary.dump(2) << "\n";
    return 0;
}

int cmd_estimate(const CommonArgs& args, int n_paths) {
    const Config cfg = Config::load(args.config_path);
    const RunOverrides ov = overrides_from(args);
    const ScenarioSetup su = build_setup(cfg, ov);
    const PhasePoint phi0 = setup_point(cfg, su);
    std::filesystem::create_directories(args.out_dir);

    const Estimate est = estimate_f(*su.chart, phi0, *su.field, *su.kernel,
                                    *su.surface, *su.field, n_paths, su.sim);
    const double exact = su.field->eval(phi0);
    nlohmann::json summary = {{"schema_version", 1},
                              {"scenario", su.name},
                              {"seed", su.sim.seed},
                              {"n_paths", est.n},
                              {"estimate", est.value},
                              {"std_error", est.std_error},
                              {"field_value", exact}};
    std::ofstream js(args.out_dir + "/" + su.name + "-estimate.json");
    js << summary.dump(2) << "\n";
    std::cout << summary.dump(2) << "\n";
    return 0;
}

int cmd_verify(const CommonArgs& args) {
    const Config cfg = Config::load(args.config_path);
    const ScenarioResult res = run_scenario(cfg, overrides_from(args));
    for (const auto& check : res.summary["checks"])
        std::cout << (check["pass"].get<bool>() ? "[PASS] " : "[FAIL] ")
                  << check["name"].get<std::string>() << "\n";
    std::cout << (res.passed ? "scenario passed" : "scenario FAILED") << "\n";
    return res.passed ? 0 : 1;
}

int cmd_dump_path(const CommonArgs& args) {
    const Config cfg = Config::load(args.config_path);
    const RunOverrides ov = overrides_from(args);
    const ScenarioSetup su = build_setup(cfg, ov);
    const PhasePoint phi0 = setup_point(cfg, su);
    std::filesystem::create_directories(args.out_dir);

    const double s_total = cfg.get_double("path", "s_total", su.sim.s_max);
    const double ds = cfg.get_double("path", "ds", su.sim.ds);
    const std::string dir_name = cfg.get_string("path", "direction", "future");
    if (dir_name != "future" && dir_name != "past")
        throw ConfigError("[path] direction: expected 'future' or 'past'");
    const Direction dir =
        dir_name == "past" ? Direction::past : Direction::future;

    const auto path = geodesic_flow(*su.chart, phi0, s_total, ds, dir);
    const std::string out = args.out_dir + "/" + su.name + "-path.csv";
    dump_path_csv(out, path);
    std::cout << "wrote " << path.size() << " samples to " << out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte Carlo toolkit for the relativistic Boltzmann process"};
    app.require_subcommand(1);

    CommonArgs sim_args, est_args, ver_args, dump_args;
    int sim_paths = 100, est_paths = 1000;

    CLI::App* sim = app.add_subcommand("simulate", "forward paths");
    add_common(sim, sim_args);
    sim->add_option("--paths", sim_paths, "number of forward paths");

    CLI::App* est = app.add_subcommand("estimate", "backward estimator");
    add_common(est, est_args);
    est->add_option("--paths", est_paths, "number of backward paths");

    CLI::App* ver = app.add_subcommand("verify", "run the scenario checks");
    add_common(ver, ver_args);

    CLI::App* dump = app.add_subcommand("dump-path", "single trajectory CSV");
    add_common(dump, dump_args);

    CLI11_PARSE(app, argc, argv);
    try {
        if (sim->parsed()) return cmd_simulate(sim_args, sim_paths);
        if (est->parsed()) return cmd_estimate(est_args, est_paths);
        if (ver->parsed()) return cmd_verify(ver_args);
        if (dump->parsed()) return cmd_dump_path(dump_args);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
