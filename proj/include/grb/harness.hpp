// Scenario configuration, the check registry, and JSON/CSV reporting.
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "grb/causal.hpp"

namespace grb {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Flat sectioned text: [section] headers, key = value lines, '#' comments.
class Config {
  public:
    static Config load(const std::string& path);
    static Config parse(const std::string& text, const std::string& origin);

    bool has(const std::string& sec, const std::string& key) const;
    bool has_section(const std::string& sec) const;

    std::string get_string(const std::string& sec, const std::string& key) const;
    std::string get_string(const std::string& sec, const std::string& key,
                           const std::string& fallback) const;
    double get_double(const std::string& sec, const std::string& key) const;
    double get_double(const std::string& sec, const std::string& key,
                      double fallback) const;
    int get_int(const std::string& sec, const std::string& key,
                int fallback) const;
    uint64_t get_u64(const std::string& sec, const std::string& key,
                     uint64_t fallback) const;
    // comma-separated list value
    std::vector<std::string> get_list(const std::string& sec,
                                      const std::string& key) const;
    // every key in the section whose value parses as a number
    std::map<std::string, double> numeric_params(const std::string& sec) const;

  private:
    struct Entry {
        std::string value;
        int line = 0;
    };
    const Entry* find(const std::string& sec, const std::string& key) const;
    [[noreturn]] void fail(const std::string& sec, const std::string& key,
                           const std::string& what) const;

    std::map<std::string, std::map<std::string, Entry>> data_;
    std::string origin_;
};

struct RunOverrides {
    std::optional<uint64_t> seed;
    std::optional<int> workers;
    std::string out_dir = ".";
};

// Objects built from the [chart]/[field]/[kernel]/[surface]/[sim] sections,
// with the thinning majorant already validated.
struct ScenarioSetup {
    std::string name;
    std::shared_ptr<Chart> chart;
    std::shared_ptr<JuttnerField> field;
    std::shared_ptr<CollisionKernel> kernel;
    std::shared_ptr<Hypersurface> surface;
    SimConfig sim;
};

ScenarioSetup build_setup(const Config& cfg, const RunOverrides& overrides);

// The [point] section lifted onto the shell (defaults: x = (1,0,0,0), p = 0).
PhasePoint setup_point(const Config& cfg, const ScenarioSetup& setup);

struct ScenarioResult {
    nlohmann::json summary;
    bool passed = false;
};

// Builds the configured chart/field/kernel/surface, validates the thinning
// majorant, executes the configured checks, and writes
// <out_dir>/<scenario>-summary.json plus CSV artifacts.
ScenarioResult run_scenario(const Config& cfg, const RunOverrides& overrides);

// Summary with the runtime-dependent fields removed, for reproducibility
// comparisons.
nlohmann::json strip_timings(nlohmann::json summary);

}  // namespace grb
