#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "savanna/engine.hpp"
#include "savanna/rates.hpp"

namespace savanna::experiment {

// Declarative key-value config with [section] tables. Unknown keys are
// errors: every key must be consumed while building the experiment.
class ConfigMap {
public:
    static ConfigMap parse_file(const std::string& path);
    static ConfigMap parse_text(const std::string& text, const std::string& origin = "<text>");

    std::optional<std::string> take(const std::string& dotted_key);
    std::string take_or(const std::string& key, const std::string& def);
    double take_double(const std::string& key, double def);
    int take_int(const std::string& key, int def);
    std::uint64_t take_u64(const std::string& key, std::uint64_t def);
    void finish() const;  // throws ConfigInvalid on unconsumed keys

    const std::string& raw_text() const { return raw_; }

private:
    std::map<std::string, std::string> kv_;
    std::string raw_;
};

struct SweepAxis {
    std::string param;  // beta | mu | nu | omega
    double lo = 0.0, hi = 0.0;
    int n = 1;
    double value(int i) const { return n > 1 ? lo + (hi - lo) * i / (n - 1) : lo; }
};

struct ExperimentSpec {
    std::string kind;
    RateParams params;

    // geometry
    int d = 1, L = 10, side = 0;
    double kappa = 1.0, epsilon0 = 0.1;
    Boundary boundary = Boundary::Torus;

    // run
    int replicas = 1;
    double horizon = 10.0;
    std::uint64_t master_seed = 1;
    int threads = 0;
    std::string out_dir = "out";
    ModelKind model = ModelKind::Krone;
    bool coupled = false;      // simulate the three processes on one schedule
    bool log_events = false;   // coupled only: write the raw mark log
    double sample_dt = 0.0;

    // init
    std::string init_mode = "all2";  // all2 | finite | density
    int init_count = 1;
    int init_state = 2;
    double init_density = 0.0;

    // sweep
    SweepAxis axis1, axis2;
    double survival_density = 0.0;

    // recovery / diagnostics
    double alpha = -1.0;
    double a0_init = 0.05;
    int diag_configs = 1000;
    int dynkin_replicas = 200;
    double dynkin_t = 10.0;
    double ext_beta = 1.2, ext_mu = 1.5, ext_nu = 1.0, ext_omega = 1.0;

    // branching walk
    double brw_t = 2.0, brw_m = 4.0;

    // moving particles
    int moving_h00 = 0;  // 0: fill the origin box
    double moving_delta = 0.05;
    int moving_axis = 1;

    // ide
    double ide_h = 0.0, ide_half_width = 0.0, ide_dt = 0.0;
    double ide_t_end = 20.0, ide_level = 0.05, ide_sample = 1.0;

    std::string raw_text;

    Geometry make_geometry() const;
};

ExperimentSpec build_spec(ConfigMap cfg);
ExperimentSpec load_spec(const std::string& path);

struct ResultRecord {
    int grid_index = 0;
    int replica = 0;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, double>> scalars;
    double wall_ms = 0.0;
    bool failed = false;
    std::string error;
};

struct ExperimentOutcome {
    int exit_code = 0;  // 0 ok, 3 partial failure
    int records = 0;
    int failures = 0;
    std::string results_csv;  // path of the sorted scalar table
};

// Runs the experiment, streaming records to <out>/records.jsonl as they
// finish (crash-safe prefix), then writing the deterministic sorted scalar
// table <out>/results.csv and a manifest. Scalar outputs depend only on
// (spec, master seed), never on thread count or completion order.
ExperimentOutcome run_experiment(const ExperimentSpec& spec, std::ostream& log);

std::uint64_t fnv1a(const std::string& bytes);
std::string version_string();

}  // namespace savanna::experiment
