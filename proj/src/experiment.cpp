#include "savanna/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "savanna/boxprocess.hpp"
#include "savanna/csvio.hpp"
#include "savanna/diagnostics.hpp"
#include "savanna/ide.hpp"
#include "savanna/meanfield.hpp"
#include "savanna/stats.hpp"

namespace savanna::experiment {

namespace fs = std::filesystem;
using nlohmann::json;

std::string version_string() { return "savanna 1.0.0"; }

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

// ---------------------------------------------------------------- ConfigMap

ConfigMap ConfigMap::parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigInvalid(path, "cannot open config file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_text(ss.str(), path);
}

ConfigMap ConfigMap::parse_text(const std::string& text, const std::string& origin) {
    ConfigMap m;
    m.raw_ = text;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigInvalid(origin + ":" + std::to_string(lineno), "malformed section");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigInvalid(origin + ":" + std::to_string(lineno), "expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigInvalid(origin + ":" + std::to_string(lineno), "empty key");
        const std::string dotted = section.empty() ? key : section + "." + key;
        if (m.kv_.count(dotted))
            throw ConfigInvalid(dotted, "duplicate key");
        m.kv_[dotted] = val;
    }
    return m;
}

std::optional<std::string> ConfigMap::take(const std::string& key) {
    auto it = kv_.find(key);
    if (it == kv_.end()) return std::nullopt;
    std::string v = it->second;
    kv_.erase(it);
    return v;
}

std::string ConfigMap::take_or(const std::string& key, const std::string& def) {
    auto v = take(key);
    return v ? *v : def;
}

double ConfigMap::take_double(const std::string& key, double def) {
    auto v = take(key);
    if (!v) return def;
    try {
        std::size_t pos = 0;
        const double x = std::stod(*v, &pos);
        if (pos != v->size()) throw std::invalid_argument("");
        return x;
    } catch (...) {
        throw ConfigInvalid(key, "not a number: " + *v);
    }
}

int ConfigMap::take_int(const std::string& key, int def) {
    auto v = take(key);
    if (!v) return def;
    try {
        std::size_t pos = 0;
        const long x = std::stol(*v, &pos);
        if (pos != v->size()) throw std::invalid_argument("");
        return static_cast<int>(x);
    } catch (...) {
        throw ConfigInvalid(key, "not an integer: " + *v);
    }
}

std::uint64_t ConfigMap::take_u64(const std::string& key, std::uint64_t def) {
    auto v = take(key);
    if (!v) return def;
    try {
        std::size_t pos = 0;
        const unsigned long long x = std::stoull(*v, &pos);
        if (pos != v->size()) throw std::invalid_argument("");
        return x;
    } catch (...) {
        throw ConfigInvalid(key, "not an unsigned integer: " + *v);
    }
}

void ConfigMap::finish() const {
    if (!kv_.empty()) throw ConfigInvalid(kv_.begin()->first, "unknown key");
}

// --------------------------------------------------------------- spec build

namespace {

GrowthRate parse_growth(const std::string& text) {
    std::istringstream in(text);
    std::string kind;
    in >> kind;
    if (kind == "constant") {
        double w;
        if (!(in >> w)) throw ConfigInvalid("params.omega", "constant needs one value");
        return GrowthRate::constant(w);
    }
    if (kind == "step") {
        double w0, w1, d0;
        if (!(in >> w0 >> w1 >> d0))
            throw ConfigInvalid("params.omega", "step needs omega0 omega1 delta0");
        return GrowthRate::step(w0, w1, d0);
    }
    throw ConfigInvalid("params.omega", "expected 'constant w' or 'step w0 w1 d0'");
}

SweepAxis parse_axis(const std::string& key, const std::string& text) {
    std::istringstream in(text);
    SweepAxis a;
    if (!(in >> a.param >> a.lo >> a.hi >> a.n) || a.n < 1)
        throw ConfigInvalid(key, "expected: <param> <lo> <hi> <count>");
    if (a.param != "beta" && a.param != "mu" && a.param != "nu" && a.param != "omega")
        throw ConfigInvalid(key, "axis param must be beta, mu, nu or omega");
    return a;
}

ModelKind parse_model(const std::string& s) {
    if (s == "staverlevin") return ModelKind::StaverLevin;
    if (s == "krone") return ModelKind::Krone;
    if (s == "truncated") return ModelKind::Truncated;
    throw ConfigInvalid("run.model", "unknown model: " + s);
}

const char* kKnownKinds[] = {"phase_sweep",  "survival_finite_seed", "stationary_density",
                             "recovery",     "brw_bounds",           "moving_particles",
                             "ide_front",    "front_verify",       "diagnostics_suite",
                             "simulate"};

}  // namespace

Geometry ExperimentSpec::make_geometry() const {
    int s = side;
    if (s == 0) {
        // smallest torus compatible with the windows and the box tiling
        const int ell = std::max(1, static_cast<int>(std::floor(epsilon0 * L + 1e-12)));
        s = 4 * L;
        if (s % (2 * ell) != 0) s += 2 * ell - s % (2 * ell);
    }
    return Geometry(d, L, kappa, epsilon0, s, boundary);
}

ExperimentSpec build_spec(ConfigMap cfg) {
    ExperimentSpec spec;
    spec.raw_text = cfg.raw_text();
    spec.kind = cfg.take_or("kind", "");
    bool known = false;
    for (const char* k : kKnownKinds) known |= spec.kind == k;
    if (!known) throw ConfigInvalid("kind", "unknown or missing experiment kind: " + spec.kind);

    spec.params.beta = cfg.take_double("params.beta", 1.0);
    spec.params.mu = cfg.take_double("params.mu", 1.0);
    spec.params.nu = cfg.take_double("params.nu", 1.0);
    if (auto w = cfg.take("params.omega")) spec.params.omega = parse_growth(*w);

    spec.d = cfg.take_int("geometry.d", 1);
    spec.L = cfg.take_int("geometry.L", 10);
    spec.side = cfg.take_int("geometry.side", 0);
    spec.kappa = cfg.take_double("geometry.kappa", 1.0);
    spec.epsilon0 = cfg.take_double("geometry.epsilon0", 0.1);
    const std::string b = cfg.take_or("geometry.boundary", "torus");
    if (b == "torus")
        spec.boundary = Boundary::Torus;
    else if (b == "grass_frozen")
        spec.boundary = Boundary::GrassFrozen;
    else
        throw ConfigInvalid("geometry.boundary", "expected torus or grass_frozen");

    spec.replicas = cfg.take_int("run.replicas", 1);
    if (spec.replicas < 1) throw ConfigInvalid("run.replicas", "must be >= 1");
    spec.horizon = cfg.take_double("run.horizon", 10.0);
    spec.master_seed = cfg.take_u64("run.seed", 1);
    spec.threads = cfg.take_int("run.threads", 0);
    spec.out_dir = cfg.take_or("run.out", "out");
    const std::string model = cfg.take_or("run.model", "krone");
    if (model == "coupled")
        spec.coupled = true;
    else
        spec.model = parse_model(model);
    spec.log_events = cfg.take_int("run.log_events", 0) != 0;
    spec.sample_dt = cfg.take_double("run.sample_dt", 0.0);

    spec.init_mode = cfg.take_or("init.mode", "all2");
    if (spec.init_mode != "all2" && spec.init_mode != "finite" && spec.init_mode != "density")
        throw ConfigInvalid("init.mode", "expected all2, finite or density");
    spec.init_count = cfg.take_int("init.count", 1);
    spec.init_state = cfg.take_int("init.state", 2);
    if (spec.init_state < 1 || spec.init_state > 2)
        throw ConfigInvalid("init.state", "must be 1 or 2");
    spec.init_density = cfg.take_double("init.density", 0.0);

    if (auto a = cfg.take("sweep.axis1")) spec.axis1 = parse_axis("sweep.axis1", *a);
    if (auto a = cfg.take("sweep.axis2")) spec.axis2 = parse_axis("sweep.axis2", *a);
    spec.survival_density = cfg.take_double("sweep.survival_density", 0.0);

    spec.alpha = cfg.take_double("recovery.alpha", -1.0);
    spec.a0_init = cfg.take_double("recovery.a0_init", 0.05);
    spec.diag_configs = cfg.take_int("diag.configs", 1000);
    spec.dynkin_replicas = cfg.take_int("diag.dynkin_replicas", 200);
    spec.dynkin_t = cfg.take_double("diag.dynkin_t", 10.0);
    spec.ext_beta = cfg.take_double("diag.ext_beta", 1.2);
    spec.ext_mu = cfg.take_double("diag.ext_mu", 1.5);
    spec.ext_nu = cfg.take_double("diag.ext_nu", 1.0);
    spec.ext_omega = cfg.take_double("diag.ext_omega", 1.0);

    spec.brw_t = cfg.take_double("brw.t", 2.0);
    spec.brw_m = cfg.take_double("brw.m", 4.0);

    spec.moving_h00 = cfg.take_int("moving.h00", 0);
    spec.moving_delta = cfg.take_double("moving.delta", 0.05);
    spec.moving_axis = cfg.take_int("moving.axis", 1);

    spec.ide_h = cfg.take_double("ide.h", 0.0);
    spec.ide_half_width = cfg.take_double("ide.half_width", 0.0);
    spec.ide_dt = cfg.take_double("ide.dt", 0.0);
    spec.ide_t_end = cfg.take_double("ide.t_end", 20.0);
    spec.ide_level = cfg.take_double("ide.level", 0.05);
    spec.ide_sample = cfg.take_double("ide.sample_every", 1.0);

    cfg.finish();
    spec.params.validate();
    return spec;
}

ExperimentSpec load_spec(const std::string& path) {
    return build_spec(ConfigMap::parse_file(path));
}

// ------------------------------------------------------------------ runner

namespace {

void parallel_for(int n, int threads, const std::function<void(int)>& body) {
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads < 1) threads = 1;
    threads = std::min(threads, n);
    if (threads <= 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int w = 0; w < threads; ++w)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
        });
    for (auto& th : pool) th.join();
}

Configuration make_init(const ExperimentSpec& spec, const Geometry& g, WindowSet ws,
                        SplitMix64& rng) {
    Configuration c(g, ws);
    if (spec.init_mode == "all2") {
        for (Site x = 0; x < g.nsites; ++x) c.apply_flip(x, 2);
    } else if (spec.init_mode == "finite") {
        Geometry::Coords base{0, 0, 0};
        for (int k = 0; k < g.d; ++k) base[k] = g.side / 2;
        for (int i = 0; i < spec.init_count; ++i) {
            Geometry::Coords q = base;
            q[0] = g.wrap(base[0] + i);
            c.apply_flip(g.site_index(q), spec.init_state);
        }
    } else {  // density
        for (Site x = 0; x < g.nsites; ++x)
            if (rng.u01() <= spec.init_density) c.apply_flip(x, spec.init_state);
    }
    return c;
}

RateParams cell_params(const ExperimentSpec& spec, int i1, int i2) {
    RateParams p = spec.params;
    auto apply = [&](const SweepAxis& a, int i) {
        if (a.param.empty()) return;
        const double v = a.value(i);
        if (a.param == "beta") p.beta = v;
        else if (a.param == "mu") p.mu = v;
        else if (a.param == "nu") p.nu = v;
        else p.omega = GrowthRate::constant(v);
    };
    apply(spec.axis1, i1);
    apply(spec.axis2, i2);
    return p;
}

struct RecordSink {
    std::ofstream jsonl;
    std::mutex mtx;
    void push(const ExperimentSpec& spec, const ResultRecord& r) {
        json j;
        j["experiment"] = spec.kind;
        j["grid"] = r.grid_index;
        j["replica"] = r.replica;
        j["seed"] = r.seed;
        json s = json::object();
        for (auto& [k, v] : r.scalars) s[k] = v;
        j["scalars"] = s;
        j["wall_ms"] = r.wall_ms;
        if (r.failed) j["error"] = r.error;
        std::lock_guard<std::mutex> lock(mtx);
        jsonl << j.dump() << '\n';
        jsonl.flush();
    }
};

void write_results_csv(const std::string& path, std::vector<ResultRecord> records) {
    std::sort(records.begin(), records.end(), [](const ResultRecord& a, const ResultRecord& b) {
        if (a.grid_index != b.grid_index) return a.grid_index < b.grid_index;
        return a.replica < b.replica;
    });
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    std::vector<std::string> header = {"grid_index", "replica", "seed"};
    std::size_t n_scalars = 0;
    for (const auto& r : records)
        if (!r.failed) {
            for (auto& [k, v] : r.scalars) header.push_back(k);
            n_scalars = r.scalars.size();
            break;
        }
    header.push_back("error");
    csvio::write_row(out, header);
    for (const auto& r : records) {
        std::vector<std::string> row = {std::to_string(r.grid_index), std::to_string(r.replica),
                                        std::to_string(r.seed)};
        for (auto& [k, v] : r.scalars) row.push_back(csvio::format_double(v));
        row.resize(3 + n_scalars);  // failed tasks leave their scalar cells blank
        row.push_back(r.error);
        csvio::write_row(out, row);
    }
}

double final_nonzero_density(const RunResult& rr, const Geometry& g) {
    const auto& last = rr.samples.back();
    return static_cast<double>(last.counts[1] + last.counts[2]) /
           static_cast<double>(g.nsites);
}

}  // namespace

ExperimentOutcome run_experiment(const ExperimentSpec& spec, std::ostream& log) {
    fs::create_directories(spec.out_dir);
    RecordSink sink;
    sink.jsonl.open(spec.out_dir + "/records.jsonl", std::ios::binary);
    if (!sink.jsonl) throw IoError("cannot write records.jsonl under " + spec.out_dir);

    // task grid
    int n_grid = 1, n_rep = spec.replicas;
    if (spec.kind == "phase_sweep") n_grid = spec.axis1.n * spec.axis2.n;
    if (spec.kind == "recovery" || spec.kind == "brw_bounds" || spec.kind == "ide_front" ||
        spec.kind == "front_verify" || spec.kind == "diagnostics_suite")
        n_rep = 1;
    const int n_tasks = n_grid * n_rep;

    std::vector<ResultRecord> records(static_cast<std::size_t>(n_tasks));
    json summary;

    auto task = [&](int idx) {
        const int gi = idx / n_rep;
        const int ri = idx % n_rep;
        ResultRecord rec;
        rec.grid_index = gi;
        rec.replica = ri;
        rec.seed = derive_seed(spec.master_seed, static_cast<std::uint64_t>(gi),
                               static_cast<std::uint64_t>(ri));
        const auto t_start = std::chrono::steady_clock::now();
        try {
            if (spec.kind == "phase_sweep") {
                const int i1 = gi / spec.axis2.n, i2 = gi % spec.axis2.n;
                const RateParams p = cell_params(spec, i1, i2);
                p.validate();
                const auto verdict = meanfield::classify_origin(p, p.omega.min());
                SplitMix64 rng(derive_seed(rec.seed, 0xa11, 0));
                Geometry g = spec.make_geometry();
                Configuration c = make_init(spec, g, WindowSet::TreeOnly, rng);
                RunResult rr = run_model(spec.model, c, p, spec.horizon, rec.seed);
                const double dens = final_nonzero_density(rr, g);
                rec.scalars = {{"beta", p.beta},
                               {"mu", p.mu},
                               {"nu", p.nu},
                               {"omega_min", p.omega.min()},
                               {"determinant", verdict.determinant},
                               {"unstable", verdict.kind == meanfield::OriginKind::Unstable},
                               {"survived", dens > spec.survival_density ? 1.0 : 0.0},
                               {"final_density", dens}};
            } else if (spec.kind == "simulate" && spec.coupled) {
                SplitMix64 rng(derive_seed(rec.seed, 0xa11, 0));
                Geometry g = spec.make_geometry();
                Configuration chi = make_init(spec, g, WindowSet::TreeAndGrass, rng);
                Configuration eta(g), xi(g);
                for (Site x = 0; x < g.nsites; ++x)
                    if (chi.state(x) != 0) {
                        eta.apply_flip(x, chi.state(x));
                        xi.apply_flip(x, chi.state(x));
                    }
                EventSchedule sched(g, spec.params, spec.horizon, rec.seed);
                CoupledState st{std::move(chi), std::move(eta), std::move(xi)};
                std::ofstream ev;
                MarkLogger logger;
                if (spec.log_events && ri == 0) {
                    ev.open(spec.out_dir + "/events.log", std::ios::binary);
                    logger = [&ev](const Mark& m, const std::array<int, 3>& pre,
                                   const std::array<int, 3>& post) {
                        ev << m.time << ' ' << m.site << ' ' << static_cast<int>(m.stream) << ' '
                           << m.target << ' ' << (m.solid ? 1 : 0) << ' ' << pre[0] << pre[1]
                           << pre[2] << ' ' << post[0] << post[1] << post[2] << '\n';
                    };
                }
                auto res = run_coupled(sched, st, spec.sample_dt, logger);
                const auto dens = [&](const Configuration& c) {
                    return static_cast<double>(c.nonzero()) / static_cast<double>(g.nsites);
                };
                rec.scalars = {{"chi_density", dens(st.chi)},
                               {"eta_density", dens(st.eta)},
                               {"xi_density", dens(st.xi)},
                               {"marks", static_cast<double>(res.marks)},
                               {"flips", static_cast<double>(res.flips)}};
                if (ri == 0) {
                    std::ofstream traj(spec.out_dir + "/trajectory.csv", std::ios::binary);
                    csvio::write_row(traj, {"t", "chi_n1", "chi_n2", "eta_n1", "eta_n2", "xi_n1",
                                            "xi_n2"});
                    for (auto& s : res.samples)
                        csvio::write_row(
                            traj, {csvio::format_double(s.t), std::to_string(s.chi[1]),
                                   std::to_string(s.chi[2]), std::to_string(s.eta[1]),
                                   std::to_string(s.eta[2]), std::to_string(s.xi[1]),
                                   std::to_string(s.xi[2])});
                }
            } else if (spec.kind == "survival_finite_seed" || spec.kind == "stationary_density" ||
                       spec.kind == "simulate") {
                SplitMix64 rng(derive_seed(rec.seed, 0xa11, 0));
                Geometry g = spec.make_geometry();
                const WindowSet ws = spec.model == ModelKind::StaverLevin
                                         ? WindowSet::TreeAndGrass
                                         : WindowSet::TreeOnly;
                Configuration c = make_init(spec, g, ws, rng);
                RunOptions opt;
                opt.sample_dt = spec.sample_dt;
                RunResult rr = run_model(spec.model, c, spec.params, spec.horizon, rec.seed, opt);
                const double dens = final_nonzero_density(rr, g);
                rec.scalars = {{"extinct", dens == 0.0 ? 1.0 : 0.0},
                               {"final_density", dens},
                               {"final_f1", static_cast<double>(c.total(1)) / g.nsites},
                               {"final_f2", static_cast<double>(c.total(2)) / g.nsites},
                               {"flips", static_cast<double>(rr.flip_count)}};
                if (spec.kind == "simulate" && ri == 0) {
                    std::ofstream traj(spec.out_dir + "/trajectory.csv", std::ios::binary);
                    csvio::write_row(traj, {"t", "n0", "n1", "n2"});
                    for (auto& s : rr.samples)
                        csvio::write_row(traj, {csvio::format_double(s.t),
                                                std::to_string(s.counts[0]),
                                                std::to_string(s.counts[1]),
                                                std::to_string(s.counts[2])});
                    std::ofstream snap(spec.out_dir + "/final.snapshot", std::ios::binary);
                    c.save(snap);
                }
            } else if (spec.kind == "recovery") {
                const Geometry g = spec.make_geometry();
                const auto rc =
                    diagnostics::recovery_constants(spec.params, g.d, spec.a0_init, spec.alpha);
                auto est = diagnostics::estimate_recovery_time(g, spec.params, rc, rc.alpha,
                                                               spec.replicas, spec.master_seed);
                const double bound =
                    std::pow(static_cast<double>(g.L), 0.5 * g.d - rc.alpha);
                rec.scalars = {{"exceed_fraction", est.exceed_fraction},
                               {"bound", bound},
                               {"ci_low", est.ci_low},
                               {"ci_high", est.ci_high},
                               {"t_limit", est.t_limit},
                               {"threshold", est.threshold},
                               {"seeded_sites", static_cast<double>(est.seeded_sites)},
                               {"theta", rc.theta},
                               {"rho", rc.rho},
                               {"a0", rc.a0}};
                const double sigma = std::sqrt(bound * (1.0 - bound) / spec.replicas);
                summary["recovery"] = {{"exceed_fraction", est.exceed_fraction},
                                       {"bound", bound},
                                       {"pass", est.exceed_fraction <= bound + 3.0 * sigma}};
            } else if (spec.kind == "brw_bounds") {
                const Geometry g = spec.make_geometry();
                auto rep = diagnostics::simulate_brw_max(g, spec.params, spec.brw_t,
                                                         spec.replicas, spec.master_seed,
                                                         spec.brw_m);
                rec.scalars = {{"empirical_tail", rep.empirical_tail},
                               {"bound", rep.bound},
                               {"threshold", rep.threshold},
                               {"cosh_const", rep.cosh_const},
                               {"disp_mean_1", rep.disp_mean[0]},
                               {"disp_se_1", rep.disp_se[0]},
                               {"jumps", static_cast<double>(rep.jumps)}};
            } else if (spec.kind == "moving_particles") {
                const Geometry g = spec.make_geometry();
                std::array<int, 3> v{0, 0, 0};
                if (spec.moving_axis >= 1 && spec.moving_axis <= g.d)
                    v[spec.moving_axis - 1] = 1;
                const int h00 = spec.moving_h00 > 0
                                    ? spec.moving_h00
                                    : static_cast<int>(g.box_volume);
                auto tr = diagnostics::moving_particle_trial(g, spec.params, v, h00, rec.seed,
                                                             spec.moving_delta);
                rec.scalars = {{"h00", static_cast<double>(tr.h00)},
                               {"g0", static_cast<double>(tr.g0)},
                               {"s", static_cast<double>(tr.s_count)},
                               {"hv1", static_cast<double>(tr.hv1)},
                               {"success", tr.success ? 1.0 : 0.0}};
            } else if (spec.kind == "ide_front") {
                auto c = ide::front_constants(spec.params, spec.kappa, spec.d);
                ide::GridSpec gs;
                gs.h = spec.ide_h > 0 ? spec.ide_h : c.eps_profile / 4.0;
                gs.half_width = spec.ide_half_width > 0
                                    ? spec.ide_half_width
                                    : c.m_radius + c.kappa + 1.0 + spec.ide_t_end;
                gs.kappa = spec.kappa;
                ide::Field f = ide::build_seed_profiles(c, gs);
                const double dt = spec.ide_dt > 0
                                      ? spec.ide_dt
                                      : 0.05 / (spec.params.beta + spec.params.mu +
                                                spec.params.nu + spec.params.omega.max());
                const double level =
                    spec.ide_level > 0 && spec.ide_level < c.t0 ? spec.ide_level : c.t0 / 2;
                auto track =
                    ide::run_front(f, spec.params, dt, spec.ide_t_end, spec.ide_sample, level);
                rec.scalars = {{"slope", track.slope},
                               {"radius_start", track.radii.front()},
                               {"radius_end", track.radii.back()},
                               {"level", level}};
                std::ofstream ff(spec.out_dir + "/final.field", std::ios::binary);
                ide::save_field(f, ff);
                std::ofstream fc(spec.out_dir + "/final_slice.csv", std::ios::binary);
                ide::write_csv_slice(f, fc);
                json radii = json::array();
                for (std::size_t i = 0; i < track.times.size(); ++i)
                    radii.push_back({{"t", track.times[i]}, {"r", track.radii[i]}});
                summary["front"] = {{"slope", track.slope}, {"track", radii}};
            } else if (spec.kind == "front_verify") {
                auto c = ide::front_constants(spec.params, spec.kappa, spec.d);
                ide::GridSpec gs;
                gs.h = spec.ide_h > 0 ? spec.ide_h : c.eps_profile / 8.0;
                gs.half_width = spec.ide_half_width > 0 ? spec.ide_half_width
                                                        : c.m_radius + c.kappa + 1.5;
                gs.kappa = spec.kappa;
                ide::Field f = ide::build_seed_profiles(c, gs);
                auto chk = ide::verify_seed_growth(f, c, spec.params);
                rec.scalars = {{"min_deriv_s", chk.min_deriv_s},
                               {"min_deriv_t", chk.min_deriv_t},
                               {"required", chk.required},
                               {"tol", chk.tol},
                               {"omega_locked", chk.omega_locked ? 1.0 : 0.0},
                               {"pass", chk.pass ? 1.0 : 0.0},
                               {"eps_profile", c.eps_profile},
                               {"eps_rate", c.eps_rate},
                               {"s0", c.s0},
                               {"t0", c.t0},
                               {"sigma0", c.sigma0},
                               {"gamma0", c.gamma0}};
                summary["front_verify"] = {{"pass", chk.pass},
                                      {"min_deriv_s", chk.min_deriv_s},
                                      {"min_deriv_t", chk.min_deriv_t},
                                      {"required", chk.required},
                                      {"tol", chk.tol}};
            } else if (spec.kind == "diagnostics_suite") {
                const Geometry g = spec.make_geometry();
                const auto rc =
                    diagnostics::recovery_constants(spec.params, g.d, spec.a0_init, spec.alpha);
                SplitMix64 rng(derive_seed(spec.master_seed, 0xd1a6, 0));
                int violations = 0, mismatches = 0, bound_breaks = 0;
                for (int i = 0; i < spec.diag_configs; ++i) {
                    auto xi = diagnostics::sample_low_density(g, rc.a0, 40, rng);
                    const double mu = diagnostics::infinitesimal_mean_q(xi, rc, spec.params);
                    const double mu_slow =
                        diagnostics::infinitesimal_mean_q_slow(xi, rc, spec.params);
                    if (mu != mu_slow) ++mismatches;
                    const auto q = diagnostics::q_functional(xi, rc.lambda_for(g.L), {rc.theta},
                                                             diagnostics::QPrefactor::LambdaPowD);
                    if (mu < rc.rho * q.value) ++violations;
                    if (!q.within_bound) ++bound_breaks;
                }
                // extinction-side coefficients at the configured parameters
                RateParams pe;
                pe.beta = spec.ext_beta;
                pe.mu = spec.ext_mu;
                pe.nu = spec.ext_nu;
                pe.omega = GrowthRate::constant(spec.ext_omega);
                pe.validate();
                Geometry ge = g;
                Configuration probe(ge, WindowSet::TreeOnly);
                probe.apply_flip(0, 2);
                const double lam_ext =
                    std::log((0.5 * (pe.beta / pe.nu + (pe.mu + pe.omega.max()) / pe.omega.max())) *
                             pe.nu / pe.beta) /
                    (2.0 * ge.L);
                auto ext = diagnostics::extinction_functionals(probe, pe, lam_ext);
                // compensated-functional residuals
                std::vector<double> residuals;
                for (int r = 0; r < spec.dynkin_replicas; ++r) {
                    SplitMix64 rng_r(derive_seed(spec.master_seed, 0xd7, r));
                    auto xi = diagnostics::sample_low_density(g, rc.a0, 40, rng_r);
                    auto dyn = diagnostics::dynkin_residual(xi, spec.params, rc, spec.dynkin_t,
                                                            derive_seed(spec.master_seed, 2, r));
                    residuals.push_back(dyn.m_t);
                }
                auto mom = stats::moments(residuals);
                double second = 0.0;
                for (double r : residuals) second += r * r;
                second /= std::max<std::size_t>(residuals.size(), 1);
                const double c_fit = second * std::pow(static_cast<double>(g.L), g.d) /
                                     spec.dynkin_t;
                rec.scalars = {{"theta", rc.theta},
                               {"a0", rc.a0},
                               {"rho", rc.rho},
                               {"eps0", rc.eps0},
                               {"t0", rc.t0},
                               {"drift_violations", static_cast<double>(violations)},
                               {"fast_slow_mismatch", static_cast<double>(mismatches)},
                               {"q_bound_breaks", static_cast<double>(bound_breaks)},
                               {"ext_coeff1", ext.coeff1},
                               {"ext_coeff2", ext.coeff2},
                               {"dynkin_mean", mom.mean},
                               {"dynkin_se", mom.se},
                               {"dynkin_c_fit", c_fit}};
                summary["diagnostics"] = {{"drift_violations", violations},
                                          {"fast_slow_mismatch", mismatches},
                                          {"q_bound_breaks", bound_breaks},
                                          {"dynkin_mean", mom.mean},
                                          {"dynkin_se", mom.se},
                                          {"dynkin_c_fit", c_fit}};
                std::ofstream rep(spec.out_dir + "/report.txt", std::ios::binary);
                rep << "CONST theta " << rc.theta << "\nCONST a0 " << rc.a0 << "\nCONST rho "
                    << rc.rho << "\nCONST eps0 " << rc.eps0 << "\nCONST t0 " << rc.t0
                    << "\nCHECK lemma32_drift pass=" << (violations == 0)
                    << " violations=" << violations << " n=" << spec.diag_configs
                    << "\nCHECK fast_slow_equal pass=" << (mismatches == 0)
                    << "\nCHECK q_upper_bound pass=" << (bound_breaks == 0)
                    << "\nCHECK ext_coefficients pass="
                    << (ext.coeff1 <= 0.0 && ext.coeff2 <= 0.0) << " c1=" << ext.coeff1
                    << " c2=" << ext.coeff2 << "\nSTAT dynkin_mean " << mom.mean
                    << "\nSTAT dynkin_se " << mom.se << "\nSTAT dynkin_c_fit " << c_fit << "\n";
            }
        } catch (const std::exception& e) {
            rec.failed = true;
            rec.error = e.what();
        }
        rec.wall_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - t_start)
                          .count();
        sink.push(spec, rec);
        records[static_cast<std::size_t>(idx)] = std::move(rec);
    };

    parallel_for(n_tasks, spec.threads, task);

    // sweep aggregates
    if (spec.kind == "phase_sweep") {
        std::vector<std::vector<double>> frac(
            static_cast<std::size_t>(spec.axis1.n),
            std::vector<double>(static_cast<std::size_t>(spec.axis2.n), 0.0));
        std::vector<std::vector<double>> verdicts = frac;
        for (const auto& r : records) {
            if (r.failed) continue;
            const int gi = r.grid_index;
            const auto i1 = static_cast<std::size_t>(gi / spec.axis2.n);
            const auto i2 = static_cast<std::size_t>(gi % spec.axis2.n);
            for (auto& [k, v] : r.scalars) {
                if (k == "survived") frac[i1][i2] += v / spec.replicas;
                if (k == "unstable") verdicts[i1][i2] = v;
            }
        }
        std::ofstream mf(spec.out_dir + "/survival_matrix.txt", std::ios::binary);
        csvio::write_matrix(mf, frac);
        std::ofstream vf(spec.out_dir + "/verdict_matrix.txt", std::ios::binary);
        csvio::write_matrix(vf, verdicts);
        std::ofstream svg(spec.out_dir + "/survival_heatmap.svg", std::ios::binary);
        csvio::write_svg_heatmap(svg, frac, "empirical survival fraction");
    }
    if (spec.kind == "moving_particles") {
        // histograms for the two laws
        int h00 = 0;
        for (auto& r : records)
            if (!r.failed)
                for (auto& [k, v] : r.scalars)
                    if (k == "h00") h00 = std::max(h00, static_cast<int>(v));
        const Geometry g = spec.make_geometry();
        std::vector<long> g0_hist(static_cast<std::size_t>(h00) + 1, 0);
        std::map<int, std::vector<long>> s_hist;  // stratified by g0
        std::vector<double> ratios;
        for (auto& r : records) {
            if (r.failed) continue;
            int g0 = 0, s = 0, hv1 = 0;
            for (auto& [k, v] : r.scalars) {
                if (k == "g0") g0 = static_cast<int>(v);
                if (k == "s") s = static_cast<int>(v);
                if (k == "hv1") hv1 = static_cast<int>(v);
            }
            ++g0_hist[static_cast<std::size_t>(g0)];
            auto& hs = s_hist[g0];
            if (hs.empty()) hs.assign(static_cast<std::size_t>(g.box_volume) + 1, 0);
            ++hs[static_cast<std::size_t>(s)];
            ratios.push_back(h00 > 0 ? static_cast<double>(hv1) / h00 : 0.0);
        }
        const double w = spec.params.omega.min();
        const double p_g0 = std::exp(-spec.params.mu) * (1.0 - std::exp(-w / 2.0));
        auto gof_g0 = stats::binomial_gof(g0_hist, h00, p_g0);
        json strata = json::array();
        int tested = 0;
        for (auto& [g0, hist] : s_hist) {
            long n_str = 0;
            for (long c : hist) n_str += c;
            if (n_str < 200) continue;
            ++tested;
            const double p_s =
                std::exp(-spec.params.mu) *
                (1.0 - std::exp(-spec.params.beta * g0 /
                                (2.0 * static_cast<double>(g.window_volume_L))));
            auto gof = stats::binomial_gof(hist, static_cast<int>(g.box_volume), p_s);
            strata.push_back({{"g0", g0},
                              {"n", n_str},
                              {"stat", gof.stat},
                              {"dof", gof.dof},
                              {"p_value", gof.p_value}});
        }
        std::sort(ratios.begin(), ratios.end());
        const double delta99 =
            ratios.empty() ? 0.0
                           : ratios[static_cast<std::size_t>(0.01 * (ratios.size() - 1))];
        summary["moving_particles"] = {{"gof_g0_p", gof_g0.p_value},
                                       {"gof_g0_stat", gof_g0.stat},
                                       {"strata", strata},
                                       {"strata_tested", tested},
                                       {"empirical_delta_99", delta99}};
    }

    int failures = 0;
    for (auto& r : records) failures += r.failed ? 1 : 0;
    const std::string csv_path = spec.out_dir + "/results.csv";
    write_results_csv(csv_path, records);

    json manifest;
    manifest["version"] = version_string();
    manifest["kind"] = spec.kind;
    manifest["config_fnv1a"] = fnv1a(spec.raw_text);
    manifest["master_seed"] = spec.master_seed;
    manifest["replicas"] = spec.replicas;
    manifest["horizon"] = spec.horizon;
    manifest["records"] = n_tasks;
    manifest["failures"] = failures;
    manifest["threads_requested"] = spec.threads;
    if (!summary.empty()) manifest["summary"] = summary;
    std::ofstream mout(spec.out_dir + "/manifest.json", std::ios::binary);
    mout << manifest.dump(2) << '\n';

    ExperimentOutcome oc;
    oc.exit_code = failures > 0 ? 3 : 0;
    oc.records = n_tasks;
    oc.failures = failures;
    oc.results_csv = csv_path;
    if (failures > 0)
        log << "partial failure: " << failures << " of " << n_tasks << " tasks failed\n";
    else
        log << "completed " << n_tasks << " tasks\n";
    return oc;
}

}  // namespace savanna::experiment
