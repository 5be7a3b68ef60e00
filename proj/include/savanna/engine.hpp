#pragma once

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include "savanna/configuration.hpp"
#include "savanna/schedule.hpp"

namespace savanna {

enum class ModelKind {
    StaverLevin,  // growth rate depends on the local grass fraction; all arrows act
    Krone,        // constant growth at omega_min; all arrows act
    Truncated     // constant growth at omega_min; only solid (box-range) arrows act
};

struct CountsSample {
    double t = 0.0;
    std::array<std::int64_t, 3> counts{0, 0, 0};
};

struct BoxCrossing {
    double t = 0.0;
    Site box = 0;
};

struct FlipRecord {
    double t = 0.0;
    Site site = 0;
    std::uint8_t from = 0, to = 0;
};

struct RunOptions {
    double sample_dt = 0.0;           // 0: record only t=0 and the end
    double box_crossing_frac = -1.0;  // >=0: log upward crossings of n1+n2 >= frac*|box|
    bool stop_at_first_crossing = false;
    bool stop_when_empty = true;
    bool record_flips = false;
    std::int64_t max_flips = -1;
    // called with the event time just before each real flip is applied
    std::function<void(double)> before_flip;
};

struct RunResult {
    std::vector<CountsSample> samples;
    std::vector<BoxCrossing> crossings;
    std::vector<FlipRecord> flips;
    double final_time = 0.0;
    std::int64_t flip_count = 0;
    std::int64_t proposals = 0;  // includes thinned (virtual) events
};

// Direct continuous-time simulation. Death and growth channels fire at their
// exact aggregate rates; births are generated at the emitter bound beta per
// tree and thinned onto vacant targets, which reproduces the generator's
// birth rate beta * N2(window) / (2L+1)^d at every vacant site.
RunResult run_model(ModelKind kind, Configuration& c, const RateParams& p, double horizon,
                    std::uint64_t seed, const RunOptions& opt = {});

// Exact generator of a configuration: every possible single-site transition
// and its rate. Reference for distributional tests; O(sites * window).
struct Transition {
    Site site;
    int to;
    double rate;
};
std::vector<Transition> enumerate_transitions(ModelKind kind, const Configuration& c,
                                              const RateParams& p);

// --- schedule-driven paths (shared randomness) ---

struct CoupledState {
    Configuration chi;  // full model
    Configuration eta;  // constant-growth comparison
    Configuration xi;   // truncated comparison
};

struct CoupledSample {
    double t = 0.0;
    std::array<std::int64_t, 3> chi{0, 0, 0};
    std::array<std::int64_t, 3> eta{0, 0, 0};
    std::array<std::int64_t, 3> xi{0, 0, 0};
};

struct CoupledResult {
    std::vector<CoupledSample> samples;
    std::int64_t marks = 0;
    std::int64_t flips = 0;
};

using MarkLogger = std::function<void(const Mark&, const std::array<int, 3>& pre,
                                      const std::array<int, 3>& post)>;

// Run the three processes on one schedule. Requires chi >= eta >= xi at t=0
// and asserts the domination after every mark (CouplingViolation on failure
// - that would be an engine bug, not bad data). State is advanced in place.
CoupledResult run_coupled(EventSchedule& sched, CoupledState& state, double sample_dt = 0.0,
                          const MarkLogger& log = nullptr);

// Run a single process on a schedule. birth_thinning in (0,1] scales the
// effective birth rate to beta*birth_thinning using each arrow's variate,
// which couples runs at different beta monotonically.
RunResult run_on_schedule(ModelKind kind, EventSchedule& sched, Configuration& c,
                          double sample_dt = 0.0, double birth_thinning = 1.0);

// Pointwise configuration order chi >= eta in the state order 0 < 1 < 2.
bool dominates(const Configuration& a, const Configuration& b);

}  // namespace savanna
