#pragma once

#include <utility>
#include <vector>

#include "savanna/configuration.hpp"
#include "savanna/rates.hpp"
#include "savanna/rng.hpp"

namespace savanna::boxprocess {

// Markov chain on per-box (n1, n2) tallies induced by the truncated process.
// A verification and symmetry tool, not a production simulator.
struct BoxChainState {
    std::vector<std::pair<int, int>> counts;  // per box

    std::int64_t total_n1() const;
    std::int64_t total_n2() const;
};

BoxChainState lump(const Configuration& xi);

struct BoxTransition {
    Site box = 0;
    int dn1 = 0, dn2 = 0;
    double rate = 0.0;
};

// The four transition families per box: sapling death (-1,0) at mu*n1, tree
// death (0,-1) at nu*n2, growth (-1,+1) at omega*n1, and birth (+1,0) at
// n0 * beta * sum of neighbor-box n2 / (2L+1)^d. Growth uses the constant
// (minimum) rate; the truncated process carries no grass feedback.
std::vector<BoxTransition> box_chain_rates(const BoxChainState& z, const Geometry& g,
                                           const RateParams& p);

struct BoxChainSample {
    double t = 0.0;
    std::int64_t n1 = 0, n2 = 0;
};

struct BoxChainResult {
    std::vector<BoxChainSample> samples;
    BoxChainState final_state;
    std::int64_t events = 0;
};

BoxChainResult simulate_box_chain(BoxChainState z0, const Geometry& g, const RateParams& p,
                                  double horizon, std::uint64_t seed, double sample_dt = 0.0);

// Reflect a state through the box-grid origin, axis by axis.
BoxChainState reflect(const BoxChainState& z, const Geometry& g, int axis);

}  // namespace savanna::boxprocess
