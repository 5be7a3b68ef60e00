#pragma once

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "savanna/geometry.hpp"

namespace savanna {

// Which sliding windows a configuration maintains. The tree window (2's
// within range L) is always kept; the grass window (0's within range
// kappa*L) only matters when the growth rate depends on grass and costs a
// second range update per flip.
enum class WindowSet : std::uint8_t { TreeOnly = 0, TreeAndGrass = 1 };

// Lattice state in {0,1,2} with O(window) incremental maintenance of
// per-site window counts and per-box (n1, n2) tallies.
class Configuration {
public:
    explicit Configuration(Geometry g, WindowSet windows = WindowSet::TreeAndGrass);

    const Geometry& geometry() const { return geom_; }
    WindowSet windows() const { return windows_; }

    int state(Site x) const { return state_[static_cast<std::size_t>(x)]; }

    // Flip x to a different state, updating every maintained count.
    void apply_flip(Site x, int new_state);

    // Count of 2's in x + [-L, L]^d.
    int window2(Site x) const { return window2_[static_cast<std::size_t>(x)]; }
    // Count of 0's in x + [-kradius, kradius]^d (out-of-domain sites count as
    // grass under the GrassFrozen boundary). Requires TreeAndGrass.
    int window0k(Site x) const;

    // Fraction of sites of a given type in x + [-radius, radius]^d. Uses the
    // maintained counters when radius matches one of the two windows and the
    // type is covered; otherwise recounts. The denominator is always the full
    // window volume (2*radius+1)^d.
    double local_fraction(Site x, int type, int radius) const;
    int count_in_window(Site x, int type, int radius) const;  // slow path

    std::pair<int, int> box_counts(Site box) const {
        auto i = static_cast<std::size_t>(box);
        return {box_n1_[i], box_n2_[i]};
    }

    // Number of 2's in the truncated neighborhood of x, via box tallies.
    std::int64_t n2_truncated(Site x) const;

    std::int64_t total(int type) const { return totals_[type]; }
    std::int64_t nonzero() const { return totals_[1] + totals_[2]; }

    // Recount everything from scratch and compare; true when consistent.
    bool verify_counts() const;

    // Snapshot: fixed header (d, side, L, kappa, epsilon0, boundary) plus a
    // run-length encoded state vector. Round trips bit-exactly.
    void save(std::ostream& os) const;
    static Configuration load(std::istream& is, WindowSet windows = WindowSet::TreeAndGrass);

private:
    void rebuild_counts();

    Geometry geom_;
    WindowSet windows_;
    std::vector<std::uint8_t> state_;
    std::vector<std::int32_t> window2_;
    std::vector<std::int32_t> window0k_;
    std::vector<std::int32_t> box_n1_;
    std::vector<std::int32_t> box_n2_;
    std::int64_t totals_[3] = {0, 0, 0};
};

}  // namespace savanna
