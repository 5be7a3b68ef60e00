#pragma once

#include <optional>
#include <queue>
#include <vector>

#include "savanna/configuration.hpp"
#include "savanna/geometry.hpp"
#include "savanna/rates.hpp"
#include "savanna/rng.hpp"

namespace savanna {

// Per-site Poisson mark streams. One schedule drives every coupled process
// on shared randomness.
enum class StreamKind : std::uint8_t {
    Death12 = 0,      // rate nu: kills state 1 or 2
    Death1 = 1,       // rate mu - nu: kills state 1 only
    Growth = 2,       // rate omega_min: grows 1 -> 2 everywhere
    GrowthExtra = 3,  // rate omega_max - omega_min: conditional growth, carries a variate
    Arrow = 4,        // rate beta per source: birth arrow to a uniform window target
};

struct Mark {
    double time = 0.0;
    StreamKind stream = StreamKind::Death12;
    Site site = 0;
    Site target = -1;   // Arrow only; -1 when the target falls outside a frozen domain
    bool solid = false; // Arrow only: source and target boxes within truncated range
    double u = 0.0;     // GrowthExtra acceptance variate; Arrow thinning variate
};

// Replayable realization of the mark streams up to a horizon. Marks come out
// in (time, stream, site) lexicographic order; the sequence is a
// deterministic function of (geometry, params, horizon, seed). Arrivals are
// generated lazily, one pending arrival per active stream and site.
class EventSchedule {
public:
    EventSchedule(Geometry g, RateParams p, double horizon, std::uint64_t seed);

    std::optional<Mark> next();
    void reset();

    const Geometry& geometry() const { return geom_; }
    const RateParams& params() const { return params_; }
    double horizon() const { return horizon_; }
    std::uint64_t seed() const { return seed_; }
    double stream_rate(StreamKind k) const { return rate_[static_cast<int>(k)]; }

private:
    struct Pending {
        double t;
        std::uint8_t stream;
        Site site;
        bool operator>(const Pending& o) const {
            if (t != o.t) return t > o.t;
            if (stream != o.stream) return stream > o.stream;
            return site > o.site;
        }
    };

    void seed_streams();
    void arm(int stream, Site site, double t_prev);

    Geometry geom_;
    RateParams params_;
    double horizon_;
    std::uint64_t seed_;
    double rate_[5] = {0, 0, 0, 0, 0};

    // per active stream: rng and the attachments of the pending arrival
    std::vector<SplitMix64> rng_[5];
    std::vector<Site> next_target_;   // Arrow
    std::vector<std::uint8_t> next_solid_;
    std::vector<double> next_u_[5];
    std::priority_queue<Pending, std::vector<Pending>, std::greater<Pending>> heap_;
};

}  // namespace savanna
