#include "savanna/schedule.hpp"

namespace savanna {

EventSchedule::EventSchedule(Geometry g, RateParams p, double horizon, std::uint64_t seed)
    : geom_(std::move(g)), params_(p), horizon_(horizon), seed_(seed) {
    params_.validate();
    if (params_.mu < params_.nu) throw RateInvalid("mu >= nu required");
    if (!(horizon_ > 0.0)) throw std::invalid_argument("horizon must be > 0");
    rate_[0] = params_.nu;
    rate_[1] = params_.mu - params_.nu;
    rate_[2] = params_.omega.min();
    rate_[3] = params_.omega.max() - params_.omega.min();
    rate_[4] = params_.beta;
    seed_streams();
}

void EventSchedule::reset() { seed_streams(); }

void EventSchedule::seed_streams() {
    heap_ = {};
    const auto n = static_cast<std::size_t>(geom_.nsites);
    for (int s = 0; s < 5; ++s) {
        rng_[s].clear();
        next_u_[s].clear();
        if (rate_[s] <= 0.0) continue;
        rng_[s].reserve(n);
        for (Site x = 0; x < geom_.nsites; ++x)
            rng_[s].emplace_back(derive_seed(seed_, static_cast<std::uint64_t>(x),
                                             static_cast<std::uint64_t>(s) + 7));
        if (s == 3 || s == 4) next_u_[s].assign(n, 0.0);
    }
    if (rate_[4] > 0.0) {
        next_target_.assign(n, -1);
        next_solid_.assign(n, 0);
    }
    for (int s = 0; s < 5; ++s) {
        if (rate_[s] <= 0.0) continue;
        for (Site x = 0; x < geom_.nsites; ++x) arm(s, x, 0.0);
    }
}

// Draw the next arrival for one stream at one site starting from t_prev, with
// its attachments, in a fixed order so that replays are exact. Arrivals past
// the horizon are dropped, which retires the stream.
void EventSchedule::arm(int stream, Site site, double t_prev) {
    const auto i = static_cast<std::size_t>(site);
    auto& rng = rng_[stream][i];
    const double t = t_prev + rng.exponential(rate_[stream]);
    if (stream == 3) next_u_[3][i] = rng.u01();
    if (stream == 4) {
        const std::uint64_t off = rng.below(static_cast<std::uint64_t>(geom_.window_volume_L));
        next_u_[4][i] = rng.u01();
        // decode into an offset in [-L, L]^d around the source
        const Geometry::Coords c = geom_.site_coords(site);
        std::uint64_t rem = off;
        bool outside = false;
        Geometry::Coords q{0, 0, 0};
        for (int k = geom_.d - 1; k >= 0; --k) {
            const int o = static_cast<int>(rem % (2 * geom_.L + 1)) - geom_.L;
            rem /= (2 * geom_.L + 1);
            int v = c[k] + o;
            if (geom_.boundary == Boundary::Torus) {
                v = geom_.wrap(v);
            } else if (v < 0 || v >= geom_.side) {
                outside = true;
                v = 0;
            }
            q[k] = v;
        }
        if (outside) {
            next_target_[i] = -1;
            next_solid_[i] = 0;
        } else {
            const Site y = geom_.site_index(q);
            next_target_[i] = y;
            next_solid_[i] =
                geom_.boxes_within_range(geom_.box_of_site(site), geom_.box_of_site(y)) ? 1 : 0;
        }
    }
    if (t <= horizon_) heap_.push({t, static_cast<std::uint8_t>(stream), site});
}

std::optional<Mark> EventSchedule::next() {
    if (heap_.empty()) return std::nullopt;
    const Pending top = heap_.top();
    heap_.pop();
    Mark m;
    m.time = top.t;
    m.stream = static_cast<StreamKind>(top.stream);
    m.site = top.site;
    const auto i = static_cast<std::size_t>(top.site);
    if (top.stream == 3) m.u = next_u_[3][i];
    if (top.stream == 4) {
        m.target = next_target_[i];
        m.solid = next_solid_[i] != 0;
        m.u = next_u_[4][i];
    }
    arm(top.stream, top.site, top.t);
    return m;
}

}  // namespace savanna
