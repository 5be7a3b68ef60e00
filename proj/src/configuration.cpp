#include "savanna/configuration.hpp"

#include <cstring>
#include <istream>
#include <ostream>

namespace savanna {

Configuration::Configuration(Geometry g, WindowSet windows)
    : geom_(std::move(g)), windows_(windows) {
    const auto n = static_cast<std::size_t>(geom_.nsites);
    state_.assign(n, 0);
    window2_.assign(n, 0);
    if (windows_ == WindowSet::TreeAndGrass)
        window0k_.assign(n, static_cast<std::int32_t>(geom_.window_volume_k));
    box_n1_.assign(static_cast<std::size_t>(geom_.nboxes), 0);
    box_n2_.assign(static_cast<std::size_t>(geom_.nboxes), 0);
    totals_[0] = geom_.nsites;
}

int Configuration::window0k(Site x) const {
    if (windows_ != WindowSet::TreeAndGrass)
        throw std::logic_error("grass window not maintained for this configuration");
    return window0k_[static_cast<std::size_t>(x)];
}

void Configuration::apply_flip(Site x, int new_state) {
    const auto i = static_cast<std::size_t>(x);
    const int old_state = state_[i];
    if (old_state == new_state) throw std::invalid_argument("apply_flip requires a state change");
    state_[i] = static_cast<std::uint8_t>(new_state);

    const int d2 = (new_state == 2) - (old_state == 2);
    if (d2 != 0) {
        geom_.for_window(x, geom_.L,
                         [&](Site y) { window2_[static_cast<std::size_t>(y)] += d2; });
    }
    if (windows_ == WindowSet::TreeAndGrass) {
        const int d0 = (new_state == 0) - (old_state == 0);
        if (d0 != 0) {
            geom_.for_window(x, geom_.kradius,
                             [&](Site y) { window0k_[static_cast<std::size_t>(y)] += d0; });
        }
    }

    const auto b = static_cast<std::size_t>(geom_.box_of_site(x));
    if (old_state == 1) --box_n1_[b];
    if (old_state == 2) --box_n2_[b];
    if (new_state == 1) ++box_n1_[b];
    if (new_state == 2) ++box_n2_[b];
    --totals_[old_state];
    ++totals_[new_state];
}

int Configuration::count_in_window(Site x, int type, int radius) const {
    int count = 0;
    int visited = 0;
    geom_.for_window(x, radius, [&](Site y) {
        ++visited;
        count += state_[static_cast<std::size_t>(y)] == type;
    });
    if (type == 0 && geom_.boundary == Boundary::GrassFrozen) {
        // clipped window: everything outside the domain is grass
        Site full = 1;
        for (int k = 0; k < geom_.d; ++k) full *= 2 * Site(radius) + 1;
        count += static_cast<int>(full - visited);
    }
    return count;
}

double Configuration::local_fraction(Site x, int type, int radius) const {
    Site volume = 1;
    for (int k = 0; k < geom_.d; ++k) volume *= 2 * Site(radius) + 1;
    if (type == 2 && radius == geom_.L)
        return static_cast<double>(window2(x)) / static_cast<double>(volume);
    if (type == 0 && radius == geom_.kradius && windows_ == WindowSet::TreeAndGrass)
        return static_cast<double>(window0k(x)) / static_cast<double>(volume);
    return static_cast<double>(count_in_window(x, type, radius)) / static_cast<double>(volume);
}

std::int64_t Configuration::n2_truncated(Site x) const {
    std::int64_t n2 = 0;
    geom_.for_neighbor_boxes(geom_.box_of_site(x),
                             [&](Site b) { n2 += box_n2_[static_cast<std::size_t>(b)]; });
    return n2;
}

bool Configuration::verify_counts() const {
    std::int64_t tot[3] = {0, 0, 0};
    for (Site x = 0; x < geom_.nsites; ++x) ++tot[state(x)];
    for (int s = 0; s < 3; ++s)
        if (tot[s] != totals_[s]) return false;
    for (Site x = 0; x < geom_.nsites; ++x) {
        if (count_in_window(x, 2, geom_.L) != window2(x)) return false;
        if (windows_ == WindowSet::TreeAndGrass &&
            count_in_window(x, 0, geom_.kradius) != window0k(x))
            return false;
    }
    for (Site b = 0; b < geom_.nboxes; ++b) {
        int n1 = 0, n2 = 0;
        for (Site y : geom_.box_sites(b)) {
            n1 += state(y) == 1;
            n2 += state(y) == 2;
        }
        auto [m1, m2] = box_counts(b);
        if (n1 != m1 || n2 != m2) return false;
    }
    return true;
}

void Configuration::rebuild_counts() {
    std::fill(window2_.begin(), window2_.end(), 0);
    if (windows_ == WindowSet::TreeAndGrass)
        std::fill(window0k_.begin(), window0k_.end(),
                  static_cast<std::int32_t>(geom_.window_volume_k));
    std::fill(box_n1_.begin(), box_n1_.end(), 0);
    std::fill(box_n2_.begin(), box_n2_.end(), 0);
    totals_[0] = totals_[1] = totals_[2] = 0;
    for (Site x = 0; x < geom_.nsites; ++x) {
        const int s = state_[static_cast<std::size_t>(x)];
        ++totals_[s];
        if (s == 2)
            geom_.for_window(x, geom_.L,
                             [&](Site y) { ++window2_[static_cast<std::size_t>(y)]; });
        if (s != 0 && windows_ == WindowSet::TreeAndGrass)
            geom_.for_window(x, geom_.kradius,
                             [&](Site y) { --window0k_[static_cast<std::size_t>(y)]; });
        const auto b = static_cast<std::size_t>(geom_.box_of_site(x));
        if (s == 1) ++box_n1_[b];
        if (s == 2) ++box_n2_[b];
    }
}

namespace {

constexpr char kMagic[4] = {'G', 'S', 'T', 'C'};

template <typename T>
void put(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& is) {
    T v;
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!is) throw IoError("truncated snapshot");
    return v;
}

}  // namespace

void Configuration::save(std::ostream& os) const {
    os.write(kMagic, 4);
    put<std::uint32_t>(os, 1);  // version
    put<std::uint8_t>(os, static_cast<std::uint8_t>(geom_.d));
    put<std::uint8_t>(os, static_cast<std::uint8_t>(geom_.boundary));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(geom_.side));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(geom_.L));
    put<double>(os, geom_.kappa);
    put<double>(os, geom_.epsilon0);
    // run-length encoding of the state vector
    Site i = 0;
    while (i < geom_.nsites) {
        const std::uint8_t s = state_[static_cast<std::size_t>(i)];
        Site j = i + 1;
        while (j < geom_.nsites && state_[static_cast<std::size_t>(j)] == s) ++j;
        put<std::uint64_t>(os, static_cast<std::uint64_t>(j - i));
        put<std::uint8_t>(os, s);
        i = j;
    }
    if (!os) throw IoError("snapshot write failed");
}

Configuration Configuration::load(std::istream& is, WindowSet windows) {
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0) throw IoError("bad snapshot magic");
    if (get<std::uint32_t>(is) != 1) throw IoError("unsupported snapshot version");
    const int d = get<std::uint8_t>(is);
    const auto boundary = static_cast<Boundary>(get<std::uint8_t>(is));
    const int side = static_cast<int>(get<std::uint32_t>(is));
    const int L = static_cast<int>(get<std::uint32_t>(is));
    const double kappa = get<double>(is);
    const double eps0 = get<double>(is);
    Configuration c(Geometry(d, L, kappa, eps0, side, boundary), windows);
    Site i = 0;
    while (i < c.geom_.nsites) {
        const auto run = static_cast<Site>(get<std::uint64_t>(is));
        const auto s = get<std::uint8_t>(is);
        if (s > 2 || run < 1 || i + run > c.geom_.nsites) throw IoError("corrupt snapshot run");
        std::fill_n(c.state_.begin() + i, run, s);
        i += run;
    }
    c.rebuild_counts();
    return c;
}

}  // namespace savanna
