#include "savanna/geometry.hpp"

#include <cmath>
#include <cstdlib>

namespace savanna {

namespace {

Site ipow(Site base, int exp) {
    Site r = 1;
    for (int i = 0; i < exp; ++i) r *= base;
    return r;
}

}  // namespace

Geometry::Geometry(int d_, int L_, double kappa_, double epsilon0_, int side_, Boundary b)
    : d(d_), L(L_), kappa(kappa_), epsilon0(epsilon0_), side(side_), boundary(b) {
    if (d < 1 || d > 3) throw std::invalid_argument("d must be 1, 2 or 3");
    if (L < 1) throw std::invalid_argument("L must be >= 1");
    if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be > 0");
    if (!(epsilon0 > 0.0)) throw std::invalid_argument("epsilon0 must be > 0");
    ell = static_cast<int>(std::floor(epsilon0 * L + 1e-12));
    if (ell < 1) throw std::invalid_argument("epsilon0 * L must be >= 1");
    if (2 * ell > side) throw std::invalid_argument("small boxes wider than the domain");
    if (side % (2 * ell) != 0) throw std::invalid_argument("side must be divisible by 2*ell");
    kradius = static_cast<int>(std::floor(kappa * L + 1e-12));
    if (boundary == Boundary::Torus && 2 * L + 1 > side)
        throw std::invalid_argument("interaction window wider than the period; enlarge side");
    if (boundary == Boundary::Torus && 2 * kradius + 1 > side)
        throw std::invalid_argument("grass window wider than the period; enlarge side");

    nsites = ipow(side, d);
    boxes_per_dim = side / (2 * ell);
    nboxes = ipow(boxes_per_dim, d);
    box_volume = ipow(2 * ell, d);
    window_volume_L = ipow(2 * Site(L) + 1, d);
    window_volume_k = ipow(2 * Site(kradius) + 1, d);

    // Largest |delta| with 2*ell*delta + 2*ell - 1 <= L. On the torus the
    // neighborhood is read off the periodic lift, so box separations use
    // plain (unwrapped) distances here as well.
    box_reach = 0;
    while (2 * ell * (box_reach + 1) + 2 * ell - 1 <= L) ++box_reach;
}

int Geometry::sup_norm_from_origin(Site s) const {
    const Coords c = site_coords(s);
    int r = 0;
    for (int k = 0; k < d; ++k) {
        int v = boundary == Boundary::Torus ? std::abs(centered(c[k])) : std::abs(c[k]);
        r = std::max(r, v);
    }
    return r;
}

Site Geometry::box_of_site(Site s) const {
    const Coords c = site_coords(s);
    Coords bc{0, 0, 0};
    for (int k = 0; k < d; ++k) bc[k] = box_coord(c[k]);
    return box_index(bc);
}

int Geometry::box_axis_sup_distance(int delta) const {
    return 2 * ell * std::abs(delta) + 2 * ell - 1;
}

bool Geometry::boxes_within_range(Site box_a, Site box_b) const {
    const Coords a = box_coords(box_a);
    const Coords b = box_coords(box_b);
    for (int k = 0; k < d; ++k) {
        int dlt = std::abs(a[k] - b[k]);
        // nearest periodic lift; never ambiguous because the reach is well
        // below half the box grid
        if (boundary == Boundary::Torus) dlt = std::min(dlt, boxes_per_dim - dlt);
        if (box_axis_sup_distance(dlt) > L) return false;
    }
    return true;
}

std::vector<Site> Geometry::box_sites(Site b) const {
    const Coords bc = box_coords(b);
    std::vector<Site> out;
    out.reserve(box_volume);
    Coords c{0, 0, 0};
    const int w = 2 * ell;
    for (int i = 0; i < w; ++i) {
        c[0] = bc[0] * w + i;
        if (d == 1) {
            out.push_back(site_index(c));
            continue;
        }
        for (int j = 0; j < w; ++j) {
            c[1] = bc[1] * w + j;
            if (d == 2) {
                out.push_back(site_index(c));
                continue;
            }
            for (int k = 0; k < w; ++k) {
                c[2] = bc[2] * w + k;
                out.push_back(site_index(c));
            }
        }
    }
    return out;
}

std::vector<Site> Geometry::truncated_neighborhood(Site x) const {
    std::vector<Site> out;
    for_neighbor_boxes(box_of_site(x), [&](Site b) {
        auto sites = box_sites(b);
        out.insert(out.end(), sites.begin(), sites.end());
    });
    return out;
}

}  // namespace savanna
