#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "savanna/errors.hpp"

namespace savanna {

using Site = std::int64_t;

enum class Boundary : std::uint8_t {
    Torus = 0,       // periodic wrap in every axis
    GrassFrozen = 1  // sites outside the domain are permanently grass (state 0)
};

// Finite lattice {0..side-1}^d carved into small boxes of side 2*ell,
// ell = floor(epsilon0 * L). Boxes are aligned to the origin, i.e. box b
// covers [2*ell*b, 2*ell*(b+1)) per axis; this is the usual centered tiling
// translated by a fixed offset, which leaves every law and every distance
// bound unchanged while keeping boxes from straddling the wrap seam.
//
// Two small boxes are interaction neighbors when every pair of their sites is
// within sup-norm distance L. The truncated neighborhood N(x) is the union of
// the neighbor boxes of x's box; it satisfies
//   B_x((1-4*epsilon0)L)  is a subset of  N(x)  is a subset of  B_x(L).
struct Geometry {
    int d = 1;
    int L = 1;
    double kappa = 1.0;
    double epsilon0 = 0.1;
    int side = 8;
    Boundary boundary = Boundary::Torus;

    // derived
    int ell = 0;                    // small-box half scale, floor(epsilon0*L)
    int kradius = 0;                // grass window radius, floor(kappa*L)
    Site nsites = 0;                // side^d
    int boxes_per_dim = 0;
    Site nboxes = 0;
    Site box_volume = 0;            // (2*ell)^d
    Site window_volume_L = 0;       // (2L+1)^d
    Site window_volume_k = 0;       // (2*kradius+1)^d
    int box_reach = 0;              // neighbor boxes per axis: |delta| <= box_reach

    Geometry() = default;
    Geometry(int d_, int L_, double kappa_, double epsilon0_, int side_,
             Boundary b = Boundary::Torus);

    using Coords = std::array<int, 3>;

    Site site_index(const Coords& c) const {
        Site idx = c[0];
        for (int k = 1; k < d; ++k) idx = idx * side + c[k];
        return idx;
    }
    Coords site_coords(Site idx) const {
        Coords c{0, 0, 0};
        for (int k = d - 1; k >= 0; --k) {
            c[k] = static_cast<int>(idx % side);
            idx /= side;
        }
        return c;
    }

    int wrap(int c) const {
        c %= side;
        return c < 0 ? c + side : c;
    }

    // Coordinate relative to the origin, folded to (-side/2, side/2].
    int centered(int c) const { return c > side / 2 ? c - side : c; }

    // Sup-norm distance of a site from the origin site, respecting boundary.
    int sup_norm_from_origin(Site s) const;

    int box_coord(int c) const { return c / (2 * ell); }
    Site box_of_site(Site s) const;
    Site box_index(const Coords& bc) const {
        Site idx = bc[0];
        for (int k = 1; k < d; ++k) idx = idx * boxes_per_dim + bc[k];
        return idx;
    }
    Coords box_coords(Site b) const {
        Coords c{0, 0, 0};
        for (int k = d - 1; k >= 0; --k) {
            c[k] = static_cast<int>(b % boxes_per_dim);
            b /= boxes_per_dim;
        }
        return c;
    }

    // Largest sup-norm site distance between two boxes separated by delta
    // box indices along one axis (already wrapped for the torus).
    int box_axis_sup_distance(int delta) const;

    // True when the boxes of the two sites are interaction neighbors.
    bool boxes_within_range(Site box_a, Site box_b) const;

    // Every site whose box is a neighbor of x's box. Depends only on the box
    // of x. Intended for tests and small instances; the engines use box
    // counts instead.
    std::vector<Site> truncated_neighborhood(Site x) const;

    std::vector<Site> box_sites(Site b) const;

    // Visit every in-domain site of x + [-radius, radius]^d. The callback
    // receives the site index. Torus wraps, GrassFrozen clips.
    template <typename F>
    void for_window(Site x, int radius, F&& fn) const;

    // Visit neighbor boxes of a box (the product range |delta| <= box_reach).
    template <typename F>
    void for_neighbor_boxes(Site b, F&& fn) const;
};

template <typename F>
void Geometry::for_window(Site x, int radius, F&& fn) const {
    const Coords c = site_coords(x);
    const bool torus = boundary == Boundary::Torus;
    int lo[3] = {0, 0, 0}, hi[3] = {0, 0, 0};
    for (int k = 0; k < d; ++k) {
        lo[k] = c[k] - radius;
        hi[k] = c[k] + radius;
        if (!torus) {
            if (lo[k] < 0) lo[k] = 0;
            if (hi[k] >= side) hi[k] = side - 1;
        }
    }
    Coords q{0, 0, 0};
    if (d == 1) {
        for (int i = lo[0]; i <= hi[0]; ++i) {
            q[0] = torus ? wrap(i) : i;
            fn(site_index(q));
        }
        return;
    }
    if (d == 2) {
        for (int i = lo[0]; i <= hi[0]; ++i) {
            q[0] = torus ? wrap(i) : i;
            for (int j = lo[1]; j <= hi[1]; ++j) {
                q[1] = torus ? wrap(j) : j;
                fn(site_index(q));
            }
        }
        return;
    }
    for (int i = lo[0]; i <= hi[0]; ++i) {
        q[0] = torus ? wrap(i) : i;
        for (int j = lo[1]; j <= hi[1]; ++j) {
            q[1] = torus ? wrap(j) : j;
            for (int k = lo[2]; k <= hi[2]; ++k) {
                q[2] = torus ? wrap(k) : k;
                fn(site_index(q));
            }
        }
    }
}

template <typename F>
void Geometry::for_neighbor_boxes(Site b, F&& fn) const {
    const Coords bc = box_coords(b);
    const bool torus = boundary == Boundary::Torus;
    const int nb = boxes_per_dim;
    auto fold = [&](int v) {
        v %= nb;
        return v < 0 ? v + nb : v;
    };
    Coords q{0, 0, 0};
    for (int i = -box_reach; i <= box_reach; ++i) {
        const int bi = bc[0] + i;
        if (!torus && (bi < 0 || bi >= nb)) continue;
        q[0] = torus ? fold(bi) : bi;
        if (d == 1) {
            fn(box_index(q));
            continue;
        }
        for (int j = -box_reach; j <= box_reach; ++j) {
            const int bj = bc[1] + j;
            if (!torus && (bj < 0 || bj >= nb)) continue;
            q[1] = torus ? fold(bj) : bj;
            if (d == 2) {
                fn(box_index(q));
                continue;
            }
            for (int k = -box_reach; k <= box_reach; ++k) {
                const int bk = bc[2] + k;
                if (!torus && (bk < 0 || bk >= nb)) continue;
                q[2] = torus ? fold(bk) : bk;
                fn(box_index(q));
            }
        }
    }
}

}  // namespace savanna
