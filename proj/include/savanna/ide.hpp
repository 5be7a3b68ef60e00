#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include "savanna/rates.hpp"

namespace savanna::ide {

// Space is measured in units of the interaction range, so the tree kernel has
// half-width 1 and the grass kernel half-width kappa.
struct GridSpec {
    double h = 0.05;        // node spacing
    double half_width = 8;  // domain is [-half_width, half_width]^d
    double kappa = 1.0;     // grass kernel half-width
};

// Discretized (S, T) density fields on a centered cubic grid. G = 1 - S - T
// is derived, never stored. Outside the domain everything is grass.
class Field {
public:
    Field(int d, GridSpec spec);

    int d() const { return d_; }
    double h() const { return h_; }
    double kappa() const { return kappa_; }
    int m() const { return m_; }            // nodes per side = 2m+1
    int n() const { return 2 * m_ + 1; }
    std::size_t size() const { return s.size(); }

    double coord(int i) const { return (i - m_) * h_; }
    std::size_t node(const std::array<int, 3>& c) const {
        std::size_t idx = static_cast<std::size_t>(c[0]);
        for (int k = 1; k < d_; ++k) idx = idx * static_cast<std::size_t>(n()) + c[k];
        return idx;
    }
    std::array<int, 3> coords_of(std::size_t idx) const;
    double sup_coord(std::size_t idx) const;  // sup-norm |x| of a node

    std::vector<double> s, t;

private:
    int d_;
    double h_;
    double kappa_;
    int m_;
};

// Zero-padded summed-area table; window means over clamped extents with the
// full (2r+1)^d denominator, so out-of-domain nodes contribute zero mass.
// Accumulation runs in extended precision: on constant fields of the sizes
// used here the means are exact.
class SummedAreaTable {
public:
    SummedAreaTable(const std::vector<double>& v, int d, int n);
    double window_mean(const std::array<int, 3>& center, int r) const;

private:
    long double at(int i, int j, int k) const;
    std::vector<long double> p_;
    int d_, n_;
};

// Direct-summation oracle for the table.
double window_mean_direct(const std::vector<double>& v, int d, int n,
                          const std::array<int, 3>& center, int r);

// Derived constants certifying front expansion for a step growth rate.
// sigma0 sits at half its admissible supremum and gamma0 at the midpoint of
// its interval, which keeps every downstream constant strictly positive.
struct FrontConstants {
    int d = 1;
    double kappa = 1.0;
    double delta0 = 0.0;
    double sigma0 = 0.0;   // S0 + T0
    double gamma0 = 0.0;   // S0 / T0
    double s0 = 0.0, t0 = 0.0;
    double m_radius = 4.0; // profile outer radius, max(4, 4 kappa)
    double eps_t1 = 0.0, eps_t2 = 0.0;
    double eps_profile = 0.0;  // ramp width, min(eps_t1, eps_t2)
    double eps_rate = 0.0;     // uniform derivative margin is 4*eps_rate
    // extended ledger (block-scale constants, reported only)
    double eps_pim1 = 0.0, eps_pim2 = 0.0, eps_pim3 = 0.0, eps_pim = 0.0;
    double delta_pur1 = 0.0, delta_pur = 0.0;
    double c_lip = 0.0;
    double eps_box = 0.0, t_hold = 0.0, c_gain = 0.0;
};

FrontConstants front_constants(const RateParams& p, double kappa, int d);

// Trapezoid profiles: S = s0 inside radius M - eps ramping to 0 at M, and
// T = t0 inside M - 3 eps ramping to 0 at M - 2 eps. Grid must cover
// B(0, M + kappa + 1); GridTooCoarse when h > eps_profile / 4.
Field build_seed_profiles(const FrontConstants& c, GridSpec spec);

// One explicit Euler step. Requires dt <= 0.1 / (beta + mu + nu + omega_max);
// throws InvariantBreach if a node leaves the simplex by more than 1e-9.
Field step(const Field& f, const RateParams& p, double dt);

// Time derivative fields at the current instant (no stepping).
void derivatives(const Field& f, const RateParams& p, std::vector<double>& ds,
                 std::vector<double>& dt_out);

struct GrowthCheck {
    double min_deriv_s = 0.0;
    double min_deriv_t = 0.0;
    double required = 0.0;  // 4 * eps_rate
    double tol = 0.0;       // 10 h (beta + mu + nu + omega_max)
    bool omega_locked = false;
    bool pass_s = false, pass_t = false, pass = false;
};

// Evaluate the derivative lower bounds on the closures of the supports.
GrowthCheck verify_seed_growth(const Field& f, const FrontConstants& c, const RateParams& p);

// Sup-norm radius of {T > level}; 0 when the level set is empty.
double level_radius(const Field& f, double level);

struct FrontTrack {
    std::vector<double> times;
    std::vector<double> radii;
    double slope = 0.0;  // least-squares slope over the trailing half
};

FrontTrack run_front(Field& f, const RateParams& p, double dt, double t_end, double sample_every,
                     double level);

// Snapshot: one ASCII header line, then the raw S and T grids.
void save_field(const Field& f, std::ostream& os);
Field load_field(std::istream& is);
void write_csv_slice(const Field& f, std::ostream& os);

}  // namespace savanna::ide
