#pragma once

#include "savanna/errors.hpp"

namespace savanna {

enum class GrowthKind { Constant, Step };

// Sapling-to-tree growth rate as a function of the local grass fraction.
// The step form models fire feedback: a fast rate omega0 while grass is
// scarce, dropping to omega1 once the grass fraction reaches 1 - delta0.
struct GrowthRate {
    GrowthKind kind = GrowthKind::Constant;
    double omega0 = 1.0;  // Constant: the rate. Step: low-grass rate.
    double omega1 = 1.0;  // Step only: high-grass rate.
    double delta0 = 0.0;  // Step only: threshold is at grass fraction 1 - delta0.

    static GrowthRate constant(double w) { return {GrowthKind::Constant, w, w, 0.0}; }
    static GrowthRate step(double w0, double w1, double d0) {
        return {GrowthKind::Step, w0, w1, d0};
    }

    double at(double grass_fraction) const {
        if (kind == GrowthKind::Constant) return omega0;
        return grass_fraction < 1.0 - delta0 ? omega0 : omega1;
    }

    // Extremes over grass fraction; the step form is nonincreasing in grass.
    double min() const { return kind == GrowthKind::Constant ? omega0 : omega1; }
    double max() const { return omega0; }
};

struct RateParams {
    double beta = 1.0;  // tree birth rate
    double mu = 1.0;    // sapling death rate
    double nu = 1.0;    // tree death rate, mu >= nu
    GrowthRate omega;

    // Degenerate zero rates are admitted (pure-death and no-growth reductions
    // are useful checks); operations that divide by a rate guard locally.
    void validate() const {
        if (!(beta >= 0.0)) throw RateInvalid("beta must be >= 0");
        if (!(mu >= 0.0)) throw RateInvalid("mu must be >= 0");
        if (!(nu >= 0.0)) throw RateInvalid("nu must be >= 0");
        if (mu < nu) throw RateInvalid("mu >= nu required");
        if (omega.kind == GrowthKind::Step) {
            if (!(omega.omega0 > omega.omega1)) throw RateInvalid("step growth needs omega0 > omega1");
            if (!(omega.omega1 >= 0.0)) throw RateInvalid("omega1 must be >= 0");
            if (!(omega.delta0 > 0.0 && omega.delta0 < 1.0))
                throw RateInvalid("delta0 must lie in (0,1)");
        } else {
            if (!(omega.omega0 >= 0.0)) throw RateInvalid("omega must be >= 0");
        }
    }
};

}  // namespace savanna
