// One-off pilot: extinction-time tail for the finite-seed comparison model,
// used to fix the acceptance horizon. Not part of the build by default.
#include <cstdio>

#include "savanna/engine.hpp"

using namespace savanna;

int main() {
    Geometry g(1, 2, 1.0, 0.5, 128);
    RateParams p;
    p.beta = 1.2;
    p.mu = 1.5;
    p.nu = 1.0;
    p.omega = GrowthRate::constant(1.0);
    int done_by[5] = {0, 0, 0, 0, 0};  // t <= 12.5, 25, 50, 100, 200
    double max_t = 0.0;
    const int reps = 4000;
    for (int i = 0; i < reps; ++i) {
        Configuration c(g, WindowSet::TreeOnly);
        for (Site x = 60; x < 65; ++x) c.apply_flip(x, 2);
        auto rr = run_model(ModelKind::Krone, c, p, 200.0, 1000 + i);
        const bool extinct = c.nonzero() == 0;
        if (extinct) {
            if (rr.final_time <= 12.5) ++done_by[0];
            if (rr.final_time <= 25.0) ++done_by[1];
            if (rr.final_time <= 50.0) ++done_by[2];
            if (rr.final_time <= 100.0) ++done_by[3];
            if (rr.final_time <= 200.0) ++done_by[4];
            if (rr.final_time > max_t) max_t = rr.final_time;
        }
    }
    std::printf("reps=%d  P(ext<=12.5)=%.4f  P(<=25)=%.4f  P(<=50)=%.4f  P(<=100)=%.4f  "
                "P(<=200)=%.4f  max_ext_t=%.2f\n",
                reps, done_by[0] / double(reps), done_by[1] / double(reps),
                done_by[2] / double(reps), done_by[3] / double(reps), done_by[4] / double(reps),
                max_t);
    return 0;
}
