#pragma once

#include <vector>

namespace tamp {

// Variance schedule tables, 1-indexed by timestep with alpha_bar[0] = 1 so the
// final reverse step collapses exactly (sigma[1] = 0). Kept in double: these
// are small tables and the identities are asserted to 1e-10.
struct NoiseSchedule {
    int steps = 0;
    std::vector<double> beta;       // size steps+1, [0] unused
    std::vector<double> alpha;      // 1 - beta
    std::vector<double> alpha_bar;  // cumulative product, [0] = 1
    std::vector<double> sigma;      // sigma_t^2 = (1-abar_{t-1})/(1-abar_t) * beta_t
};

NoiseSchedule build_schedule(int steps, double beta_min = 1e-4, double beta_max = 0.02);

}  // namespace tamp
