#include "diffusion/schedule.hpp"

#include <cmath>
#include <stdexcept>

namespace tamp {

NoiseSchedule build_schedule(int steps, double beta_min, double beta_max) {
    if (steps < 1) throw std::invalid_argument("build_schedule: steps must be >= 1");
    if (!(beta_min > 0.0) || !(beta_max < 1.0) || beta_min > beta_max)
        throw std::invalid_argument("build_schedule: need 0 < beta_min <= beta_max < 1");

    NoiseSchedule s;
    s.steps = steps;
    s.beta.assign(steps + 1, 0.0);
    s.alpha.assign(steps + 1, 1.0);
    s.alpha_bar.assign(steps + 1, 1.0);
    s.sigma.assign(steps + 1, 0.0);

    for (int t = 1; t <= steps; ++t) {
        const double frac = steps == 1 ? 0.0 : static_cast<double>(t - 1) / (steps - 1);
        s.beta[t] = beta_min + frac * (beta_max - beta_min);
        s.alpha[t] = 1.0 - s.beta[t];
        s.alpha_bar[t] = s.alpha_bar[t - 1] * s.alpha[t];
        s.sigma[t] = std::sqrt((1.0 - s.alpha_bar[t - 1]) / (1.0 - s.alpha_bar[t]) * s.beta[t]);
    }
    return s;
}

}  // namespace tamp
