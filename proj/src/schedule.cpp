#include "kinlab/diagrams.hpp"

#include <cmath>
#include <stdexcept>

namespace kinlab {

ScheduleParams schedule_from_log(double log_inv_epsilon, int r) {
    if (r < 1) throw std::invalid_argument("schedule: r must be >= 1");
    // log log(1/eps) > 0 requires eps < e^{-e}, i.e. log(1/eps) > e
    if (!(log_inv_epsilon > std::exp(1.0)) || !std::isfinite(log_inv_epsilon))
        throw std::invalid_argument("schedule: epsilon must lie in (0, e^{-e})");
    ScheduleParams s{};
    s.log_inv_epsilon = log_inv_epsilon;
    s.r = r;
    const double loglog = std::log(log_inv_epsilon);
    s.N = log_inv_epsilon / (10.0 * r * loglog);
    s.log_kappa = 15.0 * r * loglog;
    s.log_N_factorial = std::lgamma(s.N + 1.0);
    s.factorial_lower = s.log_N_factorial > log_inv_epsilon / 11.0;
    s.factorial_upper = s.log_N_factorial < log_inv_epsilon / 10.0;
    // N log kappa = 1.5 log(1/eps) identically; differences at rounding level are equality
    s.kappa_power_margin = s.N * s.log_kappa - 1.5 * log_inv_epsilon;
    s.kappa_power = s.kappa_power_margin > 1e-12 * 1.5 * log_inv_epsilon;
    return s;
}

ScheduleParams schedule(double epsilon, int r) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("schedule: epsilon must lie in (0, e^{-e})");
    return schedule_from_log(-std::log(epsilon), r);
}

double ScheduleParams::epsilon() const { return std::exp(-log_inv_epsilon); }
double ScheduleParams::kappa() const { return std::pow(log_inv_epsilon, 15.0 * r); }

}  // namespace kinlab
