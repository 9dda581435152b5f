#pragma once

#include <cmath>
#include <sstream>

#include "ccim/types.hpp"

namespace ccim {

/// Quadratic pump ramp p(t) = p_max * (t / (n_step * dt))^2.
struct PumpScheduleOpen {
    double p_max = 2.0;
    int n_step = 101;
    double dt = 0.1;
};

inline double pump_open(double t, const PumpScheduleOpen& s) {
    if (s.n_step < 1) fail_validation("pump_open: n_step must be >= 1");
    if (s.dt <= 0) fail_validation("pump_open: dt must be > 0");
    const double x = t / (s.n_step * s.dt);
    return s.p_max * x * x;
}

/// Sigmoid pump ramp p(t) = p_tr - dp + 2*dp / (1 + exp(-(t-4)/2)).
struct PumpScheduleClosed {
    double p_tr = 1.0;
    double dp = 0.6;
};

inline double pump_closed(double t, const PumpScheduleClosed& s) {
    return s.p_tr - s.dp + 2.0 * s.dp / (1.0 + std::exp(-(t - 4.0) / 2.0));
}

/// Outer-loop threshold ramp eta(n) = max(eta_init*(n-1)/(n_outer-1), eta_end).
/// With n_outer = 1 the ramp term is taken as eta_init (the 0/0 case).
struct ThresholdSchedule {
    double eta_init = 0.8;
    double eta_end = 0.18;
    int n_outer = 51;
};

inline double threshold(int n, const ThresholdSchedule& s) {
    if (s.n_outer < 1) fail_validation("threshold: n_outer must be >= 1");
    if (n < 1 || n > s.n_outer) {
        std::ostringstream os;
        os << "threshold: n=" << n << " outside [1," << s.n_outer << "]";
        fail_validation(os.str());
    }
    const double ramp = s.n_outer == 1 ? s.eta_init : s.eta_init * (n - 1) / double(s.n_outer - 1);
    return std::max(ramp, s.eta_end);
}

}  // namespace ccim
