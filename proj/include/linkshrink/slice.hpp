#pragma once

// Univariate slice sampling: stepping-out then shrinkage (Neal 2003), and a
// shrinkage-only variant for bounded supports.

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>

#include "linkshrink/errors.hpp"

namespace linkshrink {

struct SliceCounters {
    std::uint64_t updates = 0;
    std::uint64_t evaluations = 0;
    std::uint64_t expansions = 0;  // stepping-out steps
    std::uint64_t shrinks = 0;     // rejected proposals
};

namespace detail {

template <class Rng>
double open_uniform(Rng& rng) {
    // (0, 1]
    return 1.0 - std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace detail

template <class LogDensity, class Rng>
double slice_sample(double x0, const LogDensity& logf, double width, int max_steps, Rng& rng,
                    SliceCounters& counters) {
    const double f0 = logf(x0);
    ++counters.evaluations;
    ++counters.updates;
    if (!std::isfinite(f0)) {
        std::ostringstream msg;
        msg << "slice sampler: non-finite log density " << f0 << " at current point " << x0;
        throw NumericalError(msg.str());
    }
    const double log_level = f0 + std::log(detail::open_uniform(rng));

    double left = x0 - width * detail::open_uniform(rng);
    double right = left + width;
    int steps_left = static_cast<int>(std::floor(max_steps * detail::open_uniform(rng)));
    if (steps_left >= max_steps) steps_left = max_steps - 1;
    int steps_right = max_steps - 1 - steps_left;
    while (steps_left-- > 0) {
        ++counters.evaluations;
        if (!(logf(left) > log_level)) break;
        left -= width;
        ++counters.expansions;
    }
    while (steps_right-- > 0) {
        ++counters.evaluations;
        if (!(logf(right) > log_level)) break;
        right += width;
        ++counters.expansions;
    }

    for (;;) {
        const double x1 = left + (right - left) * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        ++counters.evaluations;
        if (logf(x1) > log_level) return x1;
        ++counters.shrinks;
        if (x1 < x0) left = x1;
        else right = x1;
        if (right - left <= 1e-14 * (1.0 + std::fabs(x0))) return x0;
    }
}

/// Slice update on [lower, upper] with the full support as initial bracket.
template <class LogDensity, class Rng>
double slice_sample_bounded(double x0, const LogDensity& logf, double lower, double upper, Rng& rng,
                            SliceCounters& counters) {
    const double f0 = logf(x0);
    ++counters.evaluations;
    ++counters.updates;
    if (!std::isfinite(f0)) {
        std::ostringstream msg;
        msg << "slice sampler: non-finite log density " << f0 << " at current point " << x0;
        throw NumericalError(msg.str());
    }
    const double log_level = f0 + std::log(detail::open_uniform(rng));
    double left = lower;
    double right = upper;
    for (;;) {
        const double x1 = left + (right - left) * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        ++counters.evaluations;
        if (logf(x1) > log_level) return x1;
        ++counters.shrinks;
        if (x1 < x0) left = x1;
        else right = x1;
        if (right - left <= 1e-14 * (1.0 + std::fabs(x0))) return x0;
    }
}

}  // namespace linkshrink
