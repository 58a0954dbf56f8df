#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "nanoblock/model.hpp"
#include "nanoblock/observables.hpp"
#include "nanoblock/steady_state.hpp"

namespace nanoblock {

struct TruncationCheck {
    int n_max = 0;
    std::optional<double> g2_low;   ///< at n_max
    std::optional<double> g2_high;  ///< at n_max + 2
    double relative_change = 0.0;
    bool converged = false;
};

/// |g2(n_max) - g2(n_max + 2)| / g2(n_max + 2) for one mode.
inline TruncationCheck truncation_change(const SystemParams& p, FockCutoff cutoff, Mode mode,
                                         SolverMethod method = SolverMethod::direct,
                                         double tolerance = 1e-3) {
    TruncationCheck c;
    c.n_max = cutoff.n_max();
    const FockCutoff next(cutoff.n_max() + 2);
    const auto low = solve(build_liouvillian(p, cutoff), method);
    const auto high = solve(build_liouvillian(p, next), method);
    c.g2_low = g2_or_missing(low.rho(), mode, cutoff);
    c.g2_high = g2_or_missing(high.rho(), mode, next);
    if (!c.g2_low && !c.g2_high) {
        c.converged = true;  // empty mode at both cutoffs
        return c;
    }
    if (!c.g2_low || !c.g2_high || !(*c.g2_high > 0.0)) {
        c.relative_change = std::numeric_limits<double>::infinity();
        return c;
    }
    c.relative_change = std::abs(*c.g2_low - *c.g2_high) / *c.g2_high;
    c.converged = c.relative_change <= tolerance;
    return c;
}

/// Raises n_max in steps of 2 from `start` until both modes' g2 settle.
inline TruncationCheck converged_cutoff(const SystemParams& p, FockCutoff start, int max_n_max = 16,
                                        SolverMethod method = SolverMethod::direct,
                                        double tolerance = 1e-3) {
    TruncationCheck last;
    for (int n = start.n_max(); n <= max_n_max; n += 2) {
        last = truncation_change(p, FockCutoff(n), Mode::first, method, tolerance);
        if (!last.converged) continue;
        const auto second = truncation_change(p, FockCutoff(n), Mode::second, method, tolerance);
        if (second.converged) return last;
        last = second;
    }
    return last;
}

}  // namespace nanoblock
