#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "nanoblock/fock.hpp"

namespace nanoblock {

enum class Mode { first = 1, second = 2 };

/// Occupations below this make g2 a 0/0 ratio.
inline constexpr double kOccupationFloor = 1e-12;

/// Tr_B or Tr_A of an operator on C^dim_a (x) C^dim_b.
inline OperatorMatrix partial_trace(const OperatorMatrix& rho, Index dim_a, Index dim_b, Mode keep) {
    if (rho.rows() != dim_a * dim_b || rho.cols() != dim_a * dim_b) {
        throw DimensionError("partial_trace: operator is not (dim_a*dim_b) square");
    }
    if (keep == Mode::first) {
        OperatorMatrix out = OperatorMatrix::Zero(dim_a, dim_a);
        for (Index i = 0; i < dim_a; ++i)
            for (Index j = 0; j < dim_a; ++j)
                for (Index k = 0; k < dim_b; ++k) out(i, j) += rho(i * dim_b + k, j * dim_b + k);
        return out;
    }
    OperatorMatrix out = OperatorMatrix::Zero(dim_b, dim_b);
    for (Index k = 0; k < dim_b; ++k)
        for (Index l = 0; l < dim_b; ++l)
            for (Index i = 0; i < dim_a; ++i) out(k, l) += rho(i * dim_b + k, i * dim_b + l);
    return out;
}

inline bool is_single_mode(const DensityMatrix& rho, FockCutoff cutoff) {
    if (rho.dim() == cutoff.dim()) return true;
    if (rho.dim() == cutoff.dim() * cutoff.dim()) return false;
    throw DimensionError("state of dimension " + std::to_string(rho.dim()) +
                         " matches neither one nor two modes at n_max = " +
                         std::to_string(cutoff.n_max()));
}

/// Single-mode state of `mode`; a single-mode input is returned as is.
inline OperatorMatrix reduced_state(const DensityMatrix& rho, Mode mode, FockCutoff cutoff) {
    if (is_single_mode(rho, cutoff)) {
        if (mode != Mode::first) throw DimensionError("single-mode state has no second mode");
        return rho.op();
    }
    return partial_trace(rho.op(), cutoff.dim(), cutoff.dim(), mode);
}

/// p_n of the reduced state.
inline Eigen::VectorXd number_distribution(const DensityMatrix& rho, Mode mode, FockCutoff cutoff) {
    return reduced_state(rho, mode, cutoff).diagonal().real();
}

/// Annihilation operator of `mode` on the full space of `rho`.
inline OperatorMatrix mode_annihilation(const DensityMatrix& rho, Mode mode, FockCutoff cutoff) {
    const OperatorMatrix a = annihilation(cutoff);
    if (is_single_mode(rho, cutoff)) {
        if (mode != Mode::first) throw DimensionError("single-mode state has no second mode");
        return a;
    }
    const OperatorMatrix id = identity(cutoff.dim());
    return mode == Mode::first ? tensor(a, id) : tensor(id, a);
}

inline double mean_occupation(const DensityMatrix& rho, Mode mode, FockCutoff cutoff) {
    const OperatorMatrix b = mode_annihilation(rho, mode, cutoff);
    return (b.adjoint() * b * rho.op()).trace().real();
}

inline double purity(const DensityMatrix& rho) {
    return (rho.op() * rho.op()).trace().real();
}

/// Tr(b+ b+ b- b- rho) / Tr(b+ b- rho)^2.
inline double g2_zero(const DensityMatrix& rho, Mode mode, FockCutoff cutoff,
                      double occupation_floor = kOccupationFloor) {
    const OperatorMatrix b = mode_annihilation(rho, mode, cutoff);
    const OperatorMatrix bp = b.adjoint();
    const double n = (bp * b * rho.op()).trace().real();
    if (!(n > occupation_floor)) {
        throw UndefinedCorrelationError("g2 undefined: mode " +
                                        std::to_string(static_cast<int>(mode)) + " occupation " +
                                        std::to_string(n) + " below floor");
    }
    const double pairs = (bp * bp * b * b * rho.op()).trace().real();
    return pairs / (n * n);
}

/// sum n(n-1) p_n / (sum n p_n)^2 over a number distribution.
inline double g2_from_distribution(const Eigen::VectorXd& p, double occupation_floor = kOccupationFloor) {
    double n1 = 0.0;
    double n2 = 0.0;
    for (Index n = 0; n < p.size(); ++n) {
        const double nd = static_cast<double>(n);
        n1 += nd * p(n);
        n2 += nd * (nd - 1.0) * p(n);
    }
    if (!(n1 > occupation_floor)) {
        throw UndefinedCorrelationError("g2 undefined: occupation below floor");
    }
    return n2 / (n1 * n1);
}

inline std::optional<double> g2_or_missing(const DensityMatrix& rho, Mode mode, FockCutoff cutoff) {
    try {
        return g2_zero(rho, mode, cutoff);
    } catch (const UndefinedCorrelationError&) {
        return std::nullopt;
    }
}

struct ObservableSet {
    std::optional<double> g2_mode1;
    std::optional<double> g2_mode2;
    double n_mode1 = 0.0;
    double n_mode2 = 0.0;
    double purity = 1.0;

    /// Missing only when g2 itself is; log10(0) is -inf.
    static std::optional<double> log10_of(const std::optional<double>& g) {
        if (!g) return std::nullopt;
        return std::log10(std::max(*g, 0.0));
    }
    std::optional<double> log10_g2_mode1() const { return log10_of(g2_mode1); }
    std::optional<double> log10_g2_mode2() const { return log10_of(g2_mode2); }
};

inline ObservableSet compute_observables(const DensityMatrix& rho, FockCutoff cutoff) {
    ObservableSet o;
    o.purity = purity(rho);
    o.n_mode1 = mean_occupation(rho, Mode::first, cutoff);
    o.g2_mode1 = g2_or_missing(rho, Mode::first, cutoff);
    if (!is_single_mode(rho, cutoff)) {
        o.n_mode2 = mean_occupation(rho, Mode::second, cutoff);
        o.g2_mode2 = g2_or_missing(rho, Mode::second, cutoff);
    }
    return o;
}

}  // namespace nanoblock
