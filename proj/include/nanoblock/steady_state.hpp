#pragma once

// Stationary states of a Liouvillian by three independent routes:
// row-replaced linear solve, smallest-magnitude eigenvector, and
// explicit time integration to a fixed point.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/SparseLU>
#ifdef NANOBLOCK_USE_UMFPACK
#include <Eigen/UmfPackSupport>
#endif

#include "nanoblock/fock.hpp"
#include "nanoblock/model.hpp"

namespace nanoblock {

enum class SolverMethod { direct, nullspace, evolve };

inline std::string to_string(SolverMethod m) {
    switch (m) {
        case SolverMethod::direct: return "direct";
        case SolverMethod::nullspace: return "nullspace";
        case SolverMethod::evolve: return "evolve";
    }
    return "unknown";
}

inline SolverMethod parse_solver_method(const std::string& s) {
    if (s == "direct") return SolverMethod::direct;
    if (s == "nullspace") return SolverMethod::nullspace;
    if (s == "evolve") return SolverMethod::evolve;
    throw ConfigError("unknown solver '" + s + "' (expected direct|nullspace|evolve)");
}

/// Residuals above this mark a result as non-converged.
inline constexpr double kAcceptResidual = 1e-8;

struct SteadyStateResult {
    std::optional<DensityMatrix> state;
    double residual = std::numeric_limits<double>::infinity();  ///< |L vec(rho)| / |L|_F
    SolverMethod method = SolverMethod::direct;
    int iterations = 0;
    bool converged = false;
    bool multiplicity_warning = false;
    std::string message;

    const DensityMatrix& rho() const {
        if (!state) throw InvariantError("no valid steady state: " + message);
        return *state;
    }
    double min_eigenvalue() const {
        return state ? state->min_eigenvalue() : std::numeric_limits<double>::quiet_NaN();
    }
};

namespace detail {

#ifdef NANOBLOCK_USE_UMFPACK
using SparseLu = Eigen::UmfPackLU<SparseOperator>;
#else
using SparseLu = Eigen::SparseLU<SparseOperator, Eigen::COLAMDOrdering<int>>;
#endif

inline const char* factorization_backend() {
#ifdef NANOBLOCK_USE_UMFPACK
    return "umfpack";
#else
    return "eigen-sparselu";
#endif
}

/// Factorizes `a` into `lu`; false on a detected singularity.
inline bool factorize(SparseLu& lu, const SparseOperator& a) {
    lu.analyzePattern(a);
    lu.factorize(a);
    return lu.info() == Eigen::Success;
}

/// RMS row norm of L; sets the rate scale for scale-free tolerances.
inline double rate_scale(const Liouvillian& l) {
    return l.frobenius_norm() / std::sqrt(static_cast<double>(l.size()));
}

/// Trace indices i*D + i of the column-stacked state.
inline std::vector<Index> trace_indices(Index state_dim) {
    std::vector<Index> idx;
    idx.reserve(static_cast<std::size_t>(state_dim));
    for (Index i = 0; i < state_dim; ++i) idx.push_back(i * state_dim + i);
    return idx;
}

inline Complex vec_trace(const StateVector& v, Index state_dim) {
    Complex tr = 0.0;
    for (Index i : trace_indices(state_dim)) tr += v(i);
    return tr;
}

inline double relative_residual(const Liouvillian& l, const StateVector& v) {
    const double fn = l.frobenius_norm();
    const double r = (l.matrix() * v).norm();
    return fn > 0.0 ? r / fn : r;
}

/// Normalizes v to unit trace, records the residual, and builds the validated state.
inline void finish(SteadyStateResult& res, const Liouvillian& l, StateVector v) {
    const Complex tr = vec_trace(v, l.state_dim());
    if (!(std::abs(tr) > 0.0) || !v.allFinite()) {
        res.converged = false;
        res.message += (res.message.empty() ? "" : "; ") + std::string("state has zero trace");
        return;
    }
    v /= tr;
    res.residual = relative_residual(l, v);
    res.state.emplace(DensityMatrix::from_unnormalized(devectorize(v)));
    res.converged = res.converged && res.residual <= kAcceptResidual;
    if (res.residual > kAcceptResidual) {
        res.message += (res.message.empty() ? "" : "; ") +
                       std::string("residual above acceptance threshold");
    }
}

inline StateVector probe_vector(Index n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    StateVector v(n);
    for (Index i = 0; i < n; ++i) v(i) = Complex(u(rng), u(rng));
    return v / v.norm();
}

inline OperatorMatrix orthonormalize(const OperatorMatrix& z) {
    Eigen::HouseholderQR<OperatorMatrix> qr(z);
    return qr.householderQ() * OperatorMatrix::Identity(z.rows(), z.cols());
}

}  // namespace detail

/// Replace row 0 by the (scaled) trace functional and solve L' x = s e_0.
inline SteadyStateResult solve_direct(const Liouvillian& l) {
    const Index n = l.size();
    const Index dim = l.state_dim();
    const double scale = detail::rate_scale(l);
    if (!(scale > 0.0)) {
        throw MultiplicityError("solve_direct: zero Liouvillian, every state is stationary; use nullspace");
    }

    std::vector<Eigen::Triplet<Complex>> triplets;
    triplets.reserve(static_cast<std::size_t>(l.matrix().nonZeros() + dim));
    for (Index col = 0; col < l.matrix().outerSize(); ++col) {
        for (SparseOperator::InnerIterator it(l.matrix(), col); it; ++it) {
            if (it.row() != 0) triplets.emplace_back(it.row(), it.col(), it.value());
        }
    }
    for (Index i : detail::trace_indices(dim)) triplets.emplace_back(0, i, Complex(scale));
    SparseOperator a(n, n);
    a.setFromTriplets(triplets.begin(), triplets.end());
    a.makeCompressed();

    detail::SparseLu lu;
    if (!detail::factorize(lu, a)) {
        throw MultiplicityError("solve_direct: trace-constrained system is singular; "
                                "steady state is not unique, use nullspace");
    }

    StateVector rhs = StateVector::Zero(n);
    rhs(0) = scale;
    StateVector x = lu.solve(rhs);
    x += lu.solve(StateVector(rhs - a * x));

    // Inverse iteration gives a lower bound on |A^-1|; a near-singular A means
    // a continuum of stationary states.
    StateVector probe = detail::probe_vector(n, 0x5eed);
    double inv_norm = 0.0;
    for (int k = 0; k < 3; ++k) {
        StateVector y = lu.solve(probe);
        const double ny = y.norm();
        if (!std::isfinite(ny)) {
            inv_norm = std::numeric_limits<double>::infinity();
            break;
        }
        inv_norm = std::max(inv_norm, ny);
        probe = y / ny;
    }
    const double condition = a.norm() * inv_norm;
    if (!x.allFinite() || !(condition < 1e13)) {
        throw MultiplicityError("solve_direct: condition estimate " + std::to_string(condition) +
                                " after trace-row replacement; steady state is not unique, use nullspace");
    }

    SteadyStateResult res;
    res.method = SolverMethod::direct;
    res.iterations = 1;
    res.converged = true;
    detail::finish(res, l, std::move(x));
    return res;
}

struct NullspaceOptions {
    int block = 4;
    int min_iterations = 8;
    int max_iterations = 200;
    double shift = 1e-7;  ///< relative to the rate scale
};

/// Smallest-|lambda| eigenpair by shift-invert subspace iteration with Rayleigh-Ritz.
inline SteadyStateResult solve_nullspace(const Liouvillian& l, NullspaceOptions opt = {}) {
    const Index n = l.size();
    const double fn = l.frobenius_norm();
    const double scale = detail::rate_scale(l);
    const double zero_tol = 1e-10 * fn;
    const Index k = std::min<Index>(opt.block, n);

    SteadyStateResult res;
    res.method = SolverMethod::nullspace;
    if (!(fn > 0.0)) {
        res.multiplicity_warning = true;
        res.message = "zero Liouvillian: every state is stationary";
        const OperatorMatrix mixed = identity(l.state_dim()) / static_cast<double>(l.state_dim());
        res.state.emplace(mixed);
        res.residual = 0.0;
        return res;
    }

    const Complex sigma = -opt.shift * scale * Complex(1.0, 0.37);
    SparseOperator shifted = l.matrix() - sigma * sparse_identity(n);
    shifted.makeCompressed();
    detail::SparseLu lu;
    if (!detail::factorize(lu, shifted)) {
        throw MultiplicityError("solve_nullspace: shifted Liouvillian is numerically singular");
    }

    OperatorMatrix q(n, k);
    for (Index j = 0; j < k; ++j) {
        q.col(j) = detail::probe_vector(n, 0xace5u + static_cast<unsigned>(j));
    }
    q = detail::orthonormalize(q);

    Eigen::VectorXcd ritz;
    OperatorMatrix vectors;
    std::vector<Index> order;
    std::vector<double> resid(static_cast<std::size_t>(k), 0.0);
    int it = 0;
    for (; it < opt.max_iterations; ++it) {
        OperatorMatrix z(n, k);
        for (Index j = 0; j < k; ++j) z.col(j) = lu.solve(StateVector(q.col(j)));
        q = detail::orthonormalize(z);

        const OperatorMatrix lq = l.matrix() * q;
        const OperatorMatrix small = q.adjoint() * lq;
        Eigen::ComplexEigenSolver<OperatorMatrix> es(small);
        ritz = es.eigenvalues();
        vectors = q * es.eigenvectors();
        order.resize(static_cast<std::size_t>(k));
        for (Index j = 0; j < k; ++j) order[static_cast<std::size_t>(j)] = j;
        std::sort(order.begin(), order.end(),
                  [&](Index a, Index b) { return std::abs(ritz(a)) < std::abs(ritz(b)); });
        for (Index j = 0; j < k; ++j) {
            const StateVector v = vectors.col(j).normalized();
            resid[static_cast<std::size_t>(j)] = (l.matrix() * v - ritz(j) * v).norm();
        }
        const Index first = order[0];
        const bool first_done = resid[static_cast<std::size_t>(first)] <= 1e-13 * fn;
        bool second_decided = true;
        if (k > 1) {
            const Index second = order[1];
            second_decided = resid[static_cast<std::size_t>(second)] <= 1e-9 * fn ||
                             std::abs(ritz(second)) > 1e3 * zero_tol;
        }
        if (first_done && second_decided && it + 1 >= opt.min_iterations) {
            ++it;
            break;
        }
    }
    res.iterations = it;

    const Index first = order[0];
    const double lambda_min = std::abs(ritz(first));
    const bool degenerate = k > 1 && std::abs(ritz(order[1])) <= zero_tol;
    res.converged = lambda_min <= zero_tol && !degenerate;
    if (lambda_min > zero_tol) {
        res.message = "smallest eigenvalue magnitude " + std::to_string(lambda_min / fn) +
                      " |L|_F exceeds 1e-10 |L|_F";
    }

    StateVector v = vectors.col(first);
    if (degenerate) {
        res.multiplicity_warning = true;
        res.message = "second eigenvalue magnitude below 1e-10 |L|_F: steady state is not unique";
        // Trace-maximizing combination of the near-null Ritz vectors.
        v = StateVector::Zero(n);
        for (Index j : order) {
            if (std::abs(ritz(j)) > zero_tol) continue;
            const StateVector u = vectors.col(j).normalized();
            v += std::conj(detail::vec_trace(u, l.state_dim())) * u;
        }
    }
    try {
        detail::finish(res, l, std::move(v));
    } catch (const InvariantError& e) {
        if (!degenerate) throw;
        res.state.reset();
        res.converged = false;
        res.message += std::string("; ") + e.what();
    }
    return res;
}

struct EvolveOptions {
    double t_max = 0.0;   ///< 0 selects 1e5 / rate scale
    double dt = 0.0;      ///< 0 selects 2.5 / |L|_1
    double tolerance = 1e-10;  ///< on |L vec(rho)|_2, relative to the rate scale
    std::function<void(double, const StateVector&)> observer;
};

/// Classic RK4 on d vec(rho)/dt = L vec(rho), halving dt on divergence.
inline SteadyStateResult solve_evolve(const Liouvillian& l, const DensityMatrix& rho0,
                                      EvolveOptions opt = {}) {
    if (rho0.dim() != l.state_dim()) {
        throw DimensionError("solve_evolve: initial state dimension mismatch");
    }
    const SparseOperator& m = l.matrix();
    const double scale = detail::rate_scale(l);
    double norm1 = 0.0;
    for (Index col = 0; col < m.outerSize(); ++col) {
        double s = 0.0;
        for (SparseOperator::InnerIterator it(m, col); it; ++it) s += std::abs(it.value());
        norm1 = std::max(norm1, s);
    }
    double dt = opt.dt > 0.0 ? opt.dt : (norm1 > 0.0 ? 2.5 / norm1 : 1.0);
    const double t_max = opt.t_max > 0.0 ? opt.t_max : (scale > 0.0 ? 1e5 / scale : 1.0);
    const double tol = opt.tolerance * scale;

    SteadyStateResult res;
    res.method = SolverMethod::evolve;

    StateVector v = vectorize(rho0.op());
    const double bound = 10.0 * std::max(1.0, v.norm());
    double t = 0.0;
    int steps = 0;
    StateVector k1 = m * v;
    if (opt.observer) opt.observer(t, v);
    while (k1.norm() > tol && t < t_max) {
        const StateVector k2 = m * (v + 0.5 * dt * k1);
        const StateVector k3 = m * (v + 0.5 * dt * k2);
        const StateVector k4 = m * (v + dt * k3);
        StateVector next = v + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!next.allFinite() || next.norm() > bound) {
            dt *= 0.5;
            if (dt < 1e-12 * t_max) break;
            continue;
        }
        v = std::move(next);
        t += dt;
        ++steps;
        k1 = m * v;
        if (opt.observer) opt.observer(t, v);
    }
    res.iterations = steps;
    res.converged = k1.norm() <= tol;
    if (!res.converged) {
        res.message = "no fixed point by t_max; |dvec(rho)/dt| = " + std::to_string(k1.norm());
    }
    detail::finish(res, l, std::move(v));
    return res;
}

/// Dispatch by method; evolve starts from the ground state of the truncated space.
inline SteadyStateResult solve(const Liouvillian& l, SolverMethod method) {
    switch (method) {
        case SolverMethod::direct: return solve_direct(l);
        case SolverMethod::nullspace: return solve_nullspace(l);
        case SolverMethod::evolve: {
            OperatorMatrix vac = OperatorMatrix::Zero(l.state_dim(), l.state_dim());
            vac(0, 0) = 1.0;
            return solve_evolve(l, DensityMatrix(vac));
        }
    }
    throw ConfigError("unknown solver method");
}

}  // namespace nanoblock
