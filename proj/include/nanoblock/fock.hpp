#pragma once

// Truncated Fock-space linear algebra: ladder operators, Kronecker
// products and the column-stacking vectorization used by every
// superoperator in the library. Units: hbar = 1.

#include <cmath>
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>
#include <unsupported/Eigen/KroneckerProduct>

#include "nanoblock/error.hpp"

namespace nanoblock {

using Complex = std::complex<double>;
using Index = Eigen::Index;
using OperatorMatrix = Eigen::MatrixXcd;
using StateVector = Eigen::VectorXcd;
using SparseOperator = Eigen::SparseMatrix<Complex>;

/// Highest retained Fock level of one mode.
class FockCutoff {
public:
    explicit FockCutoff(int n_max) : n_max_(n_max) {
        if (n_max < 1) {
            throw DomainError("Fock cutoff n_max must be >= 1, got " + std::to_string(n_max));
        }
    }

    int n_max() const noexcept { return n_max_; }
    Index dim() const noexcept { return n_max_ + 1; }

    friend bool operator==(FockCutoff, FockCutoff) = default;

private:
    int n_max_;
};

/// b|n> = sqrt(n)|n-1>.
inline OperatorMatrix annihilation(FockCutoff cutoff) {
    const Index d = cutoff.dim();
    OperatorMatrix a = OperatorMatrix::Zero(d, d);
    for (Index n = 1; n < d; ++n) {
        a(n - 1, n) = std::sqrt(static_cast<double>(n));
    }
    return a;
}

inline OperatorMatrix creation(FockCutoff cutoff) { return annihilation(cutoff).adjoint(); }

inline OperatorMatrix number_operator(FockCutoff cutoff) {
    const Index d = cutoff.dim();
    OperatorMatrix n = OperatorMatrix::Zero(d, d);
    for (Index k = 0; k < d; ++k) {
        n(k, k) = static_cast<double>(k);
    }
    return n;
}

inline OperatorMatrix identity(Index dim) { return OperatorMatrix::Identity(dim, dim); }

inline OperatorMatrix adjoint(const OperatorMatrix& a) { return a.adjoint(); }

inline OperatorMatrix commutator(const OperatorMatrix& a, const OperatorMatrix& b) {
    return a * b - b * a;
}

inline void require_square(const OperatorMatrix& a, const char* what) {
    if (a.rows() != a.cols()) {
        throw DimensionError(std::string(what) + ": operator is " + std::to_string(a.rows()) +
                             "x" + std::to_string(a.cols()) + ", expected square");
    }
}

/// Kronecker product a (x) b; entry (i*dimB + k, j*dimB + l) = a(i,j) b(k,l).
inline OperatorMatrix tensor(const OperatorMatrix& a, const OperatorMatrix& b) {
    require_square(a, "tensor");
    require_square(b, "tensor");
    return Eigen::kroneckerProduct(a, b).eval();
}

inline SparseOperator to_sparse(const OperatorMatrix& a) {
    return a.sparseView(Complex(0.0), 0.0);
}

inline SparseOperator sparse_identity(Index dim) {
    SparseOperator id(dim, dim);
    id.setIdentity();
    return id;
}

inline SparseOperator sparse_tensor(const SparseOperator& a, const SparseOperator& b) {
    SparseOperator out = Eigen::kroneckerProduct(a, b);
    return out;
}

/// Column stacking: element (i, j) lands at index j*dim + i.
inline StateVector vectorize(const OperatorMatrix& rho) {
    require_square(rho, "vectorize");
    return Eigen::Map<const StateVector>(rho.data(), rho.size());
}

inline Index perfect_square_root(Index n) {
    auto root = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(n))));
    while (root * root > n) --root;
    while ((root + 1) * (root + 1) <= n) ++root;
    return root;
}

inline OperatorMatrix devectorize(const StateVector& v) {
    const Index dim = perfect_square_root(v.size());
    if (dim * dim != v.size() || dim == 0) {
        throw DimensionError("devectorize: length " + std::to_string(v.size()) +
                             " is not a positive perfect square");
    }
    return Eigen::Map<const OperatorMatrix>(v.data(), dim, dim);
}

/// Operators of a two-mode space H_1 (x) H_2 with a common cutoff.
struct TwoModeOperators {
    OperatorMatrix b;  ///< mode-1 annihilation, a (x) I
    OperatorMatrix d;  ///< mode-2 annihilation, I (x) a

    explicit TwoModeOperators(FockCutoff cutoff) {
        const OperatorMatrix a = annihilation(cutoff);
        const OperatorMatrix id = identity(cutoff.dim());
        b = tensor(a, id);
        d = tensor(id, a);
    }
};

/// Hermitian, unit-trace, positive-semidefinite state.
class DensityMatrix {
public:
    static constexpr double kHermiticityTol = 1e-10;
    static constexpr double kTraceTol = 1e-10;
    static constexpr double kPositivityTol = 1e-8;

    /// Validates `op` as given; throws InvariantError on violation.
    explicit DensityMatrix(OperatorMatrix op) : op_(std::move(op)) {
        require_square(op_, "DensityMatrix");
        const double herm = (op_ - op_.adjoint()).cwiseAbs().maxCoeff();
        if (herm > kHermiticityTol) {
            throw InvariantError("density matrix not Hermitian: max|rho - rho^dag| = " +
                                 std::to_string(herm));
        }
        const Complex tr = op_.trace();
        if (std::abs(tr - 1.0) > kTraceTol) {
            throw InvariantError("density matrix trace " + std::to_string(tr.real()) + "+" +
                                 std::to_string(tr.imag()) + "i != 1");
        }
        const OperatorMatrix herm_part = 0.5 * (op_ + op_.adjoint());
        Eigen::SelfAdjointEigenSolver<OperatorMatrix> es(herm_part, Eigen::EigenvaluesOnly);
        min_eigenvalue_ = es.eigenvalues().minCoeff();
        if (min_eigenvalue_ < -kPositivityTol) {
            throw InvariantError("density matrix has eigenvalue " +
                                 std::to_string(min_eigenvalue_) + " < -1e-8");
        }
    }

    /// Symmetrizes (rho + rho^dag)/2, rescales to unit trace, then validates.
    static DensityMatrix from_unnormalized(const OperatorMatrix& raw) {
        require_square(raw, "DensityMatrix");
        OperatorMatrix sym = 0.5 * (raw + raw.adjoint());
        const double tr = sym.trace().real();
        if (!(std::abs(tr) > 0.0) || !std::isfinite(tr)) {
            throw InvariantError("cannot normalize state with trace " + std::to_string(tr));
        }
        sym /= tr;
        return DensityMatrix(std::move(sym));
    }

    static DensityMatrix pure(const StateVector& psi) {
        const StateVector n = psi / psi.norm();
        return DensityMatrix(n * n.adjoint());
    }

    const OperatorMatrix& op() const noexcept { return op_; }
    Index dim() const noexcept { return op_.rows(); }
    double min_eigenvalue() const noexcept { return min_eigenvalue_; }

private:
    OperatorMatrix op_;
    double min_eigenvalue_ = 0.0;
};

/// 1/2 Tr|rho - sigma|.
inline double trace_distance(const OperatorMatrix& rho, const OperatorMatrix& sigma) {
    if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols()) {
        throw DimensionError("trace_distance: shape mismatch");
    }
    const OperatorMatrix diff = rho - sigma;
    const OperatorMatrix herm = 0.5 * (diff + diff.adjoint());
    Eigen::SelfAdjointEigenSolver<OperatorMatrix> es(herm, Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

inline double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
    return trace_distance(rho.op(), sigma.op());
}

}  // namespace nanoblock
