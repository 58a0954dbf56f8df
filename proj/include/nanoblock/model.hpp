#pragma once

// Two-mode driven Kerr Hamiltonian and its Lindblad generator.
//
//   H = w1 b+b- + w2 d+d- + F1 (b+ + b-) + F2 (d+ + d-)
//       + U1 b+b+b-b- + U2 d+d+d-d- + J (b+d- + b-d+)
//
//   L rho = -i[H, rho] + sum_modes gamma/2 [(nth+1) D[a] + nth D[a+]] rho,
//   D[A] rho = 2 A rho A+ - A+A rho - rho A+A.
//
// Lab frame, constants dropped, hbar = 1. Superoperators act on
// column-stacked vec(rho).

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "nanoblock/fock.hpp"

namespace nanoblock {

enum class NthConvention {
    physical,       ///< Bose-Einstein 1/(exp(T0/T) - 1)
    paper_literal,  ///< 1/(exp(T/T0) - 1), kept for auditing
};

inline std::string to_string(NthConvention c) {
    return c == NthConvention::physical ? "physical" : "paper_literal";
}

inline NthConvention parse_nth_convention(const std::string& s) {
    if (s == "physical") return NthConvention::physical;
    if (s == "paper_literal") return NthConvention::paper_literal;
    throw ConfigError("unknown nth convention '" + s + "' (expected physical|paper_literal)");
}

/// Mean bath occupation for a mode at temperature ratio T/T0, T0 = hbar*omega/k_B.
inline double thermal_occupation(double temperature_ratio,
                                 NthConvention convention = NthConvention::physical) {
    if (!(temperature_ratio >= 0.0)) {
        throw DomainError("temperature ratio must be >= 0, got " + std::to_string(temperature_ratio));
    }
    if (convention == NthConvention::paper_literal) {
        if (temperature_ratio == 0.0) return std::numeric_limits<double>::infinity();
        return 1.0 / std::expm1(temperature_ratio);
    }
    if (temperature_ratio == 0.0) return 0.0;
    return 1.0 / std::expm1(1.0 / temperature_ratio);
}

/// Hamiltonian and bath coefficients; all rates in rad/s.
struct SystemParams {
    double omega1 = 1.0;
    double omega2 = 1.0;
    double F1 = 0.0;
    double F2 = 0.0;
    double U1 = 0.0;
    double U2 = 0.0;
    double J = 0.0;
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    /// One physical temperature for both baths, quoted against T0 = hbar*omega1/k_B.
    double temperature_ratio = 0.0;
    NthConvention nth_convention = NthConvention::physical;

    /// What the matrix builders need: finite coefficients, non-negative rates.
    void validate_coefficients() const {
        for (double v : {omega1, omega2, F1, F2, U1, U2, J, gamma1, gamma2, temperature_ratio}) {
            if (!std::isfinite(v)) throw DomainError("SystemParams: non-finite coefficient");
        }
        if (gamma1 < 0.0 || gamma2 < 0.0) {
            throw DomainError("SystemParams: damping rates must be >= 0");
        }
        if (temperature_ratio < 0.0) {
            throw DomainError("SystemParams: temperature_ratio must be >= 0");
        }
    }

    /// Full physical invariants, including positive mode frequencies.
    void validate() const {
        validate_coefficients();
        if (!(omega1 > 0.0) || !(omega2 > 0.0)) {
            throw DomainError("SystemParams: omega1 and omega2 must be > 0");
        }
    }

    /// Set when |J| >= min(omega1, omega2), where the rotating-wave coupling is questionable.
    std::optional<std::string> rwa_warning() const {
        if (std::abs(J) >= std::min(omega1, omega2)) {
            return "|J| >= min(omega1, omega2): rotating-wave coupling outside its validity range";
        }
        return std::nullopt;
    }

    double nth_mode1() const { return thermal_occupation(temperature_ratio, nth_convention); }

    /// Same bath temperature, measured against mode 2's own T0.
    double nth_mode2() const {
        if (temperature_ratio == 0.0) return thermal_occupation(0.0, nth_convention);
        return thermal_occupation(temperature_ratio * omega1 / omega2, nth_convention);
    }

    /// Mode 1 <-> mode 2 exchange, including the bath temperature reference.
    SystemParams swapped() const {
        SystemParams s = *this;
        std::swap(s.omega1, s.omega2);
        std::swap(s.F1, s.F2);
        std::swap(s.U1, s.U2);
        std::swap(s.gamma1, s.gamma2);
        if (temperature_ratio != 0.0) s.temperature_ratio = temperature_ratio * omega1 / omega2;
        return s;
    }
};

inline OperatorMatrix build_hamiltonian(const SystemParams& p, FockCutoff cutoff) {
    p.validate_coefficients();
    const TwoModeOperators ops(cutoff);
    const OperatorMatrix& b = ops.b;
    const OperatorMatrix& d = ops.d;
    const OperatorMatrix bp = b.adjoint();
    const OperatorMatrix dp = d.adjoint();

    OperatorMatrix h = p.omega1 * (bp * b) + p.omega2 * (dp * d);
    h += p.F1 * (bp + b) + p.F2 * (dp + d);
    h += p.U1 * (bp * bp * b * b) + p.U2 * (dp * dp * d * d);
    h += p.J * (bp * d + b * dp);
    return h;
}

/// Generator d vec(rho)/dt = L vec(rho) on a space of dimension state_dim.
class Liouvillian {
public:
    Liouvillian(SparseOperator matrix, Index state_dim)
        : matrix_(std::move(matrix)), state_dim_(state_dim) {
        if (matrix_.rows() != state_dim * state_dim || matrix_.cols() != matrix_.rows()) {
            throw DimensionError("Liouvillian: matrix is not D^2 x D^2");
        }
        matrix_.makeCompressed();
        frobenius_ = matrix_.norm();
    }

    const SparseOperator& matrix() const noexcept { return matrix_; }
    Index state_dim() const noexcept { return state_dim_; }
    Index size() const noexcept { return matrix_.rows(); }
    double frobenius_norm() const noexcept { return frobenius_; }

    OperatorMatrix dense() const { return OperatorMatrix(matrix_); }

    StateVector apply(const StateVector& v) const { return matrix_ * v; }

    OperatorMatrix apply(const OperatorMatrix& rho) const {
        return devectorize(matrix_ * vectorize(rho));
    }

private:
    SparseOperator matrix_;
    Index state_dim_;
    double frobenius_;
};

/// One collapse channel rate * D[op].
struct Dissipator {
    OperatorMatrix op;
    double rate;
};

/// -i(I (x) H - H^T (x) I) + sum rate * [2 conj(A) (x) A - I (x) A+A - (A+A)^T (x) I].
inline Liouvillian build_lindblad(const OperatorMatrix& h, const std::vector<Dissipator>& channels) {
    require_square(h, "build_lindblad");
    const Index dim = h.rows();
    const SparseOperator id = sparse_identity(dim);
    const SparseOperator hs = to_sparse(h);
    const SparseOperator ht = to_sparse(h.transpose());

    SparseOperator l = Complex(0.0, -1.0) * (sparse_tensor(id, hs) - sparse_tensor(ht, id));
    for (const auto& ch : channels) {
        if (ch.op.rows() != dim || ch.op.cols() != dim) {
            throw DimensionError("build_lindblad: collapse operator dimension mismatch");
        }
        const OperatorMatrix ada = ch.op.adjoint() * ch.op;
        const SparseOperator jump = sparse_tensor(to_sparse(ch.op.conjugate()), to_sparse(ch.op));
        const SparseOperator left = sparse_tensor(id, to_sparse(ada));
        const SparseOperator right = sparse_tensor(to_sparse(ada.transpose()), id);
        l += Complex(ch.rate) * (Complex(2.0) * jump - left - right);
    }
    return Liouvillian(std::move(l), dim);
}

/// Thermal damping of one mode: gamma/2 [(nth+1) D[a] + nth D[a+]].
inline std::vector<Dissipator> thermal_channels(const OperatorMatrix& a, double gamma, double nth) {
    return {{a, 0.5 * gamma * (nth + 1.0)}, {a.adjoint(), 0.5 * gamma * nth}};
}

inline Liouvillian build_liouvillian(const SystemParams& p, FockCutoff cutoff) {
    const OperatorMatrix h = build_hamiltonian(p, cutoff);
    const TwoModeOperators ops(cutoff);
    const double n1 = p.nth_mode1();
    const double n2 = p.nth_mode2();
    if (!std::isfinite(n1) || !std::isfinite(n2)) {
        throw DomainError("thermal occupation is not finite (paper_literal convention at T = 0?)");
    }
    std::vector<Dissipator> channels = thermal_channels(ops.b, p.gamma1, n1);
    const auto second = thermal_channels(ops.d, p.gamma2, n2);
    channels.insert(channels.end(), second.begin(), second.end());
    return build_lindblad(h, channels);
}

}  // namespace nanoblock
