#pragma once

// Classical electromechanics of a doubly clamped, charged nanotube over a
// gate, and its reduction to the single-mode coefficients of the quantum
// Hamiltonian. SI units throughout; only `quantize` leaves SI for rad/s.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "nanoblock/error.hpp"

namespace nanoblock::cnt {

inline constexpr double kHbar = 1.054571817e-34;        // J s
inline constexpr double kBoltzmann = 1.380649e-23;      // J/K
inline constexpr double kElementaryCharge = 1.602176634e-19;  // C
inline constexpr double kCoulomb = 8.9875517923e9;      // N m^2 / C^2
/// Areal mass density of a graphene sheet, used only by `estimated_mass`.
inline constexpr double kGrapheneDensity = 7.6e-7;      // kg/m^2

struct CntGeometry {
    double r = 0.0;   ///< tube radius [m]
    double L = 0.0;   ///< suspended length [m]
    double E = 0.0;   ///< elastic modulus [Pa]
    double R = 0.0;   ///< gate distance [m]
    double ne = 0.0;  ///< total charge [C]
    double m = 0.0;   ///< motional mass [kg]

    void validate() const {
        auto positive = [](double v, const char* name) {
            if (!(v > 0.0) || !std::isfinite(v)) {
                throw DomainError(std::string("geometry field '") + name + "' must be > 0");
            }
        };
        positive(r, "r");
        positive(L, "L");
        positive(E, "E");
        positive(R, "R");
        positive(m, "m");
        if (!(ne >= 0.0) || !std::isfinite(ne)) {
            throw DomainError("geometry field 'ne' must be >= 0");
        }
        if (!(L > 2.0 * r)) throw DomainError("geometry: L must exceed 2r (slender beam)");
    }
};

/// Rough mass estimate sigma_graphene * 2 pi r L; not part of the model proper.
inline double estimated_mass(double r, double L) {
    return kGrapheneDensity * 2.0 * std::numbers::pi * r * L;
}

enum class TensionModel {
    closed_form,      ///< T = K0 L^6 S / (60480 E I^2)
    self_consistent,  ///< T = (E S / 8L) int z'^2 dx, iterated to a fixed point
};

enum class ProfileReading {
    corrected,  ///< prefactor sinh(eps L)/(cosh(eps L) - 1)
    literal,    ///< sinh(eps L)/(cosh(eps x) - 1) * (cosh(eps x) - 1), as typeset
};

struct DerivedMechanics {
    double S = 0.0;          ///< m^2
    double I = 0.0;          ///< m^4
    double K0 = 0.0;         ///< N/m
    double tension = 0.0;    ///< N
    double epsilon = 0.0;    ///< 1/m
    double epsilon_L = 0.0;
    double omega = 0.0;      ///< rad/s
    bool low_temperature = false;  ///< epsilon * L < 1
    bool degenerate = false;       ///< zero tension, zero frequency
    TensionModel tension_model = TensionModel::closed_form;
    int tension_iterations = 0;
};

namespace detail {

inline constexpr double kSeriesThreshold = 1e-2;

/// (cosh(y) - cosh(a)) / sinh(a) for |y| <= a, overflow-free.
inline double cosh_ratio(double y, double a) {
    const double ay = std::abs(y);
    if (a < 20.0) return 2.0 * std::sinh(0.5 * (ay + a)) * std::sinh(0.5 * (ay - a)) / std::sinh(a);
    return (std::exp(ay - a) * (1.0 + std::exp(-2.0 * ay)) - (1.0 + std::exp(-2.0 * a))) /
           (1.0 - std::exp(-2.0 * a));
}

/// sinh(y) / sinh(a) for |y| <= a.
inline double sinh_ratio(double y, double a) {
    if (a < 20.0) return std::sinh(y) / std::sinh(a);
    const double ay = std::abs(y);
    const double v = std::exp(ay - a) * (1.0 - std::exp(-2.0 * ay)) / (1.0 - std::exp(-2.0 * a));
    return y < 0.0 ? -v : v;
}

}  // namespace detail

struct DeflectionValue {
    double full = 0.0;             ///< closed-form clamped-beam solution
    double low_temperature = 0.0;  ///< eps*x << 1 reduction
};

/// Clamped-clamped deflection under uniform load K0 with tension T.
inline DeflectionValue deflection_profile(const CntGeometry& g, const DerivedMechanics& d, double x,
                                          ProfileReading reading = ProfileReading::corrected) {
    const double L = g.L;
    if (!(x >= 0.0 && x <= L)) {
        throw DomainError("deflection_profile: x = " + std::to_string(x) + " outside [0, L]");
    }
    DeflectionValue out;
    if (d.K0 == 0.0 || d.tension == 0.0) return out;

    const double eps = d.epsilon;
    const double kappa = eps * L;
    const double T = d.tension;

    out.low_temperature =
        d.K0 * x * x / T * (0.5 + (kappa > 0.0 ? kappa / (4.0 * std::tanh(0.5 * kappa)) : 0.5));

    if (reading == ProfileReading::literal) {
        const double cx = std::cosh(eps * x) - 1.0;
        const double bracket = std::sinh(kappa) / cx * cx - std::sinh(eps * x) + eps * x - eps * x * x / L;
        out.full = d.K0 * L / (2.0 * T * eps) * bracket;
        return out;
    }

    if (kappa < detail::kSeriesThreshold) {
        const double e2 = eps * eps;
        const double base = x * x * (L - x) * (L - x) / (24.0 * g.E * d.I);
        const double c1 = (-L * L - 2.0 * L * x + 2.0 * x * x) / 60.0;
        const double c2 = (2.0 * std::pow(L, 4) + 4.0 * std::pow(L, 3) * x - L * L * x * x -
                           6.0 * L * std::pow(x, 3) + 3.0 * std::pow(x, 4)) / 5040.0;
        out.full = d.K0 * base * (1.0 + e2 * c1 + e2 * e2 * c2);
        return out;
    }
    const double a = 0.5 * kappa;
    const double bracket = detail::cosh_ratio(eps * x - a, a) + eps * x * (L - x) / L;
    out.full = d.K0 * L / (2.0 * T * eps) * bracket;
    return out;
}

/// dz/dx of the corrected closed-form profile.
inline double deflection_slope(const CntGeometry& g, const DerivedMechanics& d, double x) {
    if (d.K0 == 0.0 || d.tension == 0.0) return 0.0;
    const double L = g.L;
    const double eps = d.epsilon;
    const double kappa = eps * L;
    if (kappa < detail::kSeriesThreshold) {
        const double e2 = eps * eps;
        const double base = x * (x - L) * (2.0 * x - L) / (12.0 * g.E * d.I);
        const double c1 = (-L * L - 3.0 * L * x + 3.0 * x * x) / 60.0;
        const double c2 = (std::pow(L, 4) + 3.0 * std::pow(L, 3) * x - 6.0 * L * std::pow(x, 3) +
                           3.0 * std::pow(x, 4)) / 2520.0;
        return d.K0 * base * (1.0 + e2 * c1 + e2 * e2 * c2);
    }
    const double a = 0.5 * kappa;
    return d.K0 * L / (2.0 * d.tension) * (detail::sinh_ratio(eps * x - a, a) + 1.0 - 2.0 * x / L);
}

namespace detail {

inline void fill_tension_dependents(const CntGeometry& g, DerivedMechanics& d) {
    d.epsilon = std::sqrt(d.tension / (g.E * d.I));
    d.epsilon_L = d.epsilon * g.L;
    d.omega = std::sqrt(32.0 * d.tension / (g.m * g.L));
    d.low_temperature = d.epsilon_L < 1.0;
}

/// (E S / 8L) int_0^L z'^2 dx by composite Simpson.
inline double tension_integral(const CntGeometry& g, const DerivedMechanics& d) {
    constexpr int n = 4000;
    const double h = g.L / n;
    double sum = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double s = deflection_slope(g, d, std::min(g.L, i * h));
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        sum += w * s * s;
    }
    return g.E * d.S / (8.0 * g.L) * (h / 3.0) * sum;
}

}  // namespace detail

inline DerivedMechanics derive_mechanics(const CntGeometry& g,
                                         TensionModel model = TensionModel::closed_form) {
    g.validate();
    DerivedMechanics d;
    d.tension_model = model;
    d.S = std::numbers::pi * g.r * g.r;
    d.I = std::numbers::pi * std::pow(g.r, 4) / 4.0;
    d.K0 = kCoulomb * g.ne * g.ne / (g.L * g.L * g.R);
    d.tension = d.K0 * std::pow(g.L, 6) * d.S / (60480.0 * g.E * d.I * d.I);
    if (!(d.tension > 0.0)) {
        d.tension = 0.0;
        d.degenerate = true;
        return d;
    }
    detail::fill_tension_dependents(g, d);
    if (model == TensionModel::closed_form) return d;

    // Secant on h(u) = u - log g(e^u), u = log T; h' lies in [1, 3].
    double u = std::log(d.tension);
    auto residual = [&](double uu) {
        DerivedMechanics trial = d;
        trial.tension = std::exp(uu);
        detail::fill_tension_dependents(g, trial);
        return uu - std::log(detail::tension_integral(g, trial));
    };
    double h = residual(u);
    double slope = 1.0;
    double prev_u = u;
    double prev_h = h;
    for (int it = 1; it <= 100; ++it) {
        const double step = -h / std::clamp(slope, 1.0, 3.0);
        u += step;
        d.tension_iterations = it;
        if (std::abs(std::expm1(step)) < 1e-10) break;
        h = residual(u);
        if (u != prev_u) slope = (h - prev_h) / (u - prev_u);
        prev_u = u;
        prev_h = h;
    }
    d.tension = std::exp(u);
    detail::fill_tension_dependents(g, d);
    return d;
}

struct EnergyTerms {
    double W_m = 0.0;  ///< int (EI/2) z''^2 + T z'^2 dx
    double W_e = 0.0;  ///< -K0 int z dx
    double total() const { return W_m + W_e; }
};

/// Energy functional of a profile sampled uniformly on [0, L].
inline EnergyTerms energy_functional(std::span<const double> z, const CntGeometry& g,
                                     const DerivedMechanics& d) {
    const std::size_t n = z.size();
    if (n < 4) {
        throw ResolutionError("energy_functional: need at least 4 samples, got " + std::to_string(n));
    }
    const double h = g.L / static_cast<double>(n - 1);
    std::vector<double> dz(n), d2z(n);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        dz[i] = (z[i + 1] - z[i - 1]) / (2.0 * h);
        d2z[i] = (z[i + 1] - 2.0 * z[i] + z[i - 1]) / (h * h);
    }
    dz[0] = (-3.0 * z[0] + 4.0 * z[1] - z[2]) / (2.0 * h);
    dz[n - 1] = (3.0 * z[n - 1] - 4.0 * z[n - 2] + z[n - 3]) / (2.0 * h);
    d2z[0] = (2.0 * z[0] - 5.0 * z[1] + 4.0 * z[2] - z[3]) / (h * h);
    d2z[n - 1] = (2.0 * z[n - 1] - 5.0 * z[n - 2] + 4.0 * z[n - 3] - z[n - 4]) / (h * h);

    std::vector<double> elastic(n), load(n);
    for (std::size_t i = 0; i < n; ++i) {
        elastic[i] = 0.5 * g.E * d.I * d2z[i] * d2z[i] + d.tension * dz[i] * dz[i];
        load[i] = z[i];
    }
    // Simpson on an even number of intervals, trapezoid on a trailing odd one.
    auto integrate = [&](const std::vector<double>& f) {
        const std::size_t intervals = n - 1;
        const std::size_t simpson = intervals - intervals % 2;
        double s = 0.0;
        for (std::size_t i = 0; i < simpson; i += 2) s += f[i] + 4.0 * f[i + 1] + f[i + 2];
        s *= h / 3.0;
        if (simpson < intervals) s += 0.5 * h * (f[n - 2] + f[n - 1]);
        return s;
    };
    EnergyTerms e;
    e.W_m = integrate(elastic);
    e.W_e = -d.K0 * integrate(load);
    return e;
}

/// Samples of the deflection profile on `count` uniform points of [0, L].
inline std::vector<double> sample_profile(const CntGeometry& g, const DerivedMechanics& d,
                                          std::size_t count, bool full = true) {
    std::vector<double> z(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double x = std::min(g.L, g.L * static_cast<double>(i) / static_cast<double>(count - 1));
        const auto v = deflection_profile(g, d, x);
        z[i] = full ? v.full : v.low_temperature;
    }
    return z;
}

struct QuantizedMode {
    double omega = 0.0;         ///< rad/s
    double zpf = 0.0;           ///< sqrt(hbar / 2 m omega) [m]
    double F_scale = 0.0;       ///< K0 * zpf / hbar [rad/s]
    double F_over_omega = 0.0;  ///< F_scale / omega
};

inline QuantizedMode quantize(const CntGeometry& g, const DerivedMechanics& d) {
    if (!(d.omega > 0.0)) {
        throw DegenerateModeError("quantize: mode frequency is zero (uncharged or untensioned tube)");
    }
    QuantizedMode q;
    q.omega = d.omega;
    q.zpf = std::sqrt(kHbar / (2.0 * g.m * d.omega));
    q.F_scale = d.K0 * q.zpf / kHbar;
    q.F_over_omega = q.F_scale / d.omega;
    return q;
}

/// Inverse-power coupling model J0 (d0 / distance)^power.
inline double coupling_from_distance(double J0, double d0, double distance, double power = 3.0) {
    if (!(distance > 0.0)) {
        throw DomainError("coupling_from_distance: distance must be > 0");
    }
    if (!(d0 > 0.0)) throw DomainError("coupling_from_distance: reference distance must be > 0");
    return J0 * std::pow(d0 / distance, power);
}

/// T0 = hbar omega / k_B.
inline double reference_temperature(double omega) { return kHbar * omega / kBoltzmann; }

struct ReportOptions {
    double target_frequency_hz = 0.0;  ///< 0 disables the mismatch check
    double mismatch_threshold = 0.05;
    TensionModel tension_model = TensionModel::closed_form;
};

/// Plain-text listing of every intermediate of derive_mechanics + quantize.
inline std::string derivation_report(const CntGeometry& g, const ReportOptions& opt = {}) {
    const DerivedMechanics d = derive_mechanics(g, opt.tension_model);
    std::ostringstream os;
    os.precision(6);
    os << std::scientific;
    os << "nanotube derivation report\n";
    os << "geometry: r = " << g.r << " m, L = " << g.L << " m, E = " << g.E << " Pa, R = " << g.R
       << " m, ne = " << g.ne << " C, m = " << g.m << " kg\n";
    os << "S        = " << d.S << " m^2\n";
    os << "I        = " << d.I << " m^4\n";
    os << "K0       = " << d.K0 << " N/m\n";
    os << "T        = " << d.tension << " N ("
       << (d.tension_model == TensionModel::closed_form ? "closed form" : "self-consistent") << ")\n";
    os << "epsilon  = " << d.epsilon << " 1/m\n";
    os << "epsilonL = " << d.epsilon_L << "\n";
    os << "low-temperature approximation (epsilon L < 1): " << (d.low_temperature ? "yes" : "no")
       << "\n";
    os << "omega    = " << d.omega << " rad/s (f = " << d.omega / (2.0 * std::numbers::pi)
       << " Hz)\n";
    if (d.degenerate) {
        os << "WARNING: zero tension; degenerate mode (omega = 0), no quantization possible\n";
        return os.str();
    }
    const QuantizedMode q = quantize(g, d);
    os << "zpf      = " << q.zpf << " m\n";
    os << "F        = " << q.F_scale << " rad/s (F/omega = " << q.F_over_omega << ")\n";
    os << "T0       = " << reference_temperature(d.omega) << " K\n";
    if (opt.target_frequency_hz > 0.0) {
        const double f = d.omega / (2.0 * std::numbers::pi);
        const double rel = std::abs(f - opt.target_frequency_hz) / opt.target_frequency_hz;
        os << "target   = " << opt.target_frequency_hz << " Hz, relative mismatch " << rel << "\n";
        if (rel > opt.mismatch_threshold) {
            os << "WARNING: derived frequency differs from target by more than "
               << opt.mismatch_threshold * 100.0 << "%\n";
        }
    }
    return os.str();
}

}  // namespace nanoblock::cnt
