#pragma once

// Closed-form results for the two-type synchronization model: limiting
// velocity, stationary two-particle gap law, mean-field moment trajectories,
// their asymptotic constants, the finite-N variance regime curve and the
// Fourier eigenvalues of the transport-exchange system.

#include <complex>

namespace tsync {

using Complex = std::complex<double>;

/// Velocities and cross-type jump rates. Self-jump rates are fixed at zero.
struct ModelParams {
    double v1 = 0.0;
    double v2 = 1.0;
    double alpha12 = 1.0; ///< rate at which a type-1 particle jumps onto a type-2 particle
    double alpha21 = 1.0; ///< rate at which a type-2 particle jumps onto a type-1 particle

    /// Throws InvalidArgument unless both rates are positive, everything is
    /// finite and v1 <= v2.
    void validate() const;

    double rate_sum() const noexcept { return alpha12 + alpha21; }

    friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

struct InitialMoments {
    double a1_0 = 0.0;
    double a2_0 = 0.0;
    double d1_0 = 0.0;
    double d2_0 = 0.0;

    void validate() const;
};

struct AsymptoticConstants {
    double v = 0.0;          ///< common drift of both species
    double gap_inf = 0.0;    ///< limit of a2 - a1
    double d_slope = 0.0;    ///< growth rate of each d_i
    double d_diff_inf = 0.0; ///< limit of d2 - d1
    double h_kappa2 = 0.0;   ///< product h * kappa2 of the regime curve
};

struct SpectralEigenpair {
    Complex lambda_plus;
    Complex lambda_minus;
    Complex a_coef; ///< minus the trace of A(p)
    Complex b_coef; ///< determinant of A(p)
};

struct MeanPair {
    double a1 = 0.0;
    double a2 = 0.0;
};

struct VariancePair {
    double d1 = 0.0;
    double d2 = 0.0;
};

struct VelocityResiduals {
    double residual_1 = 0.0;
    double residual_2 = 0.0;
};

struct ExpansionCoefficients {
    Complex c1;
    Complex c2;
    double fit_residual = 0.0;
};

double limiting_velocity(const ModelParams& params);

/// Rate of the exponential stationary law of x2 - x1 for one particle per type.
double gap_rate(const ModelParams& params);

/// v1 + alpha12 E[gap] - v and v2 - alpha21 E[gap] - v under the exponential gap law.
VelocityResiduals velocity_consistency_residuals(const ModelParams& params);

/// Mean-field gap a2(t) - a1(t) started from `gap0`.
double mean_gap(const ModelParams& params, double gap0, double t);

MeanPair mean_trajectories(const ModelParams& params, const InitialMoments& init, double t);

/// Exact solution of the variance equations, integrated in the decoupled basis
/// (alpha21 d1 + alpha12 d2, d2 - d1) against the closed-form gap.
VariancePair variance_trajectories(const ModelParams& params, const InitialMoments& init,
                                   double t);

AsymptoticConstants asymptotic_constants(const ModelParams& params);

/// h (1 - exp(-kappa2 s)) with h = h_kappa2 / kappa2; the expected empirical
/// variance divided by N at time t = s N.
double regime_curve(const ModelParams& params, double kappa2, double s);

/// Eigenvalues of A(p) = [[-i v1 p - a12, a12], [a21, -i v2 p - a21]].
/// lambda_plus is the root with the larger real part, which is the branch
/// that vanishes at p = 0 and varies continuously with p.
SpectralEigenpair spectral_eigen(const ModelParams& params, double p);

/// Small-p Taylor coefficients of lambda_plus(p) = c1 p + c2 p^2 + O(p^3),
/// from a least-squares polynomial fit over p in {±1e-3, ±2e-3, ±4e-3}.
/// Throws NumericalInstability when the relative fit residual exceeds 1e-8.
ExpansionCoefficients lambda_plus_expansion(const ModelParams& params);

} // namespace tsync
