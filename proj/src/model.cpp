#include "tsync/model.hpp"

#include "tsync/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace tsync {

namespace {

void require_spread(const ModelParams& params)
{
    params.validate();
    if (!(params.v2 > params.v1)) {
        throw DegenerateVelocities();
    }
}

} // namespace

void ModelParams::validate() const
{
    if (!std::isfinite(v1) || !std::isfinite(v2) || !std::isfinite(alpha12) ||
        !std::isfinite(alpha21)) {
        throw InvalidArgument("model parameters must be finite");
    }
    if (!(alpha12 > 0.0) || !(alpha21 > 0.0)) {
        throw InvalidArgument("jump rates alpha12 and alpha21 must be positive");
    }
    if (v1 > v2) {
        throw InvalidArgument("velocities must satisfy v1 <= v2");
    }
}

void InitialMoments::validate() const
{
    if (!(d1_0 >= 0.0) || !(d2_0 >= 0.0)) {
        throw InvalidArgument("initial variances must be nonnegative");
    }
}

double limiting_velocity(const ModelParams& params)
{
    params.validate();
    return (params.alpha21 * params.v1 + params.alpha12 * params.v2) / params.rate_sum();
}

double gap_rate(const ModelParams& params)
{
    require_spread(params);
    return params.rate_sum() / (params.v2 - params.v1);
}

VelocityResiduals velocity_consistency_residuals(const ModelParams& params)
{
    const double mean_gap = 1.0 / gap_rate(params);
    const double v = limiting_velocity(params);
    return {params.v1 + params.alpha12 * mean_gap - v, params.v2 - params.alpha21 * mean_gap - v};
}

double mean_gap(const ModelParams& params, double gap0, double t)
{
    params.validate();
    const double s = params.rate_sum();
    const double g_inf = (params.v2 - params.v1) / s;
    return g_inf + (gap0 - g_inf) * std::exp(-s * t);
}

MeanPair mean_trajectories(const ModelParams& params, const InitialMoments& init, double t)
{
    params.validate();
    if (t < 0.0) {
        throw InvalidArgument("time must be nonnegative");
    }
    const double s = params.rate_sum();
    const double g_inf = (params.v2 - params.v1) / s;
    const double c = (init.a2_0 - init.a1_0) - g_inf;
    // integral of the gap over [0, t]
    const double gap_integral = g_inf * t - c * std::expm1(-s * t) / s;
    const double a1 = init.a1_0 + params.v1 * t + params.alpha12 * gap_integral;
    return {a1, a1 + mean_gap(params, init.a2_0 - init.a1_0, t)};
}

VariancePair variance_trajectories(const ModelParams& params, const InitialMoments& init,
                                   double t)
{
    params.validate();
    init.validate();
    if (t < 0.0) {
        throw InvalidArgument("time must be nonnegative");
    }
    const double a12 = params.alpha12;
    const double a21 = params.alpha21;
    const double s = params.rate_sum();
    const double g_inf = (params.v2 - params.v1) / s;
    const double c = (init.a2_0 - init.a1_0) - g_inf;
    const double decay = std::exp(-s * t);
    const double one_minus = -std::expm1(-s * t);

    // gap(t)^2 = g^2 + 2 g c e^{-st} + c^2 e^{-2st}
    const double gap2_integral = g_inf * g_inf * t + 2.0 * g_inf * c * one_minus / s +
                                 c * c * (-std::expm1(-2.0 * s * t)) / (2.0 * s);
    const double gap2_convolved = g_inf * g_inf * one_minus / s + 2.0 * g_inf * c * t * decay +
                                  c * c * decay * one_minus / s;

    const double weighted = a21 * init.d1_0 + a12 * init.d2_0 + 2.0 * a12 * a21 * gap2_integral;
    const double diff = (init.d2_0 - init.d1_0) * decay + (a21 - a12) * gap2_convolved;

    const double d1 = (weighted - a12 * diff) / s;
    return {d1, d1 + diff};
}

AsymptoticConstants asymptotic_constants(const ModelParams& params)
{
    require_spread(params);
    const double s = params.rate_sum();
    const double gap_inf = (params.v2 - params.v1) / s;
    AsymptoticConstants out;
    out.v = limiting_velocity(params);
    out.gap_inf = gap_inf;
    out.d_diff_inf = gap_inf * gap_inf * (params.alpha21 - params.alpha12) / s;
    out.h_kappa2 = 2.0 * params.alpha12 * params.alpha21 * gap_inf * gap_inf / s;
    out.d_slope = out.h_kappa2;
    return out;
}

double regime_curve(const ModelParams& params, double kappa2, double s)
{
    if (!(kappa2 > 0.0)) {
        throw InvalidArgument("kappa2 must be positive");
    }
    if (s < 0.0) {
        throw InvalidArgument("scaled time s must be nonnegative");
    }
    const double h_kappa2 = asymptotic_constants(params).h_kappa2;
    return h_kappa2 / kappa2 * (-std::expm1(-kappa2 * s));
}

SpectralEigenpair spectral_eigen(const ModelParams& params, double p)
{
    const Complex i{0.0, 1.0};
    const double v1 = params.v1;
    const double v2 = params.v2;
    SpectralEigenpair out;
    out.a_coef = i * (v1 + v2) * p + params.alpha12 + params.alpha21;
    out.b_coef = -v1 * v2 * p * p + i * p * (v1 * params.alpha21 + v2 * params.alpha12);

    // roots of z^2 + a z + b; the larger-magnitude root first, the other by
    // Vieta, which avoids cancellation in lambda_plus near p = 0
    const Complex half_a = 0.5 * out.a_coef;
    Complex disc = std::sqrt(half_a * half_a - out.b_coef);
    if (std::real(std::conj(half_a) * disc) < 0.0) {
        disc = -disc;
    }
    const Complex big = -(half_a + disc);
    const Complex small = std::abs(big) > 0.0 ? out.b_coef / big : Complex{0.0, 0.0};
    if (std::real(small) >= std::real(big)) {
        out.lambda_plus = small;
        out.lambda_minus = big;
    } else {
        out.lambda_plus = big;
        out.lambda_minus = small;
    }
    return out;
}

ExpansionCoefficients lambda_plus_expansion(const ModelParams& params)
{
    require_spread(params);
    constexpr std::array<double, 6> grid{-4e-3, -2e-3, -1e-3, 1e-3, 2e-3, 4e-3};
    constexpr double scale = 4e-3;
    constexpr int degree = 4;

    Eigen::Matrix<double, 6, degree> design;
    Eigen::Matrix<double, 6, 2> rhs;
    double lambda_max = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double q = grid[k] / scale;
        double power = 1.0;
        for (int j = 0; j < degree; ++j) {
            power *= q;
            design(static_cast<Eigen::Index>(k), j) = power;
        }
        const Complex lambda = spectral_eigen(params, grid[k]).lambda_plus;
        rhs(static_cast<Eigen::Index>(k), 0) = lambda.real();
        rhs(static_cast<Eigen::Index>(k), 1) = lambda.imag();
        lambda_max = std::max(lambda_max, std::abs(lambda));
    }

    const Eigen::ColPivHouseholderQR<Eigen::Matrix<double, 6, degree>> qr(design);
    const Eigen::Matrix<double, degree, 2> coef = qr.solve(rhs);
    const Eigen::Matrix<double, 6, 2> misfit = design * coef - rhs;

    double worst = 0.0;
    for (Eigen::Index k = 0; k < misfit.rows(); ++k) {
        worst = std::max(worst, std::hypot(misfit(k, 0), misfit(k, 1)));
    }

    ExpansionCoefficients out;
    out.c1 = Complex{coef(0, 0), coef(0, 1)} / scale;
    out.c2 = Complex{coef(1, 0), coef(1, 1)} / (scale * scale);
    out.fit_residual = lambda_max > 0.0 ? worst / lambda_max : worst;
    if (!(out.fit_residual <= 1e-8)) {
        throw NumericalInstability("lambda_plus fit residual " +
                                   std::to_string(out.fit_residual) + " exceeds 1e-8");
    }
    return out;
}

} // namespace tsync
