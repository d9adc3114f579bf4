#pragma once

// Monte Carlo estimators over independent replicas of the particle system,
// the Kolmogorov-Smirnov distance, and the one-parameter fit of the variance
// regime curve.

#include "tsync/model.hpp"
#include "tsync/parallel.hpp"
#include "tsync/particles.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace tsync {

struct McEstimate {
    double value = 0.0;
    double std_error = 0.0; ///< replica-level sample deviation / sqrt(replicas)
    std::size_t replicas = 0;
};

/// Mean and standard error of i.i.d. replica values. A single value has
/// infinite standard error.
McEstimate estimate_from(std::span<const double> values);

struct MomentRun {
    ModelParams params;
    std::size_t n1 = 1;
    std::size_t n2 = 1;
    InitialCondition init = SingularStart{};
    std::vector<double> times; ///< observation times, nondecreasing
    std::uint64_t seed = 0;
};

struct MomentEstimates {
    double t = 0.0;
    McEstimate mu1;
    McEstimate mu2;
    McEstimate l12; ///< mu1 - mu2
    McEstimate R1;
    McEstimate R2;
};

/// Initial state of replicate `replica`: the configuration is drawn from one
/// stream and the dynamics seeded from the same stream's first output.
ParticleState replica_state(const MomentRun& run, std::uint64_t replica);

/// Observables of replicate `replica` at each of run.times.
std::vector<Observables> replica_observables(const MomentRun& run, std::uint64_t replica);

/// Replicates [first, first + count) in index order.
std::vector<std::vector<Observables>> collect_replicas(const MomentRun& run, std::size_t first,
                                                       std::size_t count,
                                                       Execution exec = Execution::Parallel);

/// Folds replica outputs (outer index = replica) into per-time estimates.
std::vector<MomentEstimates> summarize_moments(std::span<const double> times,
                                               const std::vector<std::vector<Observables>>& replicas);

/// Estimates of mu_i, l12 and R_i at every run time. Requires replicas >= 2.
std::vector<MomentEstimates> mc_moments(const MomentRun& run, std::size_t replicas,
                                        Execution exec = Execution::Parallel);

struct StationaryMarginals {
    double q1 = 0.0;
    double q2 = 0.0;
    /// Mean distance from the minimum to the nearest other particle given
    /// that the minimum has type i; zero when that class was never observed.
    double mean_nearest_1 = 0.0;
    double mean_nearest_2 = 0.0;
    std::size_t count1 = 0;
    std::size_t count2 = 0;

    /// q1 (v1 + a12 y1) + q2 (v2 + a21 y2)
    double identity_velocity(const ModelParams& params) const;
};

/// Samples the minimum's type and nearest-neighbour distance along one chain
/// started from the origin, after burn-in, every `spacing`. Throws
/// ConditioningError when a class is observed but fewer than 10 times.
StationaryMarginals stationary_marginals(const ModelParams& params, std::size_t n1, std::size_t n2,
                                         double t_burnin, std::size_t n_samples, double spacing,
                                         std::uint64_t seed);

struct VelocityIdentityCheck {
    McEstimate identity; ///< per-replica q1 (v1 + a12 y1) + q2 (v2 + a21 y2)
    McEstimate speed;    ///< per-replica centre-of-mass speed over the sampling window
    McEstimate difference;
    StationaryMarginals pooled;
};

VelocityIdentityCheck velocity_identity(const ModelParams& params, std::size_t n1, std::size_t n2,
                                        double t_burnin, std::size_t samples_per_replica,
                                        double spacing, std::size_t replicas, std::uint64_t seed,
                                        Execution exec = Execution::Parallel);

struct TwoParticleVelocity {
    McEstimate speed;      ///< per-replica centre of mass at the horizon divided by the horizon
    McEstimate mean_gap;   ///< per-replica average of x2 - x1 over the sampling times
    McEstimate residual_1; ///< v1 + alpha12 * gap - speed
    McEstimate residual_2; ///< v2 - alpha21 * gap - speed
};

/// Two particles started at the origin and run to `horizon`; the gap is
/// sampled every `spacing` from `t_burnin` on. Requires t_burnin < horizon.
TwoParticleVelocity two_particle_velocity(const ModelParams& params, double horizon,
                                          double t_burnin, double spacing, std::size_t replicas,
                                          std::uint64_t seed, Execution exec = Execution::Parallel);

/// sup_x |F_n(x) - cdf(x)|. Throws InvalidArgument on empty input.
double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf);

/// Two-sample Kolmogorov-Smirnov distance.
double ks_two_sample(std::span<const double> a, std::span<const double> b);

struct ScanPoint {
    std::size_t N = 0;
    double s = 0.0;
    double R_over_N = 0.0;
    double std_error = 0.0;
};

struct Kappa2Fit {
    double kappa2 = 0.0;
    double h = 0.0;
    double residual = 0.0;          ///< root mean square of the weighted misfits
    bool flat_likelihood = false;   ///< data cannot identify kappa2 (only s << 1/kappa2)
    std::vector<double> objective_trace; ///< best objective after each refinement step
};

/// Weighted least squares of R/N against h (1 - exp(-kappa2 s)) under the
/// hard constraint h * kappa2 = h_kappa2. Needs at least 4 distinct s values.
/// Throws FitError when the minimum sits on the search boundary and the
/// objective is not flat.
Kappa2Fit fit_kappa2(std::span<const ScanPoint> scan, double h_kappa2);

/// 1 when kappa2 s < 0.1, 3 when kappa2 s > 5, otherwise 2.
int classify_region(double kappa2, double s);

struct ScanRequest {
    ModelParams params;
    std::vector<std::size_t> totals{50, 100, 200};
    double c1 = 0.5;
    std::vector<double> s_values{0.1, 0.25, 0.5, 1.0, 2.0, 3.0};
    std::size_t replicas = 64;
    std::uint64_t seed = 0;
};

struct RegimeScanResult {
    std::vector<ScanPoint> entries;
    Kappa2Fit fit;                     ///< all N pooled
    std::vector<Kappa2Fit> fits_per_N; ///< same order as request.totals
    double h_kappa2 = 0.0;
};

/// Type-1 count floor(c1 N), type-2 count N - N1. Throws if either is zero.
std::pair<std::size_t, std::size_t> split_population(std::size_t total, double c1);

/// For each N runs replicas from the singular start and records the mean
/// empirical variance (R1 + R2) / 2 divided by N at t = s N.
RegimeScanResult regime_scan(const ScanRequest& request, Execution exec = Execution::Parallel);

} // namespace tsync
