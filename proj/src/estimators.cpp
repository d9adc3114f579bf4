#include "tsync/estimators.hpp"

#include "tsync/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <string>

namespace tsync {

McEstimate estimate_from(std::span<const double> values)
{
    McEstimate out;
    out.replicas = values.size();
    if (values.empty()) {
        throw InvalidArgument("no replica values to estimate from");
    }
    const double n = static_cast<double>(values.size());
    out.value = std::accumulate(values.begin(), values.end(), 0.0) / n;
    if (values.size() < 2) {
        out.std_error = std::numeric_limits<double>::infinity();
        return out;
    }
    double sq = 0.0;
    for (double v : values) {
        sq += (v - out.value) * (v - out.value);
    }
    out.std_error = std::sqrt(sq / (n - 1.0) / n);
    return out;
}

namespace {

struct ReplicaSeeds {
    Rng init;
    std::uint64_t dynamics;
};

ReplicaSeeds seeds_for(std::uint64_t seed, std::uint64_t replica)
{
    Rng stream = replica_stream(seed, replica);
    const std::uint64_t dynamics = stream.next();
    return {stream, dynamics};
}

} // namespace

ParticleState replica_state(const MomentRun& run, std::uint64_t replica)
{
    auto seeds = seeds_for(run.seed, replica);
    const auto start = realize(run.init, run.n1, run.n2, seeds.init);
    return ParticleState(run.params, start.positions1, start.positions2, seeds.dynamics);
}

std::vector<Observables> replica_observables(const MomentRun& run, std::uint64_t replica)
{
    ParticleState state = replica_state(run, replica);
    std::vector<Observables> out;
    out.reserve(run.times.size());
    for (double t : run.times) {
        state.run_until(t);
        out.push_back(state.observables());
    }
    return out;
}

std::vector<std::vector<Observables>> collect_replicas(const MomentRun& run, std::size_t first,
                                                       std::size_t count, Execution exec)
{
    run.params.validate();
    if (!std::is_sorted(run.times.begin(), run.times.end()) ||
        (!run.times.empty() && run.times.front() < 0.0)) {
        throw InvalidArgument("observation times must be nonnegative and nondecreasing");
    }
    if (run.n1 == 0 || run.n2 == 0) {
        throw InvalidArgument("both populations must be nonempty");
    }
    return map_indexed(count, exec,
                       [&](std::size_t k) { return replica_observables(run, first + k); });
}

std::vector<MomentEstimates> summarize_moments(std::span<const double> times,
                                               const std::vector<std::vector<Observables>>& replicas)
{
    std::vector<MomentEstimates> out(times.size());
    std::vector<double> mu1(replicas.size()), mu2(replicas.size()), l12(replicas.size()),
        r1(replicas.size()), r2(replicas.size());
    for (std::size_t j = 0; j < times.size(); ++j) {
        for (std::size_t r = 0; r < replicas.size(); ++r) {
            const Observables& o = replicas[r].at(j);
            mu1[r] = o.mean1;
            mu2[r] = o.mean2;
            l12[r] = o.mean1 - o.mean2;
            r1[r] = o.var1;
            r2[r] = o.var2;
        }
        out[j] = {times[j], estimate_from(mu1), estimate_from(mu2), estimate_from(l12),
                  estimate_from(r1), estimate_from(r2)};
    }
    return out;
}

std::vector<MomentEstimates> mc_moments(const MomentRun& run, std::size_t replicas, Execution exec)
{
    if (replicas < 2) {
        throw InvalidArgument("mc_moments needs at least 2 replicas");
    }
    return summarize_moments(run.times, collect_replicas(run, 0, replicas, exec));
}

double StationaryMarginals::identity_velocity(const ModelParams& params) const
{
    return q1 * (params.v1 + params.alpha12 * mean_nearest_1) +
           q2 * (params.v2 + params.alpha21 * mean_nearest_2);
}

namespace {

struct MarginalTally {
    std::size_t count[2] = {0, 0};
    double distance_sum[2] = {0.0, 0.0};
    double com_start = 0.0;
    double com_end = 0.0;
};

double centre_of_mass(const ParticleState& state)
{
    const Observables o = state.observables();
    const double n1 = static_cast<double>(state.n1());
    const double n2 = static_cast<double>(state.n2());
    return (n1 * o.mean1 + n2 * o.mean2) / (n1 + n2);
}

MarginalTally tally_minimum(const ModelParams& params, std::size_t n1, std::size_t n2,
                            double t_burnin, std::size_t n_samples, double spacing,
                            std::uint64_t seed)
{
    if (!(spacing > 0.0) || t_burnin < 0.0) {
        throw InvalidArgument("stationary sampling needs spacing > 0 and burn-in >= 0");
    }
    const std::vector<double> init1(n1, 0.0);
    const std::vector<double> init2(n2, 0.0);
    ParticleState state(params, init1, init2, seed);
    MarginalTally tally;
    for (std::size_t k = 0; k < n_samples; ++k) {
        state.run_until(t_burnin + static_cast<double>(k) * spacing);
        const MinimumInfo m = state.minimum();
        const int cls = m.type - 1;
        ++tally.count[cls];
        tally.distance_sum[cls] += m.nearest_distance;
        if (k == 0) {
            tally.com_start = centre_of_mass(state);
        }
        if (k + 1 == n_samples) {
            tally.com_end = centre_of_mass(state);
        }
    }
    return tally;
}

StationaryMarginals marginals_from(const MarginalTally& tally)
{
    StationaryMarginals out;
    const std::size_t total = tally.count[0] + tally.count[1];
    out.count1 = tally.count[0];
    out.count2 = tally.count[1];
    out.q1 = static_cast<double>(tally.count[0]) / static_cast<double>(total);
    out.q2 = static_cast<double>(tally.count[1]) / static_cast<double>(total);
    for (int cls = 0; cls < 2; ++cls) {
        const std::size_t c = tally.count[cls];
        if (c > 0 && c < 10) {
            throw ConditioningError("minimum observed with type " + std::to_string(cls + 1) +
                                    " only " + std::to_string(c) +
                                    " times; need at least 10 for a conditional mean");
        }
    }
    out.mean_nearest_1 =
        out.count1 > 0 ? tally.distance_sum[0] / static_cast<double>(out.count1) : 0.0;
    out.mean_nearest_2 =
        out.count2 > 0 ? tally.distance_sum[1] / static_cast<double>(out.count2) : 0.0;
    return out;
}

} // namespace

StationaryMarginals stationary_marginals(const ModelParams& params, std::size_t n1, std::size_t n2,
                                         double t_burnin, std::size_t n_samples, double spacing,
                                         std::uint64_t seed)
{
    if (n_samples < 100) {
        throw InvalidArgument("stationary_marginals needs at least 100 samples");
    }
    return marginals_from(tally_minimum(params, n1, n2, t_burnin, n_samples, spacing, seed));
}

VelocityIdentityCheck velocity_identity(const ModelParams& params, std::size_t n1, std::size_t n2,
                                        double t_burnin, std::size_t samples_per_replica,
                                        double spacing, std::size_t replicas, std::uint64_t seed,
                                        Execution exec)
{
    params.validate();
    if (replicas < 2 || samples_per_replica < 2) {
        throw InvalidArgument("velocity_identity needs >= 2 replicas and >= 2 samples each");
    }
    const auto tallies = map_indexed(replicas, exec, [&](std::size_t r) {
        return tally_minimum(params, n1, n2, t_burnin, samples_per_replica, spacing,
                             replica_stream(seed, r).next());
    });

    const double window = static_cast<double>(samples_per_replica - 1) * spacing;
    std::vector<double> identity(replicas), speed(replicas), difference(replicas);
    MarginalTally pooled;
    for (std::size_t r = 0; r < replicas; ++r) {
        const MarginalTally& t = tallies[r];
        // per-sample average of v_type + alpha_type * distance; equals
        // q1 (v1 + a12 y1) + q2 (v2 + a21 y2) with empirical q and y
        identity[r] = (t.count[0] * params.v1 + params.alpha12 * t.distance_sum[0] +
                       t.count[1] * params.v2 + params.alpha21 * t.distance_sum[1]) /
                      static_cast<double>(samples_per_replica);
        speed[r] = (t.com_end - t.com_start) / window;
        difference[r] = identity[r] - speed[r];
        for (int cls = 0; cls < 2; ++cls) {
            pooled.count[cls] += t.count[cls];
            pooled.distance_sum[cls] += t.distance_sum[cls];
        }
    }
    VelocityIdentityCheck out;
    out.identity = estimate_from(identity);
    out.speed = estimate_from(speed);
    out.difference = estimate_from(difference);
    out.pooled = marginals_from(pooled);
    return out;
}

TwoParticleVelocity two_particle_velocity(const ModelParams& params, double horizon,
                                          double t_burnin, double spacing, std::size_t replicas,
                                          std::uint64_t seed, Execution exec)
{
    params.validate();
    if (!(spacing > 0.0) || t_burnin < 0.0 || !(t_burnin < horizon)) {
        throw InvalidArgument("two_particle_velocity needs spacing > 0 and 0 <= burn-in < horizon");
    }
    if (replicas < 2) {
        throw InvalidArgument("two_particle_velocity needs at least 2 replicas");
    }
    struct Path {
        double speed;
        double gap;
    };
    const auto paths = map_indexed(replicas, exec, [&](std::size_t r) {
        const double origin[1] = {0.0};
        ParticleState state(params, origin, origin, replica_stream(seed, r).next());
        double gap_sum = 0.0;
        std::size_t count = 0;
        for (double t = t_burnin; t <= horizon; t = t_burnin + static_cast<double>(count) * spacing) {
            state.run_until(t);
            gap_sum += state.position(2, 0) - state.position(1, 0);
            ++count;
        }
        state.run_until(horizon);
        const double centre = 0.5 * (state.position(1, 0) + state.position(2, 0));
        return Path{centre / horizon, gap_sum / static_cast<double>(count)};
    });
    std::vector<double> speed(replicas), gap(replicas), r1(replicas), r2(replicas);
    for (std::size_t r = 0; r < replicas; ++r) {
        speed[r] = paths[r].speed;
        gap[r] = paths[r].gap;
        r1[r] = params.v1 + params.alpha12 * gap[r] - speed[r];
        r2[r] = params.v2 - params.alpha21 * gap[r] - speed[r];
    }
    return {estimate_from(speed), estimate_from(gap), estimate_from(r1), estimate_from(r2)};
}

double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf)
{
    if (samples.empty()) {
        throw InvalidArgument("ks_statistic needs at least one sample");
    }
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = cdf(sorted[i]);
        const double above = static_cast<double>(i + 1) / n - f;
        const double below = f - static_cast<double>(i) / n;
        worst = std::max({worst, above, below});
    }
    return worst;
}

double ks_two_sample(std::span<const double> a, std::span<const double> b)
{
    if (a.empty() || b.empty()) {
        throw InvalidArgument("ks_two_sample needs nonempty samples");
    }
    std::vector<double> x(a.begin(), a.end());
    std::vector<double> y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const double nx = static_cast<double>(x.size());
    const double ny = static_cast<double>(y.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double worst = 0.0;
    while (i < x.size() && j < y.size()) {
        const double v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] <= v) {
            ++i;
        }
        while (j < y.size() && y[j] <= v) {
            ++j;
        }
        worst = std::max(worst, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
    }
    return worst;
}

namespace {

double fit_objective(std::span<const ScanPoint> scan, std::span<const double> weights,
                     double h_kappa2, double kappa2)
{
    double sum = 0.0;
    for (std::size_t k = 0; k < scan.size(); ++k) {
        const double model = h_kappa2 / kappa2 * (-std::expm1(-kappa2 * scan[k].s));
        const double r = scan[k].R_over_N - model;
        sum += weights[k] * r * r;
    }
    return sum;
}

} // namespace

Kappa2Fit fit_kappa2(std::span<const ScanPoint> scan, double h_kappa2)
{
    std::set<double> distinct;
    for (const auto& p : scan) {
        distinct.insert(p.s);
    }
    if (distinct.size() < 4) {
        throw InvalidArgument("fit_kappa2 needs at least 4 distinct s values");
    }
    if (!(h_kappa2 > 0.0)) {
        throw InvalidArgument("fit_kappa2 needs h_kappa2 > 0");
    }

    // inverse-variance weights; points with zero error (e.g. s = 0) get the
    // largest finite weight, and all-zero errors fall back to unit weights
    std::vector<double> weights(scan.size(), 0.0);
    double max_weight = 0.0;
    for (std::size_t k = 0; k < scan.size(); ++k) {
        if (scan[k].std_error > 0.0) {
            weights[k] = 1.0 / (scan[k].std_error * scan[k].std_error);
            max_weight = std::max(max_weight, weights[k]);
        }
    }
    const bool weighted = max_weight > 0.0;
    for (auto& w : weights) {
        if (w == 0.0) {
            w = weighted ? max_weight : 1.0;
        }
    }
    // search in u = log(kappa2), over a range set by the sampled s values
    const double s_min = *distinct.begin() > 0.0 ? *distinct.begin() : *std::next(distinct.begin());
    const double s_max = *distinct.rbegin();
    const double u_lo = std::log(1e-3 / s_max);
    const double u_hi = std::log(1e3 / s_min);
    const auto objective = [&](double u) {
        return fit_objective(scan, weights, h_kappa2, std::exp(u));
    };

    constexpr int coarse = 200;
    int best = 0;
    double best_value = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= coarse; ++k) {
        const double value = objective(u_lo + (u_hi - u_lo) * k / coarse);
        if (value < best_value) {
            best_value = value;
            best = k;
        }
    }

    Kappa2Fit out;
    const double step = (u_hi - u_lo) / coarse;
    const double u_best = u_lo + step * best;

    // identifiability: doubling kappa2 moves the model by less than one
    // standard error (weighted) or 0.1% of the data scale (unweighted)
    {
        const double k0 = std::exp(u_best);
        double shift = 0.0;
        double scale = 0.0;
        for (std::size_t k = 0; k < scan.size(); ++k) {
            const double f0 = h_kappa2 / k0 * (-std::expm1(-k0 * scan[k].s));
            const double f1 = h_kappa2 / (2.0 * k0) * (-std::expm1(-2.0 * k0 * scan[k].s));
            shift = std::max(shift, std::abs(f1 - f0) * (weighted ? std::sqrt(weights[k]) : 1.0));
            scale = std::max(scale, std::abs(f0));
        }
        out.flat_likelihood = weighted ? shift < 1.0 : shift < 1e-3 * scale;
    }

    if (best == 0 || best == coarse) {
        if (!out.flat_likelihood) {
            throw FitError("kappa2 fit did not converge: optimum on the search boundary");
        }
        out.kappa2 = std::exp(u_best);
        out.h = h_kappa2 / out.kappa2;
        out.residual = std::sqrt(best_value / static_cast<double>(scan.size()));
        out.objective_trace.push_back(best_value);
        return out;
    }

    // golden-section refinement on the coarse bracket; min(fc, fd) cannot
    // increase from one step to the next
    constexpr double inv_phi = 0.6180339887498949;
    double a = u_lo + step * (best - 1);
    double b = u_lo + step * (best + 1);
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = objective(c);
    double fd = objective(d);
    out.objective_trace.push_back(std::min(fc, fd));
    for (int iter = 0; iter < 200 && (b - a) > 1e-12; ++iter) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = objective(d);
        }
        out.objective_trace.push_back(std::min(fc, fd));
    }
    double u_star = fc < fd ? c : d;
    double f_star = std::min(fc, fd);
    if (f_star > best_value) {
        u_star = u_best;
        f_star = best_value;
    }
    out.kappa2 = std::exp(u_star);
    out.h = h_kappa2 / out.kappa2;
    out.residual = std::sqrt(f_star / static_cast<double>(scan.size()));
    return out;
}

int classify_region(double kappa2, double s)
{
    const double x = kappa2 * s;
    if (x < 0.1) {
        return 1;
    }
    if (x > 5.0) {
        return 3;
    }
    return 2;
}

std::pair<std::size_t, std::size_t> split_population(std::size_t total, double c1)
{
    if (!(c1 > 0.0 && c1 < 1.0)) {
        throw InvalidArgument("type-1 fraction c1 must lie in (0, 1)");
    }
    const auto n1 = static_cast<std::size_t>(std::floor(c1 * static_cast<double>(total)));
    if (n1 == 0 || n1 >= total) {
        throw InvalidArgument("population of " + std::to_string(total) +
                              " leaves a type empty at c1 = " + std::to_string(c1));
    }
    return {n1, total - n1};
}

RegimeScanResult regime_scan(const ScanRequest& request, Execution exec)
{
    request.params.validate();
    if (request.replicas < 2) {
        throw InvalidArgument("regime_scan needs at least 2 replicas");
    }
    std::vector<double> s_sorted = request.s_values;
    std::sort(s_sorted.begin(), s_sorted.end());
    if (s_sorted.empty() || s_sorted.front() < 0.0) {
        throw InvalidArgument("scan s values must be nonnegative");
    }

    RegimeScanResult out;
    out.h_kappa2 = asymptotic_constants(request.params).h_kappa2;

    for (std::size_t n_index = 0; n_index < request.totals.size(); ++n_index) {
        const std::size_t total = request.totals[n_index];
        const auto [n1, n2] = split_population(total, request.c1);
        MomentRun run;
        run.params = request.params;
        run.n1 = n1;
        run.n2 = n2;
        run.init = SingularStart{};
        // distinct seeds per population size
        run.seed = Rng::mix(request.seed + 0x9e3779b97f4a7c15ULL * (total + 1));
        for (double s : s_sorted) {
            run.times.push_back(s * static_cast<double>(total));
        }
        const auto replicas = collect_replicas(run, 0, request.replicas, exec);

        std::vector<ScanPoint> points;
        std::vector<double> values(replicas.size());
        for (std::size_t j = 0; j < s_sorted.size(); ++j) {
            for (std::size_t r = 0; r < replicas.size(); ++r) {
                const Observables& o = replicas[r][j];
                values[r] = 0.5 * (o.var1 + o.var2) / static_cast<double>(total);
            }
            const McEstimate e = estimate_from(values);
            points.push_back({total, s_sorted[j], e.value, e.std_error});
        }
        out.fits_per_N.push_back(fit_kappa2(points, out.h_kappa2));
        out.entries.insert(out.entries.end(), points.begin(), points.end());
    }
    out.fit = fit_kappa2(out.entries, out.h_kappa2);
    return out;
}

} // namespace tsync
