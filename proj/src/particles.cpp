#include "tsync/particles.hpp"

#include "tsync/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>
#include <utility>

namespace tsync {

ParticleState::ParticleState(const ModelParams& params, std::span<const double> init1,
                             std::span<const double> init2, std::uint64_t seed)
    : params_(params), rng_(seed)
{
    for (double x : init1) {
        base1_.push_back({x, 0.0});
    }
    for (double x : init2) {
        base2_.push_back({x, 0.0});
    }
    params_.validate();
    if (base1_.empty() || base2_.empty()) {
        throw InvalidArgument("both populations must be nonempty");
    }
    next_jump_time_ = rng_.exponential(total_rate());
}

double ParticleState::total_rate() const noexcept
{
    return static_cast<double>(n1()) * params_.alpha12 + static_cast<double>(n2()) * params_.alpha21;
}

double ParticleState::at(int type, std::size_t index, double t) const
{
    const Anchored& p = type == 1 ? base1_[index] : base2_[index];
    return p.x + (type == 1 ? params_.v1 : params_.v2) * (t - p.anchor);
}

double ParticleState::position(int type, std::size_t index) const
{
    if (type != 1 && type != 2) {
        throw InvalidArgument("particle type must be 1 or 2");
    }
    if (index >= (type == 1 ? n1() : n2())) {
        throw InvalidArgument("particle index out of range");
    }
    return at(type, index, clock_);
}

std::vector<double> ParticleState::positions(int type) const
{
    if (type != 1 && type != 2) {
        throw InvalidArgument("particle type must be 1 or 2");
    }
    std::vector<double> out(type == 1 ? n1() : n2());
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = at(type, k, clock_);
    }
    return out;
}

JumpEvent ParticleState::next_event() const
{
    JumpEvent event;
    Rng rng = rng_;
    event.wait = next_jump_time_ - clock_;
    const double rate1 = static_cast<double>(n1()) * params_.alpha12;
    event.source_type = rng.uniform() * total_rate() < rate1 ? 1 : 2;
    if (event.source_type == 1) {
        event.source_index = rng.below(n1());
        event.target_index = rng.below(n2());
    } else {
        event.source_index = rng.below(n2());
        event.target_index = rng.below(n1());
    }
    event.rng_after = rng;
    return event;
}

void ParticleState::apply(const JumpEvent& event)
{
    // event.wait == next_jump_time_ - clock_; use the stored absolute time so
    // that pausing at an intermediate clock does not perturb the jump time
    const double when = next_jump_time_;
    if (event.source_type == 1) {
        base1_.at(event.source_index) = {at(2, event.target_index, when), when};
    } else {
        base2_.at(event.source_index) = {at(1, event.target_index, when), when};
    }
    clock_ = when;
    rng_ = event.rng_after;
    ++jumps_;
    next_jump_time_ = clock_ + rng_.exponential(total_rate());
}

void ParticleState::run_until(double t)
{
    if (t < clock_) {
        throw InvalidArgument("run_until: target time lies in the past");
    }
    while (next_jump_time_ <= t) {
        apply(next_event());
    }
    clock_ = t;
}

void ParticleState::drift_only(double t)
{
    if (t < clock_) {
        throw InvalidArgument("drift_only: target time lies in the past");
    }
    clock_ = t;
    next_jump_time_ = clock_ + rng_.exponential(total_rate());
}

Observables ParticleState::observables() const
{
    return observables_of(positions(1), positions(2));
}

MinimumInfo ParticleState::minimum() const
{
    MinimumInfo info;
    info.position = std::numeric_limits<double>::infinity();
    for (int type = 1; type <= 2; ++type) {
        const std::size_t count = type == 1 ? n1() : n2();
        for (std::size_t k = 0; k < count; ++k) {
            const double x = position(type, k);
            if (x < info.position) {
                info.position = x;
                info.type = type;
                info.index = k;
            }
        }
    }
    double nearest = std::numeric_limits<double>::infinity();
    for (int type = 1; type <= 2; ++type) {
        const std::size_t count = type == 1 ? n1() : n2();
        for (std::size_t k = 0; k < count; ++k) {
            if (type == info.type && k == info.index) {
                continue;
            }
            nearest = std::min(nearest, position(type, k) - info.position);
        }
    }
    info.nearest_distance = nearest;
    return info;
}

Observables observables_of(std::span<const double> positions1, std::span<const double> positions2)
{
    const auto mean_var = [](std::span<const double> xs) {
        double sum = 0.0;
        for (double x : xs) {
            sum += x;
        }
        const double mean = sum / static_cast<double>(xs.size());
        double sq = 0.0;
        for (double x : xs) {
            sq += (x - mean) * (x - mean);
        }
        return std::pair{mean, sq / static_cast<double>(xs.size())};
    };
    if (positions1.empty() || positions2.empty()) {
        throw InvalidArgument("observables need nonempty populations");
    }
    Observables out;
    std::tie(out.mean1, out.var1) = mean_var(positions1);
    std::tie(out.mean2, out.var2) = mean_var(positions2);
    out.min_all = std::min(*std::min_element(positions1.begin(), positions1.end()),
                           *std::min_element(positions2.begin(), positions2.end()));
    return out;
}

InitialPositions realize(const InitialCondition& init, std::size_t n1, std::size_t n2, Rng& rng)
{
    InitialPositions out;
    if (const auto* explicit_start = std::get_if<ExplicitStart>(&init)) {
        if (explicit_start->positions1.size() != n1 || explicit_start->positions2.size() != n2) {
            throw InvalidArgument("explicit initial positions do not match the population sizes");
        }
        out.positions1 = explicit_start->positions1;
        out.positions2 = explicit_start->positions2;
    } else if (std::holds_alternative<SingularStart>(init)) {
        out.positions1.assign(n1, 0.0);
        out.positions2.assign(n2, 0.0);
    } else {
        const auto& g = std::get<GaussianStart>(init);
        if (!(g.sd1 >= 0.0) || !(g.sd2 >= 0.0)) {
            throw InvalidArgument("initial standard deviations must be nonnegative");
        }
        out.positions1.resize(n1);
        out.positions2.resize(n2);
        for (auto& x : out.positions1) {
            x = g.mean1 + g.sd1 * rng.normal();
        }
        for (auto& x : out.positions2) {
            x = g.mean2 + g.sd2 * rng.normal();
        }
    }
    return out;
}

Rng replica_stream(std::uint64_t seed, std::uint64_t replica)
{
    return Rng::stream(seed, replica);
}

std::vector<double> gap_samples(const ModelParams& params, std::uint64_t seed, double t_burnin,
                                std::size_t n, double spacing)
{
    if (!(spacing > 0.0)) {
        throw InvalidArgument("gap sample spacing must be positive");
    }
    if (t_burnin < 0.0) {
        throw InvalidArgument("burn-in must be nonnegative");
    }
    const double origin[1] = {0.0};
    ParticleState state(params, origin, origin, seed);
    std::vector<double> gaps;
    gaps.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        state.run_until(t_burnin + static_cast<double>(k) * spacing);
        gaps.push_back(state.position(2, 0) - state.position(1, 0));
    }
    return gaps;
}

double default_gap_spacing(const ModelParams& params)
{
    return 5.0 / params.rate_sum();
}

} // namespace tsync
