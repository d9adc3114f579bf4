#pragma once

// Exact event-driven simulation of the two-type jump-plus-drift particle
// system. A single exponential clock of rate N1*alpha12 + N2*alpha21 drives
// the jumps; the jumping particle is chosen by type in proportion to the
// per-type total rate, then uniformly within its type, and lands on a
// uniformly chosen particle of the other type.

#include "tsync/model.hpp"
#include "tsync/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

namespace tsync {

struct JumpEvent {
    double wait = 0.0;           ///< holding time until the jump, measured from the state's clock
    int source_type = 1;         ///< 1 or 2; the target has the other type
    std::size_t source_index = 0;
    std::size_t target_index = 0;
    Rng rng_after;               ///< generator state once this event's variates are drawn
};

struct Observables {
    double mean1 = 0.0;
    double mean2 = 0.0;
    double var1 = 0.0; ///< population variance, divisor N1
    double var2 = 0.0;
    double min_all = 0.0;
};

/// The particle sitting at the global minimum, ties going to the lower type
/// and then the lower index, and its distance to the nearest other particle.
struct MinimumInfo {
    double position = 0.0;
    int type = 1;
    std::size_t index = 0;
    double nearest_distance = 0.0;
};

class ParticleState {
public:
    ParticleState(const ModelParams& params, std::span<const double> init1,
                  std::span<const double> init2, std::uint64_t seed);

    const ModelParams& params() const noexcept { return params_; }
    std::size_t n1() const noexcept { return base1_.size(); }
    std::size_t n2() const noexcept { return base2_.size(); }
    double clock() const noexcept { return clock_; }
    std::uint64_t jump_count() const noexcept { return jumps_; }
    double total_rate() const noexcept;

    /// Position at the current clock; `type` is 1 or 2.
    double position(int type, std::size_t index) const;
    std::vector<double> positions(int type) const;

    /// The next jump, drawn without touching this state.
    JumpEvent next_event() const;

    /// Drifts every particle to the event time, then moves the source onto
    /// the target. `event` must come from `next_event()` on this state.
    void apply(const JumpEvent& event);

    /// Applies every jump with time <= t, then drifts to t; clock() == t after.
    void run_until(double t);

    /// Test hook with the jump part switched off: drift to t without jumping.
    /// The pending jump is redrawn from t.
    void drift_only(double t);

    Observables observables() const;
    MinimumInfo minimum() const;

    friend bool operator==(const ParticleState&, const ParticleState&) = default;

private:
    ModelParams params_;
    // each particle keeps the position it had at its own anchor time, and
    // position(t) = x + v_i (t - anchor). Drift never touches storage, so
    // run_until(run_until(s, t1), t2) reproduces run_until(s, t2) bit for bit,
    // and a jumper re-anchored at the jump time sits exactly on its target.
    struct Anchored {
        double x = 0.0;
        double anchor = 0.0;
        friend bool operator==(const Anchored&, const Anchored&) = default;
    };
    double at(int type, std::size_t index, double t) const;

    std::vector<Anchored> base1_;
    std::vector<Anchored> base2_;
    double clock_ = 0.0;
    double next_jump_time_ = 0.0;
    Rng rng_;
    std::uint64_t jumps_ = 0;
};

/// Observables of an explicit configuration (population variance, divisor N).
Observables observables_of(std::span<const double> positions1, std::span<const double> positions2);

struct ExplicitStart {
    std::vector<double> positions1;
    std::vector<double> positions2;

    friend bool operator==(const ExplicitStart&, const ExplicitStart&) = default;
};

/// Every particle at the origin.
struct SingularStart {
    friend bool operator==(const SingularStart&, const SingularStart&) = default;
};

/// Independent normal positions per type.
struct GaussianStart {
    double mean1 = 0.0;
    double sd1 = 1.0;
    double mean2 = 0.0;
    double sd2 = 1.0;

    friend bool operator==(const GaussianStart&, const GaussianStart&) = default;
};

using InitialCondition = std::variant<ExplicitStart, SingularStart, GaussianStart>;

struct InitialPositions {
    std::vector<double> positions1;
    std::vector<double> positions2;
};

/// Builds the initial configuration for populations (n1, n2). Random draws
/// come from `rng`. Explicit starts must match the requested sizes.
InitialPositions realize(const InitialCondition& init, std::size_t n1, std::size_t n2, Rng& rng);

/// Stream used by replicate `replica` of a run with master seed `seed`; the
/// initial condition draws from one stream and the dynamics from another.
Rng replica_stream(std::uint64_t seed, std::uint64_t replica);

/// Two-particle chain from the origin: discards [0, t_burnin], then records
/// x2 - x1 at t_burnin + k * spacing for k = 0..n-1.
std::vector<double> gap_samples(const ModelParams& params, std::uint64_t seed, double t_burnin,
                                std::size_t n, double spacing);

/// Decorrelating default spacing for gap samples, 5 / (alpha12 + alpha21).
double default_gap_spacing(const ModelParams& params);

} // namespace tsync
