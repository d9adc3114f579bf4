#pragma once

// Scenario configuration: one JSON document per run. Parse errors and
// validation errors carry the 1-based line of the offending key.

#include "tsync/model.hpp"
#include "tsync/particles.hpp"

#include "json.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tsync {

/// Either explicit counts or a total with type-1 fraction c1 (N1 = floor(c1 N)).
struct PopulationSpec {
    bool fractional = false;
    std::size_t n1 = 1;
    std::size_t n2 = 1;
    std::size_t total = 2;
    double c1 = 0.5;

    std::pair<std::size_t, std::size_t> counts() const;

    friend bool operator==(const PopulationSpec&, const PopulationSpec&) = default;
};

struct SimulateSpec {
    std::size_t observations = 11; ///< equally spaced times over [0, horizon]
    bool trajectory = false;       ///< also dump every position of replica 0

    friend bool operator==(const SimulateSpec&, const SimulateSpec&) = default;
};

struct TwoParticleSpec {
    double burnin = 100.0;
    std::size_t samples = 10000;
    std::optional<double> spacing; ///< default 5 / (alpha12 + alpha21)

    friend bool operator==(const TwoParticleSpec&, const TwoParticleSpec&) = default;
};

struct PdeSpec {
    std::size_t min_cells = 2048;
    std::vector<double> times{1.0, 5.0, 20.0};
    std::optional<double> fv_dt; ///< default: half the CFL limit
    double disagreement_tolerance = 0.05; ///< L1 distance between solvers that gets flagged
    double profile_extent = 4.0;
    double profile_step = 0.05;

    friend bool operator==(const PdeSpec&, const PdeSpec&) = default;
};

struct ScanSpec {
    std::vector<std::size_t> totals{50, 100, 200};
    double c1 = 0.5;
    std::vector<double> s_values{0.1, 0.25, 0.5, 1.0, 2.0, 3.0};
    std::size_t replicas = 64;

    friend bool operator==(const ScanSpec&, const ScanSpec&) = default;
};

struct ScenarioConfig {
    ModelParams params;
    PopulationSpec populations;
    InitialCondition initial = SingularStart{};
    double horizon = 10.0;
    std::size_t replicas = 16;
    std::uint64_t seed = 1;
    std::string output_dir = "out";
    SimulateSpec simulate;
    TwoParticleSpec two_particle;
    PdeSpec pde;
    ScanSpec scan;

    friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

/// Throws ConfigError on malformed JSON, unknown keys, wrong types or values
/// outside their domain.
ScenarioConfig parse_config(std::string_view text);

/// parse_config on a file; messages are prefixed with the path.
ScenarioConfig load_config(const std::filesystem::path& path);

/// Checks the cross-field constraints; the message names the dotted key.
void validate(const ScenarioConfig& config);

nlohmann::json to_json(const ScenarioConfig& config);

/// Compact dump with sorted keys; the input to config_hash.
std::string canonical_dump(const ScenarioConfig& config);

/// FNV-1a 64 of canonical_dump, as 16 lowercase hex digits.
std::string config_hash(const ScenarioConfig& config);

/// FNV-1a 64 of arbitrary bytes, as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);

} // namespace tsync
