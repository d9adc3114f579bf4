#pragma once

// Configuration-driven experiments behind the command-line tool. Each
// command writes CSV tables plus one summary.json into the output directory;
// every file gets a `<name>.meta.json` sidecar carrying the config hash.

#include "tsync/config.hpp"
#include "tsync/parallel.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace tsync {

struct RunOptions {
    std::filesystem::path out_dir = "out";
    Execution exec = Execution::Parallel;
};

struct RunResult {
    nlohmann::json summary;
    int exit_code = 0; ///< 0 success, 1 failed check
};

/// Writes files under one directory, each with its metadata sidecar. Content
/// is assembled in memory and written once, so files are never partial.
class ArtifactWriter {
public:
    ArtifactWriter(std::filesystem::path dir, std::string command, nlohmann::json config,
                   std::string config_hash);

    void write_csv(const std::string& name, const std::vector<std::string>& header,
                   const std::vector<std::vector<std::string>>& rows) const;
    void write_json(const std::string& name, const nlohmann::json& value) const;
    void write_text(const std::string& name, const std::string& text) const;

    const std::filesystem::path& dir() const noexcept { return dir_; }

private:
    void write_file(const std::string& name, const std::string& content,
                    const nlohmann::json& format) const;

    std::filesystem::path dir_;
    std::string command_;
    nlohmann::json config_;
    std::string hash_;
};

/// Round-trip decimal text for a double ("%.17g").
std::string csv_number(double x);

/// Compact decimal label for file names ("%g").
std::string time_label(double t);

/// Replicated runs: observables.csv (replica 0), estimates.csv, optionally
/// trajectory.csv.
RunResult cmd_simulate(const ScenarioConfig& config, const RunOptions& options);

/// Gap samples, KS distance to the exponential law, and the velocity cross-check.
RunResult cmd_two_particle(const ScenarioConfig& config, const RunOptions& options);

/// Spectral and finite-volume solutions, moment errors, solver agreement, profiles.
RunResult cmd_pde(const ScenarioConfig& config, const RunOptions& options);

/// Variance scan over (N, s) with the kappa2 fit and region labels.
RunResult cmd_scan(const ScenarioConfig& config, const RunOptions& options);

} // namespace tsync
