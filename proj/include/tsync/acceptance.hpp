#pragma once

// The acceptance suite: ten numbered criteria with pinned seeds and
// tolerances, shared by `tsync verify` and the acceptance test binary.

#include "tsync/experiments.hpp"
#include "tsync/parallel.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <set>
#include <string>
#include <vector>

namespace tsync {

enum class Mutation {
    None,
    ExchangeSign, ///< flips the sign of the type-1 exchange term in both PDE solvers
};

struct AcceptanceOptions {
    std::uint64_t seed = 20240917;
    Execution exec = Execution::Parallel;
    Mutation mutation = Mutation::None;
    std::set<int> only; ///< empty: criteria 1-9
    bool echo = true;   ///< cmd_verify prints one line per criterion
};

struct CriterionResult {
    int id = 0;
    std::string name;
    double measured = 0.0;
    double target = 0.0;
    double tolerance = 0.0;
    std::string rule;          ///< how measured, target and tolerance combine
    bool passed = false;       ///< numerical verdict only
    double runtime_s = 0.0;
    double runtime_limit_s = 0.0;
    nlohmann::json details;

    bool within_time() const { return runtime_s <= runtime_limit_s; }
};

/// Runs one of criteria 1-9. Exceptions from the numerics are caught and
/// reported as a failed criterion.
CriterionResult run_criterion(int id, const AcceptanceOptions& options);

/// Criteria in `options.only` (1-9 when empty), in order; `progress` sees
/// each result as it completes.
std::vector<CriterionResult> run_acceptance(
    const AcceptanceOptions& options,
    const std::function<void(const CriterionResult&)>& progress = {});

/// Deterministic verdict: everything except runtimes.
nlohmann::json acceptance_summary(const std::vector<CriterionResult>& results,
                                  const AcceptanceOptions& options);

/// One human-readable line per criterion, runtime included.
std::string format_result(const CriterionResult& result);

/// Runs the suite, prints one line per criterion, writes summary.json and
/// report.txt under out_dir. Exit code 0 when every criterion passes its
/// tolerance and its time limit, 1 otherwise.
/// `results`, when given, receives the per-criterion results.
int cmd_verify(const AcceptanceOptions& options, const std::filesystem::path& out_dir,
               std::vector<CriterionResult>* results = nullptr);

} // namespace tsync
