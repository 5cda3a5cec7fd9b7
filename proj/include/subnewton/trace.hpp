#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace subnewton {

enum class Termination {
    gradient_converged,
    max_iterations,
    line_search_failure,
    diverged,
};

std::string_view to_string(Termination reason);

/// One trace row. Iteration 0 is the starting point.
struct RunRecord {
    std::string solver;
    std::size_t iter = 0;
    double cum_seconds = 0.0;
    double objective = 0.0;
    double train_acc = 0.0;
    double test_acc = 0.0;  ///< NaN when no test set was given
    double step_size = 0.0;
    std::size_t cg_iters = 0;
};

struct SolveTrace {
    std::string solver;
    std::vector<RunRecord> records;
    std::vector<double> final_x;
    Termination reason = Termination::max_iterations;

    double initial_objective() const;
    double final_objective() const;
    double best_test_accuracy() const;
    /// First cumulative time whose test accuracy reaches `target`.
    std::optional<double> time_to_accuracy(double target) const;
};

/// Column order of the trace CSV.
inline constexpr std::string_view kTraceHeader = "solver,iter,cum_seconds,objective,train_acc,test_acc,step_size,cg_iters";

/// Writes header plus rows; reals use 17 significant digits.
void write_trace_csv(std::ostream& out, const SolveTrace& trace);
void write_trace_csv(const std::filesystem::path& path, const SolveTrace& trace);
/// Same rows without the cum_seconds column, for determinism checks.
std::string non_timing_columns(const SolveTrace& trace);

}  // namespace subnewton
