#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "subnewton/firstorder.hpp"
#include "subnewton/newton.hpp"

namespace subnewton {

// ---------------------------------------------------------------------------
// Lipschitz estimation

struct LipschitzEstimate {
    double lipschitz = 0.0;  ///< dominant eigenvalue of the data Hessian at x = 0
    double condition = 0.0;  ///< (L + lambda) / lambda, infinite when lambda = 0
};

/// Power iteration on v -> H(0) v with lambda = 0, from a seeded random start.
LipschitzEstimate estimate_lipschitz(const SoftmaxProblem& problem, std::size_t iters = 200, std::uint64_t seed = 0);

// ---------------------------------------------------------------------------
// Experiments

enum class DataFormat { libsvm, csv };

/// Solver ids: "full-newton", "subnewton-100", "subnewton-20", or a first-order
/// method name ("momentum", "adagrad", "adadelta", "rmsprop", "adam").
bool is_newton_solver(std::string_view id);
/// Newton variant config for a Newton solver id.
NewtonConfig newton_config_for(std::string_view id, const NewtonConfig& base);

struct ExperimentSpec {
    std::filesystem::path dataset;
    DataFormat format = DataFormat::libsvm;
    std::size_t classes = 2;
    bool normalize = true;
    double split = 0.8;
    bool stratified = false;
    std::uint64_t seed = 0;
    double lambda = 1e-3;

    std::vector<std::string> solvers;
    NewtonConfig newton;
    FirstOrderConfig first_order;
    /// Explicit learning rates for first-order solvers; ignored when use_lr_grid.
    std::vector<double> learning_rates;
    bool use_lr_grid = false;
    std::size_t lipschitz_iters = 200;

    double target_accuracy = 0.9;
    std::filesystem::path output_dir;
    std::size_t jobs = 1;

    void validate() const;
};

struct SummaryRow {
    std::string solver;
    double learning_rate = 0.0;  ///< NaN for Newton solvers
    double best_test_acc = 0.0;
    double final_objective = 0.0;
    std::optional<double> time_to_target;
    Termination termination = Termination::max_iterations;
    std::string trace_file;

    bool diverged() const noexcept { return termination == Termination::diverged; }
};

struct ExperimentResult {
    std::vector<SolveTrace> traces;
    std::vector<SummaryRow> summary;
    std::optional<LipschitzEstimate> lipschitz;
};

/// Loads, optionally normalizes, and splits the dataset named in the spec.
std::pair<LabeledDataset, LabeledDataset> prepare_data(const ExperimentSpec& spec);

/// Runs every configured solver on prepared data. Writes one trace CSV per run
/// plus summary.csv when spec.output_dir is set.
ExperimentResult run_solvers(const ExperimentSpec& spec, const LabeledDataset& train, const LabeledDataset& test);
ExperimentResult run_experiment(const ExperimentSpec& spec);

inline constexpr std::string_view kSummaryHeader =
    "solver,learning_rate,best_test_acc,final_objective,time_to_target,termination,diverged,trace_file";
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);

/// Runs the tasks on up to `jobs` threads; results keep task order.
std::vector<SolveTrace> run_parallel(const std::vector<std::function<SolveTrace()>>& tasks, std::size_t jobs);

// ---------------------------------------------------------------------------
// Step-size sensitivity

enum class SweepOutcome { diverged, stagnated, progressed };
std::string_view to_string(SweepOutcome outcome);

/// Relative decrease below which a run counts as stagnated.
inline constexpr double kStagnationFraction = 0.01;

struct SweepEntry {
    double learning_rate = 0.0;
    SolveTrace trace;
    SweepOutcome outcome = SweepOutcome::progressed;
};

/// diverged: stopped by the divergence guard, non-finite, or above
/// divergence_factor x initial. stagnated: objective decrease below 1% of the
/// best non-diverged decrease in the sweep. Everything else progressed.
std::vector<SweepOutcome> classify_sweep(const std::vector<SolveTrace>& traces, double divergence_factor = 1e3);

/// Runs `base` at every learning rate of lr_grid(L) and classifies the runs.
std::vector<SweepEntry> sensitivity_sweep(const SoftmaxProblem& problem, const FirstOrderConfig& base, double lipschitz,
                                          const LabeledDataset* test_set = nullptr, std::size_t jobs = 1);

}  // namespace subnewton
