#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "subnewton/softmax.hpp"
#include "subnewton/trace.hpp"

namespace subnewton {

enum class Method { momentum, adagrad, adadelta, rmsprop, adam };

std::string_view to_string(Method method);
/// Accepts the lower-case method names; throws ContractViolation otherwise.
Method parse_method(std::string_view name);
inline constexpr Method kAllMethods[] = {Method::momentum, Method::adagrad, Method::adadelta, Method::rmsprop, Method::adam};

/// Mini-batch size as an absolute count (>= 1) or a fraction of n in (0, 1).
struct BatchSize {
    double value = 128.0;

    static BatchSize rows(std::size_t count) { return {static_cast<double>(count)}; }
    static BatchSize fraction(double f) { return {f}; }
    bool is_fraction() const noexcept { return value < 1.0; }
    std::size_t resolve(std::size_t n) const;
};

struct FirstOrderConfig {
    Method method = Method::adam;
    double learning_rate = 1e-3;
    BatchSize batch;
    std::size_t epochs = 100;
    std::uint64_t seed = 0;

    // Method constants (framework defaults).
    double momentum = 0.9;
    double adagrad_epsilon = 1e-10;
    double adagrad_initial_accumulator = 0.1;
    double adadelta_rho = 0.95;
    double adadelta_epsilon = 1e-8;
    double rmsprop_decay = 0.9;
    double rmsprop_epsilon = 1e-10;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;

    /// Stop once the objective exceeds this multiple of the initial value.
    double divergence_factor = 1e3;
    /// Stop after the epoch that takes optimization time past this; 0 = no limit.
    double max_seconds = 0.0;

    void validate() const;
};

/// Per-method accumulators, each the length of the weight vector.
struct OptimizerState {
    Method method = Method::adam;
    std::vector<double> first;   ///< velocity / squared-gradient sum / E[g^2] / m
    std::vector<double> second;  ///< E[dx^2] (adadelta) / v (adam)
    std::uint64_t steps = 0;
};

OptimizerState make_state(const FirstOrderConfig& config, std::size_t dimension);

/// Applies one update of the configured method:
///   momentum  v <- mu v - lr g;  x <- x + v
///   adagrad   acc <- acc + g^2;  x <- x - lr g / sqrt(acc + eps)
///   adadelta  Eg <- rho Eg + (1-rho) g^2;  dx = sqrt(Edx + eps)/sqrt(Eg + eps) g;
///             Edx <- rho Edx + (1-rho) dx^2;  x <- x - lr dx
///   rmsprop   acc <- rho acc + (1-rho) g^2;  x <- x - lr g / sqrt(acc + eps)
///   adam      m, v moments with bias correction;  x <- x - lr m^ / (sqrt(v^) + eps)
void step(OptimizerState& state, std::span<double> x, std::span<const double> g, const FirstOrderConfig& config);

/// Epoch loop: seeded shuffle, sweep of mini-batches with gradients scaled by
/// n/|B| plus lambda x, one trace row per epoch on the full training set.
/// Stops early (reason `diverged`) when the objective is non-finite or exceeds
/// divergence_factor times its initial value.
SolveTrace run_epochs(const SoftmaxProblem& problem, const FirstOrderConfig& config, const WeightVector& x0,
                      const LabeledDataset* test_set = nullptr, std::string solver_name = {});

/// {10^k / L : k = -6..6}.
std::vector<double> lr_grid(double lipschitz);

}  // namespace subnewton
