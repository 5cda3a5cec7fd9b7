#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "subnewton/cg.hpp"
#include "subnewton/linesearch.hpp"
#include "subnewton/sampling.hpp"
#include "subnewton/softmax.hpp"
#include "subnewton/trace.hpp"

namespace subnewton {

struct NewtonConfig {
    double epsilon = 1e-8;  ///< stop when ||g|| < epsilon
    std::size_t max_outer_iters = 100;
    CgConfig cg;
    LineSearchConfig ls;
    SampleConfig samples;

    void validate() const;
};

/// Gradient and Hessian action of the (possibly sub-sampled) quadratic model at
/// the current iterate.
struct LocalModel {
    std::vector<double> gradient;
    LinearMap hessian;
};

/// What the Newton loop needs from a problem. `objective` is the function the
/// line search decreases; `local_model` may sample.
class NewtonModel {
public:
    virtual ~NewtonModel() = default;
    virtual std::size_t dimension() const = 0;
    virtual double objective(std::span<const double> x) const = 0;
    virtual LocalModel local_model(std::uint64_t iteration, std::span<const double> x) = 0;
};

/// Per-iteration report handed to observers. Iteration 0 is the start point and
/// carries no step. Time spent inside the observer is not counted.
struct NewtonIteration {
    std::size_t iter = 0;
    double cum_seconds = 0.0;
    double objective = 0.0;
    double step_size = 0.0;
    double gradient_norm = 0.0;
    std::size_t cg_iters = 0;
    bool cg_converged = false;
    std::span<const double> x;
};

using NewtonObserver = std::function<void(const NewtonIteration&)>;

struct NewtonResult {
    std::vector<double> x;
    Termination reason = Termination::max_iterations;
    std::size_t iterations = 0;  ///< accepted steps
    double last_gradient_norm = 0.0;
};

/// Inexact Newton iteration: per outer step form g and H, stop on ||g|| < eps,
/// solve H p = -g by CG, back-track along p, update.
NewtonResult newton_minimize(NewtonModel& model, const NewtonConfig& config, std::vector<double> x0,
                             const NewtonObserver& observer = {});

/// Softmax problem with per-iteration S_g / S_H drawn from config.samples.
class SoftmaxNewtonModel final : public NewtonModel {
public:
    SoftmaxNewtonModel(const SoftmaxProblem& problem, SampleConfig samples);

    std::size_t dimension() const override { return problem_->dimension(); }
    double objective(std::span<const double> x) const override;
    LocalModel local_model(std::uint64_t iteration, std::span<const double> x) override;

private:
    WeightVector as_weights(std::span<const double> x) const;

    const SoftmaxProblem* problem_;
    SampleConfig samples_;
};

/// Runs the sub-sampled Newton method on a softmax problem and logs one trace
/// row per iteration (objective and accuracies on the full sets).
SolveTrace newton_solve(const SoftmaxProblem& problem, const NewtonConfig& config, const WeightVector& x0,
                        const LabeledDataset* test_set = nullptr, std::string solver_name = "newton");

/// Sample fractions of the named variants: "full" (1, 1), "subsampled-100"
/// (1, 0.05) and "subsampled-20" (0.2, 0.05). Throws ContractViolation otherwise.
NewtonConfig make_variant(std::string_view name, NewtonConfig base);

}  // namespace subnewton
