#include "subnewton/newton.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>

#include <fmt/format.h>

#include "subnewton/linalg.hpp"

namespace subnewton {

namespace {

/// Accumulates solver time only; paused while observers run.
class Stopwatch {
public:
    using Clock = std::chrono::steady_clock;

    void start() { started_ = Clock::now(); }
    void stop() { total_ += Clock::now() - started_; }
    double seconds() const { return std::chrono::duration<double>(total_).count(); }

private:
    Clock::time_point started_{};
    Clock::duration total_{};
};

}  // namespace

void NewtonConfig::validate() const {
    require(epsilon > 0.0, "Newton epsilon must be positive");
    cg.validate();
    ls.validate();
    samples.validate();
}

NewtonResult newton_minimize(NewtonModel& model, const NewtonConfig& config, std::vector<double> x0,
                             const NewtonObserver& observer) {
    config.validate();
    require(x0.size() == model.dimension(), "newton_minimize: x0 has the wrong length");

    NewtonResult result;
    result.x = std::move(x0);
    std::vector<double>& x = result.x;
    std::vector<double> trial(x.size());

    Stopwatch clock;
    clock.start();
    double fx = model.objective(x);
    clock.stop();
    if (observer) observer(NewtonIteration{0, 0.0, fx, 0.0, 0.0, 0, false, x});

    for (std::size_t k = 0;; ++k) {
        if (k >= config.max_outer_iters) {
            result.reason = Termination::max_iterations;
            break;
        }
        clock.start();
        LocalModel local = model.local_model(k, x);
        const double g_norm = linalg::norm(local.gradient);
        result.last_gradient_norm = g_norm;
        if (g_norm < config.epsilon) {
            clock.stop();
            result.reason = Termination::gradient_converged;
            break;
        }
        const CgReport cg = cg_solve(local.hessian, local.gradient, config.cg);
        const double slope = linalg::dot(cg.solution, local.gradient);
        const auto f = [&](double alpha) {
            for (std::size_t i = 0; i < x.size(); ++i) trial[i] = x[i] + alpha * cg.solution[i];
            return model.objective(trial);
        };
        const LineSearchResult ls = line_search(f, fx, slope, config.ls);
        if (!ls.accepted) {
            clock.stop();
            result.reason = Termination::line_search_failure;
            break;
        }
        linalg::axpy(ls.alpha, cg.solution, x);
        fx = ls.value;
        clock.stop();
        ++result.iterations;
        if (observer)
            observer(NewtonIteration{k + 1, clock.seconds(), fx, ls.alpha, g_norm, cg.iterations, cg.converged, x});
    }
    return result;
}

// ---------------------------------------------------------------------------
// Softmax model

SoftmaxNewtonModel::SoftmaxNewtonModel(const SoftmaxProblem& problem, SampleConfig samples)
    : problem_(&problem), samples_(samples) {
    samples_.validate();
}

WeightVector SoftmaxNewtonModel::as_weights(std::span<const double> x) const {
    return WeightVector(problem_->features(), problem_->classes(), std::vector<double>(x.begin(), x.end()));
}

double SoftmaxNewtonModel::objective(std::span<const double> x) const { return subnewton::objective(*problem_, as_weights(x)); }

LocalModel SoftmaxNewtonModel::local_model(std::uint64_t iteration, std::span<const double> x) {
    // The operator holds spans into the oracle's sample sets, so both live in
    // one shared block owned by the returned map.
    struct State {
        SubsampledOracle oracle;
        std::optional<HessianOperator> hessian;
    };
    const WeightVector w = as_weights(x);
    auto state = std::make_shared<State>(
        State{SubsampledOracle(*problem_, draw_samples(samples_, problem_->data().size(), iteration)), std::nullopt});
    state->hessian.emplace(state->oracle.hessian_operator(w));
    LocalModel local;
    local.gradient = state->oracle.sub_gradient(w);
    local.hessian = [state](std::span<const double> v, std::span<double> out) { state->hessian->apply(v, out); };
    return local;
}

SolveTrace newton_solve(const SoftmaxProblem& problem, const NewtonConfig& config, const WeightVector& x0,
                        const LabeledDataset* test_set, std::string solver_name) {
    if (problem.data().size() == 0) throw DataError("cannot optimize over an empty dataset");
    require(x0.features() == problem.features() && x0.classes() == problem.classes(), "newton_solve: x0 shape mismatch");

    SoftmaxNewtonModel model(problem, config.samples);
    SolveTrace trace;
    trace.solver = solver_name;
    const auto observe = [&](const NewtonIteration& it) {
        const WeightVector w(problem.features(), problem.classes(), std::vector<double>(it.x.begin(), it.x.end()));
        RunRecord row;
        row.solver = solver_name;
        row.iter = it.iter;
        row.cum_seconds = it.cum_seconds;
        row.objective = it.objective;
        row.train_acc = accuracy(problem.data(), w);
        row.test_acc = test_set && test_set->size() > 0 ? accuracy(*test_set, w) : std::numeric_limits<double>::quiet_NaN();
        row.step_size = it.step_size;
        row.cg_iters = it.cg_iters;
        trace.records.push_back(std::move(row));
    };
    NewtonResult result = newton_minimize(model, config, std::vector<double>(x0.values().begin(), x0.values().end()), observe);
    trace.final_x = std::move(result.x);
    trace.reason = result.reason;
    return trace;
}

NewtonConfig make_variant(std::string_view name, NewtonConfig base) {
    if (name == "full") {
        base.samples.gradient_fraction = 1.0;
        base.samples.hessian_fraction = 1.0;
    } else if (name == "subsampled-100") {
        base.samples.gradient_fraction = 1.0;
        base.samples.hessian_fraction = 0.05;
    } else if (name == "subsampled-20") {
        base.samples.gradient_fraction = 0.2;
        base.samples.hessian_fraction = 0.05;
    } else {
        throw ContractViolation(fmt::format("unknown Newton variant '{}'", name));
    }
    return base;
}

}  // namespace subnewton
