#include "subnewton/firstorder.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "subnewton/linalg.hpp"
#include "subnewton/rng.hpp"

namespace subnewton {

std::string_view to_string(Method method) {
    switch (method) {
        case Method::momentum: return "momentum";
        case Method::adagrad: return "adagrad";
        case Method::adadelta: return "adadelta";
        case Method::rmsprop: return "rmsprop";
        case Method::adam: return "adam";
    }
    return "unknown";
}

Method parse_method(std::string_view name) {
    for (Method m : kAllMethods)
        if (to_string(m) == name) return m;
    throw ContractViolation(fmt::format("unknown first-order method '{}'", name));
}

std::size_t BatchSize::resolve(std::size_t n) const {
    if (is_fraction()) return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(value * static_cast<double>(n))));
    return std::max<std::size_t>(1, std::min(n, static_cast<std::size_t>(value)));
}

void FirstOrderConfig::validate() const {
    require(learning_rate > 0.0, "learning rate must be positive");
    require(batch.value > 0.0 && (batch.is_fraction() || batch.value == std::floor(batch.value)),
            "batch size must be a positive count or a fraction in (0, 1)");
    require(divergence_factor > 1.0, "divergence factor must exceed 1");
    require(max_seconds >= 0.0, "time budget must be >= 0");
}

OptimizerState make_state(const FirstOrderConfig& config, std::size_t dimension) {
    OptimizerState state;
    state.method = config.method;
    const double first_init = config.method == Method::adagrad ? config.adagrad_initial_accumulator : 0.0;
    state.first.assign(dimension, first_init);
    if (config.method == Method::adadelta || config.method == Method::adam) state.second.assign(dimension, 0.0);
    return state;
}

void step(OptimizerState& state, std::span<double> x, std::span<const double> g, const FirstOrderConfig& config) {
    require(x.size() == g.size() && state.first.size() == x.size(), "step: shape mismatch");
    const double lr = config.learning_rate;
    auto& a = state.first;
    auto& b = state.second;
    const std::size_t d = x.size();
    ++state.steps;
    switch (state.method) {
        case Method::momentum:
            for (std::size_t i = 0; i < d; ++i) {
                a[i] = config.momentum * a[i] - lr * g[i];
                x[i] += a[i];
            }
            break;
        case Method::adagrad:
            for (std::size_t i = 0; i < d; ++i) {
                a[i] += g[i] * g[i];
                x[i] -= lr * g[i] / std::sqrt(a[i] + config.adagrad_epsilon);
            }
            break;
        case Method::adadelta: {
            const double rho = config.adadelta_rho;
            const double eps = config.adadelta_epsilon;
            for (std::size_t i = 0; i < d; ++i) {
                a[i] = rho * a[i] + (1.0 - rho) * g[i] * g[i];
                const double dx = std::sqrt(b[i] + eps) / std::sqrt(a[i] + eps) * g[i];
                b[i] = rho * b[i] + (1.0 - rho) * dx * dx;
                x[i] -= lr * dx;
            }
            break;
        }
        case Method::rmsprop: {
            const double rho = config.rmsprop_decay;
            for (std::size_t i = 0; i < d; ++i) {
                a[i] = rho * a[i] + (1.0 - rho) * g[i] * g[i];
                x[i] -= lr * g[i] / std::sqrt(a[i] + config.rmsprop_epsilon);
            }
            break;
        }
        case Method::adam: {
            const double b1 = config.adam_beta1;
            const double b2 = config.adam_beta2;
            const double t = static_cast<double>(state.steps);
            const double c1 = 1.0 - std::pow(b1, t);
            const double c2 = 1.0 - std::pow(b2, t);
            for (std::size_t i = 0; i < d; ++i) {
                a[i] = b1 * a[i] + (1.0 - b1) * g[i];
                b[i] = b2 * b[i] + (1.0 - b2) * g[i] * g[i];
                const double m_hat = a[i] / c1;
                const double v_hat = b[i] / c2;
                x[i] -= lr * m_hat / (std::sqrt(v_hat) + config.adam_epsilon);
            }
            break;
        }
    }
}

SolveTrace run_epochs(const SoftmaxProblem& problem, const FirstOrderConfig& config, const WeightVector& x0,
                      const LabeledDataset* test_set, std::string solver_name) {
    config.validate();
    const auto& data = problem.data();
    const std::size_t n = data.size();
    if (n == 0) throw DataError("cannot optimize over an empty dataset");
    require(x0.features() == problem.features() && x0.classes() == problem.classes(), "run_epochs: x0 shape mismatch");
    if (solver_name.empty()) solver_name = std::string(to_string(config.method));

    using Clock = std::chrono::steady_clock;
    Clock::duration elapsed{};

    WeightVector x = x0;
    OptimizerState state = make_state(config, x.size());
    std::vector<double> g(x.size());
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const std::size_t batch = config.batch.resolve(n);

    SolveTrace trace;
    trace.solver = solver_name;
    const auto record = [&](std::size_t epoch, double f) {
        RunRecord row;
        row.solver = solver_name;
        row.iter = epoch;
        row.cum_seconds = std::chrono::duration<double>(elapsed).count();
        row.objective = f;
        const bool finite = linalg::all_finite(x.values());
        row.train_acc = finite ? accuracy(data, x) : std::numeric_limits<double>::quiet_NaN();
        row.test_acc = finite && test_set && test_set->size() > 0 ? accuracy(*test_set, x)
                                                                  : std::numeric_limits<double>::quiet_NaN();
        row.step_size = config.learning_rate;
        trace.records.push_back(std::move(row));
    };

    const double f_initial = objective(problem, x);
    record(0, f_initial);
    trace.reason = Termination::max_iterations;

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        const auto started = Clock::now();
        auto gen = make_stream(config.seed, epoch, StreamPurpose::shuffle);
        shuffle(std::span<std::size_t>(order), gen);
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t stop = std::min(n, start + batch);
            const std::span<const std::size_t> rows(order.data() + start, stop - start);
            const double scale = static_cast<double>(n) / static_cast<double>(rows.size());
            scaled_gradient(problem, x, RowSelection::subset(rows), scale, g);
            step(state, x.values(), g, config);
        }
        elapsed += Clock::now() - started;

        const double f = objective(problem, x);
        record(epoch, f);
        if (!std::isfinite(f) || f > config.divergence_factor * f_initial) {
            trace.reason = Termination::diverged;
            break;
        }
        if (config.max_seconds > 0.0 && std::chrono::duration<double>(elapsed).count() >= config.max_seconds) break;
    }
    trace.final_x.assign(x.values().begin(), x.values().end());
    return trace;
}

std::vector<double> lr_grid(double lipschitz) {
    require(lipschitz > 0.0, "lr_grid: Lipschitz estimate must be positive");
    std::vector<double> grid;
    for (int k = -6; k <= 6; ++k) grid.push_back(std::pow(10.0, k) / lipschitz);
    return grid;
}

}  // namespace subnewton
