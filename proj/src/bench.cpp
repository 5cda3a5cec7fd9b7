#include "subnewton/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

#include <fmt/format.h>

#include "subnewton/linalg.hpp"
#include "subnewton/rng.hpp"

namespace subnewton {

LipschitzEstimate estimate_lipschitz(const SoftmaxProblem& problem, std::size_t iters, std::uint64_t seed) {
    if (problem.data().size() == 0) throw DataError("cannot estimate a Lipschitz constant on an empty dataset");
    require(iters >= 1, "estimate_lipschitz: need at least one iteration");
    const SoftmaxProblem unregularized(problem.data(), 0.0);
    const HessianOperator hessian(unregularized, unregularized.zero_weights(), RowSelection::all(), 1.0);

    auto gen = make_stream(seed, 0, StreamPurpose::power_iteration);
    std::vector<double> v(problem.dimension());
    for (double& e : v) e = 2.0 * uniform_unit(gen) - 1.0;
    linalg::scale(1.0 / linalg::norm(v), v);

    std::vector<double> hv(v.size());
    double rayleigh = 0.0;
    for (std::size_t k = 0; k < iters; ++k) {
        hessian.apply(v, hv);
        rayleigh = linalg::dot(v, hv);
        const double len = linalg::norm(hv);
        if (len == 0.0) break;  // zero data Hessian
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = hv[i] / len;
    }
    if (!(rayleigh > 0.0)) throw DataError("data Hessian is zero; no Lipschitz estimate");
    LipschitzEstimate est;
    est.lipschitz = rayleigh;
    est.condition = problem.lambda() > 0.0 ? (rayleigh + problem.lambda()) / problem.lambda()
                                           : std::numeric_limits<double>::infinity();
    return est;
}

bool is_newton_solver(std::string_view id) {
    return id == "full-newton" || id == "subnewton-100" || id == "subnewton-20";
}

NewtonConfig newton_config_for(std::string_view id, const NewtonConfig& base) {
    if (id == "full-newton") return make_variant("full", base);
    if (id == "subnewton-100") return make_variant("subsampled-100", base);
    if (id == "subnewton-20") return make_variant("subsampled-20", base);
    throw ContractViolation(fmt::format("'{}' is not a Newton solver", id));
}

void ExperimentSpec::validate() const {
    require(!solvers.empty(), "experiment needs at least one solver");
    require(lambda >= 0.0, "lambda must be >= 0");
    require(jobs >= 1, "jobs must be >= 1");
    for (const auto& s : solvers)
        if (!is_newton_solver(s)) parse_method(s);
}

std::pair<LabeledDataset, LabeledDataset> prepare_data(const ExperimentSpec& spec) {
    LabeledDataset all = spec.format == DataFormat::libsvm ? load_libsvm(spec.dataset, spec.classes)
                                                           : load_csv(spec.dataset, spec.classes);
    if (spec.normalize) all = normalize_columns(all);
    return spec.stratified ? stratified_split(all, spec.split, spec.seed) : train_test_split(all, spec.split, spec.seed);
}

std::vector<SolveTrace> run_parallel(const std::vector<std::function<SolveTrace()>>& tasks, std::size_t jobs) {
    std::vector<SolveTrace> results(tasks.size());
    if (jobs <= 1 || tasks.size() <= 1) {
        for (std::size_t i = 0; i < tasks.size(); ++i) results[i] = tasks[i]();
        return results;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const auto worker = [&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++) {
            try {
                results[i] = tasks[i]();
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(jobs, tasks.size()); ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    return results;
}

namespace {

std::string format_optional(const std::optional<double>& v) { return v ? fmt::format("{:.17g}", *v) : std::string(); }

}  // namespace

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
    out << kSummaryHeader << '\n';
    for (const auto& r : rows) {
        out << fmt::format("{},{:.17g},{:.17g},{:.17g},{},{},{},{}\n", r.solver, r.learning_rate, r.best_test_acc,
                           r.final_objective, format_optional(r.time_to_target), to_string(r.termination),
                           r.diverged() ? 1 : 0, r.trace_file);
    }
}

ExperimentResult run_solvers(const ExperimentSpec& spec, const LabeledDataset& train, const LabeledDataset& test) {
    spec.validate();
    const SoftmaxProblem problem(train, spec.lambda);
    const WeightVector x0 = problem.zero_weights();
    const LabeledDataset* test_ptr = test.size() > 0 ? &test : nullptr;

    ExperimentResult result;
    std::vector<double> rates = spec.learning_rates;
    const bool any_first_order =
        std::any_of(spec.solvers.begin(), spec.solvers.end(), [](const std::string& s) { return !is_newton_solver(s); });
    if (any_first_order && spec.use_lr_grid) {
        result.lipschitz = estimate_lipschitz(problem, spec.lipschitz_iters, spec.seed);
        rates = lr_grid(result.lipschitz->lipschitz);
    }
    if (any_first_order && rates.empty()) rates.push_back(spec.first_order.learning_rate);

    struct Job {
        std::string file_stem;
        double learning_rate;
    };
    std::vector<Job> jobs;
    std::vector<std::function<SolveTrace()>> tasks;
    for (const auto& id : spec.solvers) {
        if (is_newton_solver(id)) {
            NewtonConfig cfg = newton_config_for(id, spec.newton);
            cfg.samples.seed = spec.seed;
            jobs.push_back({id, std::numeric_limits<double>::quiet_NaN()});
            tasks.emplace_back([&problem, &x0, test_ptr, cfg, id] { return newton_solve(problem, cfg, x0, test_ptr, id); });
            continue;
        }
        for (std::size_t k = 0; k < rates.size(); ++k) {
            FirstOrderConfig cfg = spec.first_order;
            cfg.method = parse_method(id);
            cfg.learning_rate = rates[k];
            cfg.seed = spec.seed;
            const std::string stem = rates.size() == 1 ? id : fmt::format("{}_lr{:02d}", id, k);
            jobs.push_back({stem, rates[k]});
            tasks.emplace_back([&problem, &x0, test_ptr, cfg, id] { return run_epochs(problem, cfg, x0, test_ptr, id); });
        }
    }
    result.traces = run_parallel(tasks, spec.jobs);

    if (!spec.output_dir.empty()) std::filesystem::create_directories(spec.output_dir);
    for (std::size_t i = 0; i < result.traces.size(); ++i) {
        const auto& trace = result.traces[i];
        SummaryRow row;
        row.solver = trace.solver;
        row.learning_rate = jobs[i].learning_rate;
        row.best_test_acc = trace.best_test_accuracy();
        row.final_objective = trace.final_objective();
        row.time_to_target = trace.time_to_accuracy(spec.target_accuracy);
        row.termination = trace.reason;
        row.trace_file = jobs[i].file_stem + ".csv";
        if (!spec.output_dir.empty()) write_trace_csv(spec.output_dir / row.trace_file, trace);
        result.summary.push_back(std::move(row));
    }
    if (!spec.output_dir.empty()) {
        const auto path = spec.output_dir / "summary.csv";
        std::ofstream out(path);
        if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
        write_summary_csv(out, result.summary);
    }
    return result;
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    const auto [train, test] = prepare_data(spec);
    return run_solvers(spec, train, test);
}

// ---------------------------------------------------------------------------

std::string_view to_string(SweepOutcome outcome) {
    switch (outcome) {
        case SweepOutcome::diverged: return "diverged";
        case SweepOutcome::stagnated: return "stagnated";
        case SweepOutcome::progressed: return "progressed";
    }
    return "unknown";
}

std::vector<SweepOutcome> classify_sweep(const std::vector<SolveTrace>& traces, double divergence_factor) {
    std::vector<SweepOutcome> out(traces.size(), SweepOutcome::progressed);
    std::vector<double> decrease(traces.size(), 0.0);
    double best = 0.0;
    for (std::size_t i = 0; i < traces.size(); ++i) {
        const double f0 = traces[i].initial_objective();
        const double f = traces[i].final_objective();
        if (traces[i].reason == Termination::diverged || !std::isfinite(f) || f > divergence_factor * f0) {
            out[i] = SweepOutcome::diverged;
            continue;
        }
        decrease[i] = f0 - f;
        best = std::max(best, decrease[i]);
    }
    for (std::size_t i = 0; i < traces.size(); ++i) {
        if (out[i] == SweepOutcome::diverged) continue;
        if (!(decrease[i] >= kStagnationFraction * best) || best <= 0.0) out[i] = SweepOutcome::stagnated;
    }
    return out;
}

std::vector<SweepEntry> sensitivity_sweep(const SoftmaxProblem& problem, const FirstOrderConfig& base, double lipschitz,
                                          const LabeledDataset* test_set, std::size_t jobs) {
    const auto rates = lr_grid(lipschitz);
    const WeightVector x0 = problem.zero_weights();
    std::vector<std::function<SolveTrace()>> tasks;
    for (double lr : rates) {
        FirstOrderConfig cfg = base;
        cfg.learning_rate = lr;
        tasks.emplace_back([&problem, &x0, test_set, cfg] { return run_epochs(problem, cfg, x0, test_set); });
    }
    auto traces = run_parallel(tasks, jobs);
    const auto outcomes = classify_sweep(traces, base.divergence_factor);
    std::vector<SweepEntry> entries;
    for (std::size_t k = 0; k < rates.size(); ++k) entries.push_back({rates[k], std::move(traces[k]), outcomes[k]});
    return entries;
}

}  // namespace subnewton
