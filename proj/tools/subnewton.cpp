// subnewton: benchmark runner for sub-sampled Newton-CG and first-order
// baselines on l2-regularized softmax regression.

#include <cmath>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "subnewton/bench.hpp"

namespace sn = subnewton;

namespace {

struct DataOptions {
    std::string dataset;
    std::string format = "libsvm";
    std::size_t classes = 2;
    bool normalize = true;
    double split = 0.8;
    bool stratified = false;
    std::uint64_t seed = 0;
    double lambda = 1e-3;
};

void add_data_options(CLI::App& cmd, DataOptions& o) {
    cmd.add_option("--dataset", o.dataset, "LIBSVM or CSV file")->required()->check(CLI::ExistingFile);
    cmd.add_option("--format", o.format, "libsvm | csv")->check(CLI::IsMember({"libsvm", "csv"}));
    cmd.add_option("--classes", o.classes, "number of classes C")->required()->check(CLI::Range(2, 1 << 20));
    cmd.add_option("--lambda", o.lambda, "l2 regularization")->check(CLI::NonNegativeNumber);
    cmd.add_flag("--normalize,!--no-normalize", o.normalize, "scale columns to unit norm (default on)");
    cmd.add_option("--split", o.split, "training fraction")->check(CLI::Range(0.0, 1.0));
    cmd.add_flag("--stratified", o.stratified, "split each class separately");
    cmd.add_option("--seed", o.seed, "seed for splits, samples and shuffles");
}

sn::ExperimentSpec base_spec(const DataOptions& o) {
    sn::ExperimentSpec spec;
    spec.dataset = o.dataset;
    spec.format = o.format == "csv" ? sn::DataFormat::csv : sn::DataFormat::libsvm;
    spec.classes = o.classes;
    spec.normalize = o.normalize;
    spec.split = o.split;
    spec.stratified = o.stratified;
    spec.seed = o.seed;
    spec.lambda = o.lambda;
    return spec;
}

/// "128" -> rows, "0.2" -> fraction of n.
sn::BatchSize parse_batch(const std::string& text) {
    const double v = std::stod(text);
    if (!(v > 0.0)) throw CLI::ValidationError("--batch-size", "must be positive");
    if (v >= 1.0 && v != std::floor(v)) throw CLI::ValidationError("--batch-size", "counts must be integers");
    return sn::BatchSize{v};
}

void print_summary(const sn::ExperimentResult& result) {
    if (result.lipschitz)
        std::cout << fmt::format("L = {:.6g}  (L+lambda)/lambda = {:.6g}\n", result.lipschitz->lipschitz,
                                 result.lipschitz->condition);
    sn::write_summary_csv(std::cout, result.summary);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sub-sampled Newton-CG vs first-order methods for softmax regression"};
    app.set_config("--config", "", "flat key = value file; command-line flags take precedence");
    app.require_subcommand(1);

    // run ---------------------------------------------------------------
    DataOptions run_data;
    std::vector<std::string> methods;
    double cg_tol = 1e-4;
    std::size_t cg_max = 10;
    std::size_t iters = 100;
    std::string batch = "128";
    std::string lr = "grid";
    double epsilon = 1e-8;
    bool with_replacement = false;
    double target = 0.9;
    std::size_t jobs = 1;
    std::string out_dir = "results";

    auto* run = app.add_subcommand("run", "run solvers and write trace CSVs");
    add_data_options(*run, run_data);
    run->add_option("--method", methods,
                    "full-newton | subnewton-100 | subnewton-20 | momentum | adagrad | adadelta | rmsprop | adam")
        ->required()
        ->delimiter(',');
    run->add_option("--cg-tol", cg_tol, "CG relative residual tolerance")->check(CLI::Range(0.0, 1.0));
    run->add_option("--cg-max-iters", cg_max, "CG iteration cap")->check(CLI::PositiveNumber);
    run->add_option("--epochs", iters, "outer iterations (Newton) or epochs (first-order)");
    run->add_option("--batch-size", batch, "first-order batch: count (128) or fraction (0.2)");
    run->add_option("--lr", lr, "learning rate value, or 'grid' for 10^k/L, k = -6..6");
    run->add_option("--epsilon", epsilon, "Newton gradient-norm tolerance")->check(CLI::PositiveNumber);
    run->add_flag("--with-replacement", with_replacement, "sample S_g and S_H with replacement");
    run->add_option("--target-acc", target, "test accuracy for the summary's time-to-target column");
    run->add_option("--jobs", jobs, "concurrent runs")->check(CLI::PositiveNumber);
    run->add_option("--out", out_dir, "output directory");

    // lipschitz ---------------------------------------------------------
    DataOptions lip_data;
    std::size_t power_iters = 200;
    auto* lip = app.add_subcommand("lipschitz", "estimate L and the condition number (L+lambda)/lambda");
    add_data_options(*lip, lip_data);
    lip->add_option("--iters", power_iters, "power iterations")->check(CLI::PositiveNumber);

    // sweep -------------------------------------------------------------
    DataOptions sweep_data;
    std::string sweep_method = "adam";
    std::string sweep_batch = "128";
    std::size_t sweep_epochs = 100;
    std::size_t sweep_jobs = 1;
    auto* sweep = app.add_subcommand("sweep", "13-point learning-rate sensitivity sweep for one first-order method");
    add_data_options(*sweep, sweep_data);
    sweep->add_option("--method", sweep_method, "first-order method")
        ->check(CLI::IsMember({"momentum", "adagrad", "adadelta", "rmsprop", "adam"}));
    sweep->add_option("--batch-size", sweep_batch, "count or fraction");
    sweep->add_option("--epochs", sweep_epochs, "epochs per run");
    sweep->add_option("--jobs", sweep_jobs, "concurrent runs")->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            sn::ExperimentSpec spec = base_spec(run_data);
            spec.solvers = methods;
            spec.newton.cg = {cg_tol, cg_max};
            spec.newton.max_outer_iters = iters;
            spec.newton.epsilon = epsilon;
            spec.newton.samples.with_replacement = with_replacement;
            spec.first_order.epochs = iters;
            spec.first_order.batch = parse_batch(batch);
            if (lr == "grid") {
                spec.use_lr_grid = true;
            } else {
                spec.learning_rates = {std::stod(lr)};
            }
            spec.target_accuracy = target;
            spec.jobs = jobs;
            spec.output_dir = out_dir;
            print_summary(sn::run_experiment(spec));
        } else if (*lip) {
            const sn::ExperimentSpec spec = base_spec(lip_data);
            auto data = spec.format == sn::DataFormat::libsvm ? sn::load_libsvm(spec.dataset, spec.classes)
                                                              : sn::load_csv(spec.dataset, spec.classes);
            if (spec.normalize) data = sn::normalize_columns(data);
            const sn::SoftmaxProblem problem(data, spec.lambda);
            const auto est = sn::estimate_lipschitz(problem, power_iters, spec.seed);
            std::cout << fmt::format("n = {}\np = {}\nC = {}\nL = {:.12g}\ncondition = {:.12g}\n", data.size(),
                                     data.features_count(), data.classes(), est.lipschitz, est.condition);
        } else if (*sweep) {
            sn::ExperimentSpec spec = base_spec(sweep_data);
            spec.solvers = {sweep_method};
            const auto [train, test] = sn::prepare_data(spec);
            const sn::SoftmaxProblem problem(train, spec.lambda);
            const auto est = sn::estimate_lipschitz(problem, 200, spec.seed);
            sn::FirstOrderConfig cfg;
            cfg.method = sn::parse_method(sweep_method);
            cfg.batch = parse_batch(sweep_batch);
            cfg.epochs = sweep_epochs;
            cfg.seed = spec.seed;
            const auto entries = sn::sensitivity_sweep(problem, cfg, est.lipschitz, test.size() ? &test : nullptr, sweep_jobs);
            std::cout << "learning_rate,initial_objective,final_objective,best_test_acc,outcome\n";
            for (const auto& e : entries)
                std::cout << fmt::format("{:.6g},{:.12g},{:.12g},{:.6g},{}\n", e.learning_rate, e.trace.initial_objective(),
                                         e.trace.final_objective(), e.trace.best_test_accuracy(), sn::to_string(e.outcome));
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
