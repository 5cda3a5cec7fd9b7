#include "subnewton/trace.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include <fmt/format.h>

#include "subnewton/errors.hpp"

namespace subnewton {

std::string_view to_string(Termination reason) {
    switch (reason) {
        case Termination::gradient_converged: return "gradient-converged";
        case Termination::max_iterations: return "max-iters";
        case Termination::line_search_failure: return "line-search-failure";
        case Termination::diverged: return "diverged";
    }
    return "unknown";
}

double SolveTrace::initial_objective() const {
    return records.empty() ? std::numeric_limits<double>::quiet_NaN() : records.front().objective;
}

double SolveTrace::final_objective() const {
    return records.empty() ? std::numeric_limits<double>::quiet_NaN() : records.back().objective;
}

double SolveTrace::best_test_accuracy() const {
    double best = std::numeric_limits<double>::quiet_NaN();
    for (const auto& r : records)
        if (std::isfinite(r.test_acc) && !(r.test_acc <= best)) best = r.test_acc;
    return best;
}

std::optional<double> SolveTrace::time_to_accuracy(double target) const {
    for (const auto& r : records)
        if (r.test_acc >= target) return r.cum_seconds;
    return std::nullopt;
}

namespace {

std::string format_row(const RunRecord& r, bool with_time) {
    if (with_time)
        return fmt::format("{},{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{}\n", r.solver, r.iter, r.cum_seconds, r.objective,
                           r.train_acc, r.test_acc, r.step_size, r.cg_iters);
    return fmt::format("{},{},{:.17g},{:.17g},{:.17g},{:.17g},{}\n", r.solver, r.iter, r.objective, r.train_acc, r.test_acc,
                       r.step_size, r.cg_iters);
}

}  // namespace

void write_trace_csv(std::ostream& out, const SolveTrace& trace) {
    out << kTraceHeader << '\n';
    for (const auto& r : trace.records) out << format_row(r, true);
}

void write_trace_csv(const std::filesystem::path& path, const SolveTrace& trace) {
    std::ofstream out(path);
    if (!out) throw DataError(fmt::format("cannot write trace '{}'", path.string()));
    write_trace_csv(out, trace);
    if (!out) throw DataError(fmt::format("write failed for '{}'", path.string()));
}

std::string non_timing_columns(const SolveTrace& trace) {
    std::string out;
    for (const auto& r : trace.records) out += format_row(r, false);
    return out;
}

}  // namespace subnewton
