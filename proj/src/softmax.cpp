#include "subnewton/softmax.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace subnewton {

namespace {

// Rows per reduction block. Block partial sums are added in row order, which
// fixes the floating-point reduction order.
constexpr std::size_t kRowBlock = 256;

/// Copies block-ordered weights (class-major) into feature-major order so the
/// per-entry inner loop over classes is contiguous.
std::vector<double> feature_major(std::span<const double> stacked, std::size_t features, std::size_t blocks) {
    std::vector<double> out(stacked.size());
    for (std::size_t c = 0; c < blocks; ++c)
        for (std::size_t j = 0; j < features; ++j) out[j * blocks + c] = stacked[c * features + j];
    return out;
}

/// z[c] = <a_i, x_c> for c < blocks.
void row_logits(const DesignMatrix& A, std::size_t i, std::span<const double> xt, std::size_t blocks, double* z) {
    std::fill(z, z + blocks, 0.0);
    A.for_each_in_row(i, [&](std::size_t j, double a) {
        const double* w = xt.data() + j * blocks;
        for (std::size_t c = 0; c < blocks; ++c) z[c] += a * w[c];
    });
}

/// Log-sum-exp pieces of one row. After the call z holds exp(z_c - M).
struct LseParts {
    double max_part;
    double sum_exp;
    double normalizer;  // alpha(a) = exp(-M) + sum_exp
};

LseParts stabilize(double* z, std::size_t blocks) {
    double m = 0.0;
    for (std::size_t c = 0; c < blocks; ++c) m = std::max(m, z[c]);
    double s = 0.0;
    for (std::size_t c = 0; c < blocks; ++c) {
        z[c] = std::exp(z[c] - m);
        s += z[c];
    }
    return {m, s, std::exp(-m) + s};
}

void check_weights(const LabeledDataset& data, const WeightVector& x) {
    require(x.features() == data.features_count() && x.classes() == data.classes(),
            "weight vector shape does not match the dataset");
}

}  // namespace

// ---------------------------------------------------------------------------
// WeightVector

WeightVector::WeightVector(std::size_t features, std::size_t classes)
    : WeightVector(features, classes, std::vector<double>((classes > 0 ? classes - 1 : 0) * features, 0.0)) {}

WeightVector::WeightVector(std::size_t features, std::size_t classes, std::vector<double> values)
    : features_(features), classes_(classes), values_(std::move(values)) {
    require(classes_ >= 2, "WeightVector: need at least 2 classes");
    require(values_.size() == (classes_ - 1) * features_, "WeightVector: length must be (C-1)*p");
}

std::span<const double> WeightVector::block(std::size_t c) const {
    require(c + 1 < classes_, "WeightVector::block: class index out of range");
    return std::span<const double>(values_).subspan(c * features_, features_);
}

std::span<double> WeightVector::block(std::size_t c) {
    require(c + 1 < classes_, "WeightVector::block: class index out of range");
    return std::span<double>(values_).subspan(c * features_, features_);
}

void save_weights(const WeightVector& x, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
    out << fmt::format("{} {}\n", x.features(), x.classes());
    for (double v : x.values()) out << fmt::format("{:.17g}\n", v);
    if (!out) throw DataError(fmt::format("write failed for '{}'", path.string()));
}

WeightVector load_weights(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));
    std::size_t p = 0;
    std::size_t classes = 0;
    if (!(in >> p >> classes) || classes < 2) throw ParseError("bad weight header, expected 'p C'", 1);
    std::vector<double> values((classes - 1) * p);
    for (std::size_t k = 0; k < values.size(); ++k)
        if (!(in >> values[k])) throw ParseError("truncated weight file", k + 2);
    return WeightVector(p, classes, std::move(values));
}

// ---------------------------------------------------------------------------
// Problem

SoftmaxProblem::SoftmaxProblem(const LabeledDataset& data, double lambda) : data_(&data), lambda_(lambda) {
    require(lambda >= 0.0, "SoftmaxProblem: lambda must be >= 0");
}

RowStats row_stats(const LabeledDataset& data, const WeightVector& x, RowSelection rows) {
    check_weights(data, x);
    const std::size_t K = data.classes() - 1;
    const std::size_t count = rows.count(data.size());
    const auto xt = feature_major(x.values(), x.features(), K);
    RowStats stats;
    stats.max_part.resize(count);
    stats.sum_exp_part.resize(count);
    stats.linear_part.resize(count);
    std::vector<double> z(K);
    for (std::size_t k = 0; k < count; ++k) {
        const std::size_t i = rows.row(k);
        row_logits(data.features(), i, xt, K, z.data());
        const std::uint32_t b = data.label(i);
        stats.linear_part[k] = b < K ? z[b] : 0.0;
        const LseParts parts = stabilize(z.data(), K);
        stats.max_part[k] = parts.max_part;
        stats.sum_exp_part[k] = parts.sum_exp;
    }
    return stats;
}

double data_loss(const LabeledDataset& data, const WeightVector& x, RowSelection rows) {
    check_weights(data, x);
    const std::size_t K = data.classes() - 1;
    const std::size_t count = rows.count(data.size());
    const auto xt = feature_major(x.values(), x.features(), K);
    std::vector<double> z(K);
    double total = 0.0;
    for (std::size_t start = 0; start < count; start += kRowBlock) {
        const std::size_t stop = std::min(count, start + kRowBlock);
        double block = 0.0;
        for (std::size_t k = start; k < stop; ++k) {
            const std::size_t i = rows.row(k);
            row_logits(data.features(), i, xt, K, z.data());
            const std::uint32_t b = data.label(i);
            const double linear = b < K ? z[b] : 0.0;
            const LseParts parts = stabilize(z.data(), K);
            block += parts.max_part + std::log(parts.normalizer) - linear;
        }
        total += block;
    }
    return total;
}

double objective(const SoftmaxProblem& problem, const WeightVector& x) {
    const double reg = 0.5 * problem.lambda() * [&] {
        double s = 0.0;
        for (double v : x.values()) s += v * v;
        return s;
    }();
    return data_loss(problem.data(), x, RowSelection::all()) + reg;
}

void scaled_gradient(const SoftmaxProblem& problem, const WeightVector& x, RowSelection rows, double scale,
                     std::span<double> out) {
    const auto& data = problem.data();
    check_weights(data, x);
    require(out.size() == x.size(), "gradient: output length mismatch");
    const std::size_t K = data.classes() - 1;
    const std::size_t p = data.features_count();
    const std::size_t count = rows.count(data.size());
    const auto xt = feature_major(x.values(), p, K);
    std::vector<double> gt(p * K, 0.0);
    std::vector<double> z(K);
    for (std::size_t k = 0; k < count; ++k) {
        const std::size_t i = rows.row(k);
        row_logits(data.features(), i, xt, K, z.data());
        const LseParts parts = stabilize(z.data(), K);
        // z becomes the residual h(a_i, x_c) - 1(b_i = c).
        for (std::size_t c = 0; c < K; ++c) z[c] /= parts.normalizer;
        const std::uint32_t b = data.label(i);
        if (b < K) z[b] -= 1.0;
        data.features().for_each_in_row(i, [&](std::size_t j, double a) {
            double* g = gt.data() + j * K;
            for (std::size_t c = 0; c < K; ++c) g[c] += a * z[c];
        });
    }
    const double lambda = problem.lambda();
    for (std::size_t c = 0; c < K; ++c)
        for (std::size_t j = 0; j < p; ++j) out[c * p + j] = scale * gt[j * K + c] + lambda * x[c * p + j];
}

std::vector<double> gradient(const SoftmaxProblem& problem, const WeightVector& x) {
    std::vector<double> g(x.size());
    scaled_gradient(problem, x, RowSelection::all(), 1.0, g);
    return g;
}

// ---------------------------------------------------------------------------
// Hessian-vector products

HessianOperator::HessianOperator(const SoftmaxProblem& problem, const WeightVector& x, RowSelection rows, double scale)
    : data_(&problem.data()),
      rows_(rows),
      scale_(scale),
      lambda_(problem.lambda()),
      features_(problem.features()),
      blocks_(problem.classes() - 1),
      dimension_(problem.dimension()) {
    check_weights(*data_, x);
    const std::size_t count = rows_.count(data_->size());
    const auto xt = feature_major(x.values(), features_, blocks_);
    probs_.resize(count * blocks_);
    for (std::size_t k = 0; k < count; ++k) {
        double* w = probs_.data() + k * blocks_;
        row_logits(data_->features(), rows_.row(k), xt, blocks_, w);
        const LseParts parts = stabilize(w, blocks_);
        for (std::size_t c = 0; c < blocks_; ++c) w[c] /= parts.normalizer;
    }
}

void HessianOperator::apply(std::span<const double> v, std::span<double> out) const {
    require(v.size() == dimension_ && out.size() == dimension_, "HessianOperator: vector length must equal d");
    const std::size_t K = blocks_;
    const std::size_t p = features_;
    const auto vt = feature_major(v, p, K);
    std::vector<double> ut(p * K, 0.0);
    std::vector<double> u(K);
    const std::size_t count = rows_.count(data_->size());
    for (std::size_t k = 0; k < count; ++k) {
        const std::size_t i = rows_.row(k);
        const double* w = probs_.data() + k * K;
        row_logits(data_->features(), i, vt, K, u.data());  // u = V row
        double s = 0.0;
        for (std::size_t c = 0; c < K; ++c) {
            u[c] *= w[c];
            s += u[c];
        }
        for (std::size_t c = 0; c < K; ++c) u[c] -= w[c] * s;
        data_->features().for_each_in_row(i, [&](std::size_t j, double a) {
            double* acc = ut.data() + j * K;
            for (std::size_t c = 0; c < K; ++c) acc[c] += a * u[c];
        });
    }
    for (std::size_t c = 0; c < K; ++c)
        for (std::size_t j = 0; j < p; ++j) out[c * p + j] = scale_ * ut[j * K + c] + lambda_ * v[c * p + j];
}

std::vector<double> HessianOperator::operator()(std::span<const double> v) const {
    std::vector<double> out(dimension_);
    apply(v, out);
    return out;
}

std::vector<double> hess_vec(const SoftmaxProblem& problem, const WeightVector& x, std::span<const double> v) {
    return HessianOperator(problem, x, RowSelection::all(), 1.0)(v);
}

// ---------------------------------------------------------------------------
// Prediction

std::vector<double> class_probabilities(const LabeledDataset& data, const WeightVector& x) {
    check_weights(data, x);
    const std::size_t C = data.classes();
    const std::size_t K = C - 1;
    const auto xt = feature_major(x.values(), x.features(), K);
    std::vector<double> out(data.size() * C);
    for (std::size_t i = 0; i < data.size(); ++i) {
        double* row = out.data() + i * C;
        row_logits(data.features(), i, xt, K, row);
        const LseParts parts = stabilize(row, K);
        for (std::size_t c = 0; c < K; ++c) row[c] /= parts.normalizer;
        row[K] = std::exp(-parts.max_part) / parts.normalizer;
    }
    return out;
}

std::vector<std::uint32_t> predict(const LabeledDataset& data, const WeightVector& x) {
    const std::size_t C = data.classes();
    const auto probs = class_probabilities(data, x);
    std::vector<std::uint32_t> labels(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double* row = probs.data() + i * C;
        // max_element returns the first maximum, i.e. the lowest class index.
        labels[i] = static_cast<std::uint32_t>(std::max_element(row, row + C) - row);
    }
    return labels;
}

double accuracy(const LabeledDataset& data, const WeightVector& x) {
    if (data.size() == 0) throw DataError("accuracy is undefined on an empty dataset");
    const auto predicted = predict(data, x);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < data.size(); ++i) hits += predicted[i] == data.label(i) ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(data.size());
}

}  // namespace subnewton
