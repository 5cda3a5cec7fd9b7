#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "subnewton/dataset.hpp"

namespace subnewton {

/// Stacked class weights x = [x_1; ...; x_{C-1}], d = (C-1) * p. Block c is
/// data[c*p, (c+1)*p). The reference class C has implicit zero weights.
class WeightVector {
public:
    WeightVector() = default;
    WeightVector(std::size_t features, std::size_t classes);
    WeightVector(std::size_t features, std::size_t classes, std::vector<double> values);

    std::size_t features() const noexcept { return features_; }
    std::size_t classes() const noexcept { return classes_; }
    std::size_t size() const noexcept { return values_.size(); }

    std::span<const double> values() const noexcept { return values_; }
    std::span<double> values() noexcept { return values_; }
    std::span<const double> block(std::size_t c) const;
    std::span<double> block(std::size_t c);
    double& operator[](std::size_t k) { return values_[k]; }
    double operator[](std::size_t k) const { return values_[k]; }

    bool operator==(const WeightVector&) const = default;

private:
    std::size_t features_ = 0;
    std::size_t classes_ = 2;
    std::vector<double> values_;
};

/// Text format: header line `p C`, then d values (block order), one per line.
void save_weights(const WeightVector& x, const std::filesystem::path& path);
WeightVector load_weights(const std::filesystem::path& path);

/// ℓ2-regularized softmax cross-entropy problem. Holds a reference to the
/// dataset, which must outlive it.
class SoftmaxProblem {
public:
    SoftmaxProblem(const LabeledDataset& data, double lambda);

    const LabeledDataset& data() const noexcept { return *data_; }
    double lambda() const noexcept { return lambda_; }
    std::size_t features() const noexcept { return data_->features_count(); }
    std::size_t classes() const noexcept { return data_->classes(); }
    std::size_t dimension() const noexcept { return (classes() - 1) * features(); }
    WeightVector zero_weights() const { return WeightVector(features(), classes()); }

private:
    const LabeledDataset* data_;
    double lambda_;
};

/// Rows taking part in an evaluation: every row, or an explicit index list
/// (repeats allowed, as produced by sampling with replacement).
class RowSelection {
public:
    static RowSelection all() { return RowSelection(); }
    static RowSelection subset(std::span<const std::size_t> rows) { return RowSelection(rows); }

    bool is_all() const noexcept { return all_; }
    std::size_t count(std::size_t n) const noexcept { return all_ ? n : rows_.size(); }
    std::size_t row(std::size_t k) const noexcept { return all_ ? k : rows_[k]; }

private:
    RowSelection() = default;
    explicit RowSelection(std::span<const std::size_t> rows) : all_(false), rows_(rows) {}

    bool all_ = true;
    std::span<const std::size_t> rows_;
};

/// Per-row log-sum-exp pieces for logits z_c = <a_i, x_c>.
struct RowStats {
    std::vector<double> max_part;      ///< M(a_i) = max(0, z_1, ..., z_{C-1})
    std::vector<double> sum_exp_part;  ///< sum_c exp(z_c - M(a_i))
    std::vector<double> linear_part;   ///< z_{b_i}, or 0 for the reference class
};

RowStats row_stats(const LabeledDataset& data, const WeightVector& x, RowSelection rows = RowSelection::all());

/// F(x) + (lambda/2)||x||^2 over the full dataset.
double objective(const SoftmaxProblem& problem, const WeightVector& x);
std::vector<double> gradient(const SoftmaxProblem& problem, const WeightVector& x);
std::vector<double> hess_vec(const SoftmaxProblem& problem, const WeightVector& x, std::span<const double> v);

/// Sum of the unregularized per-row losses over `rows`.
double data_loss(const LabeledDataset& data, const WeightVector& x, RowSelection rows);

/// out = scale * sum_{i in rows} grad f_i(x) + lambda * x. Used by the full and
/// the sub-sampled gradient alike, so a full selection with scale 1 is the
/// exact gradient.
void scaled_gradient(const SoftmaxProblem& problem, const WeightVector& x, RowSelection rows, double scale,
                     std::span<double> out);

/// v -> (scale * sum_{i in rows} H_i(x)) v + lambda * v, without forming H.
/// The softmax probabilities h(a_i, x_c) are computed once at construction and
/// reused by every application.
class HessianOperator {
public:
    /// `rows` must stay valid for the lifetime of the operator.
    HessianOperator(const SoftmaxProblem& problem, const WeightVector& x, RowSelection rows, double scale);

    std::size_t dimension() const noexcept { return dimension_; }
    void apply(std::span<const double> v, std::span<double> out) const;
    std::vector<double> operator()(std::span<const double> v) const;

private:
    const LabeledDataset* data_;
    RowSelection rows_;
    double scale_;
    double lambda_;
    std::size_t features_;
    std::size_t blocks_;  // C - 1
    std::size_t dimension_;
    std::vector<double> probs_;  // |rows| x (C-1), row-major
};

/// n x C class probabilities (row-major), reference class last.
std::vector<double> class_probabilities(const LabeledDataset& data, const WeightVector& x);
/// argmax of the class probabilities, ties to the lowest class index.
std::vector<std::uint32_t> predict(const LabeledDataset& data, const WeightVector& x);
/// Fraction of correctly predicted rows; DataError for an empty dataset.
double accuracy(const LabeledDataset& data, const WeightVector& x);

}  // namespace subnewton
