#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "subnewton/errors.hpp"

namespace subnewton {

enum class StorageKind { dense, sparse };

/// Storage selection when building a matrix. `automatic` picks dense above 25% fill.
enum class StoragePolicy { automatic, dense, sparse };

inline constexpr double kDenseFillThreshold = 0.25;

/// n x p feature matrix; row i is the data point a_i. Dense row-major or CSR.
/// Immutable once built.
class DesignMatrix {
public:
    DesignMatrix() = default;

    static DesignMatrix dense(std::size_t rows, std::size_t cols, std::vector<double> values);
    /// Validates the CSR invariants: offsets non-decreasing, offsets.back() == nnz,
    /// every column index < cols.
    static DesignMatrix csr(std::size_t rows, std::size_t cols, std::vector<std::size_t> offsets,
                            std::vector<std::uint32_t> indices, std::vector<double> values);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    StorageKind kind() const noexcept { return kind_; }
    std::size_t stored_values() const noexcept { return values_.size(); }
    /// Fraction of nonzero entries (explicitly counted for dense storage).
    double density() const;

    /// Calls f(column, value) for every stored entry of row i. Dense rows visit all
    /// columns, including zeros.
    template <typename F>
    void for_each_in_row(std::size_t i, F&& f) const {
        if (kind_ == StorageKind::dense) {
            const double* row = values_.data() + i * cols_;
            for (std::size_t j = 0; j < cols_; ++j) f(j, row[j]);
        } else {
            for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) f(static_cast<std::size_t>(indices_[k]), values_[k]);
        }
    }

    double row_dot(std::size_t i, std::span<const double> v) const;
    double at(std::size_t i, std::size_t j) const;

    /// A * v (length n).
    std::vector<double> matvec(std::span<const double> v) const;
    /// A^T * u (length p).
    std::vector<double> transpose_matvec(std::span<const double> u) const;
    std::vector<double> column_norms() const;

    DesignMatrix to_dense() const;
    DesignMatrix to_sparse() const;
    DesignMatrix with_storage(StoragePolicy policy) const;
    DesignMatrix select_rows(std::span<const std::size_t> rows) const;
    DesignMatrix scale_columns(std::span<const double> factors) const;

    // Raw CSR access (empty for dense storage).
    std::span<const std::size_t> row_offsets() const noexcept { return offsets_; }
    std::span<const std::uint32_t> column_indices() const noexcept { return indices_; }
    std::span<const double> values() const noexcept { return values_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    StorageKind kind_ = StorageKind::dense;
    std::vector<double> values_;
    std::vector<std::size_t> offsets_;
    std::vector<std::uint32_t> indices_;
};

/// Features plus 0-based class labels. The highest label (C-1) is the reference
/// class whose weights are pinned to zero.
class LabeledDataset {
public:
    LabeledDataset() = default;
    /// `label_values` maps 0-based class -> label as written on disk; defaults to 0..C-1.
    LabeledDataset(DesignMatrix features, std::vector<std::uint32_t> labels, std::size_t classes,
                   std::vector<double> label_values = {});

    std::size_t size() const noexcept { return features_.rows(); }
    std::size_t features_count() const noexcept { return features_.cols(); }
    std::size_t classes() const noexcept { return classes_; }
    const DesignMatrix& features() const noexcept { return features_; }
    std::span<const std::uint32_t> labels() const noexcept { return labels_; }
    std::uint32_t label(std::size_t i) const { return labels_[i]; }
    std::span<const double> label_values() const noexcept { return label_values_; }

    LabeledDataset select_rows(std::span<const std::size_t> rows) const;
    LabeledDataset with_features(DesignMatrix features) const;

private:
    DesignMatrix features_;
    std::vector<std::uint32_t> labels_;
    std::size_t classes_ = 2;
    std::vector<double> label_values_;
};

struct LoadOptions {
    /// Feature count; default is the largest index seen.
    std::optional<std::size_t> feature_count;
    /// Declared class set as it appears in the file, in class order. When absent the
    /// sorted distinct labels are used.
    std::optional<std::vector<double>> class_labels;
    StoragePolicy storage = StoragePolicy::automatic;
};

/// LIBSVM text: `<label> <idx>:<val> ...`, 1-based indices.
LabeledDataset load_libsvm(const std::filesystem::path& path, std::size_t classes, const LoadOptions& options = {});
/// Writes original labels and nonzero entries with round-trip precision.
void save_libsvm(const LabeledDataset& data, const std::filesystem::path& path);
/// Dense CSV: one sample per row, last column is the integer label.
LabeledDataset load_csv(const std::filesystem::path& path, std::size_t classes, const LoadOptions& options = {});

/// Parses LIBSVM text held in memory; `load_libsvm` reads the file and calls this.
LabeledDataset parse_libsvm(const std::string& text, std::size_t classes, const LoadOptions& options = {});
LabeledDataset parse_csv(const std::string& text, std::size_t classes, const LoadOptions& options = {});

/// Scales every nonzero column to unit Euclidean norm; zero columns stay zero.
LabeledDataset normalize_columns(const LabeledDataset& data);

/// Random disjoint partition with ceil(f*n) training rows. Row order inside each
/// part follows the original order.
std::pair<LabeledDataset, LabeledDataset> train_test_split(const LabeledDataset& data, double train_fraction,
                                                           std::uint64_t seed);
/// Same, but each class contributes round(f * n_c) rows to the training part.
std::pair<LabeledDataset, LabeledDataset> stratified_split(const LabeledDataset& data, double train_fraction,
                                                           std::uint64_t seed);

/// Index partition behind train_test_split (exposed for tests).
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(std::size_t n, double train_fraction,
                                                                            std::uint64_t seed);

}  // namespace subnewton
