#include "subnewton/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <string_view>

#include <fmt/format.h>

#include "subnewton/rng.hpp"

namespace subnewton {

// ---------------------------------------------------------------------------
// DesignMatrix

DesignMatrix DesignMatrix::dense(std::size_t rows, std::size_t cols, std::vector<double> values) {
    require(values.size() == rows * cols, "DesignMatrix::dense: value count != rows * cols");
    DesignMatrix m;
    m.rows_ = rows;
    m.cols_ = cols;
    m.kind_ = StorageKind::dense;
    m.values_ = std::move(values);
    return m;
}

DesignMatrix DesignMatrix::csr(std::size_t rows, std::size_t cols, std::vector<std::size_t> offsets,
                               std::vector<std::uint32_t> indices, std::vector<double> values) {
    require(offsets.size() == rows + 1, "DesignMatrix::csr: need rows + 1 offsets");
    require(offsets.front() == 0, "DesignMatrix::csr: first offset must be 0");
    require(std::is_sorted(offsets.begin(), offsets.end()), "DesignMatrix::csr: offsets must be non-decreasing");
    require(offsets.back() == values.size(), "DesignMatrix::csr: final offset must equal stored value count");
    require(indices.size() == values.size(), "DesignMatrix::csr: index/value count mismatch");
    require(std::all_of(indices.begin(), indices.end(), [cols](std::uint32_t j) { return j < cols; }),
            "DesignMatrix::csr: column index out of range");
    DesignMatrix m;
    m.rows_ = rows;
    m.cols_ = cols;
    m.kind_ = StorageKind::sparse;
    m.offsets_ = std::move(offsets);
    m.indices_ = std::move(indices);
    m.values_ = std::move(values);
    return m;
}

double DesignMatrix::density() const {
    const double cells = static_cast<double>(rows_) * static_cast<double>(cols_);
    if (cells == 0.0) return 0.0;
    std::size_t nz = 0;
    if (kind_ == StorageKind::dense) {
        nz = static_cast<std::size_t>(std::count_if(values_.begin(), values_.end(), [](double v) { return v != 0.0; }));
    } else {
        nz = values_.size();
    }
    return static_cast<double>(nz) / cells;
}

double DesignMatrix::row_dot(std::size_t i, std::span<const double> v) const {
    double s = 0.0;
    for_each_in_row(i, [&](std::size_t j, double a) { s += a * v[j]; });
    return s;
}

double DesignMatrix::at(std::size_t i, std::size_t j) const {
    require(i < rows_ && j < cols_, "DesignMatrix::at: index out of range");
    if (kind_ == StorageKind::dense) return values_[i * cols_ + j];
    const auto first = indices_.begin() + static_cast<std::ptrdiff_t>(offsets_[i]);
    const auto last = indices_.begin() + static_cast<std::ptrdiff_t>(offsets_[i + 1]);
    const auto it = std::find(first, last, static_cast<std::uint32_t>(j));
    return it == last ? 0.0 : values_[static_cast<std::size_t>(it - indices_.begin())];
}

std::vector<double> DesignMatrix::matvec(std::span<const double> v) const {
    require(v.size() == cols_, "matvec: vector length != cols");
    std::vector<double> out(rows_);
    for (std::size_t i = 0; i < rows_; ++i) out[i] = row_dot(i, v);
    return out;
}

std::vector<double> DesignMatrix::transpose_matvec(std::span<const double> u) const {
    require(u.size() == rows_, "transpose_matvec: vector length != rows");
    std::vector<double> out(cols_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) for_each_in_row(i, [&](std::size_t j, double a) { out[j] += a * u[i]; });
    return out;
}

std::vector<double> DesignMatrix::column_norms() const {
    std::vector<double> sq(cols_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) for_each_in_row(i, [&](std::size_t j, double a) { sq[j] += a * a; });
    for (double& s : sq) s = std::sqrt(s);
    return sq;
}

DesignMatrix DesignMatrix::to_dense() const {
    if (kind_ == StorageKind::dense) return *this;
    std::vector<double> dense_values(rows_ * cols_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i)
        for_each_in_row(i, [&](std::size_t j, double a) { dense_values[i * cols_ + j] += a; });
    return dense(rows_, cols_, std::move(dense_values));
}

DesignMatrix DesignMatrix::to_sparse() const {
    if (kind_ == StorageKind::sparse) return *this;
    std::vector<std::size_t> offsets(rows_ + 1, 0);
    std::vector<std::uint32_t> indices;
    std::vector<double> vals;
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t j = 0; j < cols_; ++j) {
            const double a = values_[i * cols_ + j];
            if (a != 0.0) {
                indices.push_back(static_cast<std::uint32_t>(j));
                vals.push_back(a);
            }
        }
        offsets[i + 1] = vals.size();
    }
    return csr(rows_, cols_, std::move(offsets), std::move(indices), std::move(vals));
}

DesignMatrix DesignMatrix::with_storage(StoragePolicy policy) const {
    switch (policy) {
        case StoragePolicy::dense: return to_dense();
        case StoragePolicy::sparse: return to_sparse();
        case StoragePolicy::automatic: break;
    }
    return density() > kDenseFillThreshold ? to_dense() : to_sparse();
}

DesignMatrix DesignMatrix::select_rows(std::span<const std::size_t> rows) const {
    for (std::size_t r : rows) require(r < rows_, "select_rows: row index out of range");
    if (kind_ == StorageKind::dense) {
        std::vector<double> out;
        out.reserve(rows.size() * cols_);
        for (std::size_t r : rows)
            out.insert(out.end(), values_.begin() + static_cast<std::ptrdiff_t>(r * cols_),
                       values_.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols_));
        return dense(rows.size(), cols_, std::move(out));
    }
    std::vector<std::size_t> offsets{0};
    std::vector<std::uint32_t> indices;
    std::vector<double> vals;
    for (std::size_t r : rows) {
        for (std::size_t k = offsets_[r]; k < offsets_[r + 1]; ++k) {
            indices.push_back(indices_[k]);
            vals.push_back(values_[k]);
        }
        offsets.push_back(vals.size());
    }
    return csr(rows.size(), cols_, std::move(offsets), std::move(indices), std::move(vals));
}

DesignMatrix DesignMatrix::scale_columns(std::span<const double> factors) const {
    require(factors.size() == cols_, "scale_columns: factor count != cols");
    DesignMatrix out = *this;
    if (kind_ == StorageKind::dense) {
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) out.values_[i * cols_ + j] *= factors[j];
    } else {
        for (std::size_t k = 0; k < values_.size(); ++k) out.values_[k] *= factors[indices_[k]];
    }
    return out;
}

// ---------------------------------------------------------------------------
// LabeledDataset

LabeledDataset::LabeledDataset(DesignMatrix features, std::vector<std::uint32_t> labels, std::size_t classes,
                               std::vector<double> label_values)
    : features_(std::move(features)), labels_(std::move(labels)), classes_(classes), label_values_(std::move(label_values)) {
    if (classes_ < 2) throw DataError("a classification dataset needs at least 2 classes");
    if (labels_.size() != features_.rows()) throw DataError("label count does not match the number of rows");
    for (std::uint32_t b : labels_)
        if (b >= classes_) throw DataError(fmt::format("label {} outside 0..{}", b, classes_ - 1));
    if (label_values_.empty()) {
        label_values_.resize(classes_);
        std::iota(label_values_.begin(), label_values_.end(), 0.0);
    }
    if (label_values_.size() != classes_) throw DataError("label value table must have one entry per class");
}

LabeledDataset LabeledDataset::select_rows(std::span<const std::size_t> rows) const {
    std::vector<std::uint32_t> labels;
    labels.reserve(rows.size());
    for (std::size_t r : rows) labels.push_back(labels_.at(r));
    return LabeledDataset(features_.select_rows(rows), std::move(labels), classes_, label_values_);
}

LabeledDataset LabeledDataset::with_features(DesignMatrix features) const {
    return LabeledDataset(std::move(features), labels_, classes_, label_values_);
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f'; }

std::string_view trim(std::string_view s) {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    if (sep == ' ') {
        std::size_t i = 0;
        while (i < line.size()) {
            while (i < line.size() && is_space(line[i])) ++i;
            const std::size_t start = i;
            while (i < line.size() && !is_space(line[i])) ++i;
            if (i > start) out.push_back(line.substr(start, i - start));
        }
    } else {
        std::size_t start = 0;
        for (std::size_t i = 0; i <= line.size(); ++i) {
            if (i == line.size() || line[i] == sep) {
                out.push_back(trim(line.substr(start, i - start)));
                start = i + 1;
            }
        }
    }
    return out;
}

std::optional<double> parse_double(std::string_view s) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

std::optional<std::size_t> parse_index(std::string_view s) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

/// Maps raw file labels to 0-based classes.
struct LabelMap {
    std::vector<double> values;  // class -> raw label

    static LabelMap build(std::span<const double> raw, std::size_t classes, const LoadOptions& options) {
        LabelMap map;
        if (options.class_labels) {
            map.values = *options.class_labels;
            if (map.values.size() > classes)
                throw DataError(fmt::format("{} declared class labels exceed class count {}", map.values.size(), classes));
        } else {
            map.values.assign(raw.begin(), raw.end());
            std::sort(map.values.begin(), map.values.end());
            map.values.erase(std::unique(map.values.begin(), map.values.end()), map.values.end());
            if (map.values.size() > classes)
                throw DataError(fmt::format("file has {} distinct labels but {} classes were declared", map.values.size(),
                                            classes));
        }
        // Unused trailing classes get placeholder labels continuing after the largest one.
        double next = map.values.empty() ? 0.0 : *std::max_element(map.values.begin(), map.values.end()) + 1.0;
        while (map.values.size() < classes) map.values.push_back(next++);
        return map;
    }

    std::optional<std::uint32_t> find(double raw) const {
        for (std::size_t c = 0; c < values.size(); ++c)
            if (values[c] == raw) return static_cast<std::uint32_t>(c);
        return std::nullopt;
    }
};

LabeledDataset assemble(std::size_t rows, std::size_t cols, std::vector<std::size_t> offsets,
                        std::vector<std::uint32_t> indices, std::vector<double> values, std::span<const double> raw_labels,
                        std::span<const std::size_t> label_lines, std::size_t classes, const LoadOptions& options) {
    const LabelMap map = LabelMap::build(raw_labels, classes, options);
    std::vector<std::uint32_t> labels;
    labels.reserve(raw_labels.size());
    for (std::size_t i = 0; i < raw_labels.size(); ++i) {
        const auto c = map.find(raw_labels[i]);
        if (!c) throw DataError(fmt::format("label {} on line {} is not in the declared class set", raw_labels[i], label_lines[i]));
        labels.push_back(*c);
    }
    DesignMatrix m = DesignMatrix::csr(rows, cols, std::move(offsets), std::move(indices), std::move(values));
    return LabeledDataset(m.with_storage(options.storage), std::move(labels), classes, map.values);
}

}  // namespace

LabeledDataset parse_libsvm(const std::string& text, std::size_t classes, const LoadOptions& options) {
    std::vector<std::size_t> offsets{0};
    std::vector<std::uint32_t> indices;
    std::vector<double> values;
    std::vector<double> raw_labels;
    std::vector<std::size_t> label_lines;
    std::size_t max_index = 0;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        const std::string_view line = trim(std::string_view(text).substr(pos, end - pos));
        pos = end + 1;
        ++line_no;
        if (line.empty() || line.front() == '#') continue;

        const auto fields = split_fields(line, ' ');
        const auto label = parse_double(fields[0]);
        if (!label) throw ParseError(fmt::format("bad label '{}'", fields[0]), line_no);

        std::size_t previous = 0;
        for (std::size_t f = 1; f < fields.size(); ++f) {
            const auto colon = fields[f].find(':');
            if (colon == std::string_view::npos) throw ParseError(fmt::format("expected idx:val, got '{}'", fields[f]), line_no);
            const auto idx = parse_index(fields[f].substr(0, colon));
            const auto val = parse_double(fields[f].substr(colon + 1));
            if (!idx || *idx == 0) throw ParseError(fmt::format("bad 1-based feature index in '{}'", fields[f]), line_no);
            if (!val) throw ParseError(fmt::format("bad feature value in '{}'", fields[f]), line_no);
            if (*idx <= previous) throw ParseError("feature indices must be strictly increasing", line_no);
            if (options.feature_count && *idx > *options.feature_count)
                throw ParseError(fmt::format("feature index {} exceeds declared dimension {}", *idx, *options.feature_count), line_no);
            previous = *idx;
            max_index = std::max(max_index, *idx);
            if (*val != 0.0) {
                indices.push_back(static_cast<std::uint32_t>(*idx - 1));
                values.push_back(*val);
            }
        }
        offsets.push_back(values.size());
        raw_labels.push_back(*label);
        label_lines.push_back(line_no);
    }
    const std::size_t cols = options.feature_count.value_or(max_index);
    return assemble(raw_labels.size(), cols, std::move(offsets), std::move(indices), std::move(values), raw_labels,
                    label_lines, classes, options);
}

LabeledDataset parse_csv(const std::string& text, std::size_t classes, const LoadOptions& options) {
    std::vector<std::size_t> offsets{0};
    std::vector<std::uint32_t> indices;
    std::vector<double> values;
    std::vector<double> raw_labels;
    std::vector<std::size_t> label_lines;
    std::optional<std::size_t> width;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        const std::string_view line = trim(std::string_view(text).substr(pos, end - pos));
        pos = end + 1;
        ++line_no;
        if (line.empty() || line.front() == '#') continue;

        const auto fields = split_fields(line, ',');
        if (fields.size() < 2) throw ParseError("need at least one feature and a label", line_no);
        if (width && *width != fields.size() - 1)
            throw ParseError(fmt::format("expected {} features, got {}", *width, fields.size() - 1), line_no);
        width = fields.size() - 1;
        for (std::size_t j = 0; j + 1 < fields.size(); ++j) {
            const auto v = parse_double(fields[j]);
            if (!v) throw ParseError(fmt::format("bad value '{}'", fields[j]), line_no);
            if (*v != 0.0) {
                indices.push_back(static_cast<std::uint32_t>(j));
                values.push_back(*v);
            }
        }
        const auto label = parse_double(fields.back());
        if (!label || *label != std::floor(*label)) throw ParseError(fmt::format("bad integer label '{}'", fields.back()), line_no);
        offsets.push_back(values.size());
        raw_labels.push_back(*label);
        label_lines.push_back(line_no);
    }
    const std::size_t cols = options.feature_count.value_or(width.value_or(0));
    if (width && cols != *width) throw DataError("declared feature count does not match CSV width");
    return assemble(raw_labels.size(), cols, std::move(offsets), std::move(indices), std::move(values), raw_labels,
                    label_lines, classes, options);
}

LabeledDataset load_libsvm(const std::filesystem::path& path, std::size_t classes, const LoadOptions& options) {
    return parse_libsvm(read_file(path), classes, options);
}

LabeledDataset load_csv(const std::filesystem::path& path, std::size_t classes, const LoadOptions& options) {
    return parse_csv(read_file(path), classes, options);
}

void save_libsvm(const LabeledDataset& data, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
    const auto& A = data.features();
    std::string line;
    for (std::size_t i = 0; i < data.size(); ++i) {
        line = fmt::format("{}", data.label_values()[data.label(i)]);
        A.for_each_in_row(i, [&](std::size_t j, double a) {
            if (a != 0.0) line += fmt::format(" {}:{}", j + 1, a);
        });
        line += '\n';
        out << line;
    }
    if (!out) throw DataError(fmt::format("write failed for '{}'", path.string()));
}

// ---------------------------------------------------------------------------
// Transformations

LabeledDataset normalize_columns(const LabeledDataset& data) {
    std::vector<double> factors = data.features().column_norms();
    for (double& f : factors) f = f > 0.0 ? 1.0 / f : 1.0;
    return data.with_features(data.features().scale_columns(factors));
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(std::size_t n, double train_fraction,
                                                                            std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ContractViolation("train fraction must lie in (0, 1)");
    if (n < 2) throw DataError("need at least 2 rows to split");
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    auto gen = make_stream(seed, 0, StreamPurpose::split);
    shuffle(std::span<std::size_t>(perm), gen);
    const auto n_train = static_cast<std::size_t>(std::ceil(train_fraction * static_cast<double>(n)));
    std::vector<std::size_t> train(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::vector<std::size_t> test(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    return {std::move(train), std::move(test)};
}

std::pair<LabeledDataset, LabeledDataset> train_test_split(const LabeledDataset& data, double train_fraction,
                                                           std::uint64_t seed) {
    const auto [train, test] = split_indices(data.size(), train_fraction, seed);
    return {data.select_rows(train), data.select_rows(test)};
}

std::pair<LabeledDataset, LabeledDataset> stratified_split(const LabeledDataset& data, double train_fraction,
                                                           std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ContractViolation("train fraction must lie in (0, 1)");
    if (data.size() < 2) throw DataError("need at least 2 rows to split");
    std::vector<std::vector<std::size_t>> by_class(data.classes());
    for (std::size_t i = 0; i < data.size(); ++i) by_class[data.label(i)].push_back(i);
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        auto& rows = by_class[c];
        auto gen = make_stream(seed, c, StreamPurpose::split);
        shuffle(std::span<std::size_t>(rows), gen);
        const auto k = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(rows.size())));
        train.insert(train.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(k));
        test.insert(test.end(), rows.begin() + static_cast<std::ptrdiff_t>(k), rows.end());
    }
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    return {data.select_rows(train), data.select_rows(test)};
}

}  // namespace subnewton
