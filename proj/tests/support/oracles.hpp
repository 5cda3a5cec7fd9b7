#pragma once

// Independent reference computations for the tests. Nothing here calls the
// library's evaluation kernels: objectives, gradients and Hessians are written
// directly from the closed-form softmax expressions, in long double and without
// the log-sum-exp shift (callers keep logits small).

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "subnewton/dataset.hpp"
#include "subnewton/softmax.hpp"

namespace oracle {

using subnewton::DesignMatrix;
using subnewton::LabeledDataset;
using subnewton::WeightVector;

/// Dense Gaussian features scaled by `feature_scale`, uniform labels.
inline LabeledDataset random_dataset(std::size_t n, std::size_t p, std::size_t classes, std::uint64_t seed,
                                     double feature_scale = 1.0) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal(0.0, feature_scale);
    std::uniform_int_distribution<std::uint32_t> label(0, static_cast<std::uint32_t>(classes - 1));
    std::vector<double> values(n * p);
    for (double& v : values) v = normal(gen);
    std::vector<std::uint32_t> labels(n);
    for (auto& b : labels) b = label(gen);
    return LabeledDataset(DesignMatrix::dense(n, p, std::move(values)), std::move(labels), classes);
}

inline std::vector<double> random_vector(std::size_t d, std::uint64_t seed, double scale = 1.0) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> normal(0.0, scale);
    std::vector<double> v(d);
    for (double& e : v) e = normal(gen);
    return v;
}

inline WeightVector random_weights(const LabeledDataset& data, std::uint64_t seed, double scale = 0.3) {
    return WeightVector(data.features_count(), data.classes(),
                        random_vector((data.classes() - 1) * data.features_count(), seed, scale));
}

inline Eigen::MatrixXd dense_features(const LabeledDataset& data) {
    const auto& A = data.features();
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(A.rows()), static_cast<Eigen::Index>(A.cols()));
    for (std::size_t i = 0; i < A.rows(); ++i)
        for (std::size_t j = 0; j < A.cols(); ++j) M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = A.at(i, j);
    return M;
}

/// z_c = <a_i, x_c> for c < C-1 in long double.
inline std::vector<long double> logits(const LabeledDataset& data, std::span<const double> x, std::size_t i) {
    const std::size_t p = data.features_count();
    const std::size_t K = data.classes() - 1;
    std::vector<long double> z(K, 0.0L);
    for (std::size_t c = 0; c < K; ++c)
        for (std::size_t j = 0; j < p; ++j) z[c] += static_cast<long double>(data.features().at(i, j)) * x[c * p + j];
    return z;
}

/// sum_i [ log(1 + sum_c e^{z_c}) - z_{b_i} ] + lambda/2 ||x||^2, unshifted.
inline long double naive_objective(const LabeledDataset& data, std::span<const double> x, double lambda) {
    const std::size_t K = data.classes() - 1;
    long double total = 0.0L;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto z = logits(data, x, i);
        long double denom = 1.0L;
        for (auto zc : z) denom += std::exp(zc);
        total += std::log(denom);
        if (data.label(i) < K) total -= z[data.label(i)];
    }
    long double sq = 0.0L;
    for (double v : x) sq += static_cast<long double>(v) * v;
    return total + 0.5L * lambda * sq;
}

/// Same formula in plain double, no shift. Overflows for large logits.
inline double unstabilized_objective(const LabeledDataset& data, std::span<const double> x) {
    const std::size_t p = data.features_count();
    const std::size_t K = data.classes() - 1;
    double total = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        double denom = 1.0;
        double linear = 0.0;
        for (std::size_t c = 0; c < K; ++c) {
            double z = 0.0;
            for (std::size_t j = 0; j < p; ++j) z += data.features().at(i, j) * x[c * p + j];
            denom += std::exp(z);
            if (data.label(i) == c) linear = z;
        }
        total += std::log(denom) - linear;
    }
    return total;
}

/// sum_i a_i (h_c(a_i) - 1(b_i = c)) + lambda x, blockwise, in long double.
inline std::vector<double> naive_gradient(const LabeledDataset& data, std::span<const double> x, double lambda) {
    const std::size_t p = data.features_count();
    const std::size_t K = data.classes() - 1;
    std::vector<long double> g(p * K, 0.0L);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto z = logits(data, x, i);
        long double denom = 1.0L;
        for (auto zc : z) denom += std::exp(zc);
        for (std::size_t c = 0; c < K; ++c) {
            const long double w = std::exp(z[c]) / denom - (data.label(i) == c ? 1.0L : 0.0L);
            for (std::size_t j = 0; j < p; ++j) g[c * p + j] += w * data.features().at(i, j);
        }
    }
    std::vector<double> out(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) out[k] = static_cast<double>(g[k] + static_cast<long double>(lambda) * x[k]);
    return out;
}

/// Dense d x d Hessian from the per-block formulas:
///   block (c, c):  sum_i (h_c - h_c^2) a_i a_i^T
///   block (c, c'): sum_i (-h_c h_c') a_i a_i^T
/// with h_c = e^{z_c} / (1 + sum e^{z}), plus lambda I.
inline Eigen::MatrixXd dense_hessian(const LabeledDataset& data, std::span<const double> x, double lambda) {
    const std::size_t p = data.features_count();
    const std::size_t K = data.classes() - 1;
    const auto d = static_cast<Eigen::Index>(p * K);
    Eigen::MatrixXd H = lambda * Eigen::MatrixXd::Identity(d, d);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto z = logits(data, x, i);
        long double denom = 1.0L;
        for (auto zc : z) denom += std::exp(zc);
        std::vector<double> h(K);
        for (std::size_t c = 0; c < K; ++c) h[c] = static_cast<double>(std::exp(z[c]) / denom);
        Eigen::VectorXd a(static_cast<Eigen::Index>(p));
        for (std::size_t j = 0; j < p; ++j) a(static_cast<Eigen::Index>(j)) = data.features().at(i, j);
        const Eigen::MatrixXd aat = a * a.transpose();
        for (std::size_t c = 0; c < K; ++c)
            for (std::size_t e = 0; e < K; ++e) {
                const double w = c == e ? h[c] - h[c] * h[c] : -h[c] * h[e];
                H.block(static_cast<Eigen::Index>(c * p), static_cast<Eigen::Index>(e * p), static_cast<Eigen::Index>(p),
                        static_cast<Eigen::Index>(p)) += w * aat;
            }
    }
    return H;
}

/// Central differences of a scalar function, step h = 1e-5 (1 + ||x||_inf).
inline std::vector<double> fd_gradient(const std::function<double(std::span<const double>)>& f, std::span<const double> x) {
    double xmax = 0.0;
    for (double v : x) xmax = std::max(xmax, std::abs(v));
    const double h = 1e-5 * (1.0 + xmax);
    std::vector<double> g(x.size());
    std::vector<double> probe(x.begin(), x.end());
    for (std::size_t k = 0; k < x.size(); ++k) {
        probe[k] = x[k] + h;
        const double fp = f(probe);
        probe[k] = x[k] - h;
        const double fm = f(probe);
        probe[k] = x[k];
        g[k] = (fp - fm) / (2.0 * h);
    }
    return g;
}

inline double rel_error(std::span<const double> a, std::span<const double> b) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - b[i]) * (a[i] - b[i]);
        den += b[i] * b[i];
    }
    return std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
}

inline Eigen::VectorXd to_eigen(std::span<const double> v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline std::vector<double> from_eigen(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace oracle
