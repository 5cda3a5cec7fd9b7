#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "subnewton/errors.hpp"

// Small dense vector kernels shared by the solvers.
namespace subnewton::linalg {

inline double dot(std::span<const double> a, std::span<const double> b) {
    require(a.size() == b.size(), "dot: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double norm_inf(std::span<const double> a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

/// y += alpha * x
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    require(x.size() == y.size(), "axpy: length mismatch");
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline void scale(double alpha, std::span<double> x) {
    for (double& v : x) v *= alpha;
}

inline std::vector<double> add_scaled(std::span<const double> x, double alpha, std::span<const double> p) {
    std::vector<double> out(x.begin(), x.end());
    axpy(alpha, p, out);
    return out;
}

inline bool all_finite(std::span<const double> a) {
    for (double v : a)
        if (!std::isfinite(v)) return false;
    return true;
}

}  // namespace subnewton::linalg
