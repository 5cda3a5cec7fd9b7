#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace subnewton {

/// out = H * v for a symmetric operator H.
using LinearMap = std::function<void(std::span<const double> v, std::span<double> out)>;

struct CgConfig {
    double theta = 1e-4;    ///< relative residual tolerance, 0 < theta < 1
    std::size_t max_iters = 10;  ///< maximum operator applications

    void validate() const;
};

struct CgReport {
    std::vector<double> solution;  ///< p_best
    double residual_norm = 0.0;    ///< ||r_best||
    std::size_t iterations = 0;    ///< operator applications performed
    bool converged = false;        ///< ||r_best|| <= theta * ||g||
    /// ||r_k|| for k = 0..iterations (r_0 = -g first).
    std::vector<double> residual_history;
};

/// s'Hs at or below this multiple of ||s||^2 is treated as non-positive curvature.
inline constexpr double kCurvatureFloor = 1e-32;

/// Conjugate gradient for H p = -g that returns the iterate with the smallest
/// residual seen, stopping once ||r|| <= theta ||g|| or after max_iters
/// operator applications. Throws CurvatureError if H is not positive definite
/// along a search direction.
CgReport cg_solve(const LinearMap& apply_h, std::span<const double> g, const CgConfig& config);

}  // namespace subnewton
