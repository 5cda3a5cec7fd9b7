#pragma once

#include <cstddef>
#include <functional>

namespace subnewton {

struct LineSearchConfig {
    double beta = 1e-4;   ///< sufficient-decrease constant, 0 < beta < 1
    double rho = 0.5;     ///< back-tracking factor, 0 < rho < 1
    std::size_t max_iters = 50;  ///< maximum step reductions
    double alpha0 = 1.0;  ///< first trial step

    void validate() const;
};

struct LineSearchResult {
    bool accepted = false;
    double alpha = 0.0;           ///< accepted step (last trial when rejected)
    double value = 0.0;           ///< f(alpha) at the accepted step
    std::size_t evaluations = 0;  ///< number of f calls
};

/// Armijo back-tracking over alpha0 * rho^i, i = 0..max_iters. Accepts the first
/// alpha with f(alpha) <= f0 + alpha * beta * slope. Non-finite trial values
/// count as failures. A non-negative slope is rejected without evaluating f.
LineSearchResult line_search(const std::function<double(double)>& f, double f0, double slope,
                             const LineSearchConfig& config);

}  // namespace subnewton
