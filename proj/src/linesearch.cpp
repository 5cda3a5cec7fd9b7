#include "subnewton/linesearch.hpp"

#include <cmath>

#include "subnewton/errors.hpp"

namespace subnewton {

void LineSearchConfig::validate() const {
    require(beta > 0.0 && beta < 1.0, "line search beta must lie in (0, 1)");
    require(rho > 0.0 && rho < 1.0, "line search rho must lie in (0, 1)");
    require(max_iters >= 1, "line search needs max_iters >= 1");
    require(alpha0 > 0.0, "line search alpha0 must be positive");
}

LineSearchResult line_search(const std::function<double(double)>& f, double f0, double slope,
                             const LineSearchConfig& config) {
    config.validate();
    LineSearchResult result;
    if (!(slope < 0.0) || !std::isfinite(f0)) return result;

    double alpha = config.alpha0;
    for (std::size_t i = 0; i <= config.max_iters; ++i) {
        const double value = f(alpha);
        ++result.evaluations;
        result.alpha = alpha;
        if (std::isfinite(value) && value <= f0 + alpha * config.beta * slope) {
            result.accepted = true;
            result.value = value;
            return result;
        }
        alpha *= config.rho;
    }
    return result;
}

}  // namespace subnewton
