#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "subnewton/rng.hpp"
#include "subnewton/softmax.hpp"

namespace subnewton {

struct SampleConfig {
    double gradient_fraction = 1.0;
    double hessian_fraction = 1.0;
    bool with_replacement = false;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Index collections S_g and S_H for one outer iteration, sorted ascending.
struct SampleSets {
    std::vector<std::size_t> gradient;
    std::vector<std::size_t> hessian;
};

/// max(1, round(fraction * n)).
std::size_t sample_size(double fraction, std::size_t n);

/// Uniform index sample of size `size` from {0..n-1}; sorted. Without replacement
/// and size == n this is exactly 0..n-1.
std::vector<std::size_t> draw_indices(std::size_t n, std::size_t size, bool with_replacement, std::mt19937_64& gen);

/// Fresh S_g and S_H for `iteration`; the two sets come from independent streams
/// keyed by (seed, iteration, purpose).
SampleSets draw_samples(const SampleConfig& config, std::size_t n, std::uint64_t iteration);

/// Sub-sampled gradient and Hessian estimators with n/|S| scaling. The lambda
/// term is always added in full.
class SubsampledOracle {
public:
    SubsampledOracle(const SoftmaxProblem& problem, SampleSets samples);

    const SampleSets& samples() const noexcept { return samples_; }
    double gradient_scale() const noexcept { return gradient_scale_; }
    double hessian_scale() const noexcept { return hessian_scale_; }

    std::vector<double> sub_gradient(const WeightVector& x) const;
    std::vector<double> sub_hess_vec(const WeightVector& x, std::span<const double> v) const;
    /// Operator over S_H at x; caches the probabilities for repeated products.
    /// Valid while this oracle is alive.
    HessianOperator hessian_operator(const WeightVector& x) const;

private:
    const SoftmaxProblem* problem_;
    SampleSets samples_;
    double gradient_scale_;
    double hessian_scale_;
};

}  // namespace subnewton
