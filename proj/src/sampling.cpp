#include "subnewton/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "subnewton/rng.hpp"

namespace subnewton {

void SampleConfig::validate() const {
    require(gradient_fraction > 0.0 && gradient_fraction <= 1.0, "gradient sample fraction must lie in (0, 1]");
    require(hessian_fraction > 0.0 && hessian_fraction <= 1.0, "Hessian sample fraction must lie in (0, 1]");
}

std::size_t sample_size(double fraction, std::size_t n) {
    const auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
    return std::max<std::size_t>(1, std::min(k, n));
}

std::vector<std::size_t> draw_indices(std::size_t n, std::size_t size, bool with_replacement, std::mt19937_64& gen) {
    require(n >= 1, "draw_indices: need n >= 1");
    std::vector<std::size_t> out;
    if (with_replacement) {
        out.resize(size);
        for (auto& i : out) i = static_cast<std::size_t>(uniform_below(gen, n));
    } else {
        require(size <= n, "draw_indices: sample larger than population");
        out.resize(n);
        std::iota(out.begin(), out.end(), std::size_t{0});
        if (size == n) return out;
        // Partial Fisher-Yates: the first `size` slots become the sample.
        for (std::size_t i = 0; i < size; ++i) {
            const auto j = i + static_cast<std::size_t>(uniform_below(gen, n - i));
            std::swap(out[i], out[j]);
        }
        out.resize(size);
    }
    std::sort(out.begin(), out.end());
    return out;
}

SampleSets draw_samples(const SampleConfig& config, std::size_t n, std::uint64_t iteration) {
    config.validate();
    require(n >= 1, "draw_samples: need n >= 1");
    auto g_stream = make_stream(config.seed, iteration, StreamPurpose::gradient_sample);
    auto h_stream = make_stream(config.seed, iteration, StreamPurpose::hessian_sample);
    SampleSets sets;
    sets.gradient = draw_indices(n, sample_size(config.gradient_fraction, n), config.with_replacement, g_stream);
    sets.hessian = draw_indices(n, sample_size(config.hessian_fraction, n), config.with_replacement, h_stream);
    return sets;
}

SubsampledOracle::SubsampledOracle(const SoftmaxProblem& problem, SampleSets samples)
    : problem_(&problem), samples_(std::move(samples)) {
    const std::size_t n = problem.data().size();
    require(!samples_.gradient.empty() && !samples_.hessian.empty(), "SubsampledOracle: empty sample set");
    for (const auto* set : {&samples_.gradient, &samples_.hessian})
        for (std::size_t i : *set) require(i < n, "SubsampledOracle: sample index out of range");
    gradient_scale_ = static_cast<double>(n) / static_cast<double>(samples_.gradient.size());
    hessian_scale_ = static_cast<double>(n) / static_cast<double>(samples_.hessian.size());
}

std::vector<double> SubsampledOracle::sub_gradient(const WeightVector& x) const {
    std::vector<double> g(x.size());
    scaled_gradient(*problem_, x, RowSelection::subset(samples_.gradient), gradient_scale_, g);
    return g;
}

std::vector<double> SubsampledOracle::sub_hess_vec(const WeightVector& x, std::span<const double> v) const {
    return hessian_operator(x)(v);
}

HessianOperator SubsampledOracle::hessian_operator(const WeightVector& x) const {
    return HessianOperator(*problem_, x, RowSelection::subset(samples_.hessian), hessian_scale_);
}

}  // namespace subnewton
