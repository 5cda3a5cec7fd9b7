#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "subnewton/linalg.hpp"
#include "subnewton/rng.hpp"
#include "subnewton/sampling.hpp"
#include "support/oracles.hpp"

using namespace subnewton;

TEST_CASE("sample_size rounds and floors at one") {
    CHECK(sample_size(0.05, 100) == 5);
    CHECK(sample_size(0.05, 10) == 1);
    CHECK(sample_size(1.0, 37) == 37);
    CHECK(sample_size(0.2, 8000) == 1600);
}

TEST_CASE("SampleConfig validation") {
    SampleConfig cfg;
    cfg.hessian_fraction = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ContractViolation);
    cfg.hessian_fraction = 1.5;
    CHECK_THROWS_AS(cfg.validate(), ContractViolation);
}

TEST_CASE("draw_samples") {
    SampleConfig cfg;
    cfg.hessian_fraction = 0.05;
    cfg.seed = 17;

    SUBCASE("full gradient sample is 0..n-1") {
        const auto s = draw_samples(cfg, 100, 3);
        std::vector<std::size_t> iota(100);
        std::iota(iota.begin(), iota.end(), 0);
        CHECK(s.gradient == iota);
    }
    SUBCASE("5% of 100 without replacement") {
        const auto s = draw_samples(cfg, 100, 0);
        CHECK(s.hessian.size() == 5);
        CHECK(std::set<std::size_t>(s.hessian.begin(), s.hessian.end()).size() == 5);
        CHECK(std::is_sorted(s.hessian.begin(), s.hessian.end()));
        for (auto i : s.hessian) CHECK(i < 100);
    }
    SUBCASE("deterministic per iteration, varying across iterations") {
        std::set<std::vector<std::size_t>> distinct;
        for (std::uint64_t it = 0; it < 100; ++it) {
            const auto a = draw_samples(cfg, 100, it);
            const auto b = draw_samples(cfg, 100, it);
            CHECK(a.hessian == b.hessian);
            distinct.insert(a.hessian);
        }
        CHECK(distinct.size() >= 99);
    }
    SUBCASE("with replacement stays in range") {
        cfg.with_replacement = true;
        cfg.hessian_fraction = 0.5;
        const auto s = draw_samples(cfg, 20, 1);
        CHECK(s.hessian.size() == 10);
        for (auto i : s.hessian) CHECK(i < 20);
    }
}

TEST_CASE("rng helpers") {
    auto gen = make_stream(1, 2, StreamPurpose::shuffle);
    for (int k = 0; k < 1000; ++k) CHECK(uniform_below(gen, 7) < 7);
    std::vector<int> v(50);
    std::iota(v.begin(), v.end(), 0);
    shuffle(std::span<int>(v), gen);
    std::vector<int> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    for (int k = 0; k < 50; ++k) CHECK(sorted[k] == k);
    auto a = make_stream(5, 0, StreamPurpose::gradient_sample);
    auto b = make_stream(5, 0, StreamPurpose::hessian_sample);
    CHECK(a() != b());
}

TEST_CASE("SubsampledOracle") {
    const auto ds = oracle::random_dataset(40, 5, 3, 101);
    const SoftmaxProblem prob(ds, 1e-3);
    const auto x = oracle::random_weights(ds, 102);
    const auto v = oracle::random_vector(prob.dimension(), 103);

    SUBCASE("full samples are bit-identical to full evaluations") {
        const SubsampledOracle full(prob, draw_samples(SampleConfig{}, 40, 0));
        CHECK(full.sub_gradient(x) == gradient(prob, x));
        CHECK(full.sub_hess_vec(x, v) == hess_vec(prob, x, v));
        CHECK(full.gradient_scale() == 1.0);
    }
    SUBCASE("singleton S_g is n times the one-row gradient plus lambda x") {
        SampleSets sets;
        sets.gradient = {7};
        sets.hessian = {7};
        const SubsampledOracle one(prob, sets);
        const std::size_t row = 7;
        const auto single = ds.select_rows(std::span<const std::size_t>(&row, 1));
        const SoftmaxProblem single_prob(single, 0.0);
        const auto g1 = gradient(single_prob, x);
        const auto g = one.sub_gradient(x);
        for (std::size_t k = 0; k < g.size(); ++k) CHECK(g[k] == doctest::Approx(40.0 * g1[k] + 1e-3 * x[k]).epsilon(1e-12));
    }
    SUBCASE("zero vector and PSD") {
        SampleConfig cfg;
        cfg.hessian_fraction = 0.1;
        const SubsampledOracle sub(prob, draw_samples(cfg, 40, 2));
        for (double e : sub.sub_hess_vec(x, std::vector<double>(prob.dimension(), 0.0))) CHECK(e == 0.0);
        CHECK(linalg::dot(v, sub.sub_hess_vec(x, v)) >= 1e-3 * linalg::dot(v, v) - 1e-10);
    }
    SUBCASE("out-of-range indices rejected") {
        SampleSets sets;
        sets.gradient = {40};
        sets.hessian = {0};
        CHECK_THROWS_AS(SubsampledOracle(prob, sets), ContractViolation);
    }
}
