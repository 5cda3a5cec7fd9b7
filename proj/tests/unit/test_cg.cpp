#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "subnewton/cg.hpp"
#include "subnewton/errors.hpp"
#include "subnewton/linalg.hpp"
#include "support/oracles.hpp"

using namespace subnewton;

namespace {

LinearMap diagonal(std::vector<double> diag) {
    return [diag = std::move(diag)](std::span<const double> v, std::span<double> out) {
        for (std::size_t i = 0; i < v.size(); ++i) out[i] = diag[i] * v[i];
    };
}

LinearMap dense_map(const Eigen::MatrixXd& M) {
    return [M](std::span<const double> v, std::span<double> out) {
        const Eigen::VectorXd y = M * oracle::to_eigen(v);
        std::copy(y.data(), y.data() + y.size(), out.begin());
    };
}

double recomputed_residual(const LinearMap& h, std::span<const double> p, std::span<const double> g) {
    std::vector<double> hp(p.size());
    h(p, hp);
    for (std::size_t i = 0; i < hp.size(); ++i) hp[i] += g[i];
    return linalg::norm(hp);
}

}  // namespace

TEST_CASE("identity solves in one step") {
    const std::vector<double> g{0.3, -1.2, 4.0};
    const auto rep = cg_solve(diagonal({1, 1, 1}), g, {1e-8, 10});
    CHECK(rep.iterations == 1);
    CHECK(rep.converged);
    CHECK(rep.residual_norm <= 1e-15 * linalg::norm(g));
    for (std::size_t i = 0; i < 3; ++i) CHECK(rep.solution[i] == doctest::Approx(-g[i]).epsilon(1e-15));
}

TEST_CASE("diag(1,2,3,4)") {
    const std::vector<double> g{1, 1, 1, 1};
    const auto rep = cg_solve(diagonal({1, 2, 3, 4}), g, {1e-12, 10});
    CHECK(rep.iterations <= 4);
    CHECK(rep.converged);
    const double expect[] = {-1.0, -0.5, -1.0 / 3.0, -0.25};
    for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(rep.solution[i] - expect[i]) <= 1e-10);
}

TEST_CASE("loose tolerance on an ill-scaled system keeps the best residual") {
    const std::vector<double> g{1.0, 1.0};
    const auto h = diagonal({1.0, 1e4});
    const auto rep = cg_solve(h, g, {0.9, 10});
    CHECK(rep.converged);
    CHECK(rep.residual_norm <= 0.9 * linalg::norm(g));
    REQUIRE(rep.residual_history.size() == rep.iterations + 1);
    CHECK(rep.residual_norm == *std::min_element(rep.residual_history.begin(), rep.residual_history.end()));
    CHECK(std::abs(recomputed_residual(h, rep.solution, g) - rep.residual_norm) <= 1e-8 * linalg::norm(g));
}

TEST_CASE("best iterate over a capped run") {
    const std::size_t d = 30;
    Eigen::MatrixXd B = Eigen::MatrixXd::Random(d, d);
    const Eigen::MatrixXd H = B.transpose() * B + 1e-2 * Eigen::MatrixXd::Identity(d, d);
    const auto g = oracle::random_vector(d, 5);
    const auto map = dense_map(H);
    const auto rep = cg_solve(map, g, {1e-10, 7});
    CHECK(rep.iterations == 7);
    CHECK_FALSE(rep.converged);
    CHECK(rep.residual_norm == *std::min_element(rep.residual_history.begin(), rep.residual_history.end()));
    CHECK(std::abs(recomputed_residual(map, rep.solution, g) - rep.residual_norm) <= 1e-8 * std::max(rep.residual_norm, 1.0));
}

TEST_CASE("one operator application per iteration") {
    std::size_t calls = 0;
    const LinearMap counted = [&](std::span<const double> v, std::span<double> out) {
        ++calls;
        for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<double>(i + 1) * v[i];
    };
    const auto rep = cg_solve(counted, std::vector<double>(8, 1.0), {1e-12, 5});
    CHECK(calls == rep.iterations);
}

TEST_CASE("dense SPD systems match a direct solve") {
    for (std::size_t d : {5u, 20u, 50u}) {
        Eigen::MatrixXd B = Eigen::MatrixXd::Random(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
        const Eigen::MatrixXd H = B.transpose() * B + Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
        const auto g = oracle::random_vector(d, d);
        const auto rep = cg_solve(dense_map(H), g, {1e-12, 4 * d});
        const auto direct = oracle::from_eigen(H.llt().solve(-oracle::to_eigen(g)));
        CHECK(oracle::rel_error(rep.solution, direct) <= 1e-8);
    }
}

TEST_CASE("edge cases") {
    SUBCASE("zero gradient") {
        const auto rep = cg_solve(diagonal({1, 2}), std::vector<double>{0.0, 0.0}, {});
        CHECK(rep.converged);
        CHECK(rep.iterations == 0);
        CHECK(rep.solution == std::vector<double>{0.0, 0.0});
    }
    SUBCASE("indefinite operator") {
        CHECK_THROWS_AS(cg_solve(diagonal({1, -1}), std::vector<double>{0.0, 1.0}, {}), CurvatureError);
    }
    SUBCASE("bad config") {
        CHECK_THROWS_AS(cg_solve(diagonal({1}), std::vector<double>{1.0}, {1.0, 10}), ContractViolation);
        CHECK_THROWS_AS(cg_solve(diagonal({1}), std::vector<double>{1.0}, {0.5, 0}), ContractViolation);
    }
}
