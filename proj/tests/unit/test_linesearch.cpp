#include <doctest.h>

#include <cmath>
#include <limits>

#include "subnewton/errors.hpp"
#include "subnewton/linesearch.hpp"

using namespace subnewton;

TEST_CASE("Newton step on x^2 is accepted at alpha 1") {
    // x = 1, p = -1: f(alpha) = (1 - alpha)^2, slope = p * f'(1) = -2.
    const auto f = [](double a) { return (1.0 - a) * (1.0 - a); };
    const auto r = line_search(f, 1.0, -2.0, {});
    CHECK(r.accepted);
    CHECK(r.alpha == 1.0);
    CHECK(r.evaluations == 1);
    CHECK(r.value == 0.0);
}

TEST_CASE("overshooting direction back-tracks along the ladder") {
    // x = 1, p = -10 on x^2.
    const auto f = [](double a) { return (1.0 - 10.0 * a) * (1.0 - 10.0 * a); };
    LineSearchConfig cfg;
    cfg.beta = 0.5;
    cfg.rho = 0.5;

    SUBCASE("slope -10: right-hand side 1 - 5 alpha") {
        const auto r = line_search(f, 1.0, -10.0, cfg);
        CHECK(r.accepted);
        CHECK(r.alpha == 0.125);
        CHECK(r.evaluations == 4);
    }
    SUBCASE("slope p * f'(1) = -20: right-hand side 1 - 10 alpha") {
        // 0.125 gives 0.0625 > -0.25; 0.0625 gives 0.140625 <= 0.375.
        const auto r = line_search(f, 1.0, -20.0, cfg);
        CHECK(r.accepted);
        CHECK(r.alpha == 0.0625);
        CHECK(r.evaluations == 5);
        CHECK(r.value <= 1.0 + r.alpha * cfg.beta * -20.0);
    }
}

TEST_CASE("ascent direction fails without evaluating") {
    std::size_t calls = 0;
    const auto f = [&](double a) {
        ++calls;
        return (1.0 + a) * (1.0 + a);
    };
    const auto r = line_search(f, 1.0, 2.0, {});
    CHECK_FALSE(r.accepted);
    CHECK(calls == 0);
}

TEST_CASE("non-finite trials are back-tracked past") {
    const auto f = [](double a) { return a > 0.3 ? std::numeric_limits<double>::infinity() : 1.0 - a; };
    const auto r = line_search(f, 1.0, -1.0, {});
    CHECK(r.accepted);
    CHECK(r.alpha == 0.25);
}

TEST_CASE("evaluation budget and ladder") {
    LineSearchConfig cfg;
    cfg.max_iters = 6;
    std::size_t calls = 0;
    std::vector<double> tried;
    const auto f = [&](double a) {
        ++calls;
        tried.push_back(a);
        return 2.0;  // never decreases
    };
    const auto r = line_search(f, 1.0, -1.0, cfg);
    CHECK_FALSE(r.accepted);
    CHECK(calls == 7);
    CHECK(r.evaluations == 7);
    for (std::size_t i = 0; i < tried.size(); ++i) CHECK(tried[i] == std::ldexp(1.0, -static_cast<int>(i)));
}

TEST_CASE("config validation") {
    LineSearchConfig cfg;
    cfg.beta = 1.0;
    CHECK_THROWS_AS(line_search([](double) { return 0.0; }, 1.0, -1.0, cfg), ContractViolation);
    cfg = {};
    cfg.rho = 0.0;
    CHECK_THROWS_AS(line_search([](double) { return 0.0; }, 1.0, -1.0, cfg), ContractViolation);
}
