#include "subnewton/cg.hpp"

#include <cmath>

#include <fmt/format.h>

#include "subnewton/errors.hpp"
#include "subnewton/linalg.hpp"

namespace subnewton {

void CgConfig::validate() const {
    require(theta > 0.0 && theta < 1.0, "CG tolerance theta must lie in (0, 1)");
    require(max_iters >= 1, "CG needs max_iters >= 1");
}

CgReport cg_solve(const LinearMap& apply_h, std::span<const double> g, const CgConfig& config) {
    config.validate();
    using linalg::dot;
    const std::size_t d = g.size();

    CgReport report;
    report.solution.assign(d, 0.0);
    const double g_norm = linalg::norm(g);
    report.residual_norm = g_norm;
    report.residual_history.push_back(g_norm);
    if (g_norm == 0.0) {
        report.converged = true;
        return report;
    }
    const double target = config.theta * g_norm;

    std::vector<double> p(d, 0.0);
    std::vector<double> r(g.begin(), g.end());
    linalg::scale(-1.0, r);
    std::vector<double> s = r;
    std::vector<double> hs(d);
    double rr = g_norm * g_norm;
    // p_best starts at s_0 = -g and is compared through ||r_0||. Its true
    // residual ||r_0 - H s_0|| is known after the first product.
    report.solution = s;
    double best = g_norm;
    bool improved = false;
    double s0_residual = g_norm;

    for (std::size_t k = 0; k < config.max_iters; ++k) {
        apply_h(s, hs);
        ++report.iterations;
        const double curvature = dot(s, hs);
        const double ss = dot(s, s);
        if (!(curvature > kCurvatureFloor * ss))
            throw CurvatureError(fmt::format("non-positive curvature s'Hs = {:.6g} (||s||^2 = {:.6g}) at CG iteration {}",
                                             curvature, ss, k));
        if (k == 0) {
            double acc = 0.0;
            for (std::size_t i = 0; i < d; ++i) acc += (r[i] - hs[i]) * (r[i] - hs[i]);
            s0_residual = std::sqrt(acc);
        }
        const double alpha = rr / curvature;
        linalg::axpy(alpha, s, p);
        linalg::axpy(-alpha, hs, r);
        const double rr_next = dot(r, r);
        const double r_norm = std::sqrt(rr_next);
        report.residual_history.push_back(r_norm);
        if (r_norm <= best) {
            best = r_norm;
            improved = true;
            report.solution = p;
        }
        if (r_norm <= target) break;
        const double beta = rr_next / rr;
        for (std::size_t i = 0; i < d; ++i) s[i] = r[i] + beta * s[i];
        rr = rr_next;
    }
    report.residual_norm = improved ? best : s0_residual;
    report.converged = report.residual_norm <= target;
    return report;
}

}  // namespace subnewton
