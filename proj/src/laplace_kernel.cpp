#include "lpm/laplace_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "lpm/quadrature.hpp"

namespace lpm {

double g_phi(const TailLaw& nu, const TestFunction& phi, double x) {
    if (phi.empty()) return 0.0;
    const double lo = std::max(nu.x_star(), phi.support_lo() - x);
    const double hi = phi.support_hi() - x;
    if (!(hi > lo)) return 0.0;

    std::vector<double> cuts;
    for (double k : phi.quad_breakpoints()) {
        const double y = k - x;
        if (y > lo && y < hi) cuts.push_back(y);
    }
    const auto integrand = [&](double y) {
        return -std::expm1(-phi(x + y)) * nu.density(y);
    };
    const auto res = quad::integrate_with_breakpoints(integrand, lo, hi, cuts, 1e-12, 1e-9);
    const double d = std::min(res.value, 1.0);
    double g = d < 1.0 ? -std::log1p(-d) : phi.sup();
    return std::clamp(g, 0.0, phi.sup());
}

double g_phi(const PerturbLaw& nu, const TestFunction& phi, double x) {
    if (nu.is_point_mass()) return phi(x + nu.atom());
    return g_phi(nu.tail_law(), phi, x);
}

double c_phi(const TestFunction& phi, double theta) {
    if (!(theta > 0.0))
        throw std::invalid_argument("c_phi: theta must be positive");
    if (phi.empty()) return 0.0;
    const double lo = phi.support_lo(), hi = phi.support_hi();
    std::vector<double> cuts;
    for (double k : phi.quad_breakpoints())
        if (k > lo && k < hi) cuts.push_back(k);
    const auto integrand = [&](double z) {
        return -theta * std::exp(-theta * z) * std::expm1(-phi(z));
    };
    const auto res = quad::integrate_with_breakpoints(integrand, lo, hi, cuts, 1e-13, 1e-10);
    return std::max(res.value, 0.0);
}

double tail_asymptote_ratio(const TailLaw& nu, const TestFunction& phi, double x) {
    if (!(x < 0.0))
        throw std::invalid_argument("tail_asymptote_ratio: requires x < 0");
    const double denom = nu.slowly_varying(-x) * c_phi(phi, nu.theta());
    return g_phi(nu, phi, x) * std::exp(-nu.theta() * x) / denom;
}

}  // namespace lpm
