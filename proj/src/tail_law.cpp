#include "lpm/tail_law.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "lpm/errors.hpp"

namespace lpm {

namespace {

// log of the raw tail formula, valid on the decreasing branch.
double log_formula(double log_c, double alpha, double theta, double x) {
    if (alpha == 0.0) return log_c - theta * x;
    return log_c + alpha * std::log(x) - theta * x;
}

}  // namespace

TailLaw::TailLaw(double theta, double alpha, double c)
    : theta_(theta), alpha_(alpha), c_(c) {
    if (!(theta > 0.0)) throw ConfigError("tail law: theta must be positive");
    if (!(c > 0.0)) throw ConfigError("tail law: c must be positive");
    if (!std::isfinite(alpha)) throw ConfigError("tail law: alpha must be finite");
    log_c_ = std::log(c);

    if (alpha_ == 0.0) {
        x_star_ = log_c_ / theta_;
        return;
    }

    // Solve c x^alpha e^{-theta x} = 1 on the decreasing branch.
    double lo, hi;
    if (alpha_ > 0.0) {
        // Formula rises to a peak at alpha/theta, then falls.  A crossing of 1
        // exists only when the peak reaches 1.
        const double x_peak = alpha_ / theta_;
        const double log_peak = log_formula(log_c_, alpha_, theta_, x_peak);
        if (log_peak < 0.0)
            throw ConfigError(
                "tail law: c x^alpha e^(-theta x) stays below 1 for alpha > 0; "
                "no monotone survival cutoff exists (raise c)");
        lo = x_peak;
        hi = x_peak + 1.0;
        while (log_formula(log_c_, alpha_, theta_, hi) > 0.0) hi = x_peak + 2.0 * (hi - x_peak);
    } else {
        // Strictly decreasing from +inf to 0 on (0, inf): bracket the root.
        lo = 1.0;
        while (log_formula(log_c_, alpha_, theta_, lo) < 0.0) lo *= 0.5;
        hi = lo;
        while (log_formula(log_c_, alpha_, theta_, hi) > 0.0) hi *= 2.0;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (log_formula(log_c_, alpha_, theta_, mid) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    x_star_ = 0.5 * (lo + hi);
}

double TailLaw::survival(double x) const {
    if (x <= x_star_) return 1.0;
    return std::exp(log_formula(log_c_, alpha_, theta_, x));
}

double TailLaw::log_survival(double x) const {
    if (x <= x_star_) return 0.0;
    return log_formula(log_c_, alpha_, theta_, x);
}

double TailLaw::density(double y) const {
    if (y <= x_star_) return 0.0;
    const double slope = alpha_ == 0.0 ? theta_ : theta_ - alpha_ / y;
    return slope * std::exp(log_formula(log_c_, alpha_, theta_, y));
}

double TailLaw::quantile(double u) const {
    if (!(u > 0.0 && u <= 1.0))
        throw std::invalid_argument("tail law quantile: u must lie in (0,1]");
    if (u >= 1.0) return x_star_;
    const double target = std::log(u);

    // Pure-exponential guess overshoots for alpha < 0 and undershoots for
    // alpha > 0; bracket accordingly, then apply safeguarded Newton.
    double lo = x_star_;
    double hi = x_star_ - target / theta_;
    while (log_survival(hi) > target) hi = x_star_ + 2.0 * (hi - x_star_);

    double x = alpha_ == 0.0 ? hi : 0.5 * (lo + hi);
    for (int it = 0; it < 100; ++it) {
        const double f = log_survival(x) - target;
        if (f > 0.0)
            lo = x;
        else
            hi = x;
        const double fp = (alpha_ == 0.0 ? 0.0 : alpha_ / x) - theta_;
        double xn;
        if (fp < -1e-300) {
            xn = x - f / fp;
            if (!(xn > lo) || !(xn < hi)) xn = 0.5 * (lo + hi);
        } else {
            xn = 0.5 * (lo + hi);
        }
        if (std::abs(xn - x) <= 1e-13 * std::max(1.0, std::abs(x))) return xn;
        x = xn;
    }
    return x;
}

double TailLaw::sample(Stream& rng) const { return quantile(rng.next_unit()); }

double TailLaw::slowly_varying(double x) const {
    if (alpha_ == 0.0) return c_;
    return c_ * std::pow(x, alpha_);
}

std::optional<double> TailLaw::exp_bound_constant() const {
    if (alpha_ > 0.0) return std::nullopt;
    return std::exp(theta_ * x_star_);
}

std::string TailLaw::describe() const {
    return "tail(theta=" + std::to_string(theta_) + ", alpha=" + std::to_string(alpha_) +
           ", c=" + std::to_string(c_) + ")";
}

const TailLaw& PerturbLaw::tail_law() const {
    if (!tail_) throw ConfigError("perturbation: point-mass probe has no tail law");
    return *tail_;
}

double PerturbLaw::log_survival(double x) const {
    if (tail_) return tail_->log_survival(x);
    return x <= atom_ ? 0.0 : -std::numeric_limits<double>::infinity();
}

std::string PerturbLaw::describe() const {
    return tail_ ? tail_->describe() : "point_mass(" + std::to_string(atom_) + ")";
}

}  // namespace lpm
