#include "lpm/cumulant.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "lpm/errors.hpp"
#include "lpm/rng.hpp"

namespace lpm {

namespace {

constexpr double kCriticalBand = 1e-8;
constexpr double kRootTol = 1e-10;
constexpr int kRootMaxIter = 200;

double gap_at(const OffspringLaw& law, double theta) {
    return theta * law.displacement.dlog_mgf(theta) - law.count.log_mean() -
           law.displacement.log_mgf(theta);
}

}  // namespace

CumulantProfile kappa_profile(const OffspringLaw& law, double theta) {
    if (!(theta > 0.0))
        throw DomainError("kappa_profile: theta must be positive, got " +
                          std::to_string(theta));
    if (!(theta < law.displacement.theta_sup()))
        throw DomainError("kappa_profile: displacement MGF diverges at theta=" +
                          std::to_string(theta));
    CumulantProfile p;
    p.theta = theta;
    p.kappa = law.count.log_mean() + law.displacement.log_mgf(theta);
    p.kappa_prime = law.displacement.dlog_mgf(theta);
    p.kappa_double_prime = law.displacement.d2log_mgf(theta);
    p.gap = theta * p.kappa_prime - p.kappa;
    p.domain_ok = true;
    return p;
}

std::optional<double> theta0(const OffspringLaw& law) {
    const double sup = law.displacement.theta_sup();
    double lo = 1e-12;
    if (std::isfinite(sup)) lo = std::min(lo, sup * 0.5);
    if (gap_at(law, lo) > 0.0) return lo;  // cannot happen for valid laws (gap(0+) < 0)

    // Expand towards the domain boundary until the gap turns positive.
    double hi = 0.0;
    bool bracketed = false;
    if (std::isfinite(sup)) {
        for (int k = 1; k <= 60; ++k) {
            hi = sup * (1.0 - std::ldexp(1.0, -k));
            if (hi <= lo) continue;
            if (gap_at(law, hi) > 0.0) {
                bracketed = true;
                break;
            }
            lo = hi;  // still negative; shrink the search interval
        }
    } else {
        hi = 1.0;
        for (int k = 0; k < 64; ++k) {
            if (gap_at(law, hi) > 0.0) {
                bracketed = true;
                break;
            }
            lo = hi;
            hi *= 2.0;
        }
    }
    if (!bracketed) return std::nullopt;

    for (int it = 0; it < kRootMaxIter && hi - lo > kRootTol * 1e-2; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (gap_at(law, mid) > 0.0)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

double speed_v(const OffspringLaw& law) {
    if (auto root = theta0(law)) {
        const auto p = kappa_profile(law, *root);
        return p.kappa / p.theta;
    }
    // Gap never turns positive: kappa/theta keeps decreasing, so chase the
    // boundary and report the smallest value reached.
    const double sup = law.displacement.theta_sup();
    double best = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= 50; ++k) {
        const double th = std::isfinite(sup) ? sup * (1.0 - std::ldexp(1.0, -k))
                                             : std::ldexp(1.0, k);
        if (!(th > 0.0) || !(th < sup)) break;
        best = std::min(best, kappa_profile(law, th).kappa / th);
    }
    return best;
}

const char* regime_name(Regime r) {
    switch (r) {
        case Regime::subcritical: return "subcritical";
        case Regime::critical: return "critical";
        case Regime::supercritical: return "supercritical";
    }
    return "?";
}

RegimeTag classify_regime(const OffspringLaw& law, double theta_nu) {
    const auto prof = kappa_profile(law, theta_nu);
    RegimeTag tag;
    tag.theta_nu = theta_nu;
    tag.gap_at_theta_nu = prof.gap;
    tag.theta0 = theta0(law);
    if (prof.gap < -kCriticalBand) {
        tag.tag = Regime::subcritical;
        tag.predicted_speed = prof.kappa / theta_nu;
    } else {
        tag.tag = prof.gap > kCriticalBand ? Regime::supercritical : Regime::critical;
        // At or past the root the perturbation no longer leads; speed is
        // kappa'(theta0).
        const double root = tag.theta0 ? *tag.theta0 : theta_nu;
        tag.predicted_speed = kappa_profile(law, root).kappa_prime;
    }
    return tag;
}

ConditionReport check_conditions(const OffspringLaw& law, double theta,
                                 std::uint64_t mc_budget, std::uint64_t seed) {
    const auto prof = kappa_profile(law, theta);
    ConditionReport rep;
    rep.theta = theta;
    rep.gap = prof.gap;
    rep.gap_sign = std::abs(prof.gap) <= kCriticalBand ? 0 : (prof.gap < 0.0 ? -1 : 1);
    rep.theta0 = theta0(law);
    if (mc_budget == 0) return rep;

    double kap0 = 0.0, kp0 = 0.0, th0 = 0.0;
    const bool have_root = rep.theta0.has_value();
    if (have_root) {
        const auto p0 = kappa_profile(law, *rep.theta0);
        th0 = p0.theta;
        kap0 = p0.kappa;
        kp0 = p0.kappa_prime;
    }

    std::vector<double> a, b, c;
    a.reserve(mc_budget);
    if (have_root) {
        b.reserve(mc_budget);
        c.reserve(mc_budget);
    }
    Stream rng(derive_seed(seed, "conditions.mc", 0));
    for (std::uint64_t i = 0; i < mc_budget; ++i) {
        const std::uint64_t n = law.count.sample(rng);
        double w = 0.0, w0 = 0.0, zbar = 0.0;
        for (std::uint64_t j = 0; j < n; ++j) {
            const double x = law.displacement.sample(rng);
            w += std::exp(theta * x - prof.kappa);
            if (have_root) {
                const double e0 = std::exp(th0 * x - kap0);
                w0 += e0;
                if (x < kp0) zbar += (kp0 - x) * e0;
            }
        }
        a.push_back(w > 1.0 ? w * std::log(w) : 0.0);
        if (have_root) {
            const double lw0 = w0 > 1.0 ? std::log(w0) : 0.0;
            b.push_back(w0 * lw0 * lw0);
            c.push_back(zbar > 1.0 ? zbar * std::log(zbar) : 0.0);
        }
    }
    rep.draws = mc_budget;
    rep.w1_log_w1 = mean_se(a);
    if (have_root) {
        rep.w1_logsq_w1_at_root = mean_se(b);
        rep.truncated_z1_log = mean_se(c);
        rep.root_estimates_present = true;
    }
    return rep;
}

}  // namespace lpm
