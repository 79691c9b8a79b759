#include <cmath>
#include <vector>

#include "doctest.h"
#include "lpm/cumulant.hpp"
#include "lpm/errors.hpp"
#include "lpm/offspring_law.hpp"
#include "lpm/quadrature.hpp"

using namespace lpm;

namespace {

const double kRoot2Ln2 = std::sqrt(2.0 * std::log(2.0));  // 1.1774100225154747

std::vector<OffspringLaw> catalog() {
    return {
        binary_gaussian(),
        {CountLaw::deterministic(3), DisplacementLaw::gaussian(-0.5, 2.0)},
        {CountLaw::poisson(2.0), DisplacementLaw::gaussian(0.0, 1.0)},
        {CountLaw::geometric(2.5), DisplacementLaw::uniform(-1.0, 1.0)},
        {CountLaw::deterministic(2), DisplacementLaw::uniform(0.0, 3.0)},
        {CountLaw::deterministic(2), DisplacementLaw::shifted_exponential(4.0, -0.25)},
    };
}

// Numeric E[e^{theta X}] straight from the displacement density.
double mgf_by_quadrature(const DisplacementLaw& d, double theta) {
    switch (d.kind()) {
        case DisplacementLaw::Kind::gaussian: {
            const double mu = d.param_a(), sd = d.param_b();
            const double peak = mu + theta * sd * sd;
            const auto f = [&](double x) {
                const double z = (x - mu) / sd;
                return std::exp(theta * x - 0.5 * z * z) /
                       (sd * std::sqrt(2.0 * 3.14159265358979323846));
            };
            return quad::integrate(f, peak - 14.0 * sd, peak + 14.0 * sd, 1e-13, 1e-12)
                .value;
        }
        case DisplacementLaw::Kind::uniform: {
            const double lo = d.param_a(), hi = d.param_b();
            const auto f = [&](double x) { return std::exp(theta * x) / (hi - lo); };
            return quad::integrate(f, lo, hi, 1e-13, 1e-12).value;
        }
        case DisplacementLaw::Kind::shifted_exponential: {
            const double rate = d.param_a(), shift = d.param_b();
            const auto f = [&](double x) {
                // One combined exponent: the split form overflows to inf*0 far out.
                return rate * std::exp(theta * x - rate * (x - shift));
            };
            const double reach = shift + 80.0 / (rate - theta);
            return quad::integrate(f, shift, reach, 1e-13, 1e-12).value;
        }
    }
    return 0.0;
}

}  // namespace

TEST_SUITE_BEGIN("cumulant");

TEST_CASE("binary-gaussian profile at theta=1 matches the closed form") {
    const CumulantProfile p = kappa_profile(binary_gaussian(), 1.0);
    CHECK(p.kappa == doctest::Approx(std::log(2.0) + 0.5).epsilon(1e-12));
    CHECK(p.kappa == doctest::Approx(1.1931471805599453).epsilon(1e-10));
    CHECK(p.kappa_prime == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p.kappa_double_prime == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p.gap == doctest::Approx(-0.1931471805599453).epsilon(1e-10));
    CHECK(p.gap == doctest::Approx(p.theta * p.kappa_prime - p.kappa).epsilon(1e-15));
    CHECK(p.domain_ok);
}

TEST_CASE("theta to 0+ probe approaches log E[N]") {
    const CumulantProfile p = kappa_profile(binary_gaussian(), 1e-8);
    CHECK(p.kappa == doctest::Approx(std::log(2.0)).epsilon(1e-7));
}

TEST_CASE("domain errors") {
    const OffspringLaw exp_law{CountLaw::deterministic(2),
                               DisplacementLaw::shifted_exponential(1.0, 0.0)};
    CHECK_THROWS_AS(kappa_profile(exp_law, 1.0), DomainError);
    CHECK_THROWS_AS(kappa_profile(exp_law, 1.5), DomainError);
    CHECK_THROWS_AS(kappa_profile(binary_gaussian(), 0.0), DomainError);
    CHECK_THROWS_AS(kappa_profile(binary_gaussian(), -1.0), DomainError);
}

TEST_CASE("closed-form kappa agrees with quadrature on a 10-point grid per law") {
    for (const OffspringLaw& law : catalog()) {
        const double sup = law.displacement.theta_sup();
        const double hi = std::isinf(sup) ? 2.5 : 0.9 * sup;
        for (int i = 1; i <= 10; ++i) {
            const double theta = hi * i / 10.0;
            const CumulantProfile p = kappa_profile(law, theta);
            const double kq =
                law.count.log_mean() + std::log(mgf_by_quadrature(law.displacement, theta));
            CHECK(p.kappa == doctest::Approx(kq).epsilon(1e-8));
        }
    }
}

TEST_CASE("kappa_prime matches a central difference of kappa") {
    for (const OffspringLaw& law : catalog()) {
        const double sup = law.displacement.theta_sup();
        const double theta = std::isinf(sup) ? 1.3 : 0.5 * sup;
        const double h = 1e-6;
        const double num = (kappa_profile(law, theta + h).kappa -
                            kappa_profile(law, theta - h).kappa) /
                           (2.0 * h);
        CHECK(kappa_profile(law, theta).kappa_prime == doctest::Approx(num).epsilon(1e-6));
    }
}

TEST_CASE("theta0 of the binary-gaussian law is sqrt(2 ln 2)") {
    const auto root = theta0(binary_gaussian());
    REQUIRE(root.has_value());
    CHECK(*root == doctest::Approx(kRoot2Ln2).epsilon(1e-11));
    CHECK(std::abs(*root - 1.1774100225154747) < 1e-10);
}

TEST_CASE("theta0 ignores a displacement mean shift") {
    const OffspringLaw shifted{CountLaw::deterministic(2), DisplacementLaw::gaussian(5.0, 1.0)};
    const auto root = theta0(shifted);
    REQUIRE(root.has_value());
    CHECK(*root == doctest::Approx(kRoot2Ln2).epsilon(1e-10));
}

TEST_CASE("theta0 for the bounded-domain exponential law matches a brute-force oracle") {
    // kappa(theta) = ln 2 - ln(1 - theta) on (0,1); root of theta kappa' - kappa.
    const OffspringLaw law{CountLaw::deterministic(2),
                           DisplacementLaw::shifted_exponential(1.0, 0.0)};
    const auto root = theta0(law);
    REQUIRE(root.has_value());
    const auto gap = [](double t) {
        return t / (1.0 - t) - (std::log(2.0) - std::log(1.0 - t));
    };
    double lo = 1e-9, hi = 1.0 - 1e-9;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (gap(mid) < 0.0 ? lo : hi) = mid;
    }
    const double oracle = 0.5 * (lo + hi);
    CHECK(oracle < 1.0);
    CHECK(*root == doctest::Approx(oracle).epsilon(1e-9));
    CHECK(std::abs(gap(*root)) < 1e-8);
}

TEST_CASE("speed equals kappa'(theta0) and shifts with the displacement mean") {
    CHECK(speed_v(binary_gaussian()) == doctest::Approx(kRoot2Ln2).epsilon(1e-9));

    const OffspringLaw poisson_law{CountLaw::poisson(2.0), DisplacementLaw::gaussian(0.0, 1.0)};
    CHECK(speed_v(poisson_law) == doctest::Approx(kRoot2Ln2).epsilon(1e-9));

    const OffspringLaw shifted{CountLaw::deterministic(2), DisplacementLaw::gaussian(3.0, 1.0)};
    CHECK(speed_v(shifted) == doctest::Approx(3.0 + kRoot2Ln2).epsilon(1e-9));
}

TEST_CASE("speed consistency at the root") {
    for (const OffspringLaw& law : catalog()) {
        const auto root = theta0(law);
        if (!root) continue;
        const CumulantProfile p = kappa_profile(law, *root);
        CHECK(std::abs(p.kappa / p.theta - p.kappa_prime) <= 1e-8);
    }
}

TEST_CASE("regime classification by the gap sign") {
    const RegimeTag sub = classify_regime(binary_gaussian(), 1.0);
    CHECK(sub.tag == Regime::subcritical);
    CHECK(sub.predicted_speed == doctest::Approx(1.1931471805599453).epsilon(1e-10));
    CHECK(sub.gap_at_theta_nu < 0.0);

    const RegimeTag crit = classify_regime(binary_gaussian(), kRoot2Ln2);
    CHECK(crit.tag == Regime::critical);
    CHECK(crit.predicted_speed == doctest::Approx(kRoot2Ln2).epsilon(1e-10));

    const RegimeTag super = classify_regime(binary_gaussian(), 2.0);
    CHECK(super.tag == Regime::supercritical);
    CHECK(super.predicted_speed == doctest::Approx(kRoot2Ln2).epsilon(1e-10));
    REQUIRE(super.theta0.has_value());
    CHECK(*super.theta0 == doctest::Approx(kRoot2Ln2).epsilon(1e-10));
}

TEST_CASE("convexity and gap monotonicity on a grid") {
    for (const OffspringLaw& law : catalog()) {
        const double sup = law.displacement.theta_sup();
        const double hi = std::isinf(sup) ? 3.0 : 0.95 * sup;
        double prev_gap = -1e300;
        for (int i = 1; i <= 12; ++i) {
            const double t1 = hi * i / 13.0, t2 = hi * (i + 1) / 13.0;
            const double tm = 0.5 * (t1 + t2);
            const double second = kappa_profile(law, t1).kappa -
                                  2.0 * kappa_profile(law, tm).kappa +
                                  kappa_profile(law, t2).kappa;
            CHECK(second >= -1e-10);
            const double g = kappa_profile(law, t1).gap;
            CHECK(g > prev_gap);
            prev_gap = g;
            CHECK(kappa_profile(law, t1).kappa_double_prime >= 0.0);
        }
    }
}

TEST_CASE("condition diagnostics") {
    SUBCASE("zero budget reports the gap sign only") {
        const ConditionReport r = check_conditions(binary_gaussian(), 1.0, 0, 5);
        CHECK(r.draws == 0);
        CHECK(r.gap_sign == -1);
        CHECK_FALSE(r.root_estimates_present);
    }
    SUBCASE("small monte carlo run produces finite estimates") {
        const ConditionReport r = check_conditions(binary_gaussian(), 1.0, 20000, 5);
        CHECK(r.draws == 20000);
        CHECK(r.gap_sign == -1);
        CHECK(std::isfinite(r.w1_log_w1.mean));
        CHECK(r.w1_log_w1.se > 0.0);
        REQUIRE(r.root_estimates_present);
        CHECK(std::isfinite(r.w1_logsq_w1_at_root.mean));
        CHECK(std::isfinite(r.truncated_z1_log.mean));
    }
    SUBCASE("at the root the gap sits inside the critical band") {
        const ConditionReport r = check_conditions(binary_gaussian(), kRoot2Ln2, 0, 5);
        CHECK(r.gap_sign == 0);
        CHECK(std::abs(r.gap) <= 1e-8);
    }
}

TEST_SUITE_END();
