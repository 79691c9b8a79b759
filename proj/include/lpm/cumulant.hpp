#pragma once

// Deterministic analysis of a branching random walk: the cumulant
// kappa(theta) = log E[N] + log E[e^{theta X}], its derivatives, the root
// theta0 of theta*kappa'(theta) - kappa(theta), the front speed, and regime
// classification for a given perturbation tail exponent.

#include <cstdint>
#include <optional>

#include "lpm/offspring_law.hpp"
#include "lpm/stats.hpp"

namespace lpm {

struct CumulantProfile {
    double theta = 0.0;
    double kappa = 0.0;
    double kappa_prime = 0.0;
    double kappa_double_prime = 0.0;
    double gap = 0.0;  // theta*kappa_prime - kappa
    bool domain_ok = false;
};

// Throws DomainError when theta <= 0 or E[e^{theta X}] = infinity.
CumulantProfile kappa_profile(const OffspringLaw& law, double theta);

// Unique root of the gap on the finiteness domain (absolute tolerance 1e-10),
// or nullopt when the gap never changes sign there.
std::optional<double> theta0(const OffspringLaw& law);

// inf_{theta>0} kappa(theta)/theta; equals kappa'(theta0) when theta0 exists.
double speed_v(const OffspringLaw& law);

enum class Regime { subcritical, critical, supercritical };

const char* regime_name(Regime r);

struct RegimeTag {
    Regime tag = Regime::subcritical;
    double theta_nu = 0.0;
    std::optional<double> theta0;
    double predicted_speed = 0.0;
    double gap_at_theta_nu = 0.0;
};

// Sign of gap(theta_nu) with a +/-1e-8 critical band.  predicted_speed is
// kappa(theta_nu)/theta_nu below the root and kappa'(theta0) at/above it.
RegimeTag classify_regime(const OffspringLaw& law, double theta_nu);

// Monte Carlo diagnostics for the integrability conditions behind the limit
// theorems.  Estimates only; nothing here proves finiteness.
struct ConditionReport {
    double theta = 0.0;
    double gap = 0.0;
    int gap_sign = 0;  // -1 / 0 / +1 with the 1e-8 band
    std::optional<double> theta0;
    std::uint64_t draws = 0;          // 0 => estimates absent
    MeanSe w1_log_w1;                 // E[W1(theta) log+ W1(theta)]
    MeanSe w1_logsq_w1_at_root;       // E[W1(theta0) (log+ W1(theta0))^2]
    MeanSe truncated_z1_log;          // E[Wbar1 log+ Wbar1] at theta0
    bool root_estimates_present = false;
};

ConditionReport check_conditions(const OffspringLaw& law, double theta,
                                 std::uint64_t mc_budget, std::uint64_t seed);

}  // namespace lpm
