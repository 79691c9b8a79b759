#pragma once

// Perturbation law with survival function min(1, c x^alpha e^{-theta x}):
// exactly exponential tail modulated by a power factor.  The law is atomless
// with support [x_star, infinity), x_star being the point where the formula
// crosses 1.  A degenerate point-mass variant exists for plumbing tests.

#include <optional>
#include <string>

#include "lpm/rng.hpp"

namespace lpm {

class TailLaw {
  public:
    TailLaw(double theta, double alpha, double c);

    double theta() const { return theta_; }
    double alpha() const { return alpha_; }
    double c() const { return c_; }
    double x_star() const { return x_star_; }

    double survival(double x) const;
    // log of survival; 0 at or below x_star.  Cheap (no exp), used in hot loops.
    double log_survival(double x) const;
    double density(double y) const;
    // Smallest x with survival(x) <= u; quantile(1) = x_star.
    double quantile(double u) const;
    double sample(Stream& rng) const;

    // L(x) = c x^alpha, the slowly varying modulation of the tail.
    double slowly_varying(double x) const;

    // C with survival(x) <= C e^{-theta x} for every x; absent when alpha > 0
    // (the power factor then grows without bound).
    std::optional<double> exp_bound_constant() const;

    std::string describe() const;

  private:
    double theta_;
    double alpha_;
    double c_;
    double x_star_;
    double log_c_;
};

// Either the tail law above or a deterministic offset (tests only).
class PerturbLaw {
  public:
    static PerturbLaw tail(TailLaw t) { return PerturbLaw(std::move(t)); }
    static PerturbLaw point_mass(double at) { return PerturbLaw(at); }

    bool is_point_mass() const { return !tail_.has_value(); }
    double atom() const { return atom_; }
    const TailLaw& tail_law() const;

    double support_lo() const { return tail_ ? tail_->x_star() : atom_; }
    double survival(double x) const {
        if (tail_) return tail_->survival(x);
        return x <= atom_ ? 1.0 : 0.0;
    }
    double log_survival(double x) const;
    double sample(Stream& rng) const { return tail_ ? tail_->sample(rng) : atom_; }

    std::string describe() const;

  private:
    explicit PerturbLaw(TailLaw t) : tail_(std::move(t)) {}
    explicit PerturbLaw(double at) : atom_(at) {}

    std::optional<TailLaw> tail_;
    double atom_ = 0.0;
};

}  // namespace lpm
