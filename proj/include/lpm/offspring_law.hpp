#pragma once

// Branching ingredients: the child-count law and the per-child displacement
// law.  Counts and displacements are independent of each other.
//
// Displacement laws expose log-MGF and its first two derivatives in closed
// form, plus exponentially tilted sampling (used by the tilted random walk).
// Everything is kept inline; sampling sits on the hot path.

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "lpm/errors.hpp"
#include "lpm/rng.hpp"

namespace lpm {

class CountLaw {
  public:
    enum class Kind { deterministic, poisson, geometric_ge1 };

    static CountLaw deterministic(std::uint32_t children) {
        if (children < 2)
            throw ConfigError("count law: deterministic branching needs >= 2 children");
        CountLaw l;
        l.kind_ = Kind::deterministic;
        l.a_ = static_cast<double>(children);
        return l;
    }

    // Plain Poisson; zero children is possible, so trees can die out.
    static CountLaw poisson(double mean) {
        if (!(mean > 1.0)) throw ConfigError("count law: poisson mean must exceed 1");
        CountLaw l;
        l.kind_ = Kind::poisson;
        l.a_ = mean;
        return l;
    }

    // Supported on {1,2,...}: P(N=k) = p(1-p)^{k-1}, mean 1/p.
    static CountLaw geometric_ge1(double p) {
        if (!(p > 0.0 && p < 1.0))
            throw ConfigError("count law: geometric success probability must lie in (0,1)");
        CountLaw l;
        l.kind_ = Kind::geometric_ge1;
        l.a_ = p;
        return l;
    }

    // Same law, parameterized by its mean (how configs spell it).
    static CountLaw geometric(double mean) {
        if (!(mean > 1.0)) throw ConfigError("count law: geometric mean must exceed 1");
        return geometric_ge1(1.0 / mean);
    }

    Kind kind() const { return kind_; }
    double param() const { return a_; }

    double mean() const {
        switch (kind_) {
            case Kind::deterministic: return a_;
            case Kind::poisson: return a_;
            case Kind::geometric_ge1: return 1.0 / a_;
        }
        return 0.0;
    }

    double log_mean() const { return std::log(mean()); }

    bool can_die_out() const { return kind_ == Kind::poisson; }

    std::uint64_t sample(Stream& rng) const {
        switch (kind_) {
            case Kind::deterministic: return static_cast<std::uint64_t>(a_);
            case Kind::poisson: return rng.next_poisson(a_);
            case Kind::geometric_ge1: return rng.next_geometric1(a_);
        }
        return 0;
    }

    std::string describe() const {
        switch (kind_) {
            case Kind::deterministic:
                return "deterministic(" + std::to_string(static_cast<int>(a_)) + ")";
            case Kind::poisson: return "poisson(" + std::to_string(a_) + ")";
            case Kind::geometric_ge1: return "geometric_ge1(" + std::to_string(a_) + ")";
        }
        return "?";
    }

  private:
    Kind kind_ = Kind::deterministic;
    double a_ = 2.0;
};

class DisplacementLaw {
  public:
    enum class Kind { gaussian, uniform, shifted_exponential };

    static DisplacementLaw gaussian(double mean, double sd) {
        if (!(sd > 0.0)) throw ConfigError("displacement law: gaussian sd must be positive");
        DisplacementLaw l;
        l.kind_ = Kind::gaussian;
        l.a_ = mean;
        l.b_ = sd;
        return l;
    }

    static DisplacementLaw uniform(double lo, double hi) {
        if (!(lo < hi)) throw ConfigError("displacement law: uniform needs lo < hi");
        DisplacementLaw l;
        l.kind_ = Kind::uniform;
        l.a_ = lo;
        l.b_ = hi;
        return l;
    }

    // shift + Exp(rate); MGF finite only for theta < rate.
    static DisplacementLaw shifted_exponential(double rate, double shift) {
        if (!(rate > 0.0))
            throw ConfigError("displacement law: exponential rate must be positive");
        DisplacementLaw l;
        l.kind_ = Kind::shifted_exponential;
        l.a_ = rate;
        l.b_ = shift;
        return l;
    }

    Kind kind() const { return kind_; }
    double param_a() const { return a_; }
    double param_b() const { return b_; }

    // Upper end of the set where the log-MGF is finite.
    double theta_sup() const {
        return kind_ == Kind::shifted_exponential ? a_
                                                  : std::numeric_limits<double>::infinity();
    }

    double log_mgf(double theta) const {
        switch (kind_) {
            case Kind::gaussian: return theta * a_ + 0.5 * theta * theta * b_ * b_;
            case Kind::uniform: {
                const double m = 0.5 * (a_ + b_), h = 0.5 * (b_ - a_);
                return theta * m + log_sinhc(theta * h);
            }
            case Kind::shifted_exponential:
                require_below_rate(theta);
                return theta * b_ + std::log(a_) - std::log(a_ - theta);
        }
        return 0.0;
    }

    double dlog_mgf(double theta) const {
        switch (kind_) {
            case Kind::gaussian: return a_ + theta * b_ * b_;
            case Kind::uniform: {
                const double m = 0.5 * (a_ + b_), h = 0.5 * (b_ - a_);
                return m + h * cothm(theta * h);
            }
            case Kind::shifted_exponential:
                require_below_rate(theta);
                return b_ + 1.0 / (a_ - theta);
        }
        return 0.0;
    }

    double d2log_mgf(double theta) const {
        switch (kind_) {
            case Kind::gaussian: return b_ * b_;
            case Kind::uniform: {
                const double h = 0.5 * (b_ - a_);
                return h * h * csch2m(theta * h);
            }
            case Kind::shifted_exponential: {
                require_below_rate(theta);
                const double d = a_ - theta;
                return 1.0 / (d * d);
            }
        }
        return 0.0;
    }

    double sample(Stream& rng) const {
        switch (kind_) {
            case Kind::gaussian: return a_ + b_ * rng.next_normal();
            case Kind::uniform: return a_ + (b_ - a_) * rng.next_unit_open();
            case Kind::shifted_exponential: return b_ + rng.next_exponential() / a_;
        }
        return 0.0;
    }

    // Draw from the exponentially tilted law dP_theta ∝ e^{theta x} dP.
    double tilted_sample(Stream& rng, double theta) const {
        switch (kind_) {
            case Kind::gaussian: return a_ + theta * b_ * b_ + b_ * rng.next_normal();
            case Kind::uniform: {
                const double w = b_ - a_, tw = theta * w;
                const double u = rng.next_unit_open();
                if (std::abs(tw) < 1e-8) return a_ + w * u;
                return a_ + std::log1p(u * std::expm1(tw)) / theta;
            }
            case Kind::shifted_exponential:
                require_below_rate(theta);
                return b_ + rng.next_exponential() / (a_ - theta);
        }
        return 0.0;
    }

    std::string describe() const {
        switch (kind_) {
            case Kind::gaussian:
                return "gaussian(" + std::to_string(a_) + "," + std::to_string(b_) + ")";
            case Kind::uniform:
                return "uniform(" + std::to_string(a_) + "," + std::to_string(b_) + ")";
            case Kind::shifted_exponential:
                return "shifted_exponential(" + std::to_string(a_) + "," +
                       std::to_string(b_) + ")";
        }
        return "?";
    }

  private:
    void require_below_rate(double theta) const {
        if (!(theta < a_))
            throw DomainError("displacement log-MGF undefined at theta=" +
                              std::to_string(theta) + " (finite only below rate " +
                              std::to_string(a_) + ")");
    }

    // log(sinh(t)/t), even in t; series near 0, asymptotic for large |t|.
    static double log_sinhc(double t) {
        const double x = std::abs(t);
        if (x < 1e-3) {
            const double t2 = t * t;
            return t2 / 6.0 - t2 * t2 / 180.0 + t2 * t2 * t2 / 2835.0;
        }
        if (x > 20.0) return x - std::log(2.0 * x) + std::log1p(-std::exp(-2.0 * x));
        return std::log(std::sinh(x) / x);
    }

    // coth(t) - 1/t, odd in t.
    static double cothm(double t) {
        const double x = std::abs(t);
        double r;
        if (x < 1e-3) {
            r = x / 3.0 - x * x * x / 45.0;
        } else if (x > 20.0) {
            r = 1.0 - 1.0 / x + 2.0 * std::exp(-2.0 * x);
        } else {
            r = std::cosh(x) / std::sinh(x) - 1.0 / x;
        }
        return t < 0.0 ? -r : r;
    }

    // 1/t^2 - 1/sinh(t)^2, even in t; equals 1/3 at t=0.
    static double csch2m(double t) {
        const double x = std::abs(t);
        if (x < 1e-3) {
            const double t2 = x * x;
            return 1.0 / 3.0 - t2 / 15.0 + 2.0 * t2 * t2 / 189.0;
        }
        if (x > 20.0) {
            const double e = std::exp(-2.0 * x);
            return 1.0 / (x * x) - 4.0 * e;
        }
        const double s = std::sinh(x);
        return 1.0 / (x * x) - 1.0 / (s * s);
    }

    Kind kind_ = Kind::gaussian;
    double a_ = 0.0;
    double b_ = 1.0;
};

// One reproduction step: draw a child count, then i.i.d. displacements.
struct OffspringLaw {
    CountLaw count;
    DisplacementLaw displacement;

    std::string describe() const {
        return count.describe() + " x " + displacement.describe();
    }
};

inline OffspringLaw binary_gaussian() {
    return OffspringLaw{CountLaw::deterministic(2), DisplacementLaw::gaussian(0.0, 1.0)};
}

}  // namespace lpm
