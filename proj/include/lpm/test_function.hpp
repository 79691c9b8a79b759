#pragma once

// Compactly supported, piecewise-linear test functions: sums of "tents".
// A tent (center, half_width, height) rises linearly from zero at
// center - half_width to height at center and back to zero.  Kink locations
// are exposed so integrators can split there.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace lpm {

struct Tent {
    double center = 0.0;
    double half_width = 1.0;
    double height = 1.0;
};

class TestFunction {
  public:
    TestFunction() = default;

    explicit TestFunction(std::vector<Tent> tents) : tents_(std::move(tents)) {
        for (const Tent& t : tents_) {
            if (!(t.half_width > 0.0))
                throw std::invalid_argument("TestFunction: tent half_width must be positive");
            if (!(t.height >= 0.0) || !std::isfinite(t.height))
                throw std::invalid_argument("TestFunction: tent height must be finite and >= 0");
            if (!std::isfinite(t.center))
                throw std::invalid_argument("TestFunction: tent center must be finite");
        }
    }

    static TestFunction tent(double center, double half_width, double height) {
        return TestFunction({Tent{center, half_width, height}});
    }

    bool empty() const { return tents_.empty(); }
    const std::vector<Tent>& tents() const { return tents_; }

    double operator()(double x) const {
        double v = 0.0;
        for (const Tent& t : tents_) {
            const double u = 1.0 - std::abs(x - t.center) / t.half_width;
            if (u > 0.0) v += t.height * u;
        }
        return v;
    }

    double support_lo() const {
        double lo = std::numeric_limits<double>::infinity();
        for (const Tent& t : tents_) lo = std::min(lo, t.center - t.half_width);
        return lo;
    }

    double support_hi() const {
        double hi = -std::numeric_limits<double>::infinity();
        for (const Tent& t : tents_) hi = std::max(hi, t.center + t.half_width);
        return hi;
    }

    // Piecewise linearity puts the supremum at a kink.
    double sup() const {
        double s = 0.0;
        for (double k : kinks()) s = std::max(s, (*this)(k));
        return s;
    }

    std::vector<double> kinks() const {
        std::vector<double> ks;
        ks.reserve(tents_.size() * 3);
        for (const Tent& t : tents_) {
            ks.push_back(t.center - t.half_width);
            ks.push_back(t.center);
            ks.push_back(t.center + t.half_width);
        }
        std::sort(ks.begin(), ks.end());
        ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
        return ks;
    }

    // Kinks plus, for very tall tents, the points where 1 - e^{-phi} stops
    // moving at double precision.  Without these an adaptive integrator can
    // place every node outside the narrow edge layer and believe the
    // integrand is a plain exponential.
    std::vector<double> quad_breakpoints() const {
        std::vector<double> ks = kinks();
        const double sat = 40.0;  // e^{-40} is far below double epsilon
        for (const Tent& t : tents_) {
            if (t.height > 2.0 * sat) {
                const double off = t.half_width * (1.0 - sat / t.height);
                ks.push_back(t.center - off);
                ks.push_back(t.center + off);
            }
        }
        std::sort(ks.begin(), ks.end());
        ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
        return ks;
    }

    std::string describe() const {
        std::string s = "phi[";
        for (std::size_t i = 0; i < tents_.size(); ++i) {
            if (i) s += " + ";
            s += "tent(" + trim(tents_[i].center) + "," + trim(tents_[i].half_width) + "," +
                 trim(tents_[i].height) + ")";
        }
        return s + "]";
    }

  private:
    static std::string trim(double v) {
        std::string s = std::to_string(v);
        while (s.size() > 1 && s.back() == '0') s.pop_back();
        if (!s.empty() && s.back() == '.') s.pop_back();
        return s;
    }

    std::vector<Tent> tents_;
};

}  // namespace lpm
