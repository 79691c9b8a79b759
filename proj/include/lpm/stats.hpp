#pragma once

// Small statistics toolbox: moment accumulation, Kolmogorov-Smirnov
// statistics with asymptotic critical values, and least-squares lines.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace lpm {

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
    std::size_t n = 0;
};

// Long-double accumulation keeps the reductions stable enough that permuting
// run order moves the mean by well under 1e-12.
inline MeanSe mean_se(const std::vector<double>& xs) {
    MeanSe out;
    out.n = xs.size();
    if (xs.empty()) return out;
    long double s = 0.0L;
    for (double x : xs) s += x;
    const long double m = s / static_cast<long double>(xs.size());
    long double q = 0.0L;
    for (double x : xs) {
        const long double d = x - m;
        q += d * d;
    }
    out.mean = static_cast<double>(m);
    if (xs.size() > 1) {
        const long double var = q / static_cast<long double>(xs.size() - 1);
        out.se = static_cast<double>(std::sqrt(var / static_cast<long double>(xs.size())));
    }
    return out;
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// sup_x |F_a(x) - F_b(x)| for two empirical distributions.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    while (i < a.size() && j < b.size()) {
        // Consume a full tie group on both sides before comparing, so equal
        // values never register a spurious gap.
        const double v = a[i] <= b[j] ? a[i] : b[j];
        while (i < a.size() && a[i] == v) ++i;
        while (j < b.size() && b[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

// sup_x |F_n(x) - F(x)| against a reference CDF.
inline double ks_one_sample(std::vector<double> a, const std::function<double(double)>& cdf) {
    if (a.empty()) throw std::invalid_argument("ks_one_sample: empty sample");
    std::sort(a.begin(), a.end());
    const double n = static_cast<double>(a.size());
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double f = cdf(a[i]);
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
        d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    }
    return d;
}

// Asymptotic Kolmogorov critical coefficient: c(q) = sqrt(-ln(q/2)/2).
inline double ks_coefficient(double level) {
    if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("ks_coefficient: level in (0,1)");
    return std::sqrt(-0.5 * std::log(level / 2.0));
}

inline double ks_two_sample_critical(std::size_t n, std::size_t m, double level) {
    return ks_coefficient(level) *
           std::sqrt(static_cast<double>(n + m) / (static_cast<double>(n) * static_cast<double>(m)));
}

inline double ks_one_sample_critical(std::size_t n, double level) {
    return ks_coefficient(level) / std::sqrt(static_cast<double>(n));
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("fit_line: need two or more matched points");
    long double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const long double n = static_cast<long double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += static_cast<long double>(x[i]) * x[i];
        sxy += static_cast<long double>(x[i]) * y[i];
    }
    const long double den = n * sxx - sx * sx;
    if (den == 0.0L) throw std::invalid_argument("fit_line: degenerate abscissae");
    LineFit out;
    out.slope = static_cast<double>((n * sxy - sx * sy) / den);
    out.intercept = static_cast<double>((sy - out.slope * sx) / n);
    return out;
}

}  // namespace lpm
