#pragma once

// Adaptive Gauss-Kronrod 15(7) integration with caller-supplied breakpoints.
// Integrands in this project are smooth except at known kinks (tent corners,
// the lower edge of a perturbation law's support), so the caller splits there
// and the adaptive refinement handles the rest.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace lpm::quad {

namespace detail {

// QUADPACK dqk15 nodes/weights on [-1, 1].
inline constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <typename F>
void gk15(const F& f, double a, double b, double& integral, double& error) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double fv[15];
    for (int i = 0; i < 7; ++i) {
        fv[i] = f(c - h * kXgk[i]);
        fv[14 - i] = f(c + h * kXgk[i]);
    }
    fv[7] = f(c);
    double resk = 0.0, resg = 0.0;
    for (int i = 0; i < 7; ++i) resk += kWgk[i] * (fv[i] + fv[14 - i]);
    resk += kWgk[7] * fv[7];
    for (int i = 0; i < 3; ++i) resg += kWg[i] * (fv[2 * i + 1] + fv[13 - 2 * i]);
    resg += kWg[3] * fv[7];
    integral = resk * h;
    error = std::abs((resk - resg) * h);
}

struct Segment {
    double a, b, integral, error;
};

}  // namespace detail

struct Result {
    double value = 0.0;
    double error_estimate = 0.0;
    bool converged = true;
};

// Integrates f over [a, b] until the summed error estimate drops below
// max(abs_tol, rel_tol * |value|), always refining the worst segment.
template <typename F>
Result integrate(const F& f, double a, double b, double abs_tol, double rel_tol,
                 std::size_t max_segments = 4000) {
    Result out;
    if (!(b > a)) return out;
    std::vector<detail::Segment> segs;
    detail::Segment s{a, b, 0.0, 0.0};
    detail::gk15(f, a, b, s.integral, s.error);
    segs.push_back(s);
    for (;;) {
        double total = 0.0, err = 0.0;
        std::size_t worst = 0;
        for (std::size_t i = 0; i < segs.size(); ++i) {
            total += segs[i].integral;
            err += segs[i].error;
            if (segs[i].error > segs[worst].error) worst = i;
        }
        const double target = std::max(abs_tol, rel_tol * std::abs(total));
        if (err <= target || segs.size() >= max_segments ||
            segs[worst].error <= 0.0) {
            out.value = total;
            out.error_estimate = err;
            out.converged = err <= target;
            return out;
        }
        detail::Segment left = segs[worst];
        const double mid = 0.5 * (left.a + left.b);
        detail::Segment right{mid, left.b, 0.0, 0.0};
        left.b = mid;
        detail::gk15(f, left.a, left.b, left.integral, left.error);
        detail::gk15(f, right.a, right.b, right.integral, right.error);
        segs[worst] = left;
        segs.push_back(right);
    }
}

// Same, but integrating piecewise between interior breakpoints.
template <typename F>
Result integrate_with_breakpoints(const F& f, double a, double b,
                                  std::vector<double> breaks, double abs_tol,
                                  double rel_tol) {
    Result out;
    if (!(b > a)) return out;
    breaks.push_back(a);
    breaks.push_back(b);
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    std::vector<double> cuts;
    for (double x : breaks)
        if (x >= a && x <= b) cuts.push_back(x);
    const double piece_abs = abs_tol / static_cast<double>(std::max<std::size_t>(1, cuts.size() - 1));
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const Result piece = integrate(f, cuts[i], cuts[i + 1], piece_abs, rel_tol);
        out.value += piece.value;
        out.error_estimate += piece.error_estimate;
        out.converged = out.converged && piece.converged;
    }
    return out;
}

}  // namespace lpm::quad
