#pragma once

// Kernels for Laplace-functional comparisons:
//   g_phi(x)   = -log integral e^{-phi(x+y)} nu(dy)
//   c_phi(th)  = integral theta e^{-theta z} (1 - e^{-phi(z)}) dz over supp phi
// and the ratio that exhibits g_phi(x) ~ c_phi(theta) L(-x) e^{theta x} as
// x -> -infinity.

#include "lpm/tail_law.hpp"
#include "lpm/test_function.hpp"

namespace lpm {

// Absolute quadrature error <= 1e-10; result clamped to [0, sup phi].
double g_phi(const TailLaw& nu, const TestFunction& phi, double x);

// Point-mass probe variant degenerates to phi(x + atom).
double g_phi(const PerturbLaw& nu, const TestFunction& phi, double x);

// Absolute quadrature error <= 1e-12.
double c_phi(const TestFunction& phi, double theta);

// g_phi(x) e^{-theta x} / (L(-x) c_phi(theta)); requires x < 0.
double tail_asymptote_ratio(const TailLaw& nu, const TestFunction& phi, double x);

}  // namespace lpm
