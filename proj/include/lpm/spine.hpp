#pragma once

// The tilted random walk that represents the branching walk in expectation:
// one step has density proportional to e^{theta x} times the displacement
// law, and E[sum over particles of e^{theta S_u - n kappa(theta)} f(path)]
// equals E[f(T_1,...,T_n)] for the walk T.  Used as an independent oracle
// against direct tree simulation.

#include <cstdint>
#include <functional>
#include <vector>

#include "lpm/offspring_law.hpp"
#include "lpm/rng.hpp"

namespace lpm {

// One tilted step T_1; mean is kappa'(theta).  Throws DomainError outside
// the MGF domain.
double spine_step(const OffspringLaw& law, double theta, Stream& rng);

struct ManyToOneReport {
    double lhs = 0.0;     // tree side: weighted path functional
    double lhs_se = 0.0;
    double rhs = 0.0;     // walk side: plain mean of the functional
    double rhs_se = 0.0;
    double z = 0.0;       // difference over pooled SE
    std::uint64_t tree_runs = 0;
    std::uint64_t spine_runs = 0;
};

// Estimates both sides of the identity for a bounded path functional
// f : (positions at generations 1..n) -> [0,1].  The tree side is exact
// breadth-first (no pruning), so n is capped at 12.
ManyToOneReport many_to_one_check(const OffspringLaw& law, double theta, int n,
                                  const std::function<double(const std::vector<double>&)>& f,
                                  std::uint64_t tree_runs, std::uint64_t spine_runs,
                                  std::uint64_t seed);

}  // namespace lpm
