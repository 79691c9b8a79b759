#pragma once

// Branching random walk simulator with budgeted pruning and an explicit bias
// ledger, plus the perturbed extremal snapshot machinery.
//
// Determinism: every particle carries a 64-bit identity; child j of particle
// id is mix64(id + kGolden*(j+1)), and all random draws for a particle come
// from a stream keyed by (run seed, identity).  Results are therefore
// byte-identical across worker counts, and a pruned run stays coupled
// draw-for-draw with its exact counterpart: surviving lineages see the same
// randomness whether or not other lineages were pruned.

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lpm/cumulant.hpp"
#include "lpm/offspring_law.hpp"
#include "lpm/tail_law.hpp"
#include "lpm/test_function.hpp"

namespace lpm {

struct PruneLedger {
    // theta -> cumulated e^{theta S_u - k kappa(theta)} over particles pruned
    // at their pruning generation k: the conditional expectation of the
    // martingale mass removed from W_n(theta).
    std::map<double, double> discarded_weight;
    // Many-to-one Chernoff bound on the expected number of generation-n
    // descendants of pruned particles above the window floor.
    double discarded_extremal_bound = 0.0;
    std::uint64_t count_pruned = 0;
    double eps_prune = 0.0;

    bool within_eps() const { return discarded_extremal_bound <= eps_prune; }
    double weight(double theta) const {
        auto it = discarded_weight.find(theta);
        return it == discarded_weight.end() ? 0.0 : it->second;
    }
};

struct SimConfig {
    OffspringLaw law = binary_gaussian();
    int generations = 1;
    std::vector<double> thetas;        // additive-martingale tilts to track
    std::optional<double> z_theta;     // critical tilt for the signed track
    double prune_theta = 0.0;          // analysis tilt; <=0 picks z_theta or max(thetas)
    double center = 0.0;               // predicted centering m_n (absolute)
    double w_lo = -8.0;                // reporting window, relative to center
    double w_hi = 8.0;
    std::uint64_t budget = 1ull << 22;
    double eps_prune = 1.0;
    std::uint64_t seed = 0;
    int threads = 1;
    bool store_final = true;
};

struct TreeRun {
    OffspringLaw law = binary_gaussian();
    int generations = 0;
    std::uint64_t seed = 0;
    double center = 0.0;
    double w_lo = 0.0, w_hi = 0.0;

    std::vector<std::uint64_t> population;        // retained count per generation
    std::vector<double> maxima;                   // running max per generation
    std::vector<double> thetas;
    std::vector<std::vector<double>> w_tracks;    // [theta index][generation]
    std::optional<double> z_theta;
    std::vector<double> z_track;                  // empty when z_theta absent

    std::vector<double> final_positions;          // retained final generation
    std::vector<std::uint64_t> final_ids;
    double final_floor = -std::numeric_limits<double>::infinity();

    PruneLedger ledger;
    bool pruned_any = false;
    bool extinct = false;

    double w_at(double theta, int generation) const;
    double final_w(double theta) const;
    double final_z() const;
};

// Exact breadth-first growth while the population fits the budget; beyond it,
// a particle u at generation k is dropped iff its Chernoff descendant bound
// e^{theta*(S_u - y_target) + (n-k) kappa(theta*)} < eps_prune/budget, with
// y_target = center + w_lo.  Throws BudgetError when the surviving band alone
// exceeds the budget.
TreeRun simulate(const SimConfig& cfg);

struct StepCheckReport {
    double theta = 0.0;
    std::optional<double> z_theta;
    MeanSe w_step;  // paired W_2 - W_1
    MeanSe z_step;  // paired Z_2 - Z_1 (critical tilt), when available
    std::uint64_t runs = 0;
};

// Paired one-step martingale differences; both means should sit within a few
// standard errors of zero.
StepCheckReport martingale_step_check(const OffspringLaw& law, double theta,
                                      std::uint64_t runs, std::uint64_t seed);

struct CenteringInfo {
    double m_n = 0.0;
    Regime regime = Regime::subcritical;
    std::optional<double> theta0;
    // The critical-regime theory needs alpha in (-2, 0); outside that range
    // the value is still computed but flagged.
    bool alpha_warning = false;
    std::string note;
};

// Regime-dependent centering sequence for the perturbed maximum:
//   subcritical    n kappa(t)/t + (1/t) log L(n)          L(x) = c x^alpha
//   critical       n kappa(t0)/t0 + (1/t0) log L(sqrt n) - (1/(2 t0)) log n
//   supercritical  n kappa'(t0) - (3/(2 t0)) log n
CenteringInfo centering(const OffspringLaw& law, const TailLaw& tail, int n);

struct ExtremalSnapshot {
    double m_n = 0.0;
    double w_lo = 0.0, w_hi = 0.0;
    std::vector<double> atoms;  // centered, inside [w_lo, w_hi], descending
    double raw_max_centered = 0.0;
    double perturbed_max_centered = 0.0;
    std::map<double, double> w_proxies;
    std::optional<double> z_proxy;
    std::optional<RegimeTag> regime;  // absent for the point-mass probe
    bool extinct = false;
    std::uint64_t run_seed = 0;
    std::uint64_t perturb_seed = 0;
};

// One perturbation draw per retained final-generation particle, keyed by the
// particle identity; atoms are centered by the run's m_n.  The perturbed max
// is taken over every retained particle (with an exact full recomputation in
// the vanishing-probability case that nothing reaches the window floor).
ExtremalSnapshot extremal_snapshot(const TreeRun& run, const PerturbLaw& nu,
                                   double w_lo, double w_hi, std::uint64_t seed);

// Every retained particle's centered perturbed point, no window filter, drawn
// with the same per-particle streams as extremal_snapshot (so the in-window
// subset matches the snapshot atoms exactly).  Descending.
std::vector<double> perturbed_values(const TreeRun& run, const PerturbLaw& nu,
                                     std::uint64_t seed);

enum class ProxyKind { w, z };

struct LaplacePair {
    double empirical_term = 1.0;   // exp(-sum phi(atoms))
    double predicted_term = 1.0;   // exp(-constant c_phi(theta) proxy)
    double sum_phi = 0.0;
    double proxy = 0.0;
};

// Pairs the empirical Laplace functional of one snapshot with its predicted
// counterpart from the same realization's martingale proxy.  The snapshot
// window must cover supp phi with safety_margin of slack below; WindowError
// otherwise.  Negative signed proxies are clamped to zero (the limit object
// is non-negative; a negative finite-n value is pure proxy noise).
LaplacePair laplace_pairing(const ExtremalSnapshot& snap, const TestFunction& phi,
                            double theta, double constant, ProxyKind proxy,
                            double safety_margin = 2.0);

}  // namespace lpm
