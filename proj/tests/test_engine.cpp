#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "lpm/cumulant.hpp"
#include "lpm/engine.hpp"
#include "lpm/errors.hpp"
#include "lpm/rng.hpp"
#include "lpm/stats.hpp"
#include "lpm/tail_law.hpp"

using namespace lpm;

namespace {

SimConfig base_config(int n, std::uint64_t seed) {
    SimConfig cfg;
    cfg.law = binary_gaussian();
    cfg.generations = n;
    cfg.thetas = {1.0};
    cfg.seed = seed;
    return cfg;
}

double median_of(std::vector<double> xs) {
    const std::size_t mid = xs.size() / 2;
    std::nth_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(mid), xs.end());
    return xs[mid];
}

constexpr double kTheta0 = 1.1774100225154747;  // sqrt(2 log 2)

}  // namespace

TEST_SUITE("engine") {

TEST_CASE("binary tree shape is exact without pruning") {
    SimConfig cfg = base_config(1, 7);
    TreeRun run = simulate(cfg);
    REQUIRE(run.population.size() == 2);
    CHECK(run.population[0] == 1);
    CHECK(run.population[1] == 2);
    CHECK(run.final_positions.size() == 2);
    CHECK_FALSE(run.pruned_any);

    cfg = base_config(10, 7);
    run = simulate(cfg);
    REQUIRE(run.population.size() == 11);
    for (int k = 0; k <= 10; ++k)
        CHECK(run.population[static_cast<std::size_t>(k)] == (1ull << k));
    CHECK(run.final_positions.size() == 1024);
    CHECK(run.final_ids.size() == 1024);
    CHECK_FALSE(run.pruned_any);
    CHECK(run.ledger.count_pruned == 0);
    CHECK(run.ledger.weight(1.0) == 0.0);
}

TEST_CASE("additive martingale has mean one, signed one mean zero") {
    // Test-scale version of the calibration run: 4-SE band around the exact
    // means at several depths and tilts.
    const std::uint64_t runs = 1500;
    for (int n : {1, 5, 10}) {
        for (double theta : {0.8, 1.0}) {
            std::vector<double> w, z;
            w.reserve(runs);
            for (std::uint64_t r = 0; r < runs; ++r) {
                SimConfig cfg = base_config(n, derive_seed(42, "test.mart", r * 16 + n));
                cfg.thetas = {theta};
                cfg.z_theta = kTheta0;
                cfg.store_final = false;
                TreeRun run = simulate(cfg);
                w.push_back(run.final_w(theta));
                z.push_back(run.final_z());
            }
            const MeanSe mw = mean_se(w);
            const MeanSe mz = mean_se(z);
            INFO("n=", n, " theta=", theta);
            CHECK(std::abs(mw.mean - 1.0) <= 4.0 * mw.se);
            CHECK(std::abs(mz.mean) <= 4.0 * mz.se);
        }
    }
}

TEST_CASE("one-step martingale differences center on zero") {
    const StepCheckReport rep = martingale_step_check(binary_gaussian(), 1.0, 4000, 99);
    CHECK(rep.runs == 4000);
    CHECK(std::abs(rep.w_step.mean) <= 4.0 * rep.w_step.se);
    REQUIRE(rep.z_theta.has_value());
    CHECK(std::abs(rep.z_step.mean) <= 4.0 * rep.z_step.se);

    // A tilt at the edge of the displacement mgf domain must refuse up front.
    const OffspringLaw law{CountLaw::deterministic(2),
                           DisplacementLaw::shifted_exponential(4.0, 0.0)};
    CHECK_THROWS_AS(martingale_step_check(law, 4.0, 10, 1), DomainError);
}

TEST_CASE("centered-max median drifts down with depth") {
    const double theta = 1.0;
    const double kap = kappa_profile(binary_gaussian(), theta).kappa;
    std::vector<double> med;
    for (int n : {5, 10, 15, 20}) {
        std::vector<double> vals;
        for (std::uint64_t r = 0; r < 400; ++r) {
            SimConfig cfg = base_config(n, derive_seed(5, "test.drift", r * 32 + n));
            cfg.budget = 1ull << 21;
            cfg.store_final = false;
            TreeRun run = simulate(cfg);
            vals.push_back(theta * run.maxima.back() - n * kap);
        }
        med.push_back(median_of(vals));
    }
    for (std::size_t i = 1; i < med.size(); ++i) CHECK(med[i] < med[i - 1]);
}

TEST_CASE("centering formulas at depth 100") {
    const OffspringLaw law = binary_gaussian();

    const CenteringInfo sub = centering(law, TailLaw(1.0, 0.0, 1.0), 100);
    CHECK(sub.regime == Regime::subcritical);
    CHECK(sub.m_n == doctest::Approx(100.0 * (std::log(2.0) + 0.5)).epsilon(1e-12));
    CHECK(std::abs(sub.m_n - 119.31471806) < 1e-6);
    CHECK_FALSE(sub.alpha_warning);

    const CenteringInfo crit = centering(law, TailLaw(kTheta0, -1.0, 1.0), 100);
    CHECK(crit.regime == Regime::critical);
    CHECK(crit.m_n ==
          doctest::Approx(100.0 * kTheta0 - std::log(100.0) / kTheta0).epsilon(1e-12));
    CHECK_FALSE(crit.alpha_warning);
    REQUIRE(crit.theta0.has_value());
    CHECK(*crit.theta0 == doctest::Approx(kTheta0).epsilon(1e-10));

    const CenteringInfo sup = centering(law, TailLaw(2.0, -1.0, 1.0), 100);
    CHECK(sup.regime == Regime::supercritical);
    CHECK(sup.m_n ==
          doctest::Approx(100.0 * kTheta0 - 1.5 * std::log(100.0) / kTheta0).epsilon(1e-12));

    // Critical-regime theory wants alpha in (-2, 0); outside it is flagged.
    CHECK(centering(law, TailLaw(kTheta0, -2.5, 1.0), 100).alpha_warning);

    CHECK_THROWS_AS(centering(law, TailLaw(1.0, 0.0, 1.0), 1), ConfigError);
}

TEST_CASE("point-mass probe reproduces centered positions") {
    SimConfig cfg = base_config(8, 31);
    cfg.center = 8.0 * speed_v(cfg.law);
    cfg.w_lo = -30.0;
    cfg.w_hi = 10.0;
    const TreeRun run = simulate(cfg);

    const ExtremalSnapshot snap =
        extremal_snapshot(run, PerturbLaw::point_mass(0.0), run.w_lo, run.w_hi, run.seed);
    std::vector<double> expect;
    for (double p : run.final_positions) {
        const double a = p - run.center;
        if (a >= run.w_lo && a <= run.w_hi) expect.push_back(a);
    }
    std::sort(expect.begin(), expect.end(), std::greater<double>());
    REQUIRE(snap.atoms.size() == expect.size());
    for (std::size_t i = 0; i < expect.size(); ++i) CHECK(snap.atoms[i] == expect[i]);
    CHECK(snap.raw_max_centered == run.maxima.back() - run.center);
    CHECK(snap.perturbed_max_centered == snap.raw_max_centered);
    CHECK_FALSE(snap.regime.has_value());

    // A shifted atom moves every point rigidly.
    const ExtremalSnapshot up =
        extremal_snapshot(run, PerturbLaw::point_mass(2.0), run.w_lo, run.w_hi, run.seed);
    CHECK(up.perturbed_max_centered == doctest::Approx(snap.perturbed_max_centered + 2.0));
}

TEST_CASE("perturbed maximum dominates raw maximum plus the sure lift") {
    const TailLaw tail(1.0, -1.0, 1.0);  // every draw is >= x_star
    const PerturbLaw nu = PerturbLaw::tail(tail);
    for (std::uint64_t s = 1; s <= 20; ++s) {
        SimConfig cfg = base_config(8, derive_seed(77, "test.lift", s));
        cfg.center = 8.0 * speed_v(cfg.law);
        cfg.w_lo = -30.0;
        cfg.w_hi = 20.0;
        const TreeRun run = simulate(cfg);
        const ExtremalSnapshot snap =
            extremal_snapshot(run, nu, run.w_lo, run.w_hi, run.seed);
        CHECK(snap.perturbed_max_centered >=
              snap.raw_max_centered + tail.x_star() - 1e-12);
        REQUIRE(snap.regime.has_value());
        CHECK(snap.regime->tag == Regime::subcritical);
    }
}

TEST_CASE("unwindowed perturbed values agree with the snapshot atoms") {
    SimConfig cfg = base_config(9, 55);
    cfg.center = 9.0 * speed_v(cfg.law);
    cfg.w_lo = -6.0;
    cfg.w_hi = 10.0;
    const TreeRun run = simulate(cfg);
    const PerturbLaw nu = PerturbLaw::tail(TailLaw(1.0, 0.0, 1.0));

    const std::vector<double> all = perturbed_values(run, nu, run.seed);
    REQUIRE(all.size() == run.final_positions.size());
    CHECK(std::is_sorted(all.begin(), all.end(), std::greater<double>()));

    const ExtremalSnapshot snap =
        extremal_snapshot(run, nu, run.w_lo, run.w_hi, run.seed);
    std::vector<double> inside;
    for (double a : all)
        if (a >= run.w_lo && a <= run.w_hi) inside.push_back(a);
    REQUIRE(inside.size() == snap.atoms.size());
    for (std::size_t i = 0; i < inside.size(); ++i) CHECK(inside[i] == snap.atoms[i]);
    CHECK(all.front() == snap.perturbed_max_centered);
}

TEST_CASE("same seed, same run; snapshots included") {
    SimConfig cfg = base_config(9, 123);
    cfg.z_theta = kTheta0;
    cfg.center = 9.0 * speed_v(cfg.law);
    const TreeRun a = simulate(cfg);
    const TreeRun b = simulate(cfg);
    CHECK(a.final_positions == b.final_positions);
    CHECK(a.final_ids == b.final_ids);
    CHECK(a.w_tracks == b.w_tracks);
    CHECK(a.z_track == b.z_track);
    CHECK(a.maxima == b.maxima);

    const PerturbLaw nu = PerturbLaw::tail(TailLaw(0.8, 0.0, 1.0));
    const ExtremalSnapshot sa = extremal_snapshot(a, nu, a.w_lo, a.w_hi, a.seed);
    const ExtremalSnapshot sb = extremal_snapshot(b, nu, b.w_lo, b.w_hi, b.seed);
    CHECK(sa.atoms == sb.atoms);
    CHECK(sa.perturbed_max_centered == sb.perturbed_max_centered);

    cfg.seed = 124;
    const TreeRun c = simulate(cfg);
    CHECK(a.maxima.back() != c.maxima.back());
}

TEST_CASE("results are byte-identical across thread counts") {
    for (std::uint64_t seed : {11ull, 12ull}) {
        SimConfig cfg = base_config(10, seed);
        cfg.thetas = {0.8, 1.0};
        cfg.z_theta = kTheta0;
        cfg.center = 10.0 * speed_v(cfg.law);
        cfg.threads = 1;
        const TreeRun one = simulate(cfg);
        cfg.threads = 4;
        const TreeRun four = simulate(cfg);
        CHECK(one.final_positions == four.final_positions);
        CHECK(one.final_ids == four.final_ids);
        CHECK(one.w_tracks == four.w_tracks);
        CHECK(one.z_track == four.z_track);
        CHECK(one.maxima == four.maxima);
        CHECK(one.population == four.population);
    }
}

TEST_CASE("final-generation pruning removes exactly the ledgered mass") {
    // budget sits between 2^11 and 2^12, so only the last generation prunes:
    // the dropped particles have no descendants and the ledger entry is the
    // exact missing martingale mass.
    const int n = 12;
    for (std::uint64_t s = 1; s <= 10; ++s) {
        SimConfig cfg = base_config(n, derive_seed(6, "test.fprune", s));
        cfg.center = n * speed_v(cfg.law);
        cfg.prune_theta = kTheta0;
        cfg.thetas = {1.0};

        SimConfig pruned_cfg = cfg;
        pruned_cfg.budget = 3000;
        pruned_cfg.eps_prune = 1.0;
        const TreeRun pruned = simulate(pruned_cfg);
        const TreeRun exact = simulate(cfg);

        REQUIRE(pruned.pruned_any);
        CHECK(pruned.ledger.count_pruned > 0);
        CHECK(pruned.population.back() + pruned.ledger.count_pruned == 1ull << n);
        CHECK(std::isfinite(pruned.final_floor));

        const double diff = exact.final_w(1.0) - pruned.final_w(1.0);
        CHECK(diff >= 0.0);
        const double ledgered = pruned.ledger.weight(1.0);
        CHECK(diff == doctest::Approx(ledgered).epsilon(1e-9));

        // Kept lineages are coupled draw-for-draw with the exact run.
        for (double p : pruned.final_positions)
            CHECK(std::find(exact.final_positions.begin(), exact.final_positions.end(),
                            p) != exact.final_positions.end());
    }
}

TEST_CASE("mid-generation pruning stays inside its certified bias bound") {
    const int n = 16;
    const PerturbLaw pm = PerturbLaw::point_mass(0.0);
    int mismatched = 0;
    for (std::uint64_t s = 1; s <= 50; ++s) {
        SimConfig cfg = base_config(n, derive_seed(8, "test.mprune", s));
        cfg.center = n * speed_v(cfg.law);
        cfg.prune_theta = kTheta0;
        cfg.w_lo = -4.0;
        cfg.w_hi = 8.0;

        SimConfig pruned_cfg = cfg;
        pruned_cfg.budget = 20000;
        // Tighter eps pushes the cutoff into the bulk of the front and the
        // surviving band itself outgrows 20000 on some seeds; 0.5 keeps the
        // worst seed near 75% of the budget while still pruning mid-run.
        pruned_cfg.eps_prune = 0.5;
        const TreeRun pruned = simulate(pruned_cfg);
        const TreeRun exact = simulate(cfg);

        REQUIRE(pruned.pruned_any);
        CHECK(pruned.ledger.within_eps());
        CHECK(pruned.ledger.discarded_extremal_bound > 0.0);

        // Pruning can only remove additive-martingale mass.
        CHECK(exact.final_w(1.0) - pruned.final_w(1.0) >= -1e-12);

        const ExtremalSnapshot se = extremal_snapshot(exact, pm, cfg.w_lo, cfg.w_hi, 1);
        const ExtremalSnapshot sp = extremal_snapshot(pruned, pm, cfg.w_lo, cfg.w_hi, 1);
        if (se.atoms != sp.atoms) ++mismatched;
    }
    // The ledger certifies <= 0.5 expected window-reaching descendants of
    // dropped particles per run (measured Chernoff totals sit near 0.14), and
    // in practice the per-particle stream coupling keeps the atom sets
    // identical on almost every seed.
    CHECK(mismatched <= 10);
}

TEST_CASE("budget overflow without pruning headroom refuses") {
    SimConfig cfg = base_config(16, 3);
    cfg.budget = 1000;
    cfg.eps_prune = 1e-12;  // cutoff so deep that nothing can be dropped
    cfg.center = 16.0 * speed_v(cfg.law);
    CHECK_THROWS_AS(simulate(cfg), BudgetError);
}

TEST_CASE("snapshot refuses a window wider than the simulated one") {
    SimConfig cfg = base_config(6, 9);
    cfg.w_lo = -4.0;
    cfg.w_hi = 8.0;
    const TreeRun run = simulate(cfg);
    const PerturbLaw pm = PerturbLaw::point_mass(0.0);
    CHECK_THROWS_AS(extremal_snapshot(run, pm, -5.0, 8.0, 1), WindowError);
    CHECK_THROWS_AS(extremal_snapshot(run, pm, -4.0, 9.0, 1), WindowError);
    CHECK_NOTHROW(extremal_snapshot(run, pm, -3.0, 7.0, 1));
}

TEST_CASE("dying count law goes extinct cleanly") {
    // Supercritical on paper (mean 1.05 > 1) but extinction probability ~0.90,
    // the root q of q = e^{1.05 (q-1)}.
    const OffspringLaw law{CountLaw::poisson(1.05), DisplacementLaw::gaussian(0.0, 1.0)};
    CHECK(law.count.can_die_out());
    int extinct = 0, alive = 0;
    for (std::uint64_t s = 1; s <= 200; ++s) {
        SimConfig cfg;
        cfg.law = law;
        cfg.generations = 8;
        cfg.thetas = {1.0};
        cfg.seed = derive_seed(2, "test.extinct", s);
        const TreeRun run = simulate(cfg);
        if (run.extinct) {
            ++extinct;
            CHECK(run.population.back() == 0);
            CHECK(run.final_positions.empty());
            CHECK(run.final_w(1.0) == 0.0);
            CHECK(run.maxima.back() == -std::numeric_limits<double>::infinity());
            const ExtremalSnapshot snap =
                extremal_snapshot(run, PerturbLaw::point_mass(0.0), run.w_lo, run.w_hi, 1);
            CHECK(snap.extinct);
            CHECK(snap.atoms.empty());
            CHECK(snap.raw_max_centered == -std::numeric_limits<double>::infinity());
        } else {
            ++alive;
            CHECK(run.population.back() > 0);
        }
    }
    CHECK(extinct >= 100);
    CHECK(alive >= 1);
}

TEST_CASE("config and accessor validation") {
    SimConfig cfg = base_config(5, 1);

    SimConfig bad = cfg;
    bad.generations = 0;
    CHECK_THROWS_AS(simulate(bad), ConfigError);
    bad = cfg;
    bad.budget = 999;
    CHECK_THROWS_AS(simulate(bad), ConfigError);
    bad = cfg;
    bad.eps_prune = 0.0;
    CHECK_THROWS_AS(simulate(bad), ConfigError);
    bad = cfg;
    bad.w_lo = 2.0;
    bad.w_hi = 2.0;
    CHECK_THROWS_AS(simulate(bad), ConfigError);
    bad = cfg;
    bad.thetas = {};
    CHECK_THROWS_AS(simulate(bad), ConfigError);
    bad = cfg;
    bad.thetas = {1.0, 1.0};
    CHECK_THROWS_AS(simulate(bad), ConfigError);

    // Tracking only a signed martingale is allowed.
    SimConfig zonly = cfg;
    zonly.thetas = {};
    zonly.z_theta = kTheta0;
    const TreeRun zr = simulate(zonly);
    CHECK(zr.w_tracks.empty());
    CHECK(zr.z_track.size() == 6);
    CHECK_NOTHROW(zr.final_z());

    const TreeRun run = simulate(cfg);
    CHECK_THROWS_AS(run.w_at(0.123, 5), ConfigError);
    CHECK_THROWS_AS(run.final_z(), ConfigError);
    CHECK(run.w_at(1.0, 0) == 1.0);
}

}  // TEST_SUITE
