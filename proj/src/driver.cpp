#include "lpm/driver.hpp"

#include <cmath>
#include <cstdint>

#include "lpm/cumulant.hpp"
#include "lpm/errors.hpp"
#include "lpm/laplace_kernel.hpp"
#include "lpm/parallel.hpp"
#include "lpm/report.hpp"
#include "lpm/rng.hpp"
#include "lpm/spine.hpp"

namespace lpm {

using nlohmann::json;

namespace {

const TailLaw& require_tail(const RunConfig& cfg, const char* who) {
    if (cfg.nu.is_point_mass())
        throw ConfigError(std::string("perturbation: ") + who +
                          " needs a tail perturbation law, not a point mass");
    return cfg.nu.tail_law();
}

}  // namespace

TheoremId parse_theorem_name(const std::string& name) {
    if (name == "T1.1") return TheoremId::t11;
    if (name == "T1.2") return TheoremId::t12;
    if (name == "T1.3") return TheoremId::t13;
    if (name == "T1.4")
        throw ConfigError(
            "suite.theorem: the supercritical law is checked by the stabilization "
            "suite (suite.kind = \"stabilization\"), not a Laplace comparison");
    throw ConfigError("suite.theorem: unknown name '" + name + "' (T1.1 | T1.2 | T1.3)");
}

SimConfig sim_from_config(const RunConfig& cfg) {
    SimConfig sim;
    sim.law = cfg.law;
    sim.generations = cfg.n;
    sim.thetas = cfg.thetas;
    sim.w_lo = cfg.window.lo;
    sim.w_hi = cfg.window.hi;
    sim.budget = cfg.budget;
    sim.eps_prune = cfg.eps_prune;
    sim.threads = resolve_threads(cfg.threads);
    if (!cfg.nu.is_point_mass() && cfg.n >= 2) {
        sim.center = centering(cfg.law, cfg.nu.tail_law(), cfg.n).m_n;
    } else if (theta0(cfg.law)) {
        sim.center = cfg.n * speed_v(cfg.law);
    }
    return sim;
}

SuiteConfig laplace_from_config(const RunConfig& cfg) {
    SuiteConfig sc;
    sc.law = cfg.law;
    sc.tail = require_tail(cfg, "the Laplace suite");
    sc.theorem = parse_theorem_name(cfg.suite.theorem);
    for (const auto& t : cfg.suite.phis)
        sc.phis.push_back(TestFunction::tent(t[0], t[1], t[2]));
    sc.n = cfg.n;
    sc.runs = cfg.runs;
    sc.w_lo = cfg.window.lo;
    sc.w_hi = cfg.window.hi;
    sc.budget = cfg.budget;
    sc.eps_prune = cfg.eps_prune;
    sc.tol_abs = cfg.suite.tol_abs;
    sc.max_law_tol = cfg.suite.max_law_tol;
    sc.run_max_law = cfg.suite.max_law;
    sc.run_control = cfg.suite.control;
    sc.control_runs = cfg.suite.control_runs;
    sc.control_shift = cfg.suite.control_shift;
    sc.seed = cfg.seed;
    sc.threads = resolve_threads(cfg.threads);
    return sc;
}

SpeedConfig speed_from_config(const RunConfig& cfg) {
    SpeedConfig sc;
    sc.law = cfg.law;
    sc.nu = cfg.nu;
    sc.n_list = cfg.n_list;
    sc.runs = cfg.runs;
    sc.budget = cfg.budget;
    sc.eps_prune = cfg.eps_prune;
    sc.seed = cfg.seed;
    sc.threads = resolve_threads(cfg.threads);
    return sc;
}

StabilizationConfig stabilization_from_config(const RunConfig& cfg) {
    StabilizationConfig sc;
    sc.law = cfg.law;
    sc.tail = require_tail(cfg, "the stabilization suite");
    sc.n = cfg.n;
    sc.runs = cfg.runs;
    sc.w_lo = cfg.window.lo;
    sc.w_hi = cfg.window.hi;
    sc.budget = cfg.budget;
    sc.eps_prune = cfg.eps_prune;
    sc.ks_level = cfg.suite.ks_level;
    sc.seed = cfg.seed;
    sc.threads = resolve_threads(cfg.threads);
    return sc;
}

Verdict speed_verdict(const SpeedResult& r) {
    return r.rel_err_corrected <= 0.02 ? Verdict::pass : Verdict::fail;
}

json analyze_payload(const RunConfig& cfg) {
    json out;
    out["config_hash"] = config_hash(cfg);
    out["law"] = cfg.law.describe();
    out["profiles"] = json::array();
    for (double t : cfg.thetas)
        out["profiles"].push_back(profile_to_json(kappa_profile(cfg.law, t)));
    const auto root = theta0(cfg.law);
    if (root) {
        out["theta0"] = *root;
        out["speed"] = speed_v(cfg.law);
    }
    if (!cfg.nu.is_point_mass()) {
        const TailLaw& tail = cfg.nu.tail_law();
        const RegimeTag rt = classify_regime(cfg.law, tail.theta());
        out["regime"] = regime_to_json(rt);
        if (rt.tag == Regime::subcritical) {
            out["c1"] = constant_c1(kappa_profile(cfg.law, tail.theta()), tail.alpha());
        } else if (rt.tag == Regime::critical && tail.alpha() > -2.0 && root) {
            out["c2"] = constant_c2(kappa_profile(cfg.law, *root), tail.alpha());
        }
    }
    return out;
}

json simulate_payload(const RunConfig& cfg, bool embed_atoms,
                      std::vector<std::vector<double>>* atom_rows) {
    const SimConfig sim = sim_from_config(cfg);
    json runs = json::array();
    for (std::uint64_t r = 0; r < cfg.runs; ++r) {
        SimConfig sc = sim;
        sc.seed = derive_seed(cfg.seed, "cli.simulate", r);
        const TreeRun run = simulate(sc);
        if (atom_rows) atom_rows->push_back(perturbed_values(run, cfg.nu, run.seed));

        json entry{{"run", r},
                   {"seed", run.seed},
                   {"center", run.center},
                   {"generations", run.generations},
                   {"final_population", run.population.empty() ? 0 : run.population.back()},
                   {"raw_max_centered",
                    run.maxima.empty() ? 0.0 : run.maxima.back() - run.center},
                   {"extinct", run.extinct},
                   {"pruned", run.pruned_any},
                   {"ledger", ledger_to_json(run.ledger)}};
        json wfin;
        for (std::size_t t = 0; t < run.thetas.size(); ++t)
            wfin[std::to_string(run.thetas[t])] = run.w_tracks[t].back();
        entry["w_final"] = wfin;
        if (!run.z_track.empty()) entry["z_final"] = run.z_track.back();
        if (!cfg.nu.is_point_mass() && !run.extinct) {
            const ExtremalSnapshot snap =
                extremal_snapshot(run, cfg.nu, run.w_lo, run.w_hi, run.seed);
            entry["perturbed_max_centered"] = snap.perturbed_max_centered;
            entry["window_atoms"] = snap.atoms.size();
            if (embed_atoms) entry["atoms"] = snap.atoms;
        }
        runs.push_back(entry);
    }
    return json{{"config_hash", config_hash(cfg)}, {"seed", cfg.seed}, {"runs", runs}};
}

json many_to_one_payload(const RunConfig& cfg) {
    std::vector<std::uint64_t> seeds = cfg.m2o.seeds;
    if (seeds.empty()) seeds.push_back(cfg.seed);
    const double cutoff = cfg.m2o.threshold;
    const auto f = [cutoff](const std::vector<double>& path) {
        return path.back() <= cutoff ? 1.0 : 0.0;
    };

    json cases = json::array();
    int passed = 0;
    for (std::uint64_t s : seeds) {
        const ManyToOneReport rep = many_to_one_check(
            cfg.law, cfg.m2o.theta, cfg.m2o.n, f, cfg.m2o.tree_runs, cfg.m2o.spine_runs, s);
        const bool ok = std::abs(rep.z) <= 3.0;
        passed += ok ? 1 : 0;
        json c = many_to_one_to_json(rep);
        c["seed"] = s;
        c["pass"] = ok;
        cases.push_back(c);
    }
    const int total = static_cast<int>(seeds.size());
    const Verdict overall = passed * 10 >= total * 9 ? Verdict::pass : Verdict::fail;
    return json{{"suite", "many2one"},
                {"theta", cfg.m2o.theta},
                {"n", cfg.m2o.n},
                {"threshold", cutoff},
                {"cases", cases},
                {"passed", passed},
                {"total", total},
                {"verdict", verdict_name(overall)}};
}

}  // namespace lpm
