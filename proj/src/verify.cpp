#include "lpm/verify.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lpm/errors.hpp"
#include "lpm/laplace_kernel.hpp"
#include "lpm/parallel.hpp"
#include "lpm/rng.hpp"

namespace lpm {

namespace {

constexpr double kWindowMargin = 2.0;  // slack below supp phi, matches laplace_pairing

struct Collected {
    std::vector<std::vector<double>> sum_phi;  // [phi][run]
    std::vector<double> proxy;
    std::vector<double> pmax;
    std::uint64_t extinct = 0;
    std::uint64_t dropped = 0;
    double center = 0.0;
};

Collected collect_runs(const SuiteConfig& cfg, const TheoremTarget& tg, double shift,
                       std::uint64_t runs, const char* tag) {
    const CenteringInfo ci = centering(cfg.law, cfg.tail, cfg.n);
    const std::size_t np = cfg.phis.size();

    std::vector<std::vector<double>> sp(np, std::vector<double>(runs, 0.0));
    std::vector<double> proxy(runs, 0.0), pmax(runs, 0.0);
    std::vector<unsigned char> bad(runs, 0), ext(runs, 0);

    SimConfig base;
    base.law = cfg.law;
    base.generations = cfg.n;
    if (tg.proxy == ProxyKind::z)
        base.z_theta = tg.theta;
    else
        base.thetas = {tg.theta};
    base.prune_theta = tg.theta;
    base.center = ci.m_n + shift;
    base.w_lo = cfg.w_lo;
    base.w_hi = cfg.w_hi;
    base.budget = cfg.budget;
    base.eps_prune = cfg.eps_prune;
    base.threads = 1;  // parallelism lives at the run level

    const PerturbLaw nu = PerturbLaw::tail(cfg.tail);
    parallel_chunks(runs, 4, cfg.threads, [&](std::size_t, std::size_t b, std::size_t e) {
        for (std::size_t r = b; r < e; ++r) {
            SimConfig sc = base;
            sc.seed = derive_seed(cfg.seed, tag, r);
            try {
                const TreeRun run = simulate(sc);
                const ExtremalSnapshot snap =
                    extremal_snapshot(run, nu, cfg.w_lo, cfg.w_hi, sc.seed);
                if (snap.extinct) ext[r] = 1;
                pmax[r] = snap.perturbed_max_centered;
                proxy[r] = tg.proxy == ProxyKind::z
                               ? std::max(snap.z_proxy.value_or(0.0), 0.0)
                               : snap.w_proxies.at(tg.theta);
                for (std::size_t p = 0; p < np; ++p) {
                    double s = 0.0;
                    for (double a : snap.atoms) s += cfg.phis[p](a);
                    sp[p][r] = s;
                }
            } catch (const BudgetError&) {
                bad[r] = 1;  // counted and excluded; decision is seed-deterministic
            }
        }
    });

    Collected out;
    out.center = ci.m_n + shift;
    out.sum_phi.assign(np, {});
    for (std::size_t p = 0; p < np; ++p) out.sum_phi[p].reserve(runs);
    out.proxy.reserve(runs);
    out.pmax.reserve(runs);
    for (std::uint64_t r = 0; r < runs; ++r) {
        if (bad[r]) {
            ++out.dropped;
            continue;
        }
        if (ext[r]) ++out.extinct;
        for (std::size_t p = 0; p < np; ++p) out.sum_phi[p].push_back(sp[p][r]);
        out.proxy.push_back(proxy[r]);
        out.pmax.push_back(pmax[r]);
    }
    return out;
}

PhiResult eval_phi(const TestFunction& phi, double theta, double constant,
                   const std::vector<double>& sums, const std::vector<double>& proxy,
                   double tol) {
    PhiResult res;
    res.phi = phi.describe();
    res.c_phi = c_phi(phi, theta);

    const std::size_t nr = sums.size();
    std::vector<double> emp(nr), pred(nr), diff(nr);
    double sum_lhs = 0.0, sum_rhs = 0.0;
    for (std::size_t r = 0; r < nr; ++r) {
        emp[r] = std::exp(-sums[r]);
        const double intensity = constant * res.c_phi * proxy[r];
        pred[r] = std::exp(-intensity);
        diff[r] = emp[r] - pred[r];
        sum_lhs += sums[r];
        sum_rhs += intensity;
    }
    res.empirical = mean_se(emp);
    res.predicted = mean_se(pred);
    res.paired_diff = mean_se(diff);
    res.ci_width = 2.0 * 1.96 * res.paired_diff.se;
    res.z = res.paired_diff.se > 0.0 ? res.paired_diff.mean / res.paired_diff.se : 0.0;
    res.moment_ratio = sum_rhs > 0.0 ? sum_lhs / sum_rhs : 0.0;

    if (res.ci_width > tol) {
        res.verdict = Verdict::inconclusive;
    } else if (std::abs(res.paired_diff.mean) <= tol) {
        res.verdict = Verdict::pass;
    } else if (std::abs(res.empirical.mean - res.predicted.mean) <=
               1.96 * (res.empirical.se + res.predicted.se)) {
        res.verdict = Verdict::pass;  // confidence intervals overlap
    } else {
        res.verdict = Verdict::fail;
    }
    return res;
}

Verdict aggregate(const std::vector<Verdict>& vs) {
    bool inconclusive = false;
    for (Verdict v : vs) {
        if (v == Verdict::fail) return Verdict::fail;
        if (v == Verdict::inconclusive) inconclusive = true;
    }
    return inconclusive ? Verdict::inconclusive : Verdict::pass;
}

}  // namespace

const char* theorem_name(TheoremId id) {
    switch (id) {
        case TheoremId::t11: return "T1.1";
        case TheoremId::t12: return "T1.2";
        case TheoremId::t13: return "T1.3";
        case TheoremId::t14: return "T1.4";
    }
    return "?";
}

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::fail: return "fail";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "?";
}

double constant_c1(const CumulantProfile& p, double alpha) {
    if (!(p.gap < -1e-8))
        throw RegimeError("c1 needs a subcritical profile (theta kappa' - kappa < 0)");
    return std::pow(p.kappa / p.theta - p.kappa_prime, alpha);
}

double constant_c2(const CumulantProfile& p, double alpha) {
    if (!(std::abs(p.gap) <= 1e-8))
        throw RegimeError("c2 needs a critical profile (theta kappa' = kappa)");
    if (!(alpha > -2.0))
        throw RegimeError("c2 is defined for alpha > -2 only");
    const double kpp = p.kappa_double_prime;
    if (!(kpp > 0.0)) throw RegimeError("c2 needs kappa'' > 0");
    return std::sqrt(2.0 / (3.14159265358979323846 * kpp)) *
           std::pow(2.0 * kpp, 0.5 * alpha) * std::tgamma(0.5 * alpha + 1.0);
}

TheoremTarget make_target(TheoremId id, const OffspringLaw& law, const TailLaw& tail) {
    const RegimeTag rt = classify_regime(law, tail.theta());
    TheoremTarget tg;
    tg.id = id;
    tg.regime = rt.tag;
    tg.theta0 = rt.theta0;

    const auto require_regime = [&](Regime want) {
        if (rt.tag != want)
            throw RegimeError(std::string(theorem_name(id)) + " needs a " +
                              regime_name(want) + " tail, but (law, tail) classify as " +
                              regime_name(rt.tag));
    };

    switch (id) {
        case TheoremId::t11: {
            require_regime(Regime::subcritical);
            if (tail.alpha() != 0.0)
                throw RegimeError("T1.1 covers flat tail modulation (alpha = 0) only");
            tg.theta = tail.theta();
            tg.constant = 1.0;
            tg.proxy = ProxyKind::w;
            break;
        }
        case TheoremId::t12: {
            require_regime(Regime::subcritical);
            if (tail.alpha() == 0.0)
                throw RegimeError("T1.2 needs a non-flat modulation (alpha != 0)");
            tg.theta = tail.theta();
            tg.constant = constant_c1(kappa_profile(law, tg.theta), tail.alpha());
            tg.proxy = ProxyKind::w;
            break;
        }
        case TheoremId::t13: {
            require_regime(Regime::critical);
            if (!rt.theta0) throw RegimeError("T1.3 needs the critical tilt to exist");
            tg.theta = *rt.theta0;
            tg.constant = constant_c2(kappa_profile(law, tg.theta), tail.alpha());
            tg.proxy = ProxyKind::z;
            break;
        }
        case TheoremId::t14: {
            require_regime(Regime::supercritical);
            if (!rt.theta0) throw RegimeError("T1.4 needs the critical tilt to exist");
            tg.theta = *rt.theta0;
            tg.constant = 0.0;
            tg.proxy = std::nullopt;
            break;
        }
    }
    return tg;
}

TheoremSuiteResult theorem_suite(const SuiteConfig& cfg) {
    if (cfg.theorem == TheoremId::t14)
        throw ConfigError("the supercritical law has no Laplace target here; "
                          "use stabilization_check");
    if (cfg.phis.empty()) throw ConfigError("theorem_suite: need at least one test function");
    const TheoremTarget tg = make_target(cfg.theorem, cfg.law, cfg.tail);
    const double tol =
        cfg.tol_abs > 0.0 ? cfg.tol_abs : (tg.regime == Regime::critical ? 0.05 : 0.02);

    for (const TestFunction& phi : cfg.phis) {
        if (phi.empty()) continue;
        if (phi.support_lo() - kWindowMargin < cfg.w_lo || phi.support_hi() > cfg.w_hi)
            throw WindowError("theorem_suite: window [" + std::to_string(cfg.w_lo) + "," +
                              std::to_string(cfg.w_hi) + "] must cover supp phi with " +
                              std::to_string(kWindowMargin) + " slack below");
    }

    TheoremSuiteResult res;
    res.target = tg;
    res.n = cfg.n;
    res.runs = cfg.runs;
    res.tol_abs = tol;

    const Collected main = collect_runs(cfg, tg, 0.0, cfg.runs, "suite.run");
    res.m_n = main.center;
    res.extinct_runs = main.extinct;
    res.dropped_runs = main.dropped;

    std::vector<Verdict> verdicts;
    for (std::size_t p = 0; p < cfg.phis.size(); ++p) {
        res.phis.push_back(eval_phi(cfg.phis[p], tg.theta, tg.constant, main.sum_phi[p],
                                    main.proxy, tol));
        verdicts.push_back(res.phis.back().verdict);
    }

    if (cfg.run_max_law) {
        MaxLawResult ml;
        ml.tol = cfg.max_law_tol;
        ml.grid = cfg.max_grid;
        if (ml.grid.empty())
            for (double x = -2.0; x <= 12.0 + 1e-9; x += 0.25) ml.grid.push_back(x);
        const double nr = static_cast<double>(main.pmax.size());
        for (double x : ml.grid) {
            std::size_t count = 0;
            for (double v : main.pmax)
                if (v <= x) ++count;
            ml.empirical_cdf.push_back(static_cast<double>(count) / nr);
            const double decay = std::exp(-tg.theta * x);
            double acc = 0.0;
            for (double w : main.proxy) acc += std::exp(-tg.constant * w * decay);
            ml.predicted_cdf.push_back(acc / nr);
        }
        ml.sup_distance = 0.0;
        for (std::size_t g = 0; g < ml.grid.size(); ++g)
            ml.sup_distance = std::max(
                ml.sup_distance, std::abs(ml.empirical_cdf[g] - ml.predicted_cdf[g]));
        ml.verdict = ml.sup_distance <= ml.tol ? Verdict::pass : Verdict::fail;
        verdicts.push_back(ml.verdict);
        res.max_law = std::move(ml);
    }

    if (cfg.run_control) {
        ControlResult ctl;
        ctl.shift = cfg.control_shift;
        ctl.runs = cfg.control_runs;
        const Collected corrupted =
            collect_runs(cfg, tg, cfg.control_shift, cfg.control_runs, "suite.control");
        for (std::size_t p = 0; p < cfg.phis.size(); ++p)
            ctl.phi_verdicts.push_back(eval_phi(cfg.phis[p], tg.theta, tg.constant,
                                                corrupted.sum_phi[p], corrupted.proxy, tol)
                                           .verdict);
        ctl.failed_as_expected = aggregate(ctl.phi_verdicts) == Verdict::fail;
        if (!ctl.failed_as_expected) verdicts.push_back(Verdict::fail);
        res.control = std::move(ctl);
    }

    res.overall = aggregate(verdicts);
    return res;
}

SpeedResult speed_check(const SpeedConfig& cfg) {
    if (cfg.n_list.size() < 3) throw ConfigError("speed_check: need >= 3 generation counts");
    for (std::size_t i = 1; i < cfg.n_list.size(); ++i)
        if (cfg.n_list[i] <= cfg.n_list[i - 1])
            throw ConfigError("speed_check: generation counts must increase");

    SpeedResult res;
    const auto root = theta0(cfg.law);
    double theta_track, log_coef, const_term = 0.0;
    if (cfg.nu.is_point_mass()) {
        res.predicted_speed = speed_v(cfg.law);
        log_coef = root ? -1.5 / *root : 0.0;
        theta_track = root.value_or(1.0);
    } else {
        const TailLaw& tail = cfg.nu.tail_law();
        const RegimeTag rt = classify_regime(cfg.law, tail.theta());
        res.regime = rt.tag;
        res.predicted_speed = rt.predicted_speed;
        const double a = tail.alpha(), lc = std::log(tail.c());
        if (rt.tag == Regime::subcritical) {
            theta_track = tail.theta();
            log_coef = a / theta_track;
            const_term = lc / theta_track;
        } else {
            theta_track = *rt.theta0;
            log_coef = rt.tag == Regime::critical ? (0.5 * a - 0.5) / theta_track
                                                  : -1.5 / theta_track;
            const_term = rt.tag == Regime::critical ? lc / theta_track : 0.0;
        }
    }

    std::vector<double> xs, ys_raw, ys_corr;
    for (int n : cfg.n_list) {
        const double ln_n = std::log(static_cast<double>(n));
        const double center = res.predicted_speed * n + log_coef * ln_n + const_term;

        std::vector<double> samples(cfg.runs, 0.0);
        std::vector<unsigned char> skip(cfg.runs, 0);
        const std::uint64_t n_seed = derive_seed(cfg.seed, "speed.n", static_cast<std::uint64_t>(n));
        parallel_chunks(cfg.runs, 4, cfg.threads, [&](std::size_t, std::size_t b, std::size_t e) {
            for (std::size_t r = b; r < e; ++r) {
                SimConfig sc;
                sc.law = cfg.law;
                sc.generations = n;
                sc.thetas = {theta_track};
                sc.prune_theta = theta_track;
                sc.center = center;
                sc.w_lo = -6.0;
                sc.w_hi = 8.0;
                sc.budget = cfg.budget;
                sc.eps_prune = cfg.eps_prune;
                sc.threads = 1;
                sc.seed = derive_seed(n_seed, "speed.run", r);
                const TreeRun run = simulate(sc);
                const ExtremalSnapshot snap =
                    extremal_snapshot(run, cfg.nu, sc.w_lo, sc.w_hi, sc.seed);
                if (snap.extinct)
                    skip[r] = 1;
                else
                    samples[r] = snap.perturbed_max_centered + center;
            }
        });
        std::vector<double> kept;
        kept.reserve(cfg.runs);
        for (std::uint64_t r = 0; r < cfg.runs; ++r)
            if (!skip[r]) kept.push_back(samples[r]);

        SpeedPoint pt;
        pt.n = n;
        pt.pmax = mean_se(kept);
        pt.log_term = log_coef * ln_n;
        res.points.push_back(pt);
        xs.push_back(static_cast<double>(n));
        ys_raw.push_back(pt.pmax.mean);
        ys_corr.push_back(pt.pmax.mean - pt.log_term);
    }

    res.raw_slope = fit_line(xs, ys_raw).slope;
    res.corrected_slope = fit_line(xs, ys_corr).slope;
    res.rel_err_raw = std::abs(res.raw_slope - res.predicted_speed) / res.predicted_speed;
    res.rel_err_corrected =
        std::abs(res.corrected_slope - res.predicted_speed) / res.predicted_speed;
    return res;
}

StabilizationResult stabilization_check(const StabilizationConfig& cfg) {
    const RegimeTag rt = classify_regime(cfg.law, cfg.tail.theta());
    if (rt.tag != Regime::supercritical)
        throw RegimeError("stabilization check needs a supercritical tail (gap > 0)");
    const double th0 = *rt.theta0;

    StabilizationResult res;
    res.n_lo = cfg.n;
    res.n_hi = 2 * cfg.n;

    const auto side = [&](int n, const char* tag, std::uint64_t& kept_count) {
        const double center = centering(cfg.law, cfg.tail, n).m_n;
        std::vector<double> samples(cfg.runs, 0.0);
        std::vector<unsigned char> bad(cfg.runs, 0);
        const PerturbLaw nu = PerturbLaw::tail(cfg.tail);
        parallel_chunks(cfg.runs, 4, cfg.threads,
                        [&](std::size_t, std::size_t b, std::size_t e) {
                            for (std::size_t r = b; r < e; ++r) {
                                SimConfig sc;
                                sc.law = cfg.law;
                                sc.generations = n;
                                sc.thetas = {th0};
                                sc.prune_theta = th0;
                                sc.center = center;
                                sc.w_lo = cfg.w_lo;
                                sc.w_hi = cfg.w_hi;
                                sc.budget = cfg.budget;
                                sc.eps_prune = cfg.eps_prune;
                                sc.threads = 1;
                                sc.seed = derive_seed(cfg.seed, tag, r);
                                try {
                                    const TreeRun run = simulate(sc);
                                    const ExtremalSnapshot snap = extremal_snapshot(
                                        run, nu, sc.w_lo, sc.w_hi, sc.seed);
                                    if (snap.extinct)
                                        bad[r] = 1;
                                    else
                                        samples[r] = snap.perturbed_max_centered;
                                } catch (const BudgetError&) {
                                    bad[r] = 1;
                                }
                            }
                        });
        std::vector<double> kept;
        kept.reserve(cfg.runs);
        for (std::uint64_t r = 0; r < cfg.runs; ++r) {
            if (bad[r]) {
                ++res.dropped_runs;
                continue;
            }
            kept.push_back(samples[r]);
        }
        kept_count = kept.size();
        return kept;
    };

    res.samples_lo = side(res.n_lo, "stab.lo", res.runs_lo);
    res.samples_hi = side(res.n_hi, "stab.hi", res.runs_hi);
    const std::vector<double>& lo = res.samples_lo;
    const std::vector<double>& hi = res.samples_hi;

    res.ks = ks_two_sample(lo, hi);
    res.critical_value = ks_two_sample_critical(lo.size(), hi.size(), cfg.ks_level);

    const double shift_lo = 1.5 * std::log(static_cast<double>(res.n_lo)) / th0;
    const double shift_hi = 1.5 * std::log(static_cast<double>(res.n_hi)) / th0;
    std::vector<double> lo_ctl = lo, hi_ctl = hi;
    for (double& v : lo_ctl) v -= shift_lo;
    for (double& v : hi_ctl) v -= shift_hi;
    res.control_ks = ks_two_sample(lo_ctl, hi_ctl);
    res.control_above = res.control_ks > res.critical_value;

    res.verdict = (res.ks <= res.critical_value && res.control_above) ? Verdict::pass
                                                                      : Verdict::fail;
    return res;
}

}  // namespace lpm
