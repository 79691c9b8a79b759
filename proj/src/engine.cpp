#include "lpm/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "lpm/errors.hpp"
#include "lpm/laplace_kernel.hpp"
#include "lpm/parallel.hpp"
#include "lpm/rng.hpp"

namespace lpm {

namespace {

constexpr std::size_t kChunk = 16384;
constexpr std::uint64_t kRootId = 0x243f6a8885a308d3ULL;

struct Particle {
    double pos;
    std::uint64_t id;
};

inline std::uint64_t child_identity(std::uint64_t parent, std::uint64_t j) {
    return mix64(parent + kGolden * (j + 1));
}

// Per-chunk scratch; merged in chunk order so reductions are bit-stable.
struct ChunkAcc {
    std::vector<Particle> out;
    std::vector<long double> w;     // one slot per tracked tilt
    long double z = 0.0L;
    double maxpos = -std::numeric_limits<double>::infinity();
    std::vector<long double> disc;  // pruned weight per tracked tilt
    long double disc_star = 0.0L;   // pruned weight at the prune tilt (if untracked)
    long double ebound = 0.0L;
    std::uint64_t pruned = 0;
    std::uint64_t children = 0;
};

}  // namespace

double TreeRun::w_at(double theta, int generation) const {
    for (std::size_t t = 0; t < thetas.size(); ++t)
        if (thetas[t] == theta) return w_tracks[t].at(static_cast<std::size_t>(generation));
    throw ConfigError("tree run: tilt " + std::to_string(theta) + " was not tracked");
}

double TreeRun::final_w(double theta) const { return w_at(theta, generations); }

double TreeRun::final_z() const {
    if (z_track.empty()) throw ConfigError("tree run: no signed track present");
    return z_track.back();
}

TreeRun simulate(const SimConfig& cfg) {
    if (cfg.generations < 1) throw ConfigError("simulate: generations must be >= 1");
    if (cfg.budget < 1000) throw ConfigError("simulate: budget must be >= 1000");
    if (!(cfg.eps_prune > 0.0)) throw ConfigError("simulate: eps_prune must be positive");
    if (!(cfg.w_hi > cfg.w_lo)) throw ConfigError("simulate: window needs w_lo < w_hi");
    if (cfg.thetas.empty() && !cfg.z_theta)
        throw ConfigError("simulate: need at least one tracked tilt");
    for (std::size_t i = 0; i < cfg.thetas.size(); ++i)
        for (std::size_t j = i + 1; j < cfg.thetas.size(); ++j)
            if (cfg.thetas[i] == cfg.thetas[j])
                throw ConfigError("simulate: duplicate tracked tilt");

    const int n = cfg.generations;
    const std::size_t nt = cfg.thetas.size();
    std::vector<double> kap(nt);
    for (std::size_t t = 0; t < nt; ++t) kap[t] = kappa_profile(cfg.law, cfg.thetas[t]).kappa;

    double z_kap = 0.0, z_kp = 0.0;
    std::ptrdiff_t z_shared = -1;  // index in thetas sharing the critical tilt
    if (cfg.z_theta) {
        const auto p = kappa_profile(cfg.law, *cfg.z_theta);
        z_kap = p.kappa;
        z_kp = p.kappa_prime;
        for (std::size_t t = 0; t < nt; ++t)
            if (cfg.thetas[t] == *cfg.z_theta) z_shared = static_cast<std::ptrdiff_t>(t);
    }

    double theta_star = cfg.prune_theta;
    if (!(theta_star > 0.0))
        theta_star = cfg.z_theta ? *cfg.z_theta
                                 : *std::max_element(cfg.thetas.begin(), cfg.thetas.end());
    const double kap_star = kappa_profile(cfg.law, theta_star).kappa;
    std::ptrdiff_t star_shared = -1;
    for (std::size_t t = 0; t < nt; ++t)
        if (cfg.thetas[t] == theta_star) star_shared = static_cast<std::ptrdiff_t>(t);

    const double y_target = cfg.center + cfg.w_lo;
    // e^{theta* S - j kappa*} times this constant is the descendant bound.
    const double ebound_factor = std::exp(n * kap_star - theta_star * y_target);
    const double log_prune_level = std::log(cfg.eps_prune / static_cast<double>(cfg.budget));

    const int threads = resolve_threads(cfg.threads);
    const std::uint64_t repro_base = derive_seed(cfg.seed, "engine.repro", 0);

    TreeRun run;
    run.law = cfg.law;
    run.generations = n;
    run.seed = cfg.seed;
    run.center = cfg.center;
    run.w_lo = cfg.w_lo;
    run.w_hi = cfg.w_hi;
    run.thetas = cfg.thetas;
    run.z_theta = cfg.z_theta;
    run.ledger.eps_prune = cfg.eps_prune;

    run.population.assign(static_cast<std::size_t>(n) + 1, 0);
    run.maxima.assign(static_cast<std::size_t>(n) + 1,
                      -std::numeric_limits<double>::infinity());
    run.w_tracks.assign(nt, std::vector<double>(static_cast<std::size_t>(n) + 1, 0.0));
    if (cfg.z_theta) run.z_track.assign(static_cast<std::size_t>(n) + 1, 0.0);

    run.population[0] = 1;
    run.maxima[0] = 0.0;
    for (std::size_t t = 0; t < nt; ++t) run.w_tracks[t][0] = 1.0;

    std::vector<long double> disc_total(nt, 0.0L);
    long double disc_star_total = 0.0L, ebound_total = 0.0L;
    std::uint64_t pruned_total = 0;

    const bool det_count = cfg.law.count.kind() == CountLaw::Kind::deterministic;
    const auto stream_for = [&](std::uint64_t id) { return Stream(mix64(repro_base ^ id)); };

    std::vector<Particle> cur{{0.0, kRootId}};
    for (int j = 1; j <= n; ++j) {
        const std::size_t nchunks = (cur.size() + kChunk - 1) / kChunk;

        // How many children this generation produces, before any pruning.
        std::uint64_t total_children = 0;
        if (det_count) {
            total_children = cur.size() * static_cast<std::uint64_t>(cfg.law.count.param());
        } else {
            std::vector<std::uint64_t> counts(nchunks, 0);
            parallel_chunks(cur.size(), kChunk, threads,
                            [&](std::size_t ci, std::size_t b, std::size_t e) {
                                std::uint64_t c = 0;
                                for (std::size_t i = b; i < e; ++i) {
                                    Stream s = stream_for(cur[i].id);
                                    c += cfg.law.count.sample(s);
                                }
                                counts[ci] = c;
                            });
            for (std::uint64_t c : counts) total_children += c;
        }

        const bool prune_active = total_children > cfg.budget;
        double cutoff = -std::numeric_limits<double>::infinity();
        if (prune_active) {
            run.pruned_any = true;
            cutoff = y_target + (log_prune_level - (n - j) * kap_star) / theta_star;
            if (j == n) run.final_floor = cutoff;
        }

        std::vector<ChunkAcc> acc(nchunks);
        const double* thetas_p = cfg.thetas.data();
        const double* kap_p = kap.data();
        parallel_chunks(cur.size(), kChunk, threads, [&](std::size_t ci, std::size_t b,
                                                         std::size_t e) {
            ChunkAcc& a = acc[ci];
            a.w.assign(nt, 0.0L);
            a.disc.assign(nt, 0.0L);
            a.out.reserve((e - b) * 2 + 8);
            double wv_small[4];
            std::vector<double> wv_big;
            double* wv = nt <= 4 ? wv_small : (wv_big.resize(nt), wv_big.data());
            const bool z_on = cfg.z_theta.has_value();
            for (std::size_t i = b; i < e; ++i) {
                const double pos = cur[i].pos;
                const std::uint64_t id = cur[i].id;
                Stream s = stream_for(id);
                const std::uint64_t cnt = cfg.law.count.sample(s);
                a.children += cnt;
                for (std::uint64_t jj = 0; jj < cnt; ++jj) {
                    const double cpos = pos + cfg.law.displacement.sample(s);
                    for (std::size_t t = 0; t < nt; ++t)
                        wv[t] = std::exp(thetas_p[t] * cpos - j * kap_p[t]);
                    if (prune_active && cpos < cutoff) {
                        ++a.pruned;
                        for (std::size_t t = 0; t < nt; ++t) a.disc[t] += wv[t];
                        double wstar;
                        if (star_shared >= 0) {
                            wstar = wv[star_shared];
                        } else {
                            wstar = std::exp(theta_star * cpos - j * kap_star);
                            a.disc_star += wstar;
                        }
                        a.ebound += wstar * ebound_factor;
                        continue;
                    }
                    for (std::size_t t = 0; t < nt; ++t) a.w[t] += wv[t];
                    if (z_on) {
                        const double e0 = z_shared >= 0
                                              ? wv[z_shared]
                                              : std::exp(*cfg.z_theta * cpos - j * z_kap);
                        a.z += (j * z_kp - cpos) * e0;
                    }
                    if (cpos > a.maxpos) a.maxpos = cpos;
                    a.out.push_back({cpos, child_identity(id, jj)});
                }
            }
        });

        // Fixed-order merge keeps every statistic independent of thread count.
        std::size_t kept = 0;
        for (const ChunkAcc& a : acc) kept += a.out.size();
        if (kept > cfg.budget)
            throw BudgetError(
                "simulate: surviving frontier band (" + std::to_string(kept) +
                " particles at generation " + std::to_string(j) + ") exceeds budget " +
                std::to_string(cfg.budget) + "; raise eps_prune or lower generations");

        std::vector<Particle> next;
        next.reserve(kept);
        std::vector<long double> wsum(nt, 0.0L);
        long double zsum = 0.0L;
        double maxpos = -std::numeric_limits<double>::infinity();
        for (ChunkAcc& a : acc) {
            next.insert(next.end(), a.out.begin(), a.out.end());
            for (std::size_t t = 0; t < nt; ++t) {
                wsum[t] += a.w[t];
                disc_total[t] += a.disc[t];
            }
            zsum += a.z;
            disc_star_total += a.disc_star;
            ebound_total += a.ebound;
            pruned_total += a.pruned;
            maxpos = std::max(maxpos, a.maxpos);
        }

        const auto gj = static_cast<std::size_t>(j);
        run.population[gj] = kept;
        run.maxima[gj] = maxpos;
        for (std::size_t t = 0; t < nt; ++t)
            run.w_tracks[t][gj] = static_cast<double>(wsum[t]);
        if (cfg.z_theta) run.z_track[gj] = static_cast<double>(zsum);

        cur = std::move(next);
        if (cur.empty()) {
            run.extinct = true;
            break;  // remaining generations keep the zero/empty defaults
        }
    }

    for (std::size_t t = 0; t < nt; ++t)
        run.ledger.discarded_weight[cfg.thetas[t]] = static_cast<double>(disc_total[t]);
    if (star_shared < 0 && (pruned_total > 0 || cfg.prune_theta > 0.0))
        run.ledger.discarded_weight[theta_star] = static_cast<double>(disc_star_total);
    run.ledger.discarded_extremal_bound = static_cast<double>(ebound_total);
    run.ledger.count_pruned = pruned_total;

    if (cfg.store_final && !run.extinct) {
        run.final_positions.resize(cur.size());
        run.final_ids.resize(cur.size());
        for (std::size_t i = 0; i < cur.size(); ++i) {
            run.final_positions[i] = cur[i].pos;
            run.final_ids[i] = cur[i].id;
        }
    }
    return run;
}

StepCheckReport martingale_step_check(const OffspringLaw& law, double theta,
                                      std::uint64_t runs, std::uint64_t seed) {
    kappa_profile(law, theta);  // propagate DomainError before any work
    const auto root = theta0(law);

    std::vector<double> wd, zd;
    wd.reserve(runs);
    if (root) zd.reserve(runs);

    SimConfig cfg;
    cfg.law = law;
    cfg.generations = 2;
    cfg.thetas = {theta};
    cfg.z_theta = root;
    cfg.budget = 1ull << 20;
    cfg.threads = 1;
    cfg.store_final = false;
    for (std::uint64_t r = 0; r < runs; ++r) {
        cfg.seed = derive_seed(seed, "stepcheck.run", r);
        const TreeRun run = simulate(cfg);
        wd.push_back(run.w_tracks[0][2] - run.w_tracks[0][1]);
        if (root) zd.push_back(run.z_track[2] - run.z_track[1]);
    }

    StepCheckReport rep;
    rep.theta = theta;
    rep.z_theta = root;
    rep.runs = runs;
    rep.w_step = mean_se(wd);
    if (root) rep.z_step = mean_se(zd);
    return rep;
}

CenteringInfo centering(const OffspringLaw& law, const TailLaw& tail, int n) {
    if (n < 2) throw ConfigError("centering: needs n >= 2");
    const RegimeTag rt = classify_regime(law, tail.theta());
    CenteringInfo info;
    info.regime = rt.tag;
    info.theta0 = rt.theta0;

    const double a = tail.alpha();
    const double lc = std::log(tail.c());
    const double ln_n = std::log(static_cast<double>(n));

    if (rt.tag == Regime::subcritical) {
        const double th = tail.theta();
        const auto p = kappa_profile(law, th);
        info.m_n = n * p.kappa / th + (lc + a * ln_n) / th;
        return info;
    }

    if (!rt.theta0)
        throw RegimeError("centering: no critical tilt exists for this law, so the " +
                          std::string(regime_name(rt.tag)) + " form is undefined");
    const double th0 = *rt.theta0;
    const auto p0 = kappa_profile(law, th0);
    if (rt.tag == Regime::critical) {
        info.m_n = n * p0.kappa / th0 + (lc + 0.5 * a * ln_n) / th0 - ln_n / (2.0 * th0);
        if (!(a > -2.0 && a < 0.0)) {
            info.alpha_warning = true;
            info.note = "critical-regime theory covers alpha in (-2,0); value computed "
                        "outside that range is exploratory";
        }
    } else {
        info.m_n = n * p0.kappa_prime - 1.5 * ln_n / th0;
    }
    return info;
}

ExtremalSnapshot extremal_snapshot(const TreeRun& run, const PerturbLaw& nu,
                                   double w_lo, double w_hi, std::uint64_t seed) {
    if (run.pruned_any && !run.ledger.within_eps())
        throw ConfigError("snapshot: pruning bias bound " +
                          std::to_string(run.ledger.discarded_extremal_bound) +
                          " exceeds eps_prune " + std::to_string(run.ledger.eps_prune) +
                          "; the run is invalid");
    if (w_lo < run.w_lo - 1e-12 || w_hi > run.w_hi + 1e-12)
        throw WindowError("snapshot: requested window exceeds the simulated one");

    ExtremalSnapshot snap;
    snap.m_n = run.center;
    snap.w_lo = w_lo;
    snap.w_hi = w_hi;
    snap.run_seed = run.seed;
    snap.perturb_seed = seed;
    snap.extinct = run.extinct;
    for (std::size_t t = 0; t < run.thetas.size(); ++t)
        snap.w_proxies[run.thetas[t]] = run.w_tracks[t].back();
    if (run.z_theta) snap.z_proxy = run.z_track.back();
    if (!nu.is_point_mass())
        snap.regime = classify_regime(run.law, nu.tail_law().theta());

    const double neg_inf = -std::numeric_limits<double>::infinity();
    snap.raw_max_centered = neg_inf;
    snap.perturbed_max_centered = neg_inf;
    if (run.extinct || run.final_positions.empty()) return snap;

    const double m = run.center;
    snap.raw_max_centered = run.maxima.back() - m;

    const std::size_t np = run.final_positions.size();
    if (nu.is_point_mass()) {
        const double y = nu.atom();
        double best = neg_inf;
        for (std::size_t i = 0; i < np; ++i) {
            const double a = run.final_positions[i] + y - m;
            best = std::max(best, a);
            if (a >= w_lo && a <= w_hi) snap.atoms.push_back(a);
        }
        snap.perturbed_max_centered = best;
    } else {
        const TailLaw& tail = nu.tail_law();
        double best = neg_inf;
        // One uniform per particle, keyed by identity.  A particle's point can
        // reach the window floor iff its perturbation exceeds the gap below
        // the floor, i.e. iff log u <= log survival(gap); only those few need
        // the quantile solve.
        for (std::size_t i = 0; i < np; ++i) {
            Stream ps(derive_seed(seed, "engine.perturb", run.final_ids[i]));
            const double u = ps.next_unit();
            const double gap = m + w_lo - run.final_positions[i];
            if (std::log(u) > tail.log_survival(gap)) continue;
            const double a = run.final_positions[i] + tail.quantile(u) - m;
            best = std::max(best, a);
            if (a >= w_lo && a <= w_hi) snap.atoms.push_back(a);
        }
        if (best == neg_inf) {
            // Nothing reached the floor (vanishingly rare): recompute every
            // perturbation exactly so the reported max is still exact.
            for (std::size_t i = 0; i < np; ++i) {
                Stream ps(derive_seed(seed, "engine.perturb", run.final_ids[i]));
                best = std::max(best,
                                run.final_positions[i] + tail.quantile(ps.next_unit()) - m);
            }
        }
        snap.perturbed_max_centered = best;
    }
    std::sort(snap.atoms.begin(), snap.atoms.end(), std::greater<double>());
    return snap;
}

std::vector<double> perturbed_values(const TreeRun& run, const PerturbLaw& nu,
                                     std::uint64_t seed) {
    std::vector<double> vals;
    if (run.extinct) return vals;
    const double m = run.center;
    vals.reserve(run.final_positions.size());
    if (nu.is_point_mass()) {
        const double y = nu.atom();
        for (double p : run.final_positions) vals.push_back(p + y - m);
    } else {
        const TailLaw& tail = nu.tail_law();
        for (std::size_t i = 0; i < run.final_positions.size(); ++i) {
            Stream ps(derive_seed(seed, "engine.perturb", run.final_ids[i]));
            vals.push_back(run.final_positions[i] + tail.quantile(ps.next_unit()) - m);
        }
    }
    std::sort(vals.begin(), vals.end(), std::greater<double>());
    return vals;
}

LaplacePair laplace_pairing(const ExtremalSnapshot& snap, const TestFunction& phi,
                            double theta, double constant, ProxyKind proxy,
                            double safety_margin) {
    if (!phi.empty()) {
        if (phi.support_lo() - safety_margin < snap.w_lo || phi.support_hi() > snap.w_hi)
            throw WindowError(
                "laplace pairing: snapshot window must cover supp phi with " +
                std::to_string(safety_margin) + " slack below (window [" +
                std::to_string(snap.w_lo) + "," + std::to_string(snap.w_hi) + "])");
    }

    LaplacePair pair;
    for (double a : snap.atoms) pair.sum_phi += phi(a);
    pair.empirical_term = std::exp(-pair.sum_phi);

    double p = 0.0;
    if (proxy == ProxyKind::w) {
        const auto it = snap.w_proxies.find(theta);
        if (it == snap.w_proxies.end())
            throw ConfigError("laplace pairing: snapshot has no W proxy at tilt " +
                              std::to_string(theta));
        p = it->second;
    } else {
        if (!snap.z_proxy)
            throw ConfigError("laplace pairing: snapshot has no signed proxy");
        p = std::max(*snap.z_proxy, 0.0);
    }
    pair.proxy = p;
    pair.predicted_term = std::exp(-constant * c_phi(phi, theta) * p);
    return pair;
}

}  // namespace lpm
