#include "lpm/spine.hpp"

#include <cmath>
#include <vector>

#include "lpm/cumulant.hpp"
#include "lpm/errors.hpp"
#include "lpm/stats.hpp"

namespace lpm {

namespace {

constexpr std::uint64_t kRootId = 0x243f6a8885a308d3ULL;

struct TreeSide {
    const OffspringLaw& law;
    double theta;
    double kappa;
    int n;
    const std::function<double(const std::vector<double>&)>& f;
    std::uint64_t repro_base;
    std::vector<double> path;
    double acc = 0.0;

    void walk(std::uint64_t id, double pos, int depth) {
        if (depth == n) {
            acc += std::exp(theta * pos - n * kappa) * f(path);
            return;
        }
        Stream s(rng::mix64(repro_base ^ id));
        const std::uint64_t cnt = law.count.sample(s);
        for (std::uint64_t j = 0; j < cnt; ++j) {
            const double cpos = pos + law.displacement.sample(s);
            path[static_cast<std::size_t>(depth)] = cpos;
            walk(rng::mix64(id + rng::kGolden * (j + 1)), cpos, depth + 1);
        }
    }
};

}  // namespace

double spine_step(const OffspringLaw& law, double theta, Stream& rng) {
    if (!(theta > 0.0)) throw DomainError("spine_step: theta must be positive");
    return law.displacement.tilted_sample(rng, theta);
}

ManyToOneReport many_to_one_check(const OffspringLaw& law, double theta, int n,
                                  const std::function<double(const std::vector<double>&)>& f,
                                  std::uint64_t tree_runs, std::uint64_t spine_runs,
                                  std::uint64_t seed) {
    if (n < 1) throw ConfigError("many_to_one_check: n must be >= 1");
    if (n > 12)
        throw BudgetError("many_to_one_check: exact tree side is limited to n <= 12");
    const double kappa = kappa_profile(law, theta).kappa;

    std::vector<double> lhs_vals;
    lhs_vals.reserve(tree_runs);
    for (std::uint64_t r = 0; r < tree_runs; ++r) {
        TreeSide side{law, theta, kappa, n, f,
                      derive_seed(derive_seed(seed, "m2o.tree", r), "engine.repro", 0),
                      std::vector<double>(static_cast<std::size_t>(n)), 0.0};
        side.walk(kRootId, 0.0, 0);
        lhs_vals.push_back(side.acc);
    }

    std::vector<double> rhs_vals;
    rhs_vals.reserve(spine_runs);
    std::vector<double> path(static_cast<std::size_t>(n));
    for (std::uint64_t r = 0; r < spine_runs; ++r) {
        Stream s(derive_seed(seed, "m2o.spine", r));
        double pos = 0.0;
        for (int k = 0; k < n; ++k) {
            pos += spine_step(law, theta, s);
            path[static_cast<std::size_t>(k)] = pos;
        }
        rhs_vals.push_back(f(path));
    }

    const MeanSe lhs = mean_se(lhs_vals);
    const MeanSe rhs = mean_se(rhs_vals);
    ManyToOneReport rep;
    rep.lhs = lhs.mean;
    rep.lhs_se = lhs.se;
    rep.rhs = rhs.mean;
    rep.rhs_se = rhs.se;
    const double pooled = std::sqrt(lhs.se * lhs.se + rhs.se * rhs.se);
    rep.z = pooled > 0.0 ? (lhs.mean - rhs.mean) / pooled : 0.0;
    rep.tree_runs = tree_runs;
    rep.spine_runs = spine_runs;
    return rep;
}

}  // namespace lpm
