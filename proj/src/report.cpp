#include "lpm/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "lpm/errors.hpp"
#include "lpm/sha256.hpp"

namespace lpm {

namespace {

using nlohmann::json;

constexpr const char* kToolVersion = "0.1.0";

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

// Full round-trip precision for CSV payloads.
std::string num(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

json mean_se_to_json(const MeanSe& m) {
    return json{{"mean", m.mean}, {"se", m.se}, {"n", m.n}};
}

}  // namespace

json profile_to_json(const CumulantProfile& p) {
    return json{{"theta", p.theta},
                {"kappa", p.kappa},
                {"kappa_prime", p.kappa_prime},
                {"kappa_double_prime", p.kappa_double_prime},
                {"gap", p.gap}};
}

json regime_to_json(const RegimeTag& rt) {
    json j{{"regime", regime_name(rt.tag)},
           {"theta_nu", rt.theta_nu},
           {"predicted_speed", rt.predicted_speed},
           {"gap_at_theta_nu", rt.gap_at_theta_nu}};
    if (rt.theta0) j["theta0"] = *rt.theta0;
    return j;
}

json ledger_to_json(const PruneLedger& l) {
    json weights = json::array();
    for (const auto& [theta, w] : l.discarded_weight)
        weights.push_back(json{{"theta", theta}, {"weight", w}});
    return json{{"discarded_weight", weights},
                {"discarded_extremal_bound", l.discarded_extremal_bound},
                {"count_pruned", l.count_pruned},
                {"eps_prune", l.eps_prune}};
}

json suite_result_to_json(const TheoremSuiteResult& r) {
    json j;
    j["suite"] = "laplace";
    j["target"] = json{{"theorem", theorem_name(r.target.id)},
                       {"theta", r.target.theta},
                       {"constant", r.target.constant},
                       {"proxy", !r.target.proxy            ? "none"
                                 : *r.target.proxy == ProxyKind::w ? "W"
                                                                   : "Z"},
                       {"regime", regime_name(r.target.regime)}};
    if (r.target.theta0) j["target"]["theta0"] = *r.target.theta0;
    j["n"] = r.n;
    j["runs"] = r.runs;
    j["tol_abs"] = r.tol_abs;
    j["m_n"] = r.m_n;
    j["extinct_runs"] = r.extinct_runs;
    j["dropped_runs"] = r.dropped_runs;
    j["phis"] = json::array();
    for (const PhiResult& p : r.phis) {
        j["phis"].push_back(json{{"phi", p.phi},
                                 {"c_phi", p.c_phi},
                                 {"empirical", mean_se_to_json(p.empirical)},
                                 {"predicted", mean_se_to_json(p.predicted)},
                                 {"paired_diff", mean_se_to_json(p.paired_diff)},
                                 {"ci_width", p.ci_width},
                                 {"z", p.z},
                                 {"moment_ratio", p.moment_ratio},
                                 {"verdict", verdict_name(p.verdict)}});
    }
    if (r.max_law) {
        j["max_law"] = json{{"sup_distance", r.max_law->sup_distance},
                            {"tol", r.max_law->tol},
                            {"grid_points", r.max_law->grid.size()},
                            {"verdict", verdict_name(r.max_law->verdict)}};
    }
    if (r.control) {
        json verdicts = json::array();
        for (Verdict v : r.control->phi_verdicts) verdicts.push_back(verdict_name(v));
        j["control"] = json{{"shift", r.control->shift},
                            {"runs", r.control->runs},
                            {"phi_verdicts", verdicts},
                            {"failed_as_expected", r.control->failed_as_expected}};
    }
    j["overall"] = verdict_name(r.overall);
    return j;
}

json speed_result_to_json(const SpeedResult& r) {
    json pts = json::array();
    for (const SpeedPoint& p : r.points)
        pts.push_back(json{{"n", p.n},
                           {"pmax", mean_se_to_json(p.pmax)},
                           {"log_term", p.log_term}});
    json j{{"suite", "speed"},
           {"points", pts},
           {"predicted_speed", r.predicted_speed},
           {"raw_slope", r.raw_slope},
           {"corrected_slope", r.corrected_slope},
           {"rel_err_raw", r.rel_err_raw},
           {"rel_err_corrected", r.rel_err_corrected}};
    if (r.regime) j["regime"] = regime_name(*r.regime);
    return j;
}

json stabilization_result_to_json(const StabilizationResult& r) {
    return json{{"suite", "stabilization"},
                {"n_lo", r.n_lo},
                {"n_hi", r.n_hi},
                {"runs_lo", r.runs_lo},
                {"runs_hi", r.runs_hi},
                {"dropped_runs", r.dropped_runs},
                {"ks", r.ks},
                {"critical_value", r.critical_value},
                {"control_ks", r.control_ks},
                {"control_above", r.control_above},
                {"verdict", verdict_name(r.verdict)}};
}

json many_to_one_to_json(const ManyToOneReport& r) {
    return json{{"lhs", r.lhs},       {"lhs_se", r.lhs_se},
                {"rhs", r.rhs},       {"rhs_se", r.rhs_se},
                {"z", r.z},           {"tree_runs", r.tree_runs},
                {"spine_runs", r.spine_runs}};
}

namespace {

std::string laplace_markdown(const json& r, const std::string& config_hash) {
    std::ostringstream md;
    md << "# Laplace-functional verification ("
       << r.at("target").at("theorem").get<std::string>() << ")\n\n";
    md << "- config: `" << config_hash << "`\n";
    md << "- regime: " << r.at("target").at("regime").get<std::string>()
       << ", analysis tilt " << fmt("%.10g", r.at("target").at("theta").get<double>())
       << ", constant " << fmt("%.10g", r.at("target").at("constant").get<double>()) << "\n";
    md << "- generations: " << r.at("n").get<int>() << ", runs: "
       << r.at("runs").get<std::uint64_t>() << ", centering "
       << fmt("%.10g", r.at("m_n").get<double>()) << "\n";
    md << "- tolerance (|paired diff|): " << fmt("%.4g", r.at("tol_abs").get<double>())
       << "\n";
    if (r.at("extinct_runs").get<std::uint64_t>())
        md << "- extinct runs: " << r.at("extinct_runs").get<std::uint64_t>() << "\n";
    if (r.at("dropped_runs").get<std::uint64_t>())
        md << "- dropped runs (budget overrun): " << r.at("dropped_runs").get<std::uint64_t>()
           << "\n";
    md << "\n| test function | empirical | predicted | paired diff | CI width | verdict |\n";
    md << "|---|---|---|---|---|---|\n";
    for (const json& p : r.at("phis"))
        md << "| " << p.at("phi").get<std::string>() << " | "
           << fmt("%.5f", p.at("empirical").at("mean").get<double>()) << " ± "
           << fmt("%.5f", 1.96 * p.at("empirical").at("se").get<double>()) << " | "
           << fmt("%.5f", p.at("predicted").at("mean").get<double>()) << " ± "
           << fmt("%.5f", 1.96 * p.at("predicted").at("se").get<double>()) << " | "
           << fmt("%+.5f", p.at("paired_diff").at("mean").get<double>()) << " | "
           << fmt("%.5f", p.at("ci_width").get<double>()) << " | "
           << p.at("verdict").get<std::string>() << " |\n";
    if (r.contains("max_law"))
        md << "\nCentered-maximum law: sup distance "
           << fmt("%.5f", r.at("max_law").at("sup_distance").get<double>())
           << " vs tolerance " << fmt("%.4g", r.at("max_law").at("tol").get<double>())
           << " -> " << r.at("max_law").at("verdict").get<std::string>() << "\n";
    if (r.contains("control"))
        md << "\nNegative control (centering shifted by "
           << fmt("%.3g", r.at("control").at("shift").get<double>()) << ", "
           << r.at("control").at("runs").get<std::uint64_t>() << " runs): "
           << (r.at("control").at("failed_as_expected").get<bool>()
                   ? "failed as expected"
                   : "DID NOT FAIL (suite invalid)")
           << "\n";
    md << "\nOverall: **" << r.at("overall").get<std::string>() << "**\n";
    return md.str();
}

std::string speed_markdown(const json& r, const std::string& config_hash) {
    std::ostringstream md;
    md << "# Front-speed regression\n\n- config: `" << config_hash << "`\n";
    if (r.contains("regime")) md << "- regime: " << r.at("regime").get<std::string>() << "\n";
    md << "- predicted speed: " << fmt("%.10g", r.at("predicted_speed").get<double>())
       << "\n\n";
    md << "| n | mean perturbed max | se | log term |\n|---|---|---|---|\n";
    for (const json& p : r.at("points"))
        md << "| " << p.at("n").get<int>() << " | "
           << fmt("%.6f", p.at("pmax").at("mean").get<double>()) << " | "
           << fmt("%.6f", p.at("pmax").at("se").get<double>()) << " | "
           << fmt("%.6f", p.at("log_term").get<double>()) << " |\n";
    md << "\nraw slope " << fmt("%.6f", r.at("raw_slope").get<double>()) << " (rel err "
       << fmt("%.4f", r.at("rel_err_raw").get<double>()) << "), corrected slope "
       << fmt("%.6f", r.at("corrected_slope").get<double>()) << " (rel err "
       << fmt("%.4f", r.at("rel_err_corrected").get<double>()) << ")\n";
    if (r.contains("verdict"))
        md << "\nOverall: **" << r.at("verdict").get<std::string>() << "**\n";
    return md.str();
}

std::string stabilization_markdown(const json& r, const std::string& config_hash) {
    std::ostringstream md;
    md << "# Distributional stabilization\n\n- config: `" << config_hash << "`\n";
    md << "- samples: " << r.at("runs_lo").get<std::uint64_t>() << " at n="
       << r.at("n_lo").get<int>() << ", " << r.at("runs_hi").get<std::uint64_t>()
       << " at n=" << r.at("n_hi").get<int>() << "\n";
    if (r.at("dropped_runs").get<std::uint64_t>())
        md << "- dropped runs: " << r.at("dropped_runs").get<std::uint64_t>() << "\n";
    md << "\nKS(n=" << r.at("n_lo").get<int>() << " vs n=" << r.at("n_hi").get<int>()
       << ") = " << fmt("%.5f", r.at("ks").get<double>()) << " vs critical value "
       << fmt("%.5f", r.at("critical_value").get<double>()) << "\n";
    md << "Control without the log correction: KS = "
       << fmt("%.5f", r.at("control_ks").get<double>()) << " ("
       << (r.at("control_above").get<bool>() ? "above" : "NOT above")
       << " the critical value)\n";
    md << "\nOverall: **" << r.at("verdict").get<std::string>() << "**\n";
    return md.str();
}

std::string many_to_one_markdown(const json& r, const std::string& config_hash) {
    std::ostringstream md;
    md << "# Many-to-one identity check\n\n- config: `" << config_hash << "`\n\n";
    md << "| seed | tree side | spine side | z | within 3 sigma |\n|---|---|---|---|---|\n";
    for (const json& c : r.at("cases"))
        md << "| " << c.at("seed").get<std::uint64_t>() << " | "
           << fmt("%.6f", c.at("lhs").get<double>()) << " ± "
           << fmt("%.6f", c.at("lhs_se").get<double>()) << " | "
           << fmt("%.6f", c.at("rhs").get<double>()) << " ± "
           << fmt("%.6f", c.at("rhs_se").get<double>()) << " | "
           << fmt("%+.3f", c.at("z").get<double>()) << " | "
           << (c.at("pass").get<bool>() ? "yes" : "no") << " |\n";
    md << "\n" << r.at("passed").get<int>() << " of " << r.at("total").get<int>()
       << " seeds within 3 sigma\n";
    md << "\nOverall: **" << r.at("verdict").get<std::string>() << "**\n";
    return md.str();
}

}  // namespace

std::string result_markdown(const json& result, const std::string& config_hash) {
    const std::string suite = result.at("suite").get<std::string>();
    if (suite == "laplace") return laplace_markdown(result, config_hash);
    if (suite == "speed") return speed_markdown(result, config_hash);
    if (suite == "stabilization") return stabilization_markdown(result, config_hash);
    if (suite == "many2one") return many_to_one_markdown(result, config_hash);
    throw ConfigError("report: unknown suite kind '" + suite + "' in report.json");
}

std::string max_law_csv(const MaxLawResult& ml) {
    std::ostringstream out;
    out << "x,empirical_cdf,predicted_cdf\n";
    for (std::size_t i = 0; i < ml.grid.size(); ++i)
        out << num(ml.grid[i]) << ',' << num(ml.empirical_cdf[i]) << ','
            << num(ml.predicted_cdf[i]) << '\n';
    return out.str();
}

std::string ecdf_csv(const std::vector<double>& samples) {
    std::vector<double> sorted = samples;
    std::sort(sorted.begin(), sorted.end());
    std::ostringstream out;
    out << "rank,value,ecdf\n";
    const double n = static_cast<double>(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i)
        out << i << ',' << num(sorted[i]) << ',' << num(static_cast<double>(i + 1) / n)
            << '\n';
    return out.str();
}

std::string speed_csv(const SpeedResult& r) {
    std::ostringstream out;
    out << "n,mean,se,log_term\n";
    for (const SpeedPoint& p : r.points)
        out << p.n << ',' << num(p.pmax.mean) << ',' << num(p.pmax.se) << ','
            << num(p.log_term) << '\n';
    return out.str();
}

std::string snapshot_csv(const std::vector<std::vector<double>>& atom_rows) {
    std::ostringstream out;
    out << "run,rank,centered_value\n";
    for (std::size_t r = 0; r < atom_rows.size(); ++r)
        for (std::size_t k = 0; k < atom_rows[r].size(); ++k)
            out << r << ',' << k << ',' << num(atom_rows[r][k]) << '\n';
    return out.str();
}

void write_manifest(const std::string& out_dir, const std::string& config_hash,
                    std::uint64_t seed, double wall_seconds, const json& verdicts,
                    const std::vector<std::string>& files) {
    json inventory = json::array();
    for (const std::string& rel : files)
        inventory.push_back(
            json{{"path", rel}, {"sha256", sha256_hex(read_text_file(out_dir + "/" + rel))}});
    const json manifest{{"config_hash", config_hash},
                        {"tool_version", kToolVersion},
                        {"seed", seed},
                        {"wall_clock_seconds", wall_seconds},
                        {"verdicts", verdicts},
                        {"files", inventory}};
    write_text_file(out_dir + "/manifest.json", manifest.dump(2) + "\n");
}

int verdict_exit_code(Verdict v) {
    switch (v) {
        case Verdict::pass: return 0;
        case Verdict::fail: return 1;
        case Verdict::inconclusive: return 3;
    }
    return 1;
}

}  // namespace lpm
