// Experiment driver: parse a JSON config, run the requested pipeline, and
// persist artifacts (report.json / report.md / CSV exports) with a checksum
// manifest.  Exit codes: 0 pass, 1 fail, 2 config or domain error,
// 3 inconclusive.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lpm/config.hpp"
#include "lpm/driver.hpp"
#include "lpm/errors.hpp"
#include "lpm/parallel.hpp"
#include "lpm/report.hpp"
#include "lpm/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliOverrides {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<std::string> out;
};

lpm::RunConfig load_with_overrides(const CliOverrides& ov) {
    lpm::RunConfig cfg = lpm::load_config_file(ov.config_path);
    if (ov.seed) cfg.seed = *ov.seed;
    if (ov.out) cfg.out = *ov.out;
    if (ov.threads) {
        cfg.threads = *ov.threads;
    } else if (cfg.threads == 0) {
        if (const char* env = std::getenv("LPMBRW_THREADS")) {
            try {
                cfg.threads = std::stoi(env);
            } catch (...) {
                throw lpm::ConfigError("LPMBRW_THREADS is not an integer: " +
                                       std::string(env));
            }
        }
    }
    cfg.threads = lpm::resolve_threads(cfg.threads);
    return cfg;
}

double wall_seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void ensure_dir(const std::string& path) { fs::create_directories(path); }

// report.json is deterministic: config hash + seed + result payload only.
void write_report_files(const lpm::RunConfig& cfg, const std::string& hash,
                        const json& result, std::vector<std::string>& files) {
    const json report{{"config_hash", hash}, {"seed", cfg.seed}, {"result", result}};
    lpm::write_text_file(cfg.out + "/report.json", report.dump(2) + "\n");
    files.push_back("report.json");
    lpm::write_text_file(cfg.out + "/report.md", lpm::result_markdown(result, hash));
    files.push_back("report.md");
}

int cmd_analyze(const CliOverrides& ov) {
    const lpm::RunConfig cfg = load_with_overrides(ov);
    const json out = lpm::analyze_payload(cfg);
    const std::string hash = out.at("config_hash").get<std::string>();

    std::cout << "law: " << out.at("law").get<std::string>() << "\n";
    for (const json& p : out.at("profiles"))
        std::cout << "theta " << p.at("theta").get<double>()
                  << ": kappa=" << std::setprecision(16) << p.at("kappa").get<double>()
                  << " kappa'=" << p.at("kappa_prime").get<double>()
                  << " kappa''=" << p.at("kappa_double_prime").get<double>()
                  << " gap=" << p.at("gap").get<double>() << "\n";
    if (out.contains("theta0")) {
        std::cout << "theta0 = " << std::setprecision(16)
                  << out.at("theta0").get<double>() << "\n";
        std::cout << "speed v = " << std::setprecision(16)
                  << out.at("speed").get<double>() << "\n";
    } else {
        std::cout << "theta0: none (gap stays negative on the finite domain)\n";
    }
    if (out.contains("regime")) {
        const json& rt = out.at("regime");
        std::cout << "regime: " << rt.at("regime").get<std::string>() << " (tail theta "
                  << rt.at("theta_nu").get<double>() << ")\n";
        std::cout << "predicted speed: " << std::setprecision(16)
                  << rt.at("predicted_speed").get<double>() << "\n";
        if (out.contains("c1"))
            std::cout << "c1 = " << std::setprecision(12) << out.at("c1").get<double>()
                      << "\n";
        if (out.contains("c2"))
            std::cout << "c2 = " << std::setprecision(12) << out.at("c2").get<double>()
                      << "\n";
    }

    ensure_dir(cfg.out);
    lpm::write_text_file(cfg.out + "/analyze.json", out.dump(2) + "\n");
    lpm::write_manifest(cfg.out, hash, cfg.seed, 0.0, json{{"analyze", "ok"}},
                        {"analyze.json"});
    return 0;
}

int cmd_simulate(const CliOverrides& ov) {
    const auto t0 = std::chrono::steady_clock::now();
    const lpm::RunConfig cfg = load_with_overrides(ov);

    std::vector<std::vector<double>> atom_rows;
    const json side = lpm::simulate_payload(cfg, false, &atom_rows);
    const std::string hash = side.at("config_hash").get<std::string>();

    ensure_dir(cfg.out + "/snapshots");
    lpm::write_text_file(cfg.out + "/snapshots/snapshot.csv", lpm::snapshot_csv(atom_rows));
    lpm::write_text_file(cfg.out + "/snapshots/snapshot.json", side.dump(2) + "\n");
    lpm::write_manifest(cfg.out, hash, cfg.seed, wall_seconds_since(t0),
                        json{{"simulate", "ok"}},
                        {"snapshots/snapshot.csv", "snapshots/snapshot.json"});
    std::cout << "wrote " << cfg.runs << " run(s) to " << cfg.out << "/snapshots\n";
    return 0;
}

int cmd_verify(const CliOverrides& ov) {
    const auto t0 = std::chrono::steady_clock::now();
    const lpm::RunConfig cfg = load_with_overrides(ov);
    const std::string hash = lpm::config_hash(cfg);
    ensure_dir(cfg.out);
    std::vector<std::string> files;
    json result;
    lpm::Verdict overall = lpm::Verdict::fail;

    if (cfg.suite.kind == "laplace") {
        const lpm::TheoremSuiteResult r = lpm::theorem_suite(lpm::laplace_from_config(cfg));
        result = lpm::suite_result_to_json(r);
        overall = r.overall;
        if (r.max_law) {
            ensure_dir(cfg.out + "/ecdf");
            lpm::write_text_file(cfg.out + "/ecdf/max_law.csv", lpm::max_law_csv(*r.max_law));
            files.push_back("ecdf/max_law.csv");
        }
    } else if (cfg.suite.kind == "speed") {
        const lpm::SpeedResult r = lpm::speed_check(lpm::speed_from_config(cfg));
        result = lpm::speed_result_to_json(r);
        overall = lpm::speed_verdict(r);
        result["verdict"] = lpm::verdict_name(overall);
        lpm::write_text_file(cfg.out + "/speed.csv", lpm::speed_csv(r));
        files.push_back("speed.csv");
    } else {  // stabilization
        const lpm::StabilizationResult r =
            lpm::stabilization_check(lpm::stabilization_from_config(cfg));
        result = lpm::stabilization_result_to_json(r);
        overall = r.verdict;
        ensure_dir(cfg.out + "/ecdf");
        lpm::write_text_file(cfg.out + "/ecdf/stabilization_lo.csv",
                             lpm::ecdf_csv(r.samples_lo));
        lpm::write_text_file(cfg.out + "/ecdf/stabilization_hi.csv",
                             lpm::ecdf_csv(r.samples_hi));
        files.push_back("ecdf/stabilization_lo.csv");
        files.push_back("ecdf/stabilization_hi.csv");
    }

    write_report_files(cfg, hash, result, files);
    lpm::write_manifest(cfg.out, hash, cfg.seed, wall_seconds_since(t0),
                        json{{cfg.suite.kind, lpm::verdict_name(overall)}}, files);
    std::cout << cfg.suite.kind << ": " << lpm::verdict_name(overall) << "\n";
    return lpm::verdict_exit_code(overall);
}

int cmd_many2one(const CliOverrides& ov) {
    const auto t0 = std::chrono::steady_clock::now();
    const lpm::RunConfig cfg = load_with_overrides(ov);
    const std::string hash = lpm::config_hash(cfg);

    const json result = lpm::many_to_one_payload(cfg);
    for (const json& c : result.at("cases"))
        std::cout << "seed " << c.at("seed").get<std::uint64_t>()
                  << ": lhs=" << c.at("lhs").get<double>()
                  << " rhs=" << c.at("rhs").get<double>()
                  << " z=" << c.at("z").get<double>()
                  << (c.at("pass").get<bool>() ? " (ok)" : " (off)") << "\n";
    const lpm::Verdict overall =
        result.at("verdict") == "pass" ? lpm::Verdict::pass : lpm::Verdict::fail;

    ensure_dir(cfg.out);
    std::vector<std::string> files;
    write_report_files(cfg, hash, result, files);
    lpm::write_manifest(cfg.out, hash, cfg.seed, wall_seconds_since(t0),
                        json{{"many2one", lpm::verdict_name(overall)}}, files);
    std::cout << "many2one: " << lpm::verdict_name(overall) << " ("
              << result.at("passed").get<int>() << "/" << result.at("total").get<int>()
              << ")\n";
    return lpm::verdict_exit_code(overall);
}

int cmd_report(const CliOverrides& ov) {
    const lpm::RunConfig cfg = load_with_overrides(ov);
    const std::string path = cfg.out + "/report.json";
    json report;
    try {
        report = json::parse(lpm::read_text_file(path));
    } catch (const json::parse_error& e) {
        throw lpm::ConfigError(path + " is not valid JSON: " + e.what());
    }
    const std::string hash = report.at("config_hash").get<std::string>();
    const std::string md = lpm::result_markdown(report.at("result"), hash);
    lpm::write_text_file(cfg.out + "/report.md", md);
    std::cout << md;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Last-progeny-modified branching random walk laboratory"};
    app.require_subcommand(1);

    CliOverrides ov;
    std::uint64_t seed_flag = 0;
    int threads_flag = 0;
    std::string out_flag;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", ov.config_path, "JSON config path")->required();
        sub->add_option("--seed", seed_flag, "master seed override");
        sub->add_option("--threads", threads_flag, "worker count override");
        sub->add_option("--out", out_flag, "output directory override");
    };

    CLI::App* analyze = app.add_subcommand("analyze", "print cumulant profile, root, speed, regime");
    CLI::App* simulate = app.add_subcommand("simulate", "run trees and persist snapshots");
    CLI::App* verify = app.add_subcommand("verify", "run the configured verification suite");
    CLI::App* many2one = app.add_subcommand("many2one", "tilted-walk identity check");
    CLI::App* report = app.add_subcommand("report", "re-render report.md from report.json");
    for (CLI::App* sub : {analyze, simulate, verify, many2one, report}) add_common(sub);

    CLI11_PARSE(app, argc, argv);

    // Overrides only count when the flag was actually given; the bound
    // variables are filled in during parsing, so inspect counts afterwards.
    for (CLI::App* sub : {analyze, simulate, verify, many2one, report}) {
        if (!sub->parsed()) continue;
        if (sub->count("--seed")) ov.seed = seed_flag;
        if (sub->count("--threads")) ov.threads = threads_flag;
        if (sub->count("--out")) ov.out = out_flag;
    }

    try {
        if (analyze->parsed()) return cmd_analyze(ov);
        if (simulate->parsed()) return cmd_simulate(ov);
        if (verify->parsed()) return cmd_verify(ov);
        if (many2one->parsed()) return cmd_many2one(ov);
        if (report->parsed()) return cmd_report(ov);
    } catch (const lpm::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
