#pragma once

// Rendering of analysis and verification results: JSON payloads, Markdown
// summaries, CSV exports, and the output-directory manifest with checksums.

#include <string>
#include <vector>

#include "json.hpp"
#include "lpm/config.hpp"
#include "lpm/cumulant.hpp"
#include "lpm/engine.hpp"
#include "lpm/spine.hpp"
#include "lpm/verify.hpp"

namespace lpm {

nlohmann::json profile_to_json(const CumulantProfile& p);
nlohmann::json regime_to_json(const RegimeTag& rt);
nlohmann::json suite_result_to_json(const TheoremSuiteResult& r);
nlohmann::json speed_result_to_json(const SpeedResult& r);
nlohmann::json stabilization_result_to_json(const StabilizationResult& r);
nlohmann::json many_to_one_to_json(const ManyToOneReport& r);
nlohmann::json ledger_to_json(const PruneLedger& l);

// Renders the human-readable summary from the JSON payload (the same one
// written to report.json), so Markdown can be regenerated from disk.
std::string result_markdown(const nlohmann::json& result, const std::string& config_hash);

// CSV headers included; floats at full round-trip precision.
std::string max_law_csv(const MaxLawResult& ml);
std::string ecdf_csv(const std::vector<double>& samples);  // rank,value,ecdf (sorted copy)
std::string speed_csv(const SpeedResult& r);
std::string snapshot_csv(const std::vector<std::vector<double>>& atom_rows);  // run,rank,centered_value

// manifest.json: config hash, version, seeds, wall clock, verdicts, and a
// checksum inventory of every file previously written under out_dir.
void write_manifest(const std::string& out_dir, const std::string& config_hash,
                    std::uint64_t seed, double wall_seconds,
                    const nlohmann::json& verdicts, const std::vector<std::string>& files);

int verdict_exit_code(Verdict v);  // pass 0, fail 1, inconclusive 3

}  // namespace lpm
