#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "cpbis/config.hpp"
#include "cpbis/eval.hpp"
#include "cpbis/screening.hpp"

namespace cpbis {

using Json = nlohmann::ordered_json;

Json to_json(const DistributionPoint& p);
Json to_json(const CandidatePair& pair);
Json to_json(const CpbisReport& report, const RunConfig& config);
Json to_json(const TrialReport& report, const RunConfig& config);
Json config_echo(const RunConfig& config);

// Plain-text summary for the terminal.
std::string summarize(const CpbisReport& report, const RunConfig& config);
std::string summarize(const TrialReport& report);

void write_points_csv(const std::vector<DistributionPoint>& points, const std::filesystem::path& path);
void write_pairs_csv(const std::vector<CandidatePair>& pairs, const std::filesystem::path& path);
// schedule,scan_mode,success_rate,mean_latency_s,n; weighted rows use scan_mode "weighted".
void write_trials_csv(const TrialReport& report, const std::filesystem::path& path);
void write_json(const Json& json, const std::filesystem::path& path);

}  // namespace cpbis
