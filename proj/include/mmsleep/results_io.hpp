#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mmsleep/harness.hpp"

namespace mmsleep {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kResultsHeader =
    "t,policy,action_index,reward_bps,avg_tput_bps,total_tput_bps,power_w,ee_bpj,epsilon,wall_ms";

/// Shortest decimal text that parses back to the same double.
std::string format_number(double v);

void write_results_csv(std::ostream& out, const ExperimentResult& result);
/// Per-iteration, cumulative-mean and moving-average variants of the reward,
/// average throughput and NEE, one row per (policy, t).
void write_curves_csv(std::ostream& out, const ExperimentResult& result);
void write_regret_csv(std::ostream& out, const ExperimentResult& result);
void write_sweep_csv(std::ostream& out, SweepAxis axis, const std::vector<SweepPoint>& points);

nlohmann::json summary_rows_json(const std::vector<SummaryRow>& rows);
nlohmann::json summary_json(const ExperimentResult& result);
nlohmann::json manifest_json(const ExperimentConfig& config, const std::string& command,
                             const std::vector<std::string>& artifacts);

/// Matplotlib script that redraws the curves from curves.csv.
std::string plot_script(const std::string& curves_file);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace mmsleep
