#include "mmsleep/results_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace mmsleep {

using nlohmann::json;

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_results_csv(std::ostream& out, const ExperimentResult& result) {
  out << kResultsHeader << '\n';
  for (const PolicyRun& run : result.runs) {
    for (const IterationRecord& r : run.records) {
      out << r.t << ',' << r.policy << ',' << r.action_index << ',' << format_number(r.reward_bps)
          << ',' << format_number(r.avg_tput_bps) << ',' << format_number(r.total_tput_bps) << ','
          << format_number(r.power_w) << ',' << format_number(r.ee_bpj) << ','
          << (r.epsilon ? format_number(*r.epsilon) : "") << ','
          << (r.wall_ms ? format_number(*r.wall_ms) : "") << '\n';
    }
  }
}

void write_curves_csv(std::ostream& out, const ExperimentResult& result) {
  const std::size_t w = result.config.moving_average_window;
  std::vector<std::vector<double>> ee;
  for (const PolicyRun& run : result.runs) ee.push_back(run.series(&IterationRecord::ee_bpj));
  const auto nee = normalize_ee(ee);
  out << "t,policy,reward_bps,reward_cum_mean_bps,reward_ma_bps,avg_tput_bps,"
         "avg_tput_cum_mean_bps,avg_tput_ma_bps,nee,nee_cum_mean,nee_ma\n";
  for (std::size_t p = 0; p < result.runs.size(); ++p) {
    const PolicyRun& run = result.runs[p];
    const auto reward = run.series(&IterationRecord::reward_bps);
    const auto avg = run.series(&IterationRecord::avg_tput_bps);
    const auto reward_cm = cumulative_mean(reward);
    const auto reward_ma = moving_average(reward, w);
    const auto avg_cm = cumulative_mean(avg);
    const auto avg_ma = moving_average(avg, w);
    const auto nee_cm = cumulative_mean(nee[p]);
    const auto nee_ma = moving_average(nee[p], w);
    for (std::size_t i = 0; i < run.records.size(); ++i) {
      out << run.records[i].t << ',' << run.policy << ',' << format_number(reward[i]) << ','
          << format_number(reward_cm[i]) << ',' << format_number(reward_ma[i]) << ','
          << format_number(avg[i]) << ',' << format_number(avg_cm[i]) << ','
          << format_number(avg_ma[i]) << ',' << format_number(nee[p][i]) << ','
          << format_number(nee_cm[i]) << ',' << format_number(nee_ma[i]) << '\n';
    }
  }
}

void write_regret_csv(std::ostream& out, const ExperimentResult& result) {
  out << "t,policy,optimal_bps,chosen_bps,cumulative_regret_bps\n";
  for (const PolicyRun& run : result.runs) {
    if (!run.regret) continue;
    const RegretLedger& r = *run.regret;
    for (std::size_t i = 0; i < r.cumulative.size(); ++i) {
      out << i + 1 << ',' << run.policy << ',' << format_number(r.optimal[i]) << ','
          << format_number(r.chosen[i]) << ',' << format_number(r.cumulative[i]) << '\n';
    }
  }
}

void write_sweep_csv(std::ostream& out, SweepAxis axis, const std::vector<SweepPoint>& points) {
  out << axis_name(axis)
      << ",n_actions,policy,reward_bps,avg_tput_bps,total_tput_bps,power_w,ee_bpj,nee\n";
  for (const SweepPoint& pt : points) {
    for (const SummaryRow& row : pt.rows) {
      out << format_number(pt.value) << ',' << pt.n_actions << ',' << row.policy << ','
          << format_number(row.reward_bps) << ',' << format_number(row.avg_tput_bps) << ','
          << format_number(row.total_tput_bps) << ',' << format_number(row.power_w) << ','
          << format_number(row.ee_bpj) << ',' << format_number(row.nee) << '\n';
    }
  }
}

json summary_rows_json(const std::vector<SummaryRow>& rows) {
  json arr = json::array();
  for (const SummaryRow& r : rows) {
    json o = {{"policy", r.policy},
              {"reward_bps", r.reward_bps},
              {"avg_tput_bps", r.avg_tput_bps},
              {"total_tput_bps", r.total_tput_bps},
              {"power_w", r.power_w},
              {"ee_bpj", r.ee_bpj},
              {"nee", r.nee},
              {"cumulative_reward_bps", r.cumulative_reward_bps},
              {"discounted_reward_bps", r.discounted_reward_bps}};
    if (r.regret_total) o["regret_total_bps"] = *r.regret_total;
    arr.push_back(std::move(o));
  }
  return arr;
}

json summary_json(const ExperimentResult& result) {
  return {{"format", "mmsleep-summary"},
          {"version", 1},
          {"config", to_json(result.config)},
          {"service_area_points", result.service_area_size},
          {"candidates", result.candidate_count},
          {"reduced_candidates", result.reduced_count},
          {"sites", result.site_choice},
          {"sleeping_per_action", result.k_off},
          {"actions", result.n_actions},
          {"statistic", "mean over the final half of the iterations"},
          {"policies", summary_rows_json(summarize(result))}};
}

json manifest_json(const ExperimentConfig& config, const std::string& command,
                   const std::vector<std::string>& artifacts) {
  return {{"format", "mmsleep-manifest"},
          {"version", 1},
          {"tool_version", kVersion},
          {"command", command},
          {"config_version", kConfigVersion},
          {"results_header", kResultsHeader},
          {"seeds",
           {{"scene", config.seeds.scene},
            {"ue", config.seeds.ue},
            {"agent", config.seeds.agent},
            {"nn", config.seeds.nn}}},
          {"artifacts", artifacts},
          {"config", to_json(config)}};
}

std::string plot_script(const std::string& curves_file) {
  std::string s = R"(import csv
import sys
from collections import defaultdict

import matplotlib.pyplot as plt

path = sys.argv[1] if len(sys.argv) > 1 else "@CURVES@"
cols = defaultdict(lambda: defaultdict(list))
with open(path, newline="") as f:
    for row in csv.DictReader(f):
        for key, value in row.items():
            if key != "policy":
                cols[row["policy"]][key].append(float(value))

panels = [
    ("avg_tput_cum_mean_bps", "average cumulative throughput [Mbps]", 1e-6),
    ("reward_cum_mean_bps", "10th-percentile throughput [Mbps]", 1e-6),
    ("nee_ma", "normalized energy efficiency", 1.0),
]
fig, axes = plt.subplots(1, len(panels), figsize=(5 * len(panels), 4))
for ax, (key, label, scale) in zip(axes, panels):
    for policy, c in cols.items():
        ax.plot(c["t"], [v * scale for v in c[key]], label=policy)
    ax.set_xlabel("iteration")
    ax.set_ylabel(label)
    ax.grid(True, alpha=0.3)
axes[0].legend()
fig.tight_layout()
fig.savefig(path.rsplit(".", 1)[0] + ".png", dpi=150)
)";
  const std::string token = "@CURVES@";
  s.replace(s.find(token), token.size(), curves_file);
  return s;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

void write_json(const std::filesystem::path& path, const json& j) {
  write_text(path, j.dump(2) + "\n");
}

}  // namespace mmsleep
