#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mmsleep/actions.hpp"
#include "mmsleep/agents.hpp"
#include "mmsleep/config.hpp"
#include "mmsleep/scene.hpp"

namespace mmsleep {

/// Scene, candidate reduction and the N deployed sites for one config.
struct Environment {
  Scene scene;
  CandidateSet candidates;
  // Indices into candidates.reduced, in deployment order.
  std::vector<std::size_t> site_choice;
  std::vector<GridPoint3D> sites;
};

/// Builds (or loads) the scene, reduces the candidates and samples N sites
/// with the scene seed. Throws InfeasibleError when N > N_r or U > M.
Environment prepare_environment(const ExperimentConfig& config);

/// Scene for a config: loaded from file, or generated with seeds.scene.
Scene make_scene(const ExperimentConfig& config);

/// U distinct service-area points for snapshot `snapshot`.
std::vector<GridPoint3D> draw_ues(const Scene& scene, std::size_t ue_count, std::uint64_t ue_seed,
                                  std::uint64_t snapshot);

/// Snapshot id used at iteration t (1-based): t itself, or a seeded draw from
/// the frozen pool when ue_snapshot_pool > 0.
std::uint64_t snapshot_for(const ExperimentConfig& config, std::size_t t);

std::unique_ptr<Agent> make_agent(const std::string& policy, const ExperimentConfig& config,
                                  const ActionSpace& space, std::size_t context_size);

struct IterationRecord {
  std::size_t t = 0;
  std::string policy;
  // -1 for the all-on mask.
  std::int64_t action_index = -1;
  double reward_bps = 0.0;
  double avg_tput_bps = 0.0;
  double total_tput_bps = 0.0;
  double power_w = 0.0;
  double ee_bpj = 0.0;
  std::optional<double> epsilon;
  std::optional<double> wall_ms;
  std::size_t sleeping = 0;
};

struct PolicyRun {
  std::string policy;
  std::vector<IterationRecord> records;
  std::optional<RegretLedger> regret;

  std::vector<double> series(double IterationRecord::*field) const;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::size_t service_area_size = 0;
  std::size_t candidate_count = 0;
  std::size_t reduced_count = 0;
  std::vector<std::size_t> site_choice;
  std::size_t k_off = 0;
  std::size_t n_actions = 0;
  // All-on reference per iteration.
  std::vector<double> all_on_reward_bps;
  std::vector<double> all_on_power_w;
  std::vector<PolicyRun> runs;

  const PolicyRun& run(const std::string& policy) const;
};

using ProgressFn = std::function<void(std::size_t t, std::size_t total)>;

/// Runs every configured policy over the same UE snapshots. Each sleeping
/// action is audited against the exact sleep count (ConstraintViolation on
/// failure). With config.regret set, rho* is found by evaluating every action
/// (DiagnosticDisabled above regret_cap).
ExperimentResult run_experiment(const ExperimentConfig& config, const ProgressFn& progress = {});
ExperimentResult run_experiment(const ExperimentConfig& config, const Environment& env,
                                const ProgressFn& progress = {});

/// Trailing mean over min(window, t) items. Throws on window 0.
std::vector<double> moving_average(std::span<const double> series, std::size_t window);
/// Running mean of the prefix at each position.
std::vector<double> cumulative_mean(std::span<const double> series);

/// Divides every EE value by the maximum over all series. Throws
/// std::domain_error when that maximum is not positive.
std::vector<std::vector<double>> normalize_ee(const std::vector<std::vector<double>>& ee);

struct SummaryRow {
  std::string policy;
  double reward_bps = 0.0;
  double avg_tput_bps = 0.0;
  double total_tput_bps = 0.0;
  double power_w = 0.0;
  double ee_bpj = 0.0;
  double nee = 0.0;
  double cumulative_reward_bps = 0.0;
  double discounted_reward_bps = 0.0;
  std::optional<double> regret_total;
};

/// Means over the final half of the iterations (final ceil(T/2) records).
std::vector<SummaryRow> summarize(const ExperimentResult& result);

enum class SweepAxis { UeCount, AlphaOff };

std::optional<SweepAxis> parse_axis(const std::string& name);
std::string axis_name(SweepAxis axis);

struct SweepPoint {
  double value = 0.0;
  std::size_t n_actions = 0;
  std::vector<SummaryRow> rows;
};

/// One run per value; a failing point aborts the sweep with the point named
/// in the error message (same exception type).
std::vector<SweepPoint> sweep(const ExperimentConfig& config, SweepAxis axis,
                              const std::vector<double>& values,
                              const std::function<void(const ExperimentResult&)>& on_point = {});

}  // namespace mmsleep
