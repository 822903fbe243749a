#include "mmsleep/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#include "mmsleep/context.hpp"
#include "mmsleep/errors.hpp"
#include "mmsleep/radio.hpp"
#include "mmsleep/random.hpp"
#include "mmsleep/scene_io.hpp"

namespace mmsleep {

namespace {

constexpr std::uint64_t kSiteStream = 0x517e5;
constexpr std::uint64_t kPoolStream = 0x9001;

double mean_of_tail(std::span<const double> v, std::size_t from) {
  if (from >= v.size()) return 0.0;
  double s = 0.0;
  for (std::size_t i = from; i < v.size(); ++i) s += v[i];
  return s / static_cast<double>(v.size() - from);
}

}  // namespace

Scene make_scene(const ExperimentConfig& config) {
  if (config.scene.file) return load_scene(*config.scene.file);
  SceneParams p = config.scene.generate;
  p.seed = config.seeds.scene;
  return generate_scene(p);
}

Environment prepare_environment(const ExperimentConfig& config) {
  validate(config);
  Scene scene = make_scene(config);
  if (config.ue_count > scene.service_area_size()) {
    throw InfeasibleError("ue_count " + std::to_string(config.ue_count) +
                          " exceeds service-area size " +
                          std::to_string(scene.service_area_size()));
  }
  std::vector<GridPoint3D> candidates = enumerate_candidates(scene);
  CandidateSet set = reduce_candidates(scene, candidates);
  const std::size_t n_r = set.reduced.size();
  if (config.n_bs > n_r) {
    throw InfeasibleError("n_bs " + std::to_string(config.n_bs) + " exceeds reduced candidate count " +
                          std::to_string(n_r));
  }
  // Partial Fisher-Yates over the reduced set.
  std::vector<std::size_t> order(n_r);
  std::iota(order.begin(), order.end(), 0);
  Rng rng = make_rng(config.seeds.scene, kSiteStream);
  for (std::size_t i = 0; i < config.n_bs; ++i) {
    const std::size_t j = std::uniform_int_distribution<std::size_t>(i, n_r - 1)(rng);
    std::swap(order[i], order[j]);
  }
  order.resize(config.n_bs);
  std::vector<GridPoint3D> sites;
  sites.reserve(order.size());
  for (std::size_t r : order) sites.push_back(set.candidates[set.reduced[r]]);
  return Environment{std::move(scene), std::move(set), std::move(order), std::move(sites)};
}

std::vector<GridPoint3D> draw_ues(const Scene& scene, std::size_t ue_count, std::uint64_t ue_seed,
                                  std::uint64_t snapshot) {
  const auto& sa = scene.sa_points();
  const std::size_t m = sa.size();
  if (ue_count > m) throw InfeasibleError("more UEs than service-area points");
  // Floyd's sampling of ue_count distinct indices; output in draw order.
  Rng rng = make_rng(ue_seed, snapshot);
  std::unordered_set<std::size_t> chosen;
  std::vector<std::size_t> picked;
  picked.reserve(ue_count);
  for (std::size_t j = m - ue_count; j < m; ++j) {
    const std::size_t r = std::uniform_int_distribution<std::size_t>(0, j)(rng);
    const std::size_t pick = chosen.insert(r).second ? r : j;
    if (pick == j) chosen.insert(j);
    picked.push_back(pick);
  }
  std::vector<GridPoint3D> out;
  out.reserve(ue_count);
  for (std::size_t i : picked) out.push_back(sa[i]);
  return out;
}

std::uint64_t snapshot_for(const ExperimentConfig& config, std::size_t t) {
  if (config.ue_snapshot_pool == 0) return t;
  Rng rng = make_rng(mix_seed(config.seeds.ue, kPoolStream), t);
  return std::uniform_int_distribution<std::uint64_t>(0, config.ue_snapshot_pool - 1)(rng);
}

std::unique_ptr<Agent> make_agent(const std::string& policy, const ExperimentConfig& config,
                                  const ActionSpace& space, std::size_t context_size) {
  const AgentParams& a = config.agents;
  if (policy == "allon") return std::make_unique<AllOnAgent>();
  if (policy == "random") return std::make_unique<RandomAgent>(space.size(), config.seeds.agent);
  if (policy == "ucb") {
    return std::make_unique<UcbAgent>(space.size(), a.ucb_delta, a.bandit_reward_scale);
  }
  if (policy == "greedy") {
    return std::make_unique<EpsilonGreedyAgent>(space.size(), a.greedy_epsilon, config.seeds.agent,
                                                a.bandit_reward_scale);
  }
  if (policy == "load") return std::make_unique<LoadBasedAgent>(space);
  if (policy == "cmab") {
    return std::make_unique<CmabAgent>(a.cmab, context_size, space.size(), config.seeds.agent,
                                       config.seeds.nn);
  }
  throw ConfigError("unknown policy '" + policy + "'");
}

std::vector<double> PolicyRun::series(double IterationRecord::*field) const {
  std::vector<double> out;
  out.reserve(records.size());
  for (const IterationRecord& r : records) out.push_back(r.*field);
  return out;
}

const PolicyRun& ExperimentResult::run(const std::string& policy) const {
  for (const PolicyRun& r : runs) {
    if (r.policy == policy) return r;
  }
  throw std::out_of_range("no run for policy '" + policy + "'");
}

ExperimentResult run_experiment(const ExperimentConfig& config, const ProgressFn& progress) {
  const Environment env = prepare_environment(config);
  return run_experiment(config, env, progress);
}

ExperimentResult run_experiment(const ExperimentConfig& config, const Environment& env,
                                const ProgressFn& progress) {
  using Clock = std::chrono::steady_clock;
  validate(config);
  if (env.sites.size() != config.n_bs) {
    throw InfeasibleError("environment has " + std::to_string(env.sites.size()) +
                          " sites but n_bs is " + std::to_string(config.n_bs));
  }
  const Scene& scene = env.scene;
  if (config.ue_count > scene.service_area_size()) {
    throw InfeasibleError("ue_count exceeds service-area size");
  }
  const ActionSpace space(config.n_bs, config.alpha_off, config.action_cap);
  if (config.regret && space.size() > config.regret_cap) {
    throw DiagnosticDisabled("regret diagnostic disabled: " + std::to_string(space.size()) +
                             " actions exceed cap " + std::to_string(config.regret_cap));
  }
  const std::size_t context_size = 3 * config.k_clusters;

  ExperimentResult result;
  result.config = config;
  result.service_area_size = scene.service_area_size();
  result.candidate_count = env.candidates.candidates.size();
  result.reduced_count = env.candidates.reduced.size();
  result.site_choice = env.site_choice;
  result.k_off = space.k_off();
  result.n_actions = space.size();
  result.all_on_reward_bps.reserve(config.iterations);
  result.all_on_power_w.reserve(config.iterations);

  std::vector<std::unique_ptr<Agent>> agents;
  for (const std::string& p : config.policies) {
    agents.push_back(make_agent(p, config, space, context_size));
    PolicyRun run;
    run.policy = p;
    run.records.reserve(config.iterations);
    if (config.regret && p != "allon") run.regret.emplace();
    result.runs.push_back(std::move(run));
  }

  std::vector<double> action_rewards;
  for (std::size_t t = 1; t <= config.iterations; ++t) {
    const std::uint64_t snap = snapshot_for(config, t);
    const std::vector<GridPoint3D> ues = draw_ues(scene, config.ue_count, config.seeds.ue, snap);
    const ContextVector context =
        build_context(ues, config.k_clusters, scene.extent().x, scene.extent().y,
                      mix_seed(config.seeds.ue, snap), config.kmeans_max_iters);
    const LinkGeometry geometry = compute_link_geometry(scene, env.sites, ues, config.radio);
    const LinkReport all_on = evaluate_links(geometry, space.all_on(), config.radio, config.power);
    result.all_on_reward_bps.push_back(all_on.p10_throughput_bps);
    result.all_on_power_w.push_back(all_on.total_power_w);

    if (config.regret) {
      action_rewards.assign(space.size(), 0.0);
      for (std::size_t a = 0; a < space.size(); ++a) {
        action_rewards[a] =
            evaluate_links(geometry, space.mask(a), config.radio, config.power).p10_throughput_bps;
      }
    }

    for (std::size_t p = 0; p < agents.size(); ++p) {
      Agent& agent = *agents[p];
      PolicyRun& run = result.runs[p];
      const auto start = Clock::now();
      const std::size_t action = agent.select(Decision{context, t, &all_on});

      IterationRecord rec;
      rec.t = t;
      rec.policy = run.policy;
      const LinkReport* report = &all_on;
      LinkReport own;
      if (action == kAllOnAction) {
        if (run.policy != "allon") {
          throw ConstraintViolation(run.policy + " chose the all-on mask at t=" + std::to_string(t));
        }
      } else {
        if (action >= space.size()) {
          throw ConstraintViolation(run.policy + " chose out-of-range action " +
                                    std::to_string(action));
        }
        const ActionMask& mask = space.mask(action);
        const auto asleep = static_cast<std::size_t>(std::count(mask.begin(), mask.end(), 0));
        if (asleep != space.k_off()) {
          throw ConstraintViolation(run.policy + " slept " + std::to_string(asleep) + " of " +
                                    std::to_string(config.n_bs) + " BSs at t=" + std::to_string(t) +
                                    ", expected " + std::to_string(space.k_off()));
        }
        own = evaluate_links(geometry, mask, config.radio, config.power);
        report = &own;
        rec.action_index = static_cast<std::int64_t>(action);
        rec.sleeping = asleep;
      }
      rec.reward_bps = report->p10_throughput_bps;
      rec.avg_tput_bps = report->avg_throughput_bps;
      rec.total_tput_bps = report->total_throughput_bps;
      rec.power_w = report->total_power_w;
      rec.ee_bpj = report->energy_efficiency_bpj;

      if (action != kAllOnAction) agent.observe(Feedback{context, action, rec.reward_bps, t});
      rec.epsilon = agent.epsilon();
      if (config.record_wall_time) {
        rec.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
      }
      if (run.regret) {
        record_regret(*run.regret, action_rewards, action == kAllOnAction ? all_on.p10_throughput_bps
                                                                          : rec.reward_bps);
      }
      run.records.push_back(std::move(rec));
    }
    if (progress) progress(t, config.iterations);
  }
  return result;
}

std::vector<double> moving_average(std::span<const double> series, std::size_t window) {
  if (window == 0) throw std::invalid_argument("moving_average: window must be >= 1");
  std::vector<double> out(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    const std::size_t first = i + 1 - std::min(window, i + 1);
    // Incremental mean: a constant window yields the constant exactly.
    double m = 0.0;
    for (std::size_t k = first; k <= i; ++k) m += (series[k] - m) / static_cast<double>(k - first + 1);
    out[i] = m;
  }
  return out;
}

std::vector<double> cumulative_mean(std::span<const double> series) {
  std::vector<double> out(series.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    sum += series[i];
    out[i] = sum / static_cast<double>(i + 1);
  }
  return out;
}

std::vector<std::vector<double>> normalize_ee(const std::vector<std::vector<double>>& ee) {
  double best = 0.0;
  for (const auto& s : ee) {
    for (double v : s) best = std::max(best, v);
  }
  if (!(best > 0.0) || !std::isfinite(best)) {
    throw std::domain_error("normalize_ee: reference energy efficiency is zero");
  }
  std::vector<std::vector<double>> out(ee.size());
  for (std::size_t p = 0; p < ee.size(); ++p) {
    out[p].reserve(ee[p].size());
    for (double v : ee[p]) out[p].push_back(v / best);
  }
  return out;
}

std::vector<SummaryRow> summarize(const ExperimentResult& result) {
  std::vector<std::vector<double>> ee;
  for (const PolicyRun& r : result.runs) ee.push_back(r.series(&IterationRecord::ee_bpj));
  const auto nee = normalize_ee(ee);

  std::vector<SummaryRow> rows;
  for (std::size_t p = 0; p < result.runs.size(); ++p) {
    const PolicyRun& run = result.runs[p];
    const std::size_t n = run.records.size();
    const std::size_t from = n / 2;
    SummaryRow row;
    row.policy = run.policy;
    row.reward_bps = mean_of_tail(run.series(&IterationRecord::reward_bps), from);
    row.avg_tput_bps = mean_of_tail(run.series(&IterationRecord::avg_tput_bps), from);
    row.total_tput_bps = mean_of_tail(run.series(&IterationRecord::total_tput_bps), from);
    row.power_w = mean_of_tail(run.series(&IterationRecord::power_w), from);
    row.ee_bpj = mean_of_tail(ee[p], from);
    row.nee = mean_of_tail(nee[p], from);
    double discount = 1.0;
    for (const IterationRecord& r : run.records) {
      row.cumulative_reward_bps += r.reward_bps;
      row.discounted_reward_bps += discount * r.reward_bps;
      discount *= result.config.discount;
    }
    if (run.regret) row.regret_total = run.regret->total();
    rows.push_back(std::move(row));
  }
  return rows;
}

std::optional<SweepAxis> parse_axis(const std::string& name) {
  if (name == "ue" || name == "ue_count" || name == "users") return SweepAxis::UeCount;
  if (name == "alpha" || name == "alpha_off") return SweepAxis::AlphaOff;
  return std::nullopt;
}

std::string axis_name(SweepAxis axis) {
  return axis == SweepAxis::UeCount ? "ue_count" : "alpha_off";
}

namespace {

template <class E>
[[noreturn]] void rethrow_as(const E& e, const std::string& where) {
  throw E(where + ": " + e.what());
}

}  // namespace

std::vector<SweepPoint> sweep(const ExperimentConfig& config, SweepAxis axis,
                              const std::vector<double>& values,
                              const std::function<void(const ExperimentResult&)>& on_point) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  validate(config);
  // The scene and site draw do not depend on either axis, so one environment
  // serves every point.
  std::optional<Environment> env;
  std::vector<SweepPoint> points;
  for (double v : values) {
    ExperimentConfig c = config;
    const std::string where = "sweep point " + axis_name(axis) + "=" + std::to_string(v);
    try {
      if (axis == SweepAxis::UeCount) {
        if (!(v >= 1.0) || v != std::floor(v)) throw ConfigError("ue_count must be a positive integer");
        c.ue_count = static_cast<std::size_t>(v);
      } else {
        c.alpha_off = v;
      }
      if (!env) env.emplace(prepare_environment(c));
      ExperimentResult r = run_experiment(c, *env);
      SweepPoint point;
      point.value = v;
      point.n_actions = r.n_actions;
      point.rows = summarize(r);
      if (on_point) on_point(r);
      points.push_back(std::move(point));
    } catch (const InfeasibleError& e) {
      rethrow_as(e, where);
    } catch (const ActionSpaceTooLarge& e) {
      rethrow_as(e, where);
    } catch (const DiagnosticDisabled& e) {
      rethrow_as(e, where);
    } catch (const ConfigError& e) {
      rethrow_as(e, where);
    } catch (const ConstraintViolation& e) {
      rethrow_as(e, where);
    } catch (const Error& e) {
      rethrow_as(e, where);
    }
  }
  return points;
}

}  // namespace mmsleep
