// mmsleep command-line front end.
//
// Exit codes:
//   0 success
//   1 unexpected failure (constraint audit, numeric error, I/O)
//   2 usage error (unknown flag, bad value)
//   3 malformed config or scene file
//   4 infeasible experiment (N > N_r, U > M, action space over cap, empty scene)
//   5 output directory is not empty and --force was not given
//   6 regret diagnostic disabled (action space over the regret cap)

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mmsleep/config.hpp"
#include "mmsleep/errors.hpp"
#include "mmsleep/harness.hpp"
#include "mmsleep/results_io.hpp"
#include "mmsleep/scene_io.hpp"

namespace fs = std::filesystem;
using namespace mmsleep;

namespace {

enum Exit : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kBadConfig = 3,
  kInfeasible = 4,
  kOutputExists = 5,
  kRegretDisabled = 6,
};

struct OutputExists : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed_scene, seed_ue, seed_agent, seed_nn;
  std::string policy;
  std::optional<std::size_t> iters;
  std::string out;
  bool force = false;
  bool timing = false;
  std::string axis;
  std::string values;
};

void add_common(CLI::App* app, Options& o, bool experiment) {
  app->add_option("--config", o.config, "Experiment config (JSON); a run manifest also works");
  app->add_option("--seed-scene", o.seed_scene, "Override the scene seed");
  app->add_option("--out", o.out, "Output directory (created if absent)")->required();
  app->add_flag("--force", o.force, "Write into a non-empty output directory");
  if (!experiment) return;
  app->add_option("--seed-ue", o.seed_ue, "Override the UE seed");
  app->add_option("--seed-agent", o.seed_agent, "Override the agent seed");
  app->add_option("--seed-nn", o.seed_nn, "Override the network-initialization seed");
  app->add_option("--policy", o.policy, "Comma-separated policies: cmab,allon,random,greedy,ucb,load");
  app->add_option("--iters", o.iters, "Number of iterations")->check(CLI::PositiveNumber);
  app->add_flag("--timing", o.timing, "Record per-iteration wall time (makes the CSV non-reproducible)");
}

ExperimentConfig resolve_config(const Options& o) {
  ExperimentConfig c = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
  if (o.seed_scene) c.seeds.scene = *o.seed_scene;
  if (o.seed_ue) c.seeds.ue = *o.seed_ue;
  if (o.seed_agent) c.seeds.agent = *o.seed_agent;
  if (o.seed_nn) c.seeds.nn = *o.seed_nn;
  if (!o.policy.empty()) c.policies = split_list(o.policy);
  if (o.iters) c.iterations = *o.iters;
  if (o.timing) c.record_wall_time = true;
  validate(c);
  return c;
}

fs::path prepare_output(const Options& o) {
  const fs::path dir(o.out);
  if (fs::exists(dir)) {
    if (!fs::is_directory(dir)) throw OutputExists(dir.string() + " exists and is not a directory");
    if (!fs::is_empty(dir) && !o.force) {
      throw OutputExists(dir.string() + " is not empty (use --force to overwrite)");
    }
  }
  fs::create_directories(dir);
  return dir;
}

std::string command_line(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) {
    if (i) s += ' ';
    s += argv[i];
  }
  return s;
}

void write_stream(const fs::path& path, const std::function<void(std::ostream&)>& fn) {
  std::ostringstream ss;
  fn(ss);
  write_text(path, ss.str());
}

void print_table(const std::vector<SummaryRow>& rows) {
  std::printf("%-8s %14s %14s %12s %14s %8s\n", "policy", "p10 [Mbps]", "avg [Mbps]", "power [W]",
              "EE [Mbit/J]", "NEE");
  for (const SummaryRow& r : rows) {
    std::printf("%-8s %14.4f %14.4f %12.2f %14.4f %8.4f\n", r.policy.c_str(), r.reward_bps * 1e-6,
                r.avg_tput_bps * 1e-6, r.power_w, r.ee_bpj * 1e-6, r.nee);
  }
}

int cmd_scene(const Options& o, const std::string& cmd) {
  ExperimentConfig c = resolve_config(o);
  const fs::path dir = prepare_output(o);
  const Scene scene = make_scene(c);
  save_scene(scene, dir / "scene.json");
  write_json(dir / "manifest.json", manifest_json(c, cmd, {"scene.json"}));
  std::printf("buildings %zu (dropped %d), grid %dx%d, service area %zu points\n",
              scene.buildings().size(), scene.dropped_buildings(), scene.nx(), scene.ny(),
              scene.service_area_size());
  return kOk;
}

int cmd_place(const Options& o, const std::string& cmd) {
  ExperimentConfig c = resolve_config(o);
  const fs::path dir = prepare_output(o);
  const Environment env = prepare_environment(c);
  save_scene(env.scene, dir / "scene.json");
  const CandidateSet& cs = env.candidates;
  nlohmann::json reduced = nlohmann::json::array();
  for (std::size_t r = 0; r < cs.reduced.size(); ++r) {
    const GridPoint3D& p = cs.candidates[cs.reduced[r]];
    reduced.push_back({{"candidate", cs.reduced[r]},
                       {"position", {p.x, p.y, p.z}},
                       {"marginal_gain", cs.marginal_gain[r]},
                       {"viewshed", cs.coverage_map[r].size()}});
  }
  nlohmann::json sites = nlohmann::json::array();
  for (std::size_t s = 0; s < env.sites.size(); ++s) {
    const GridPoint3D& p = env.sites[s];
    sites.push_back({{"reduced_index", env.site_choice[s]}, {"position", {p.x, p.y, p.z}}});
  }
  write_json(dir / "placement.json",
             {{"format", "mmsleep-placement"},
              {"version", 1},
              {"service_area_points", env.scene.service_area_size()},
              {"candidates", cs.candidates.size()},
              {"covered_points", cs.covered_points},
              {"reduced", reduced},
              {"sites", sites}});
  write_json(dir / "manifest.json", manifest_json(c, cmd, {"scene.json", "placement.json"}));
  std::printf("candidates %zu, reduced %zu (covers %zu of %zu points), deployed %zu\n",
              cs.candidates.size(), cs.reduced.size(), cs.covered_points,
              env.scene.service_area_size(), env.sites.size());
  return kOk;
}

void write_run(const fs::path& dir, const ExperimentResult& r, const std::string& cmd,
               bool with_regret) {
  std::vector<std::string> artifacts{"results.csv", "curves.csv", "summary.json", "plot_curves.py"};
  write_stream(dir / "results.csv", [&](std::ostream& s) { write_results_csv(s, r); });
  write_stream(dir / "curves.csv", [&](std::ostream& s) { write_curves_csv(s, r); });
  if (with_regret) {
    write_stream(dir / "regret.csv", [&](std::ostream& s) { write_regret_csv(s, r); });
    artifacts.push_back("regret.csv");
  }
  write_json(dir / "summary.json", summary_json(r));
  write_text(dir / "plot_curves.py", plot_script("curves.csv"));
  write_json(dir / "manifest.json", manifest_json(r.config, cmd, artifacts));
}

int cmd_run(const Options& o, const std::string& cmd, bool regret) {
  ExperimentConfig c = resolve_config(o);
  if (regret) {
    c.regret = true;
    // Fail before touching the output directory or building anything.
    const std::uint64_t n = binomial(c.n_bs, sleeping_count(c.n_bs, c.alpha_off));
    if (n > c.regret_cap) {
      throw DiagnosticDisabled("regret diagnostic disabled: " + std::to_string(n) +
                               " actions exceed cap " + std::to_string(c.regret_cap));
    }
  }
  const fs::path dir = prepare_output(o);
  const ExperimentResult r = run_experiment(c);
  write_run(dir, r, cmd, c.regret);
  print_table(summarize(r));
  if (c.regret) {
    for (const PolicyRun& run : r.runs) {
      if (run.regret) std::printf("regret %-8s %.6g Mbit\n", run.policy.c_str(), run.regret->total() * 1e-6);
    }
  }
  return kOk;
}

int cmd_sweep(const Options& o, const std::string& cmd) {
  ExperimentConfig c = resolve_config(o);
  const auto axis = parse_axis(o.axis);
  if (!axis) throw CLI::ValidationError("--axis", "expected 'ue' or 'alpha'");
  std::vector<double> values;
  for (const std::string& v : split_list(o.values)) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(v, &used));
      if (used != v.size()) throw std::invalid_argument(v);
    } catch (const std::exception&) {
      throw CLI::ValidationError("--values", "not a number: " + v);
    }
  }
  if (values.empty()) throw CLI::ValidationError("--values", "expected a comma-separated list");
  const fs::path dir = prepare_output(o);
  std::vector<std::string> artifacts{"sweep.csv", "sweep.json"};
  std::size_t point = 0;
  const auto points = sweep(c, *axis, values, [&](const ExperimentResult& r) {
    const std::string name = "point_" + std::to_string(point++);
    fs::create_directories(dir / name);
    write_run(dir / name, r, cmd, r.config.regret);
    artifacts.push_back(name + "/");
  });
  write_stream(dir / "sweep.csv", [&](std::ostream& s) { write_sweep_csv(s, *axis, points); });
  nlohmann::json table = nlohmann::json::array();
  for (const SweepPoint& p : points) {
    table.push_back({{"value", p.value}, {"actions", p.n_actions}, {"policies", summary_rows_json(p.rows)}});
  }
  write_json(dir / "sweep.json", {{"format", "mmsleep-sweep"},
                                  {"version", 1},
                                  {"axis", axis_name(*axis)},
                                  {"statistic", "mean over the final half of the iterations"},
                                  {"points", table}});
  write_json(dir / "manifest.json", manifest_json(c, cmd, artifacts));
  for (const SweepPoint& p : points) {
    std::printf("%s = %s  (A_total %zu)\n", axis_name(*axis).c_str(), format_number(p.value).c_str(),
                p.n_actions);
    print_table(p.rows);
  }
  return kOk;
}

int fail(int code, const char* kind, const std::string& message) {
  std::string m = message;
  for (char& ch : m) {
    if (ch == '\n' || ch == '\r') ch = ' ';
  }
  std::fprintf(stderr, "mmsleep: error=%s exit=%d: %s\n", kind, code, m.c_str());
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Base-station sleep-mode experiments"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", kVersion);

  Options o;
  auto* scene = app.add_subcommand("scene", "Generate a scene and write it as JSON");
  add_common(scene, o, false);
  auto* place = app.add_subcommand("place", "Reduce rooftop candidates and deploy N sites");
  add_common(place, o, false);
  auto* run = app.add_subcommand("run", "Run the configured policies");
  add_common(run, o, true);
  auto* sw = app.add_subcommand("sweep", "Repeat the run over UE counts or sleep fractions");
  add_common(sw, o, true);
  sw->add_option("--axis", o.axis, "ue or alpha")->required();
  sw->add_option("--values", o.values, "Comma-separated axis values")->required();
  auto* regret = app.add_subcommand("regret", "Run with brute-force regret tracking");
  add_common(regret, o, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(kUsage, "usage", e.what());
  }

  const std::string cmd = command_line(argc, argv);
  try {
    if (*scene) return cmd_scene(o, cmd);
    if (*place) return cmd_place(o, cmd);
    if (*run) return cmd_run(o, cmd, false);
    if (*sw) return cmd_sweep(o, cmd);
    if (*regret) return cmd_run(o, cmd, true);
  } catch (const CLI::ParseError& e) {
    return fail(kUsage, "usage", e.what());
  } catch (const OutputExists& e) {
    return fail(kOutputExists, "output-exists", e.what());
  } catch (const DiagnosticDisabled& e) {
    return fail(kRegretDisabled, "regret-disabled", e.what());
  } catch (const ConfigError& e) {
    return fail(kBadConfig, "config", e.what());
  } catch (const FormatError& e) {
    return fail(kBadConfig, "config", e.what());
  } catch (const InfeasibleError& e) {
    return fail(kInfeasible, "infeasible", e.what());
  } catch (const ActionSpaceTooLarge& e) {
    return fail(kInfeasible, "infeasible", e.what());
  } catch (const EmptyCandidateError& e) {
    return fail(kInfeasible, "infeasible", e.what());
  } catch (const GenerationError& e) {
    return fail(kInfeasible, "infeasible", e.what());
  } catch (const std::exception& e) {
    return fail(kFailure, "internal", e.what());
  }
  return kUsage;
}
