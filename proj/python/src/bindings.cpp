#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>

#include "mmsleep/actions.hpp"
#include "mmsleep/config.hpp"
#include "mmsleep/context.hpp"
#include "mmsleep/errors.hpp"
#include "mmsleep/harness.hpp"
#include "mmsleep/nn.hpp"
#include "mmsleep/radio.hpp"
#include "mmsleep/results_io.hpp"
#include "mmsleep/scene.hpp"
#include "mmsleep/scene_io.hpp"

namespace py = pybind11;
using namespace mmsleep;

namespace {

// JSON crosses the boundary as text; the Python side wraps it in json.loads/dumps.
ExperimentConfig config_from_text(const std::string& text) {
  return config_from_json(nlohmann::json::parse(text, nullptr, true, true));
}

py::dict record_dict(const IterationRecord& r) {
  py::dict d;
  d["t"] = r.t;
  d["policy"] = r.policy;
  d["action_index"] = r.action_index;
  d["reward_bps"] = r.reward_bps;
  d["avg_tput_bps"] = r.avg_tput_bps;
  d["total_tput_bps"] = r.total_tput_bps;
  d["power_w"] = r.power_w;
  d["ee_bpj"] = r.ee_bpj;
  d["epsilon"] = r.epsilon ? py::cast(*r.epsilon) : py::none();
  d["sleeping"] = r.sleeping;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Base-station sleep-mode simulator core";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<GenerationError>(m, "GenerationError", base.ptr());
  py::register_exception<EmptyCandidateError>(m, "EmptyCandidateError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<InfeasibleError>(m, "InfeasibleError", base.ptr());
  py::register_exception<ActionSpaceTooLarge>(m, "ActionSpaceTooLarge", base.ptr());
  py::register_exception<DiagnosticDisabled>(m, "DiagnosticDisabled", base.ptr());
  py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());
  py::register_exception<FormatError>(m, "FormatError", base.ptr());
  py::register_exception<ConstraintViolation>(m, "ConstraintViolation", base.ptr());

  py::class_<GridPoint3D>(m, "GridPoint3D")
      .def(py::init<double, double, double>(), py::arg("x"), py::arg("y"), py::arg("z"))
      .def_readwrite("x", &GridPoint3D::x)
      .def_readwrite("y", &GridPoint3D::y)
      .def_readwrite("z", &GridPoint3D::z)
      .def("__repr__", [](const GridPoint3D& p) {
        return "GridPoint3D(" + format_number(p.x) + ", " + format_number(p.y) + ", " +
               format_number(p.z) + ")";
      });

  py::class_<Scene>(m, "Scene")
      .def_property_readonly("nx", &Scene::nx)
      .def_property_readonly("ny", &Scene::ny)
      .def_property_readonly("service_area_size", &Scene::service_area_size)
      .def_property_readonly("building_count", [](const Scene& s) { return s.buildings().size(); })
      .def_property_readonly("dropped_buildings", &Scene::dropped_buildings)
      .def("dem", &Scene::dem, py::arg("i"), py::arg("j"))
      .def("line_of_sight", &Scene::line_of_sight, py::arg("a"), py::arg("b"))
      .def("to_json", [](const Scene& s) { return scene_to_json(s).dump(); });

  m.def("scene_from_json", [](const std::string& text) { return scene_from_json(nlohmann::json::parse(text)); },
        py::arg("text"));
  m.def(
      "generate_scene",
      [](double x, double y, double z, int buildings, std::uint64_t seed) {
        SceneParams p;
        p.extent = {x, y, z};
        p.building_count = buildings;
        p.seed = seed;
        return generate_scene(p);
      },
      py::arg("x"), py::arg("y"), py::arg("z"), py::arg("buildings"), py::arg("seed"));
  m.def("enumerate_candidates", &enumerate_candidates, py::arg("scene"));

  m.def(
      "path_loss_db",
      [](double d, bool los, double carrier_ghz) {
        RadioConfig c;
        c.carrier_ghz = carrier_ghz;
        return path_loss_db(c, d, los);
      },
      py::arg("distance_m"), py::arg("los"), py::arg("carrier_ghz") = 28.0);
  m.def("received_power_dbm", &received_power_dbm, py::arg("tx_dbm"), py::arg("gain_db"),
        py::arg("path_loss_db"));
  m.def("gnb_power_w", [] { return gnb_power_w(PowerModelConfig{}); });
  m.def("percentile_10", [](const std::vector<double>& v) { return percentile_10(v); }, py::arg("values"));
  m.def("moving_average", [](const std::vector<double>& v, std::size_t w) { return moving_average(v, w); },
        py::arg("series"), py::arg("window"));
  m.def("normalize_ee", &normalize_ee, py::arg("series"));

  py::class_<ActionSpace>(m, "ActionSpace")
      .def(py::init<std::size_t, double, std::uint64_t>(), py::arg("n_bs"), py::arg("alpha_off"),
           py::arg("cap") = kDefaultActionCap)
      .def_property_readonly("k_off", &ActionSpace::k_off)
      .def("__len__", &ActionSpace::size)
      .def("mask", [](const ActionSpace& a, std::size_t i) { return a.mask(i); }, py::arg("index"))
      .def("sleeping", &ActionSpace::sleeping, py::arg("index"))
      .def("index_of", [](const ActionSpace& a, const std::vector<std::size_t>& s) { return a.index_of(s); },
           py::arg("sleeping"));

  m.def(
      "kmeans",
      [](const std::vector<std::pair<double, double>>& pts, std::size_t k, std::uint64_t seed) {
        std::vector<Point2> p;
        for (const auto& [x, y] : pts) p.push_back({x, y});
        const KMeansResult r = kmeans(p, k, seed);
        std::vector<std::pair<double, double>> centers;
        for (const Point2& c : r.centers) centers.emplace_back(c.x, c.y);
        return py::make_tuple(centers, r.assignment);
      },
      py::arg("points"), py::arg("k"), py::arg("seed"));
  m.def(
      "build_context",
      [](const std::vector<GridPoint3D>& ues, std::size_t k, double x, double y, std::uint64_t seed) {
        return build_context(ues, k, x, y, seed).values;
      },
      py::arg("ues"), py::arg("k"), py::arg("extent_x"), py::arg("extent_y"), py::arg("seed"));

  py::class_<MlpModel>(m, "MlpModel")
      .def_property_readonly("input_size", &MlpModel::input_size)
      .def_property_readonly("output_size", &MlpModel::output_size)
      .def_property_readonly("step", &MlpModel::step)
      .def("forward", [](const MlpModel& model, const std::vector<double>& x) { return model.forward(x); },
           py::arg("input"))
      .def(
          "train_step",
          [](MlpModel& model, const std::vector<std::tuple<std::vector<double>, std::size_t, double>>& batch) {
            std::vector<TrainSample> b;
            for (const auto& [x, a, y] : batch) b.push_back({x, a, y});
            return train_step(model, b);
          },
          py::arg("batch"))
      .def("to_json", &checkpoint_to_string);
  m.def("init_weights",
        [](const std::vector<std::size_t>& sizes, std::uint64_t seed) { return init_weights(sizes, seed); },
        py::arg("sizes"), py::arg("seed"));
  m.def("model_from_json", &checkpoint_from_string, py::arg("text"));

  m.def("default_config", [] { return to_json(ExperimentConfig{}).dump(); });
  m.def("load_config", [](const std::string& path) { return to_json(load_config(path)).dump(); },
        py::arg("path"));
  m.def("normalize_config", [](const std::string& text) { return to_json(config_from_text(text)).dump(); },
        py::arg("text"));
  m.def(
      "run_experiment",
      [](const std::string& text) {
        const ExperimentConfig c = config_from_text(text);
        ExperimentResult r;
        {
          py::gil_scoped_release release;
          r = run_experiment(c);
        }
        py::dict out;
        out["n_actions"] = r.n_actions;
        out["k_off"] = r.k_off;
        out["service_area_size"] = r.service_area_size;
        out["candidate_count"] = r.candidate_count;
        out["reduced_count"] = r.reduced_count;
        py::dict runs;
        for (const PolicyRun& run : r.runs) {
          py::list records;
          for (const IterationRecord& rec : run.records) records.append(record_dict(rec));
          runs[py::str(run.policy)] = records;
          if (run.regret) runs[py::str(run.policy + ".regret")] = run.regret->cumulative;
        }
        out["runs"] = runs;
        out["summary"] = summary_json(r).dump();
        return out;
      },
      py::arg("config_json"));
}
