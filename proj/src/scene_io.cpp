#include "mmsleep/scene_io.hpp"

#include <fstream>

#include "mmsleep/errors.hpp"

namespace mmsleep {

using nlohmann::json;

json scene_to_json(const Scene& scene) {
  json buildings = json::array();
  for (const Building& b : scene.buildings()) {
    buildings.push_back({{"origin", {b.origin_x, b.origin_y}},
                         {"size", {b.width_x, b.width_y}},
                         {"height", b.height}});
  }
  const Extent& e = scene.extent();
  return {{"format", kSceneFormat},
          {"version", kSceneFormatVersion},
          {"extent", {e.x, e.y, e.z}},
          {"resolution", scene.resolution()},
          {"seed", scene.seed()},
          {"ue_height", scene.ue_height()},
          {"dropped_buildings", scene.dropped_buildings()},
          {"buildings", buildings}};
}

namespace {

double number_at(const json& arr, std::size_t i, const char* what) {
  if (!arr.is_array() || i >= arr.size() || !arr[i].is_number()) {
    throw FormatError(std::string("scene: malformed ") + what);
  }
  return arr[i].get<double>();
}

}  // namespace

Scene scene_from_json(const json& j) {
  try {
    if (!j.is_object() || j.value("format", "") != kSceneFormat) {
      throw FormatError("scene: not an mmsleep-scene document");
    }
    if (j.at("version").get<int>() != kSceneFormatVersion) {
      throw FormatError("scene: unsupported version");
    }
    const json& ext = j.at("extent");
    if (!ext.is_array() || ext.size() != 3) throw FormatError("scene: extent must be [x, y, z]");
    Extent extent{number_at(ext, 0, "extent"), number_at(ext, 1, "extent"),
                  number_at(ext, 2, "extent")};
    std::vector<Building> buildings;
    for (const json& b : j.at("buildings")) {
      const json& o = b.at("origin");
      const json& s = b.at("size");
      buildings.push_back({number_at(o, 0, "origin"), number_at(o, 1, "origin"),
                           number_at(s, 0, "size"), number_at(s, 1, "size"),
                           b.at("height").get<double>()});
    }
    Scene scene(extent, j.at("resolution").get<double>(), std::move(buildings),
                j.value("seed", std::uint64_t{0}),
                j.value("ue_height", Scene::kDefaultUeHeight));
    scene.set_dropped_buildings(j.value("dropped_buildings", 0));
    return scene;
  } catch (const json::exception& e) {
    throw FormatError(std::string("scene: ") + e.what());
  }
}

void save_scene(const Scene& scene, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << scene_to_json(scene).dump(2) << '\n';
}

Scene load_scene(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scene file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError("scene file " + path.string() + " is not valid JSON: " + e.what());
  }
  return scene_from_json(j);
}

}  // namespace mmsleep
