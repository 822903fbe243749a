#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "mmsleep/scene.hpp"

namespace mmsleep {

inline constexpr const char* kSceneFormat = "mmsleep-scene";
inline constexpr int kSceneFormatVersion = 1;

nlohmann::json scene_to_json(const Scene& scene);
/// Throws FormatError on a malformed document, GenerationError on an invalid
/// building list.
Scene scene_from_json(const nlohmann::json& j);

void save_scene(const Scene& scene, const std::filesystem::path& path);
Scene load_scene(const std::filesystem::path& path);

}  // namespace mmsleep
