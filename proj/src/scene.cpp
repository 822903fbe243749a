#include "mmsleep/scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>
#include <tuple>

#include "mmsleep/errors.hpp"
#include "mmsleep/random.hpp"

namespace mmsleep {

namespace {

int cells_along(double length, double resolution) {
  // Tolerate extents that are an exact multiple of the resolution up to
  // rounding noise.
  return static_cast<int>(std::floor(length / resolution + 1e-9));
}

}  // namespace

Scene::Scene(Extent extent, double resolution, std::vector<Building> buildings,
             std::uint64_t seed, double ue_height)
    : extent_(extent),
      resolution_(resolution),
      buildings_(std::move(buildings)),
      seed_(seed),
      ue_height_(ue_height) {
  if (!(resolution_ > 0.0) || !std::isfinite(resolution_)) {
    throw GenerationError("scene resolution must be positive");
  }
  if (!(extent_.x > 0.0 && extent_.y > 0.0 && extent_.z > 0.0)) {
    throw GenerationError("scene extent must be positive");
  }
  nx_ = cells_along(extent_.x, resolution_);
  ny_ = cells_along(extent_.y, resolution_);
  if (nx_ < 1 || ny_ < 1) {
    throw GenerationError("scene extent is smaller than one grid cell");
  }
  if (!(ue_height_ >= 0.0) || ue_height_ > extent_.z) {
    throw GenerationError("UE height must lie inside the vertical extent");
  }

  const std::size_t cells = static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_);
  dem_.assign(cells, 0.0);
  owner_.assign(cells, -1);

  constexpr double kEdgeTol = 1e-9;
  for (std::size_t b = 0; b < buildings_.size(); ++b) {
    const Building& bd = buildings_[b];
    if (!(bd.width_x > 0.0 && bd.width_y > 0.0 && bd.height > 0.0)) {
      throw GenerationError("building " + std::to_string(b) + " has a non-positive dimension");
    }
    if (bd.origin_x < -kEdgeTol || bd.origin_y < -kEdgeTol ||
        bd.origin_x + bd.width_x > extent_.x + kEdgeTol ||
        bd.origin_y + bd.width_y > extent_.y + kEdgeTol || bd.height > extent_.z + kEdgeTol) {
      throw GenerationError("building " + std::to_string(b) + " lies outside the scene extent");
    }
    int i0, i1, j0, j1;
    footprint(bd, i0, i1, j0, j1);
    if (i1 <= i0 || j1 <= j0) {
      throw GenerationError("building " + std::to_string(b) + " covers no grid cell");
    }
    for (int j = j0; j < j1; ++j) {
      for (int i = i0; i < i1; ++i) {
        const std::size_t f = flat(i, j);
        if (owner_[f] != -1) {
          throw GenerationError("buildings " + std::to_string(owner_[f]) + " and " +
                                std::to_string(b) + " overlap");
        }
        owner_[f] = static_cast<int>(b);
        dem_[f] = bd.height;
      }
    }
  }

  sa_points_.reserve(cells);
  for (int j = 0; j < ny_; ++j) {
    for (int i = 0; i < nx_; ++i) {
      if (owner_[flat(i, j)] == -1) sa_points_.push_back(cell_center(i, j, ue_height_));
    }
  }
}

void Scene::footprint(const Building& b, int& i0, int& i1, int& j0, int& j1) const {
  // Cells whose centers fall in [origin, origin + width).
  auto first = [&](double v) { return static_cast<int>(std::ceil(v / resolution_ - 0.5 - 1e-9)); };
  i0 = std::clamp(first(b.origin_x), 0, nx_);
  i1 = std::clamp(first(b.origin_x + b.width_x), 0, nx_);
  j0 = std::clamp(first(b.origin_y), 0, ny_);
  j1 = std::clamp(first(b.origin_y + b.width_y), 0, ny_);
}

CellIndex Scene::cell_of(double x, double y) const {
  const int i = static_cast<int>(std::floor(x / resolution_));
  const int j = static_cast<int>(std::floor(y / resolution_));
  return {std::clamp(i, 0, nx_ - 1), std::clamp(j, 0, ny_ - 1)};
}

GridPoint3D Scene::cell_center(int i, int j, double z) const {
  return {(i + 0.5) * resolution_, (j + 0.5) * resolution_, z};
}

bool Scene::contains(const GridPoint3D& p) const {
  return p.x >= 0.0 && p.y >= 0.0 && p.z >= 0.0 && p.x <= extent_.x && p.y <= extent_.y &&
         p.z <= extent_.z;
}

bool Scene::line_of_sight(const GridPoint3D& p, const GridPoint3D& q) const {
  // Always walk from the lexicographically smaller endpoint so that
  // los(a, b) and los(b, a) run the identical floating-point path.
  GridPoint3D a = p;
  GridPoint3D b = q;
  if (std::tie(b.x, b.y, b.z) < std::tie(a.x, a.y, a.z)) std::swap(a, b);

  const CellIndex ca = cell_of(a.x, a.y);
  const CellIndex cb = cell_of(b.x, b.y);
  if (ca == cb) return true;

  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double dz = b.z - a.z;
  auto z_at = [&](double t) { return a.z + t * dz; };
  auto blocks = [&](int i, int j, double z) {
    if (!in_grid(i, j)) return false;
    if ((i == ca.i && j == ca.j) || (i == cb.i && j == cb.j)) return false;
    return dem_[flat(i, j)] >= z;
  };

  constexpr double kInf = std::numeric_limits<double>::infinity();
  const int step_i = dx > 0.0 ? 1 : (dx < 0.0 ? -1 : 0);
  const int step_j = dy > 0.0 ? 1 : (dy < 0.0 ? -1 : 0);
  int i = ca.i;
  int j = ca.j;
  double t_max_x = kInf;
  double t_max_y = kInf;
  double t_delta_x = kInf;
  double t_delta_y = kInf;
  if (step_i != 0) {
    const double boundary = step_i > 0 ? (i + 1) * resolution_ : i * resolution_;
    t_max_x = (boundary - a.x) / dx;
    t_delta_x = resolution_ / std::abs(dx);
  }
  if (step_j != 0) {
    const double boundary = step_j > 0 ? (j + 1) * resolution_ : j * resolution_;
    t_max_y = (boundary - a.y) / dy;
    t_delta_y = resolution_ / std::abs(dy);
  }

  // Crossings closer than this (in segment parameter) count as passing
  // through a cell corner.
  constexpr double kCornerTie = 1e-12;
  double t_in = 0.0;
  const int max_steps = nx_ + ny_ + 4;
  for (int n = 0; n < max_steps; ++n) {
    if (i == cb.i && j == cb.j) return true;
    const double t_out = std::min({t_max_x, t_max_y, 1.0});
    if (blocks(i, j, std::min(z_at(t_in), z_at(t_out)))) return false;
    if (t_out >= 1.0) return true;

    if (std::abs(t_max_x - t_max_y) <= kCornerTie) {
      // Both side cells of the corner are touched at a single point.
      const double t = std::min(t_max_x, t_max_y);
      const double zc = z_at(t);
      if (blocks(i + step_i, j, zc) || blocks(i, j + step_j, zc)) return false;
      i += step_i;
      j += step_j;
      t_in = t;
      t_max_x += t_delta_x;
      t_max_y += t_delta_y;
    } else if (t_max_x < t_max_y) {
      i += step_i;
      t_in = t_max_x;
      t_max_x += t_delta_x;
    } else {
      j += step_j;
      t_in = t_max_y;
      t_max_y += t_delta_y;
    }
    if (!in_grid(i, j)) return true;
  }
  return true;
}

Scene generate_scene(const SceneParams& params) {
  const Extent& ext = params.extent;
  if (!(ext.x > 0.0 && ext.y > 0.0 && ext.z > 0.0)) {
    throw GenerationError("scene extent must be positive");
  }
  if (!(params.resolution > 0.0)) throw GenerationError("scene resolution must be positive");
  if (params.building_count < 0) throw GenerationError("building count must be non-negative");
  if (!(params.min_width > 0.0 && params.min_width <= params.max_width) ||
      !(params.min_height > 0.0 && params.min_height <= params.max_height)) {
    throw GenerationError("building size ranges are inconsistent");
  }
  if (params.max_height > ext.z) {
    throw GenerationError("maximum building height exceeds the vertical extent");
  }

  const double res = params.resolution;
  const int nx = cells_along(ext.x, res);
  const int ny = cells_along(ext.y, res);
  const int w_min = static_cast<int>(std::ceil(params.min_width / res - 1e-9));
  const int w_max = static_cast<int>(std::floor(params.max_width / res + 1e-9));
  if (w_max < w_min) throw GenerationError("width range contains no whole cell count");
  if (params.building_count > 0 && (w_min > nx || w_min > ny)) {
    throw GenerationError("scene extent too small for a building of minimum width");
  }

  struct Rect {
    int i0, j0, wi, wj;
  };
  std::vector<Rect> placed;
  std::vector<Building> buildings;
  Rng rng = make_rng(params.seed, 0x5ce7e);
  std::uniform_int_distribution<int> width_dist(w_min, w_max);
  std::uniform_real_distribution<double> height_dist(params.min_height, params.max_height);
  const int gap = std::max(0, params.min_gap_cells);

  int dropped = 0;
  for (int k = 0; k < params.building_count; ++k) {
    bool ok = false;
    for (int attempt = 0; attempt < params.max_attempts && !ok; ++attempt) {
      const int wi = std::min(width_dist(rng), nx);
      const int wj = std::min(width_dist(rng), ny);
      const int i0 = std::uniform_int_distribution<int>(0, nx - wi)(rng);
      const int j0 = std::uniform_int_distribution<int>(0, ny - wj)(rng);
      ok = std::none_of(placed.begin(), placed.end(), [&](const Rect& r) {
        return i0 < r.i0 + r.wi + gap && r.i0 < i0 + wi + gap && j0 < r.j0 + r.wj + gap &&
               r.j0 < j0 + wj + gap;
      });
      if (ok) {
        placed.push_back({i0, j0, wi, wj});
        buildings.push_back({i0 * res, j0 * res, wi * res, wj * res, height_dist(rng)});
      }
    }
    if (!ok) ++dropped;
  }

  Scene scene(ext, res, std::move(buildings), params.seed, params.ue_height);
  scene.set_dropped_buildings(dropped);
  return scene;
}

std::vector<GridPoint3D> enumerate_candidates(const Scene& scene) {
  std::vector<GridPoint3D> out;
  for (const Building& b : scene.buildings()) {
    int i0, i1, j0, j1;
    scene.footprint(b, i0, i1, j0, j1);
    if (i0 <= 1 || j0 <= 1 || i1 - 1 >= scene.nx() - 2 || j1 - 1 >= scene.ny() - 2) continue;
    for (int j = j0; j < j1; ++j) {
      for (int i = i0; i < i1; ++i) {
        if (i == i0 || i == i1 - 1 || j == j0 || j == j1 - 1) {
          out.push_back(scene.cell_center(i, j, b.height));
        }
      }
    }
  }
  if (out.empty()) {
    throw EmptyCandidateError("scene has no rooftop candidate away from the boundary");
  }
  return out;
}

std::vector<std::uint32_t> viewshed(const Scene& scene, const GridPoint3D& from) {
  std::vector<std::uint32_t> seen;
  const auto& sa = scene.sa_points();
  for (std::size_t s = 0; s < sa.size(); ++s) {
    if (scene.line_of_sight(from, sa[s])) seen.push_back(static_cast<std::uint32_t>(s));
  }
  return seen;
}

std::vector<std::size_t> greedy_cover(std::span<const std::vector<std::uint32_t>> coverage,
                                      std::size_t universe_size, std::vector<std::size_t>* gains) {
  std::vector<char> covered(universe_size, 0);
  std::vector<char> taken(coverage.size(), 0);
  std::vector<std::size_t> order;
  if (gains) gains->clear();
  while (true) {
    std::size_t best = coverage.size();
    std::size_t best_gain = 0;
    for (std::size_t c = 0; c < coverage.size(); ++c) {
      if (taken[c]) continue;
      std::size_t gain = 0;
      for (std::uint32_t s : coverage[c]) gain += covered[s] ? 0 : 1;
      if (gain > best_gain) {
        best_gain = gain;
        best = c;
      }
    }
    if (best_gain == 0) break;
    taken[best] = 1;
    order.push_back(best);
    if (gains) gains->push_back(best_gain);
    for (std::uint32_t s : coverage[best]) covered[s] = 1;
  }
  return order;
}

CandidateSet reduce_candidates(const Scene& scene, std::span<const GridPoint3D> candidates) {
  if (candidates.empty()) throw EmptyCandidateError("no candidates to reduce");

  std::vector<std::vector<std::uint32_t>> coverage(candidates.size());
  const unsigned workers =
      std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(),
                                      static_cast<unsigned>(candidates.size())));
  if (workers == 1) {
    for (std::size_t c = 0; c < candidates.size(); ++c) coverage[c] = viewshed(scene, candidates[c]);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t c = w; c < candidates.size(); c += workers) {
          coverage[c] = viewshed(scene, candidates[c]);
        }
      });
    }
  }

  CandidateSet out;
  out.candidates.assign(candidates.begin(), candidates.end());
  out.reduced = greedy_cover(coverage, scene.service_area_size(), &out.marginal_gain);
  for (std::size_t r : out.reduced) out.coverage_map.push_back(coverage[r]);
  for (std::size_t g : out.marginal_gain) out.covered_points += g;
  return out;
}

}  // namespace mmsleep
