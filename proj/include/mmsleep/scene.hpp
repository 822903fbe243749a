#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mmsleep {

struct GridPoint3D {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const GridPoint3D&, const GridPoint3D&) = default;
};

struct Building {
  double origin_x = 0.0;
  double origin_y = 0.0;
  double width_x = 0.0;
  double width_y = 0.0;
  double height = 0.0;

  friend bool operator==(const Building&, const Building&) = default;
};

struct Extent {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Extent&, const Extent&) = default;
};

struct CellIndex {
  int i = 0;
  int j = 0;

  friend bool operator==(const CellIndex&, const CellIndex&) = default;
};

/// Flat-ground urban scene on a regular grid.
///
/// The height field (DEM) and the service-area points are derived from the
/// building list at construction and never stored separately. A cell belongs
/// to a building when its center lies inside the building's footprint
/// rectangle (half-open on the far edges).
class Scene {
 public:
  static constexpr double kDefaultUeHeight = 1.5;

  /// Validates the building list (inside extent, positive sizes, disjoint
  /// footprints) and derives the DEM and service area. Throws GenerationError.
  Scene(Extent extent, double resolution, std::vector<Building> buildings,
        std::uint64_t seed = 0, double ue_height = kDefaultUeHeight);

  const Extent& extent() const { return extent_; }
  double resolution() const { return resolution_; }
  const std::vector<Building>& buildings() const { return buildings_; }
  std::uint64_t seed() const { return seed_; }
  double ue_height() const { return ue_height_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }

  /// Service-area points at UE height, row-major over (j, i).
  const std::vector<GridPoint3D>& sa_points() const { return sa_points_; }
  std::size_t service_area_size() const { return sa_points_.size(); }

  double dem(int i, int j) const { return dem_[flat(i, j)]; }
  /// Index of the building covering a cell, or -1.
  int owner(int i, int j) const { return owner_[flat(i, j)]; }
  bool in_grid(int i, int j) const { return i >= 0 && j >= 0 && i < nx_ && j < ny_; }

  /// Cell containing a point; coordinates on the far boundary map to the
  /// last cell.
  CellIndex cell_of(double x, double y) const;
  GridPoint3D cell_center(int i, int j, double z) const;
  bool contains(const GridPoint3D& p) const;

  /// Footprint cell range [i0, i1) x [j0, j1) of a building.
  void footprint(const Building& b, int& i0, int& i1, int& j0, int& j1) const;

  /// Straight-segment visibility. Walks every grid column the segment
  /// crosses (endpoint columns excluded) and reports a blockage when the
  /// column height is >= the lowest height of the segment inside it.
  /// Symmetric in its arguments.
  bool line_of_sight(const GridPoint3D& a, const GridPoint3D& b) const;

  /// Buildings the generator gave up on (rejection-sampling exhaustion).
  int dropped_buildings() const { return dropped_buildings_; }
  void set_dropped_buildings(int n) { dropped_buildings_ = n; }

 private:
  std::size_t flat(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx_) +
           static_cast<std::size_t>(i);
  }

  Extent extent_;
  double resolution_;
  std::vector<Building> buildings_;
  std::uint64_t seed_;
  double ue_height_;
  int nx_ = 0;
  int ny_ = 0;
  std::vector<double> dem_;
  std::vector<int> owner_;
  std::vector<GridPoint3D> sa_points_;
  int dropped_buildings_ = 0;
};

struct SceneParams {
  Extent extent{129.0, 206.0, 45.0};
  double resolution = 1.0;
  int building_count = 14;
  std::uint64_t seed = 0;
  double ue_height = Scene::kDefaultUeHeight;
  double min_width = 20.0;
  double max_width = 45.0;
  double min_height = 8.0;
  double max_height = 25.0;
  // Street clearance kept between footprints, in cells.
  int min_gap_cells = 2;
  int max_attempts = 2000;
};

/// Seeded synthetic scene. Widths are whole cells drawn uniformly from
/// [min_width, max_width]; heights are uniform reals. Overlapping draws are
/// rejected; a building that cannot be placed after max_attempts is dropped
/// and counted in Scene::dropped_buildings().
Scene generate_scene(const SceneParams& params);

/// One candidate per rooftop-perimeter cell of every building that keeps at
/// least one cell of clearance from the scene edge. Ordered by building, then
/// row-major over the perimeter cells.
/// Throws EmptyCandidateError when nothing qualifies.
std::vector<GridPoint3D> enumerate_candidates(const Scene& scene);

/// Indices of the service-area points visible from `from`.
std::vector<std::uint32_t> viewshed(const Scene& scene, const GridPoint3D& from);

struct CandidateSet {
  std::vector<GridPoint3D> candidates;
  // Indices into `candidates`, in selection order.
  std::vector<std::size_t> reduced;
  // coverage_map[r] = full viewshed (sorted sa indices) of candidates[reduced[r]].
  std::vector<std::vector<std::uint32_t>> coverage_map;
  // New points added by each selection step.
  std::vector<std::size_t> marginal_gain;
  std::size_t covered_points = 0;
};

/// Greedy maximum-coverage reduction: repeatedly takes the candidate adding
/// the most not-yet-covered service-area points (ties to the lowest index)
/// until no candidate adds anything.
CandidateSet reduce_candidates(const Scene& scene, std::span<const GridPoint3D> candidates);

/// Same greedy rule over precomputed coverage sets (sorted indices).
std::vector<std::size_t> greedy_cover(std::span<const std::vector<std::uint32_t>> coverage,
                                      std::size_t universe_size,
                                      std::vector<std::size_t>* gains = nullptr);

}  // namespace mmsleep
