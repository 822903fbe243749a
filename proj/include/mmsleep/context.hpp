#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mmsleep/scene.hpp"

namespace mmsleep {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

struct KMeansResult {
  // Always k entries. Clusters past `effective_k` are placeholders with size 0.
  std::vector<Point2> centers;
  std::vector<std::size_t> assignment;
  std::vector<std::size_t> sizes;
  std::size_t effective_k = 0;
  std::size_t iterations = 0;
  // Within-cluster sum of squares after each assignment pass.
  std::vector<double> wcss_history;
};

/// Lloyd's algorithm with k-means++ seeding.
///
/// Points are clustered in canonical (x, y) order, so the result depends only
/// on the point multiset and the seed. When there are fewer distinct points
/// than k, only that many real clusters are formed; the rest get size 0 and
/// center `fill_center` (the points' centroid when unset). Empty clusters
/// during iteration are re-seeded at the point farthest from its center.
KMeansResult kmeans(std::span<const Point2> points, std::size_t k, std::uint64_t seed,
                    std::size_t max_iters = 100, std::optional<Point2> fill_center = std::nullopt);

double within_cluster_ss(std::span<const Point2> points, std::span<const Point2> centers,
                         std::span<const std::size_t> assignment);

/// [dx_1, dy_1, ..., dx_K, dy_K, mu_1, ..., mu_K]: centers normalized by the
/// scene extent, followed by cluster occupancy fractions.
struct ContextVector {
  std::size_t k = 0;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double dx(std::size_t c) const { return values[2 * c]; }
  double dy(std::size_t c) const { return values[2 * c + 1]; }
  double mu(std::size_t c) const { return values[2 * k + c]; }
};

/// Clusters UE (x, y) positions and encodes them. Real clusters are ordered
/// by (center x, center y); placeholder clusters (mu = 0, scene centroid)
/// follow them.
ContextVector build_context(std::span<const GridPoint3D> ue_positions, std::size_t k,
                            double extent_x, double extent_y, std::uint64_t seed,
                            std::size_t max_iters = 100);

}  // namespace mmsleep
