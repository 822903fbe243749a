#include "mmsleep/context.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <tuple>

#include "mmsleep/random.hpp"

namespace mmsleep {

namespace {

double sq_dist(const Point2& a, const Point2& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

std::size_t nearest(const Point2& p, std::span<const Point2> centers) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centers.size(); ++c) {
    const double d = sq_dist(p, centers[c]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

std::vector<Point2> seed_plus_plus(std::span<const Point2> pts, std::size_t k, Rng& rng) {
  std::vector<Point2> centers;
  centers.reserve(k);
  centers.push_back(pts[std::uniform_int_distribution<std::size_t>(0, pts.size() - 1)(rng)]);
  std::vector<double> d2(pts.size());
  for (std::size_t p = 0; p < pts.size(); ++p) d2[p] = sq_dist(pts[p], centers[0]);
  while (centers.size() < k) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    const double r = std::uniform_real_distribution<double>(0.0, total)(rng);
    std::size_t pick = pts.size();
    double acc = 0.0;
    for (std::size_t p = 0; p < pts.size(); ++p) {
      if (d2[p] <= 0.0) continue;
      acc += d2[p];
      pick = p;
      if (acc > r) break;
    }
    centers.push_back(pts[pick]);
    for (std::size_t p = 0; p < pts.size(); ++p) {
      d2[p] = std::min(d2[p], sq_dist(pts[p], centers.back()));
    }
  }
  return centers;
}

}  // namespace

double within_cluster_ss(std::span<const Point2> points, std::span<const Point2> centers,
                         std::span<const std::size_t> assignment) {
  double total = 0.0;
  for (std::size_t p = 0; p < points.size(); ++p) total += sq_dist(points[p], centers[assignment[p]]);
  return total;
}

KMeansResult kmeans(std::span<const Point2> points, std::size_t k, std::uint64_t seed,
                    std::size_t max_iters, std::optional<Point2> fill_center) {
  if (points.empty()) throw std::invalid_argument("kmeans: no points");
  if (k == 0) throw std::invalid_argument("kmeans: k must be >= 1");
  if (max_iters == 0) throw std::invalid_argument("kmeans: max_iters must be >= 1");

  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::tie(points[a].x, points[a].y) < std::tie(points[b].x, points[b].y);
  });
  std::vector<Point2> pts(points.size());
  for (std::size_t p = 0; p < order.size(); ++p) pts[p] = points[order[p]];

  std::size_t distinct = 1;
  for (std::size_t p = 1; p < pts.size(); ++p) distinct += pts[p] == pts[p - 1] ? 0 : 1;
  const std::size_t ek = std::min(k, distinct);

  Rng rng = make_rng(seed, 0xc1057);
  std::vector<Point2> centers = seed_plus_plus(pts, ek, rng);
  std::vector<std::size_t> assign(pts.size(), ek);
  std::vector<std::size_t> sizes(ek, 0);

  KMeansResult out;
  for (std::size_t it = 0; it < max_iters; ++it) {
    bool changed = false;
    std::fill(sizes.begin(), sizes.end(), 0);
    for (std::size_t p = 0; p < pts.size(); ++p) {
      const std::size_t c = nearest(pts[p], centers);
      changed |= c != assign[p];
      assign[p] = c;
      ++sizes[c];
    }
    out.wcss_history.push_back(within_cluster_ss(pts, centers, assign));
    out.iterations = it + 1;
    if (!changed) break;

    std::vector<Point2> sums(ek, Point2{});
    for (std::size_t p = 0; p < pts.size(); ++p) {
      sums[assign[p]].x += pts[p].x;
      sums[assign[p]].y += pts[p].y;
    }
    for (std::size_t c = 0; c < ek; ++c) {
      if (sizes[c] == 0) continue;
      centers[c] = {sums[c].x / static_cast<double>(sizes[c]),
                    sums[c].y / static_cast<double>(sizes[c])};
    }
    for (std::size_t c = 0; c < ek; ++c) {
      if (sizes[c] != 0) continue;
      // Re-seed at the point farthest from its own center, taken from a
      // cluster that keeps at least one member.
      std::size_t far = pts.size();
      double far_d = -1.0;
      for (std::size_t p = 0; p < pts.size(); ++p) {
        if (sizes[assign[p]] < 2) continue;
        const double d = sq_dist(pts[p], centers[assign[p]]);
        if (d > far_d) {
          far_d = d;
          far = p;
        }
      }
      if (far == pts.size()) continue;
      centers[c] = pts[far];
      --sizes[assign[far]];
      assign[far] = c;
      sizes[c] = 1;
    }
  }

  Point2 fill{};
  if (fill_center) {
    fill = *fill_center;
  } else {
    for (const Point2& p : pts) {
      fill.x += p.x;
      fill.y += p.y;
    }
    fill.x /= static_cast<double>(pts.size());
    fill.y /= static_cast<double>(pts.size());
  }

  out.effective_k = ek;
  out.centers = centers;
  out.centers.resize(k, fill);
  out.sizes = sizes;
  out.sizes.resize(k, 0);
  out.assignment.resize(points.size());
  for (std::size_t p = 0; p < order.size(); ++p) out.assignment[order[p]] = assign[p];
  return out;
}

ContextVector build_context(std::span<const GridPoint3D> ue_positions, std::size_t k,
                            double extent_x, double extent_y, std::uint64_t seed,
                            std::size_t max_iters) {
  if (ue_positions.empty()) throw std::invalid_argument("build_context: no UEs");
  if (!(extent_x > 0.0 && extent_y > 0.0)) {
    throw std::invalid_argument("build_context: extent must be positive");
  }
  std::vector<Point2> pts;
  pts.reserve(ue_positions.size());
  for (const GridPoint3D& p : ue_positions) pts.push_back({p.x, p.y});

  const Point2 centroid{extent_x / 2.0, extent_y / 2.0};
  const KMeansResult km = kmeans(pts, k, seed, max_iters, centroid);

  std::vector<std::size_t> real(km.effective_k);
  std::iota(real.begin(), real.end(), 0);
  std::sort(real.begin(), real.end(), [&](std::size_t a, std::size_t b) {
    return std::tie(km.centers[a].x, km.centers[a].y, a) <
           std::tie(km.centers[b].x, km.centers[b].y, b);
  });

  ContextVector ctx;
  ctx.k = k;
  ctx.values.assign(3 * k, 0.0);
  const double u = static_cast<double>(ue_positions.size());
  for (std::size_t slot = 0; slot < k; ++slot) {
    Point2 c = centroid;
    double mu = 0.0;
    if (slot < real.size()) {
      c = km.centers[real[slot]];
      mu = static_cast<double>(km.sizes[real[slot]]) / u;
    }
    ctx.values[2 * slot] = c.x / extent_x;
    ctx.values[2 * slot + 1] = c.y / extent_y;
    ctx.values[2 * k + slot] = mu;
  }
  return ctx;
}

}  // namespace mmsleep
