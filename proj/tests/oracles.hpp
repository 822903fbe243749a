#pragma once

// Independent reference implementations used only by the tests. None of
// these share code with the library routines they check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "mmsleep/nn.hpp"
#include "mmsleep/random.hpp"
#include "mmsleep/scene.hpp"

namespace oracle {

using mmsleep::GridPoint3D;
using mmsleep::Scene;

inline int cell_coord(double v, double res) { return static_cast<int>(std::floor(v / res)); }

// Fine-step sampling of the segment. `lift` is added to every column height
// and `grow` widens each sample to the (2 grow + 1)^2 cell neighbourhood;
// `take_max` picks the tallest (pessimistic) or lowest (optimistic) column.
inline bool sampled_blocked(const Scene& s, const GridPoint3D& a, const GridPoint3D& b,
                            int samples, int grow = 0, double lift = 0.0, bool take_max = true) {
  const double r = s.resolution();
  const int ai = cell_coord(a.x, r), aj = cell_coord(a.y, r);
  const int bi = cell_coord(b.x, r), bj = cell_coord(b.y, r);
  for (int k = 1; k < samples; ++k) {
    const double f = static_cast<double>(k) / samples;
    const double x = a.x + (b.x - a.x) * f;
    const double y = a.y + (b.y - a.y) * f;
    const double z = a.z + (b.z - a.z) * f;
    const int ci = cell_coord(x, r), cj = cell_coord(y, r);
    if ((ci == ai && cj == aj) || (ci == bi && cj == bj)) continue;
    double h = take_max ? -std::numeric_limits<double>::infinity()
                        : std::numeric_limits<double>::infinity();
    bool any = false;
    for (int di = -grow; di <= grow; ++di) {
      for (int dj = -grow; dj <= grow; ++dj) {
        const int i = ci + di, j = cj + dj;
        if ((i == ai && j == aj) || (i == bi && j == bj)) continue;
        const double d = s.in_grid(i, j) ? s.dem(i, j) : 0.0;
        h = take_max ? std::max(h, d) : std::min(h, d);
        any = true;
      }
    }
    if (any && h + lift >= z) return true;
  }
  return false;
}

inline bool sampled_los(const Scene& s, const GridPoint3D& a, const GridPoint3D& b, int samples) {
  return !sampled_blocked(s, a, b, samples);
}

// True when the answer could change by moving buildings one cell sideways or
// one cell up/down; pairs outside this band have an unambiguous answer.
inline bool in_boundary_band(const Scene& s, const GridPoint3D& a, const GridPoint3D& b,
                             int samples) {
  const double r = s.resolution();
  const bool pessimistic = sampled_blocked(s, a, b, samples, 1, r, true);
  const bool optimistic = sampled_blocked(s, a, b, samples, 1, -r, false);
  return pessimistic != optimistic;
}

// Loss of a model by explicit loops over a plain copy of its parameters.
inline double reference_loss(const mmsleep::MlpModel& m,
                             const std::vector<mmsleep::TrainSample>& batch) {
  double data = 0.0;
  for (const auto& s : batch) {
    std::vector<double> act = s.input;
    const auto& layers = m.layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const auto& L = layers[l];
      std::vector<double> next(L.out);
      for (std::size_t o = 0; o < L.out; ++o) {
        double z = L.bias[o];
        for (std::size_t i = 0; i < L.in; ++i) z += L.weights[o * L.in + i] * act[i];
        next[o] = (l + 1 < layers.size()) ? std::max(0.0, z) : z;
      }
      act = std::move(next);
    }
    const double e = act[s.output] - s.target;
    data += e * e;
  }
  double w2 = 0.0;
  for (const auto& L : m.layers()) {
    for (double w : L.weights) w2 += w * w;
  }
  return data / static_cast<double>(batch.size()) + m.adam().l2_lambda * w2;
}

// Minimum number of sets needed to cover `target` (exhaustive over subsets).
inline std::size_t optimal_cover_size(const std::vector<std::vector<std::uint32_t>>& sets,
                                      const std::vector<std::uint32_t>& target,
                                      std::size_t universe) {
  const std::size_t n = sets.size();
  std::size_t best = std::numeric_limits<std::size_t>::max();
  std::vector<char> want(universe, 0);
  for (auto t : target) want[t] = 1;
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    const auto size = static_cast<std::size_t>(__builtin_popcount(mask));
    if (size >= best) continue;
    std::vector<char> got(universe, 0);
    for (std::size_t k = 0; k < n; ++k) {
      if (mask & (1u << k)) {
        for (auto p : sets[k]) got[p] = 1;
      }
    }
    bool ok = true;
    for (std::size_t p = 0; p < universe && ok; ++p) ok = !want[p] || got[p];
    if (ok) best = size;
  }
  return best;
}

}  // namespace oracle
