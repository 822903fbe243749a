#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "mmsleep/errors.hpp"
#include "mmsleep/random.hpp"
#include "mmsleep/scene.hpp"
#include "mmsleep/scene_io.hpp"
#include "oracles.hpp"

using namespace mmsleep;

namespace {

std::size_t footprint_cells(const Scene& s) {
  std::size_t n = 0;
  for (const Building& b : s.buildings()) {
    int i0, i1, j0, j1;
    s.footprint(b, i0, i1, j0, j1);
    n += static_cast<std::size_t>((i1 - i0) * (j1 - j0));
  }
  return n;
}

GridPoint3D random_free_point(const Scene& s, Rng& rng) {
  std::uniform_real_distribution<double> ux(0.0, s.extent().x), uy(0.0, s.extent().y),
      uz(0.0, s.extent().z);
  for (;;) {
    const GridPoint3D p{ux(rng), uy(rng), uz(rng)};
    const CellIndex c = s.cell_of(p.x, p.y);
    if (p.z > s.dem(c.i, c.j)) return p;
  }
}

}  // namespace

TEST_SUITE("scene") {

TEST_CASE("empty scene has every cell in the service area") {
  const Scene s({50, 50, 45}, 1.0, {});
  CHECK(s.service_area_size() == 2500);
  for (int j = 0; j < s.ny(); ++j) {
    for (int i = 0; i < s.nx(); ++i) CHECK(s.dem(i, j) == 0.0);
  }
  CHECK(s.sa_points().front() == GridPoint3D{0.5, 0.5, 1.5});
}

TEST_CASE("generated scene conserves grid cells") {
  SceneParams p;
  p.building_count = 12;
  p.seed = 7;
  const Scene s = generate_scene(p);
  CHECK(s.buildings().size() + static_cast<std::size_t>(s.dropped_buildings()) == 12);
  CHECK(s.service_area_size() == 129u * 206u - footprint_cells(s));
  for (const Building& b : s.buildings()) {
    CHECK(b.width_x >= 20.0);
    CHECK(b.width_x <= 45.0);
    CHECK(b.width_y >= 20.0);
    CHECK(b.width_y <= 45.0);
    CHECK(b.height >= 8.0);
    CHECK(b.height <= 25.0);
    CHECK(b.origin_x >= 0.0);
    CHECK(b.origin_x + b.width_x <= 129.0);
    CHECK(b.origin_y + b.width_y <= 206.0);
  }
}

TEST_CASE("dem equals building height on covered cells and zero elsewhere") {
  const Scene s({30, 30, 40}, 1.0, {{5, 5, 4, 6, 12.5}, {15, 20, 3, 3, 7.0}});
  std::size_t covered = 0;
  for (int j = 0; j < s.ny(); ++j) {
    for (int i = 0; i < s.nx(); ++i) {
      const bool in_a = i >= 5 && i < 9 && j >= 5 && j < 11;
      const bool in_b = i >= 15 && i < 18 && j >= 20 && j < 23;
      CHECK(s.dem(i, j) == (in_a ? 12.5 : in_b ? 7.0 : 0.0));
      covered += (in_a || in_b);
    }
  }
  CHECK(s.service_area_size() == 900 - covered);
}

TEST_CASE("generation is reproducible for a fixed seed") {
  SceneParams p;
  p.seed = 42;
  const Scene a = generate_scene(p);
  const Scene b = generate_scene(p);
  CHECK(a.buildings() == b.buildings());
  p.seed = 43;
  CHECK(generate_scene(p).buildings() != a.buildings());
}

TEST_CASE("a grid too small for the minimum building is rejected") {
  SceneParams p;
  p.extent = {15, 15, 30};
  p.building_count = 1;
  CHECK_THROWS_AS(generate_scene(p), GenerationError);
  p.building_count = 0;
  CHECK(generate_scene(p).buildings().empty());
}

TEST_CASE("invalid building lists are rejected") {
  CHECK_THROWS_AS(Scene({20, 20, 20}, 1.0, {{15, 15, 10, 10, 5}}), GenerationError);
  CHECK_THROWS_AS(Scene({20, 20, 20}, 1.0, {{2, 2, 5, 5, 5}, {4, 4, 5, 5, 5}}), GenerationError);
  CHECK_THROWS_AS(Scene({20, 20, 20}, 1.0, {{2, 2, 5, 5, 0}}), GenerationError);
}

TEST_CASE("line of sight: wall across the segment") {
  const GridPoint3D a{0.5, 5.5, 10}, b{10.5, 5.5, 10};
  CHECK(Scene({20, 12, 30}, 1.0, {}).line_of_sight(a, b));
  const Scene tall({20, 12, 30}, 1.0, {{4, 4, 2, 3, 20}});
  CHECK_FALSE(tall.line_of_sight(a, b));
  const Scene low({20, 12, 30}, 1.0, {{4, 4, 2, 3, 5}});
  CHECK(low.line_of_sight(a, b));
  CHECK(oracle::sampled_los(low, a, b, 1000));
  CHECK_FALSE(oracle::sampled_los(tall, a, b, 1000));
}

TEST_CASE("a column exactly at segment height blocks") {
  const Scene s({20, 12, 30}, 1.0, {{8, 4, 2, 3, 10}});
  CHECK_FALSE(s.line_of_sight({0.5, 5.5, 10}, {18.5, 5.5, 10}));
  CHECK(s.line_of_sight({0.5, 5.5, 10.001}, {18.5, 5.5, 10.001}));
}

TEST_CASE("endpoint columns never block") {
  const Scene s({20, 12, 30}, 1.0, {{2, 2, 4, 4, 15}});
  // From the roof edge outward: own column is excluded.
  CHECK(s.line_of_sight({2.5, 3.5, 15}, {0.5, 3.5, 15}));
}

TEST_CASE("line of sight is symmetric and matches sampling away from edges") {
  SceneParams p;
  p.extent = {80, 80, 30};
  p.building_count = 6;
  p.min_width = 10;
  p.max_width = 18;
  p.seed = 5;
  const Scene s = generate_scene(p);
  Rng rng(99);
  int checked = 0;
  for (int k = 0; k < 400; ++k) {
    const GridPoint3D a = random_free_point(s, rng), b = random_free_point(s, rng);
    const bool ab = s.line_of_sight(a, b);
    CHECK(ab == s.line_of_sight(b, a));
    if (!oracle::in_boundary_band(s, a, b, 1000)) {
      CHECK(ab == oracle::sampled_los(s, a, b, 1000));
      ++checked;
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("perimeter candidates of a single centred building") {
  const Scene s({60, 60, 40}, 1.0, {{20, 20, 20, 20, 14}});
  const auto c = enumerate_candidates(s);
  CHECK(c.size() == 76);
  std::set<std::pair<int, int>> cells;
  for (const GridPoint3D& p : c) {
    CHECK(p.z == 14.0);
    const CellIndex ci = s.cell_of(p.x, p.y);
    CHECK(s.owner(ci.i, ci.j) == 0);
    cells.insert({ci.i, ci.j});
  }
  // Direct enumeration: footprint cells with a non-footprint 4-neighbour.
  std::size_t direct = 0;
  for (int j = 20; j < 40; ++j) {
    for (int i = 20; i < 40; ++i) direct += (i == 20 || i == 39 || j == 20 || j == 39);
  }
  CHECK(cells.size() == direct);
}

TEST_CASE("candidate enumeration errors and boundary exclusion") {
  CHECK_THROWS_AS(enumerate_candidates(Scene({40, 40, 30}, 1.0, {})), EmptyCandidateError);
  const Scene s({60, 60, 40}, 1.0, {{0, 10, 10, 10, 12}, {30, 30, 10, 10, 9}});
  const auto c = enumerate_candidates(s);
  CHECK(c.size() == 36);
  for (const GridPoint3D& p : c) CHECK(p.z == 9.0);
  CHECK_THROWS_AS(enumerate_candidates(Scene({40, 40, 30}, 1.0, {{1, 5, 10, 10, 9}})),
                  EmptyCandidateError);
}

TEST_CASE("greedy cover: identical sets keep the lowest index") {
  const std::vector<std::vector<std::uint32_t>> cov{{1, 2, 3}, {1, 2, 3}};
  CHECK(greedy_cover(cov, 10) == std::vector<std::size_t>{0});
}

TEST_CASE("greedy cover: overlapping pair is taken in gain order") {
  std::vector<std::uint32_t> a(100), b(31);
  std::iota(a.begin(), a.end(), 1u);
  std::iota(b.begin(), b.end(), 90u);
  const std::vector<std::vector<std::uint32_t>> cov{b, a};
  std::vector<std::size_t> gains;
  CHECK(greedy_cover(cov, 200, &gains) == std::vector<std::size_t>{1, 0});
  CHECK(gains == std::vector<std::size_t>{100, 20});
  std::vector<std::uint32_t> all(a);
  all.insert(all.end(), b.begin(), b.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  CHECK(oracle::optimal_cover_size(cov, all, 200) == 2);
}

TEST_CASE("greedy cover stays within the logarithmic bound of the optimum") {
  Rng rng(2024);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t universe = 40;
    const std::size_t n = 4 + trial % 9;
    std::vector<std::vector<std::uint32_t>> cov(n);
    std::set<std::uint32_t> union_set;
    for (auto& s : cov) {
      for (std::uint32_t p = 0; p < universe; ++p) {
        if (std::uniform_real_distribution<double>(0, 1)(rng) < 0.2) s.push_back(p);
      }
      union_set.insert(s.begin(), s.end());
    }
    const auto picked = greedy_cover(cov, universe);
    std::set<std::uint32_t> got;
    for (auto k : picked) got.insert(cov[k].begin(), cov[k].end());
    CHECK(got == union_set);
    const std::vector<std::uint32_t> target(union_set.begin(), union_set.end());
    const double opt = static_cast<double>(oracle::optimal_cover_size(cov, target, universe));
    CHECK(static_cast<double>(picked.size()) <= (std::log(double(universe)) + 1.0) * opt);
  }
}

TEST_CASE("reduction covers everything any candidate can see") {
  SceneParams p;
  p.extent = {70, 70, 30};
  p.building_count = 4;
  p.min_width = 10;
  p.max_width = 16;
  p.seed = 11;
  const Scene s = generate_scene(p);
  const auto cands = enumerate_candidates(s);
  const CandidateSet set = reduce_candidates(s, cands);
  CHECK(set.reduced.size() <= set.candidates.size());
  CHECK(std::set<std::size_t>(set.reduced.begin(), set.reduced.end()).size() == set.reduced.size());
  std::set<std::uint32_t> from_all;
  for (const auto& c : cands) {
    const auto v = viewshed(s, c);
    from_all.insert(v.begin(), v.end());
  }
  std::set<std::uint32_t> from_reduced;
  for (const auto& v : set.coverage_map) from_reduced.insert(v.begin(), v.end());
  CHECK(from_reduced == from_all);
  CHECK(set.covered_points == from_all.size());
}

TEST_CASE("paper-scale scene reduces to well under half of the candidates") {
  SceneParams p;
  p.building_count = 16;
  p.seed = 7;
  const Scene s = generate_scene(p);
  const CandidateSet set = reduce_candidates(s, enumerate_candidates(s));
  CHECK(static_cast<double>(set.reduced.size()) < 0.5 * static_cast<double>(set.candidates.size()));
  CHECK(s.service_area_size() > 8000);
  CHECK(s.service_area_size() < 20000);
}

TEST_CASE("scene documents round-trip") {
  SceneParams p;
  p.seed = 3;
  const Scene s = generate_scene(p);
  const Scene back = scene_from_json(scene_to_json(s));
  CHECK(back.buildings() == s.buildings());
  CHECK(back.extent() == s.extent());
  CHECK(back.seed() == s.seed());
  CHECK(back.service_area_size() == s.service_area_size());
  nlohmann::json bad = scene_to_json(s);
  bad.erase("version");
  CHECK_THROWS_AS(scene_from_json(bad), FormatError);
  bad = scene_to_json(s);
  bad["format"] = "something-else";
  CHECK_THROWS_AS(scene_from_json(bad), FormatError);
}

}  // TEST_SUITE
