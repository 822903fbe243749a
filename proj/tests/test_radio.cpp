#include <doctest.h>

#include <cmath>
#include <vector>

#include "mmsleep/errors.hpp"
#include "mmsleep/radio.hpp"
#include "mmsleep/random.hpp"
#include "mmsleep/scene.hpp"

using namespace mmsleep;

namespace {

// Geometry with hand-set path losses; distances and LOS flags are unused by
// the evaluation.
LinkGeometry geometry(std::size_t n_ue, std::size_t n_bs, std::vector<double> pl) {
  LinkGeometry g;
  g.n_ue = n_ue;
  g.n_bs = n_bs;
  g.distance_m.assign(n_ue * n_bs, 10.0);
  g.los.assign(n_ue * n_bs, 1);
  g.path_loss_db = std::move(pl);
  return g;
}

}  // namespace

TEST_SUITE("radio") {

TEST_CASE("path loss at 28 GHz and 100 m") {
  const RadioConfig c;
  CHECK(std::abs(path_loss_db(c, 100.0, true) - 100.9432) < 1e-4);
  CHECK(std::abs(path_loss_db(c, 100.0, false) - 121.3432) < 1e-4);
  // Independent evaluation of the same closed forms.
  const double lf = 20.0 * std::log10(28.0);
  CHECK(path_loss_db(c, 100.0, true) == doctest::Approx(28.0 + lf + 44.0).epsilon(1e-15));
  CHECK(path_loss_db(c, 100.0, false) == doctest::Approx(32.4 + lf + 60.0).epsilon(1e-15));
  RadioConfig one;
  one.carrier_ghz = 1.0;
  CHECK(path_loss_db(one, 1.0, true) == 28.0);
}

TEST_CASE("path loss clamps short distances and is monotone") {
  const RadioConfig c;
  CHECK(path_loss_db(c, 0.2, true) == path_loss_db(c, 1.0, true));
  double prev_los = path_loss_db(c, 1.0, true), prev_nlos = path_loss_db(c, 1.0, false);
  for (double d = 1.5; d < 500.0; d *= 1.3) {
    const double los = path_loss_db(c, d, true), nlos = path_loss_db(c, d, false);
    CHECK(los > prev_los);
    CHECK(nlos > prev_nlos);
    CHECK(nlos >= los);
    prev_los = los;
    prev_nlos = nlos;
  }
}

TEST_CASE("received power subtracts path loss") {
  CHECK(received_power_dbm(20, 20, 100.9432) == doctest::Approx(-60.9432).epsilon(1e-12));
  CHECK(received_power_dbm(20, 0, 0) == 20.0);
  CHECK(received_power_dbm(20, 20, 121.3432) == doctest::Approx(-81.3432).epsilon(1e-12));
}

TEST_CASE("thermal noise") {
  RadioConfig c;
  CHECK(noise_w(c, 50e6) == doctest::Approx(1.633e-12).epsilon(1e-3));
  CHECK(noise_w(c, 50e6) ==
        doctest::Approx(1.380649e-23 * 298 * 5e7 * std::pow(10.0, 0.9)).epsilon(1e-14));
  c.noise_figure_db = 0.0;
  CHECK(noise_w(c, 1.0) == doctest::Approx(4.114e-21).epsilon(1e-3));
  CHECK(noise_w(c, 1.0) == 1.380649e-23 * 298.0);
}

TEST_CASE("gNB power with default constants") {
  const PowerModelConfig p;
  CHECK(gnb_power_w(p) == doctest::Approx(467.836).epsilon(1e-6));
  CHECK(gnb_power_w(p) == doctest::Approx(400.0 / 0.855).epsilon(1e-15));
}

TEST_CASE("percentile by linear interpolation") {
  const std::vector<double> v{100, 90, 80, 70, 60, 50, 40, 30, 20, 10};
  CHECK(percentile_10(v) == doctest::Approx(19.0).epsilon(1e-15));
  CHECK(percentile_10(std::vector<double>(7, 3.25)) == 3.25);
  CHECK(percentile_10(std::vector<double>{42.0}) == 42.0);
  CHECK_THROWS(percentile_10(std::vector<double>{}));
}

TEST_CASE("unit SNR gives one bit per second per hertz") {
  const RadioConfig c;
  const double psi_dbm = 10.0 * std::log10(noise_w(c, c.total_bandwidth_hz) / 1e-3);
  const double pl = c.tx_power_dbm + c.main_lobe_gain_db - psi_dbm;
  const LinkReport r = evaluate_links(geometry(1, 1, {pl}), ActionMask{1}, c, PowerModelConfig{});
  REQUIRE(r.serving[0].has_value());
  CHECK(r.interferers[0].empty());
  CHECK(r.throughput_bps[0] == doctest::Approx(50e6).epsilon(1e-9));
}

TEST_CASE("round-robin split between two users") {
  const RadioConfig c;
  const LinkReport r = evaluate_links(geometry(2, 1, {80.0, 85.0}), ActionMask{1}, c, {});
  CHECK(r.bandwidth_hz[0] == 25e6);
  CHECK(r.bandwidth_hz[1] == 25e6);
  CHECK(r.load[0] == 2);
}

TEST_CASE("association, interference and coverage") {
  const RadioConfig c;
  // UE 0 hears BS 0 best, BS 1 as interferer (side lobe: 20 - 105 = -85 dBm),
  // BS 2 too weak to interfere (20 - 115 = -95 dBm).
  // UE 1 hears nothing above sensitivity: uncovered.
  const LinkReport r =
      evaluate_links(geometry(2, 3, {90.0, 105.0, 115.0, 200.0, 200.0, 200.0}), ActionMask{1, 1, 1},
                     c, PowerModelConfig{});
  CHECK(r.serving[0] == std::optional<std::size_t>(0));
  CHECK(r.interferers[0] == std::vector<std::size_t>{1});
  CHECK_FALSE(r.serving[1].has_value());
  CHECK(r.throughput_bps[1] == 0.0);
  CHECK(r.throughput_bps[0] > 0.0);
  CHECK(r.total_power_w == doctest::Approx(3 * gnb_power_w({})).epsilon(1e-15));
  CHECK(r.energy_efficiency_bpj == r.total_throughput_bps / r.total_power_w);
}

TEST_CASE("ties go to the lowest BS index") {
  const LinkReport r =
      evaluate_links(geometry(1, 2, {95.0, 95.0}), ActionMask{1, 1}, RadioConfig{}, {});
  CHECK(r.serving[0] == std::optional<std::size_t>(0));
}

TEST_CASE("no active BS gives zero throughput and zero EE") {
  PowerModelConfig p;
  const LinkReport r = evaluate_links(geometry(2, 2, {90, 90, 90, 90}), ActionMask{0, 0}, {}, p);
  CHECK(r.total_throughput_bps == 0.0);
  CHECK(r.energy_efficiency_bpj == 0.0);
  p.sleep_power_w = 12.0;
  CHECK(evaluate_links(geometry(2, 2, {90, 90, 90, 90}), ActionMask{0, 0}, {}, p).total_power_w ==
        24.0);
}

TEST_CASE("silencing an interferer never lowers any throughput") {
  const RadioConfig c;
  Rng rng(5);
  std::uniform_real_distribution<double> pl(70.0, 112.0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t U = 12, N = 5;
    std::vector<double> loss(U * N);
    for (double& v : loss) v = pl(rng);
    const LinkGeometry g = geometry(U, N, loss);
    const ActionMask all(N, 1);
    const LinkReport base = evaluate_links(g, all, c, {});
    for (std::size_t b = 0; b < N; ++b) {
      bool serves = false;
      for (const auto& s : base.serving) serves = serves || (s && *s == b);
      if (serves) continue;
      ActionMask m = all;
      m[b] = 0;
      const LinkReport off = evaluate_links(g, m, c, {});
      for (std::size_t u = 0; u < U; ++u) CHECK(off.throughput_bps[u] >= base.throughput_bps[u]);
    }
  }
}

TEST_CASE("evaluate_network matches the geometry path and is deterministic") {
  const Scene s({60, 60, 40}, 1.0, {{20, 20, 15, 15, 18}});
  const std::vector<GridPoint3D> sites{{20.5, 20.5, 18}, {34.5, 34.5, 18}};
  const std::vector<GridPoint3D> ues{{5.5, 5.5, 1.5}, {50.5, 50.5, 1.5}, {5.5, 50.5, 1.5}};
  const RadioConfig c;
  const ActionMask mask{1, 1};
  const LinkReport a = evaluate_network(s, sites, mask, ues, c, {});
  const LinkReport b = evaluate_network(s, sites, mask, ues, c, {});
  CHECK(a.throughput_bps == b.throughput_bps);
  const LinkGeometry g = compute_link_geometry(s, sites, ues, c);
  CHECK(g.los[0 * 2 + 0] == 1);
  CHECK(g.los[1 * 2 + 0] == 0);
  CHECK(g.los[1 * 2 + 1] == 1);
  CHECK(evaluate_links(g, mask, c, {}).throughput_bps == a.throughput_bps);
  CHECK_THROWS(compute_link_geometry(s, sites, std::vector<GridPoint3D>{{25.5, 25.5, 1.5}}, c));
}

TEST_CASE("config validation") {
  RadioConfig r;
  r.total_bandwidth_hz = 0;
  CHECK_THROWS_AS(validate(r), ConfigError);
  r = {};
  r.side_lobe_gain_db = 30;
  CHECK_THROWS_AS(validate(r), ConfigError);
  PowerModelConfig p;
  p.cooling_loss = 1.0;
  CHECK_THROWS_AS(validate(p), ConfigError);
}

}  // TEST_SUITE
