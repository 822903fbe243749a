#include "mmsleep/radio.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mmsleep/errors.hpp"

namespace mmsleep {

void validate(const RadioConfig& c) {
  const double values[] = {c.carrier_ghz,     c.tx_power_dbm,      c.total_bandwidth_hz,
                           c.boltzmann,       c.temperature_k,     c.noise_figure_db,
                           c.main_lobe_gain_db, c.side_lobe_gain_db, c.sensitivity_dbm};
  for (double v : values) {
    if (!std::isfinite(v)) throw ConfigError("radio: all values must be finite");
  }
  if (!(c.total_bandwidth_hz > 0.0)) throw ConfigError("radio: total_bandwidth_hz must be > 0");
  if (!(c.carrier_ghz > 0.0)) throw ConfigError("radio: carrier_ghz must be > 0");
  if (c.main_lobe_gain_db < c.side_lobe_gain_db) {
    throw ConfigError("radio: main_lobe_gain_db must be >= side_lobe_gain_db");
  }
}

void validate(const PowerModelConfig& p) {
  if (!(p.cooling_loss >= 0.0 && p.cooling_loss < 1.0) || !(p.dc_loss >= 0.0 && p.dc_loss < 1.0)) {
    throw ConfigError("power: loss fractions must lie in [0, 1)");
  }
  if (!(p.p_bbu_w >= 0.0 && p.p_aau_w >= 0.0 && p.sleep_power_w >= 0.0) ||
      !std::isfinite(p.p_bbu_w + p.p_aau_w + p.sleep_power_w)) {
    throw ConfigError("power: powers must be finite and non-negative");
  }
}

double path_loss_db(const RadioConfig& config, double d3d_m, bool los) {
  const double d = std::max(d3d_m, 1.0);
  const double f_term = 20.0 * std::log10(config.carrier_ghz);
  return los ? 28.0 + f_term + 22.0 * std::log10(d) : 32.4 + f_term + 30.0 * std::log10(d);
}

double received_power_dbm(double tx_dbm, double gain_db, double pl_db) {
  return tx_dbm + gain_db - pl_db;
}

double noise_w(const RadioConfig& config, double bandwidth_hz) {
  if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("noise bandwidth must be positive");
  return config.boltzmann * config.temperature_k * bandwidth_hz *
         std::pow(10.0, config.noise_figure_db / 10.0);
}

double dbm_to_w(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double gnb_power_w(const PowerModelConfig& power) {
  return (power.p_bbu_w + power.p_aau_w) / ((1.0 - power.cooling_loss) * (1.0 - power.dc_loss));
}

double percentile(std::span<const double> values, double q) {
  if (values.empty()) throw std::invalid_argument("percentile of an empty list");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("percentile rank must lie in [0, 1]");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double rank = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const double frac = rank - static_cast<double>(lo);
  if (lo + 1 >= v.size() || frac == 0.0) return v[lo];
  return v[lo] + frac * (v[lo + 1] - v[lo]);
}

LinkGeometry compute_link_geometry(const Scene& scene, std::span<const GridPoint3D> sites,
                                   std::span<const GridPoint3D> ues, const RadioConfig& config) {
  LinkGeometry g;
  g.n_ue = ues.size();
  g.n_bs = sites.size();
  g.distance_m.resize(g.n_ue * g.n_bs);
  g.los.resize(g.n_ue * g.n_bs);
  g.path_loss_db.resize(g.n_ue * g.n_bs);
  for (std::size_t u = 0; u < ues.size(); ++u) {
    const GridPoint3D& ue = ues[u];
    if (!scene.contains(ue)) throw std::invalid_argument("UE position outside the scene");
    const CellIndex c = scene.cell_of(ue.x, ue.y);
    if (scene.owner(c.i, c.j) != -1) throw std::invalid_argument("UE position inside a building");
    for (std::size_t b = 0; b < sites.size(); ++b) {
      const GridPoint3D& s = sites[b];
      const double d = std::sqrt((s.x - ue.x) * (s.x - ue.x) + (s.y - ue.y) * (s.y - ue.y) +
                                 (s.z - ue.z) * (s.z - ue.z));
      const bool los = scene.line_of_sight(s, ue);
      const std::size_t k = u * g.n_bs + b;
      g.distance_m[k] = d;
      g.los[k] = los ? 1 : 0;
      g.path_loss_db[k] = path_loss_db(config, d, los);
    }
  }
  return g;
}

LinkReport evaluate_links(const LinkGeometry& g, std::span<const std::uint8_t> mask,
                          const RadioConfig& config, const PowerModelConfig& power) {
  if (mask.size() != g.n_bs) throw std::invalid_argument("mask length differs from site count");

  LinkReport r;
  const std::size_t U = g.n_ue;
  const std::size_t N = g.n_bs;
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  r.serving.assign(U, std::nullopt);
  r.interferers.assign(U, {});
  r.serving_rx_dbm.assign(U, kNegInf);
  r.interference_w.assign(U, 0.0);
  r.bandwidth_hz.assign(U, 0.0);
  r.throughput_bps.assign(U, 0.0);
  r.load.assign(N, 0);
  r.active.assign(mask.begin(), mask.end());

  for (std::size_t u = 0; u < U; ++u) {
    std::optional<std::size_t> best;
    double best_rx = kNegInf;
    for (std::size_t b = 0; b < N; ++b) {
      if (!mask[b]) continue;
      const double rx = received_power_dbm(config.tx_power_dbm, config.main_lobe_gain_db,
                                           g.path_loss_db[u * N + b]);
      if (rx >= config.sensitivity_dbm && rx > best_rx) {
        best_rx = rx;
        best = b;
      }
    }
    if (!best) continue;
    r.serving[u] = best;
    r.serving_rx_dbm[u] = best_rx;
    ++r.load[*best];
    for (std::size_t b = 0; b < N; ++b) {
      if (!mask[b] || b == *best) continue;
      const double rx = received_power_dbm(config.tx_power_dbm, config.side_lobe_gain_db,
                                           g.path_loss_db[u * N + b]);
      if (rx >= config.sensitivity_dbm) {
        r.interferers[u].push_back(b);
        r.interference_w[u] += dbm_to_w(rx);
      }
    }
  }

  for (std::size_t u = 0; u < U; ++u) {
    if (!r.serving[u]) continue;
    const double bw = config.total_bandwidth_hz / static_cast<double>(r.load[*r.serving[u]]);
    const double signal = dbm_to_w(r.serving_rx_dbm[u]);
    r.bandwidth_hz[u] = bw;
    r.throughput_bps[u] = bw * std::log2(1.0 + signal / (r.interference_w[u] + noise_w(config, bw)));
    r.total_throughput_bps += r.throughput_bps[u];
  }
  if (U > 0) {
    r.avg_throughput_bps = r.total_throughput_bps / static_cast<double>(U);
    r.p10_throughput_bps = percentile_10(r.throughput_bps);
  }

  const double active_draw = gnb_power_w(power);
  for (std::size_t b = 0; b < N; ++b) r.total_power_w += mask[b] ? active_draw : power.sleep_power_w;
  r.energy_efficiency_bpj = r.total_power_w > 0.0 ? r.total_throughput_bps / r.total_power_w : 0.0;
  return r;
}

LinkReport evaluate_network(const Scene& scene, std::span<const GridPoint3D> sites,
                            std::span<const std::uint8_t> mask, std::span<const GridPoint3D> ues,
                            const RadioConfig& config, const PowerModelConfig& power) {
  if (mask.size() != sites.size()) throw std::invalid_argument("mask length differs from site count");
  return evaluate_links(compute_link_geometry(scene, sites, ues, config), mask, config, power);
}

}  // namespace mmsleep
