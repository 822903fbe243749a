#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mmsleep/scene.hpp"

namespace mmsleep {

/// Per-BS on/off vector: 1 = active, 0 = sleeping.
using ActionMask = std::vector<std::uint8_t>;

struct RadioConfig {
  double carrier_ghz = 28.0;
  double tx_power_dbm = 20.0;
  double total_bandwidth_hz = 50e6;
  double boltzmann = 1.380649e-23;
  double temperature_k = 298.0;
  double noise_figure_db = 9.0;
  double main_lobe_gain_db = 20.0;
  double side_lobe_gain_db = 0.0;
  double sensitivity_dbm = -90.0;
};

/// gNB power draw. Defaults are placeholder magnitudes, not measured values.
struct PowerModelConfig {
  double p_bbu_w = 100.0;
  double p_aau_w = 300.0;
  double cooling_loss = 0.1;
  double dc_loss = 0.05;
  double sleep_power_w = 0.0;
};

/// Throws ConfigError on any violated invariant.
void validate(const RadioConfig& config);
void validate(const PowerModelConfig& config);

/// UMa path loss (dB). Distances under 1 m are clamped to 1 m.
double path_loss_db(const RadioConfig& config, double d3d_m, bool los);

/// P_rx = P_tx + G - PL. Path loss is subtracted so that received power
/// falls with distance.
double received_power_dbm(double tx_dbm, double gain_db, double path_loss_db);

/// Thermal noise times noise figure, k * T * B * NF (watts).
double noise_w(const RadioConfig& config, double bandwidth_hz);

double dbm_to_w(double dbm);

/// (P_BBU + P_AAU) / ((1 - cooling) (1 - dc)).
double gnb_power_w(const PowerModelConfig& power);

/// Percentile by linear interpolation between order statistics
/// (rank = q (n - 1) on the sorted values). Throws on empty input.
double percentile(std::span<const double> values, double q);
inline double percentile_10(std::span<const double> values) { return percentile(values, 0.10); }

/// Distance and LOS flag of every UE/BS pair, computed once per snapshot so
/// that several masks can be evaluated against the same geometry.
struct LinkGeometry {
  std::size_t n_ue = 0;
  std::size_t n_bs = 0;
  std::vector<double> distance_m;  // [ue * n_bs + bs]
  std::vector<std::uint8_t> los;   // [ue * n_bs + bs]
  std::vector<double> path_loss_db;
};

LinkGeometry compute_link_geometry(const Scene& scene, std::span<const GridPoint3D> sites,
                                   std::span<const GridPoint3D> ues, const RadioConfig& config);

struct LinkReport {
  // Per UE.
  std::vector<std::optional<std::size_t>> serving;
  std::vector<std::vector<std::size_t>> interferers;
  std::vector<double> serving_rx_dbm;  // -inf when uncovered
  std::vector<double> interference_w;
  std::vector<double> bandwidth_hz;
  std::vector<double> throughput_bps;
  // Per BS.
  std::vector<std::size_t> load;
  std::vector<std::uint8_t> active;
  // Aggregates.
  double total_throughput_bps = 0.0;
  double avg_throughput_bps = 0.0;
  double p10_throughput_bps = 0.0;
  double total_power_w = 0.0;
  double energy_efficiency_bpj = 0.0;
};

/// Association, interference sets, round-robin bandwidth, throughput and
/// energy for one mask over a precomputed geometry.
///
/// A UE is covered when some active BS reaches it at >= sensitivity with the
/// main-lobe gain; it is served by the strongest such BS (lowest index on
/// ties). Every other active BS reaching it at >= sensitivity with the
/// side-lobe gain interferes.
LinkReport evaluate_links(const LinkGeometry& geometry, std::span<const std::uint8_t> mask,
                          const RadioConfig& config, const PowerModelConfig& power);

LinkReport evaluate_network(const Scene& scene, std::span<const GridPoint3D> sites,
                            std::span<const std::uint8_t> mask, std::span<const GridPoint3D> ues,
                            const RadioConfig& config, const PowerModelConfig& power);

}  // namespace mmsleep
