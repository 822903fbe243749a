#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace mmsleep {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // L2 penalty on weights (biases are not penalized).
  double l2_lambda = 1e-4;
};

struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weights;  // out x in, row-major
  std::vector<double> bias;
  std::vector<double> m_weights;
  std::vector<double> v_weights;
  std::vector<double> m_bias;
  std::vector<double> v_bias;
};

/// Dense ReLU network with a linear output layer and its Adam state.
class MlpModel {
 public:
  MlpModel() = default;
  MlpModel(std::vector<DenseLayer> layers, AdamConfig adam, std::uint64_t step = 0);

  std::size_t input_size() const { return layers_.front().in; }
  std::size_t output_size() const { return layers_.back().out; }
  std::size_t parameter_count() const;

  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& layers() { return layers_; }
  const AdamConfig& adam() const { return adam_; }
  std::uint64_t step() const { return step_; }
  void set_step(std::uint64_t s) { step_ = s; }

  /// Full output vector. Throws DimensionError on an input-size mismatch.
  std::vector<double> forward(std::span<const double> input) const;
  /// One output unit only; skips the rest of the last layer.
  double predict(std::span<const double> input, std::size_t output) const;

  double weight_norm_sq() const;
  bool all_finite() const;

 private:
  std::vector<double> hidden(std::span<const double> input) const;

  std::vector<DenseLayer> layers_;
  AdamConfig adam_;
  std::uint64_t step_ = 0;
};

/// He-scaled uniform weights, U(-sqrt(6/fan_in), sqrt(6/fan_in)); zero biases
/// and moments. `sizes` = [input, hidden..., output]; every entry must be > 0.
MlpModel init_weights(std::span<const std::size_t> sizes, std::uint64_t seed,
                      AdamConfig adam = {});

/// Supervision for one output unit (bandit feedback: only the taken action's
/// reward is observed).
struct TrainSample {
  std::vector<double> input;
  std::size_t output = 0;
  double target = 0.0;
};

struct Gradients {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> bias;
  double loss = 0.0;
};

/// mean_b (y_b[a_b] - target_b)^2 + lambda * sum(W^2)
double loss(const MlpModel& model, std::span<const TrainSample> batch);

Gradients compute_gradients(const MlpModel& model, std::span<const TrainSample> batch);

/// One bias-corrected Adam step. Returns the loss before the step. A
/// non-finite loss or update throws NumericError and leaves the model as it
/// was.
double train_step(MlpModel& model, std::span<const TrainSample> batch);

// Checkpoints are JSON text; doubles are written in shortest round-trip form
// so a reloaded model reproduces forward() bit for bit.
std::string checkpoint_to_string(const MlpModel& model);
MlpModel checkpoint_from_string(const std::string& text);
void save_checkpoint(const MlpModel& model, const std::filesystem::path& path);
MlpModel load_checkpoint(const std::filesystem::path& path);

}  // namespace mmsleep
