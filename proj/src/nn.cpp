#include "mmsleep/nn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "mmsleep/errors.hpp"
#include "mmsleep/random.hpp"

namespace mmsleep {

namespace {

constexpr const char* kCheckpointFormat = "mmsleep-mlp";
constexpr int kCheckpointVersion = 1;

void check_input(const MlpModel& m, std::span<const double> input) {
  if (m.layers().empty()) throw DimensionError("model has no layers");
  if (input.size() != m.input_size()) {
    throw DimensionError("input has " + std::to_string(input.size()) + " values, model expects " +
                         std::to_string(m.input_size()));
  }
}

bool finite_all(const std::vector<double>& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace

MlpModel::MlpModel(std::vector<DenseLayer> layers, AdamConfig adam, std::uint64_t step)
    : layers_(std::move(layers)), adam_(adam), step_(step) {
  if (layers_.empty()) throw DimensionError("model needs at least one layer");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const DenseLayer& L = layers_[l];
    if (L.in == 0 || L.out == 0) throw DimensionError("layer " + std::to_string(l) + " has size 0");
    if (l > 0 && layers_[l - 1].out != L.in) {
      throw DimensionError("layer " + std::to_string(l) + " input does not match previous output");
    }
    const std::size_t nw = L.in * L.out;
    if (L.weights.size() != nw || L.m_weights.size() != nw || L.v_weights.size() != nw ||
        L.bias.size() != L.out || L.m_bias.size() != L.out || L.v_bias.size() != L.out) {
      throw DimensionError("layer " + std::to_string(l) + " tensors are mis-shaped");
    }
  }
}

std::size_t MlpModel::parameter_count() const {
  std::size_t n = 0;
  for (const DenseLayer& L : layers_) n += L.weights.size() + L.bias.size();
  return n;
}

std::vector<double> MlpModel::hidden(std::span<const double> input) const {
  std::vector<double> a(input.begin(), input.end());
  for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
    const DenseLayer& L = layers_[l];
    std::vector<double> z(L.out);
    for (std::size_t o = 0; o < L.out; ++o) {
      const double* w = &L.weights[o * L.in];
      double s = 0.0;
      for (std::size_t i = 0; i < L.in; ++i) s += w[i] * a[i];
      z[o] = std::max(0.0, L.bias[o] + s);
    }
    a = std::move(z);
  }
  return a;
}

std::vector<double> MlpModel::forward(std::span<const double> input) const {
  check_input(*this, input);
  const std::vector<double> h = hidden(input);
  const DenseLayer& L = layers_.back();
  std::vector<double> y(L.out);
  for (std::size_t o = 0; o < L.out; ++o) {
    const double* w = &L.weights[o * L.in];
    double s = 0.0;
    for (std::size_t i = 0; i < L.in; ++i) s += w[i] * h[i];
    y[o] = L.bias[o] + s;
  }
  return y;
}

double MlpModel::predict(std::span<const double> input, std::size_t output) const {
  check_input(*this, input);
  const DenseLayer& L = layers_.back();
  if (output >= L.out) throw DimensionError("output index out of range");
  const std::vector<double> h = hidden(input);
  const double* w = &L.weights[output * L.in];
  double s = 0.0;
  for (std::size_t i = 0; i < L.in; ++i) s += w[i] * h[i];
  return L.bias[output] + s;
}

double MlpModel::weight_norm_sq() const {
  double s = 0.0;
  for (const DenseLayer& L : layers_) {
    for (double w : L.weights) s += w * w;
  }
  return s;
}

bool MlpModel::all_finite() const {
  for (const DenseLayer& L : layers_) {
    if (!finite_all(L.weights) || !finite_all(L.bias) || !finite_all(L.m_weights) ||
        !finite_all(L.v_weights) || !finite_all(L.m_bias) || !finite_all(L.v_bias)) {
      return false;
    }
  }
  return true;
}

MlpModel init_weights(std::span<const std::size_t> sizes, std::uint64_t seed, AdamConfig adam) {
  if (sizes.size() < 2) throw DimensionError("need at least input and output sizes");
  for (std::size_t s : sizes) {
    if (s == 0) throw DimensionError("layer sizes must be positive");
  }
  Rng rng = make_rng(seed, 0x1417);
  std::vector<DenseLayer> layers;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    DenseLayer L;
    L.in = sizes[l];
    L.out = sizes[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(L.in));
    std::uniform_real_distribution<double> dist(-limit, limit);
    L.weights.resize(L.in * L.out);
    for (double& w : L.weights) w = dist(rng);
    L.bias.assign(L.out, 0.0);
    L.m_weights.assign(L.weights.size(), 0.0);
    L.v_weights.assign(L.weights.size(), 0.0);
    L.m_bias.assign(L.out, 0.0);
    L.v_bias.assign(L.out, 0.0);
    layers.push_back(std::move(L));
  }
  return MlpModel(std::move(layers), adam);
}

double loss(const MlpModel& model, std::span<const TrainSample> batch) {
  if (batch.empty()) throw std::invalid_argument("empty training batch");
  double data = 0.0;
  for (const TrainSample& s : batch) {
    const double e = model.predict(s.input, s.output) - s.target;
    data += e * e;
  }
  return data / static_cast<double>(batch.size()) + model.adam().l2_lambda * model.weight_norm_sq();
}

Gradients compute_gradients(const MlpModel& model, std::span<const TrainSample> batch) {
  if (batch.empty()) throw std::invalid_argument("empty training batch");
  const auto& layers = model.layers();
  const std::size_t depth = layers.size();
  const double lambda = model.adam().l2_lambda;
  const double scale = 2.0 / static_cast<double>(batch.size());

  Gradients g;
  for (const DenseLayer& L : layers) {
    g.weights.emplace_back(L.weights.size(), 0.0);
    g.bias.emplace_back(L.bias.size(), 0.0);
  }

  std::vector<std::vector<double>> acts(depth);  // acts[l] = input to layer l
  double data = 0.0;
  for (const TrainSample& s : batch) {
    check_input(model, s.input);
    if (s.output >= model.output_size()) throw DimensionError("output index out of range");
    // ReLU would map a NaN input to zero, so catch it here.
    if (!std::isfinite(s.target) ||
        !std::all_of(s.input.begin(), s.input.end(), [](double x) { return std::isfinite(x); })) {
      throw NumericError("non-finite training sample");
    }

    acts[0].assign(s.input.begin(), s.input.end());
    for (std::size_t l = 0; l + 1 < depth; ++l) {
      const DenseLayer& L = layers[l];
      std::vector<double>& next = acts[l + 1];
      next.assign(L.out, 0.0);
      for (std::size_t o = 0; o < L.out; ++o) {
        const double* w = &L.weights[o * L.in];
        double z = 0.0;
        for (std::size_t i = 0; i < L.in; ++i) z += w[i] * acts[l][i];
        next[o] = std::max(0.0, L.bias[o] + z);
      }
    }
    const DenseLayer& last = layers.back();
    const std::vector<double>& h = acts[depth - 1];
    const double* w_out = &last.weights[s.output * last.in];
    double dot = 0.0;
    for (std::size_t i = 0; i < last.in; ++i) dot += w_out[i] * h[i];
    // Same summation order as MlpModel::predict.
    const double pred = last.bias[s.output] + dot;
    const double err = pred - s.target;
    data += err * err;

    // Backward pass; only the selected output row carries gradient.
    const double d_out = scale * err;
    g.bias[depth - 1][s.output] += d_out;
    double* gw_out = &g.weights[depth - 1][s.output * last.in];
    std::vector<double> delta(last.in);
    for (std::size_t i = 0; i < last.in; ++i) {
      gw_out[i] += d_out * h[i];
      delta[i] = h[i] > 0.0 ? d_out * w_out[i] : 0.0;
    }
    for (std::size_t l = depth - 1; l-- > 0;) {
      const DenseLayer& L = layers[l];
      const std::vector<double>& a = acts[l];
      std::vector<double> prev(L.in, 0.0);
      for (std::size_t o = 0; o < L.out; ++o) {
        const double d = delta[o];
        if (d == 0.0) continue;
        g.bias[l][o] += d;
        const double* w = &L.weights[o * L.in];
        double* gw = &g.weights[l][o * L.in];
        for (std::size_t i = 0; i < L.in; ++i) {
          gw[i] += d * a[i];
          prev[i] += d * w[i];
        }
      }
      if (l > 0) {
        for (std::size_t i = 0; i < L.in; ++i) prev[i] = a[i] > 0.0 ? prev[i] : 0.0;
      }
      delta = std::move(prev);
    }
  }

  for (std::size_t l = 0; l < depth; ++l) {
    const auto& w = layers[l].weights;
    for (std::size_t k = 0; k < w.size(); ++k) g.weights[l][k] += 2.0 * lambda * w[k];
  }
  g.loss = data / static_cast<double>(batch.size()) + lambda * model.weight_norm_sq();
  return g;
}

double train_step(MlpModel& model, std::span<const TrainSample> batch) {
  const Gradients g = compute_gradients(model, batch);
  if (!std::isfinite(g.loss)) {
    throw NumericError("non-finite training loss (" + std::to_string(g.loss) + ")");
  }

  const AdamConfig& a = model.adam();
  const std::vector<DenseLayer> backup = model.layers();
  const std::uint64_t t = model.step() + 1;
  const double bc1 = 1.0 - std::pow(a.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(a.beta2, static_cast<double>(t));
  auto update = [&](std::vector<double>& p, std::vector<double>& m, std::vector<double>& v,
                    const std::vector<double>& grad) {
    for (std::size_t k = 0; k < p.size(); ++k) {
      m[k] = a.beta1 * m[k] + (1.0 - a.beta1) * grad[k];
      v[k] = a.beta2 * v[k] + (1.0 - a.beta2) * grad[k] * grad[k];
      const double m_hat = m[k] / bc1;
      const double v_hat = v[k] / bc2;
      p[k] -= a.learning_rate * m_hat / (std::sqrt(v_hat) + a.epsilon);
    }
  };
  auto& layers = model.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    DenseLayer& L = layers[l];
    update(L.weights, L.m_weights, L.v_weights, g.weights[l]);
    update(L.bias, L.m_bias, L.v_bias, g.bias[l]);
  }
  if (!model.all_finite()) {
    model.layers() = backup;
    throw NumericError("Adam update produced non-finite parameters");
  }
  model.set_step(t);
  return g.loss;
}

std::string checkpoint_to_string(const MlpModel& model) {
  nlohmann::json j;
  j["format"] = kCheckpointFormat;
  j["version"] = kCheckpointVersion;
  const AdamConfig& a = model.adam();
  j["adam"] = {{"learning_rate", a.learning_rate}, {"beta1", a.beta1}, {"beta2", a.beta2},
               {"epsilon", a.epsilon},             {"l2_lambda", a.l2_lambda}};
  j["step"] = model.step();
  j["layers"] = nlohmann::json::array();
  for (const DenseLayer& L : model.layers()) {
    j["layers"].push_back({{"in", L.in},
                           {"out", L.out},
                           {"weights", L.weights},
                           {"bias", L.bias},
                           {"m_weights", L.m_weights},
                           {"v_weights", L.v_weights},
                           {"m_bias", L.m_bias},
                           {"v_bias", L.v_bias}});
  }
  return j.dump();
}

MlpModel checkpoint_from_string(const std::string& text) {
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    if (j.at("format").get<std::string>() != kCheckpointFormat) {
      throw FormatError("not an mmsleep model checkpoint");
    }
    if (j.at("version").get<int>() != kCheckpointVersion) {
      throw FormatError("unsupported checkpoint version " + j.at("version").dump());
    }
    AdamConfig a;
    const auto& ja = j.at("adam");
    a.learning_rate = ja.at("learning_rate").get<double>();
    a.beta1 = ja.at("beta1").get<double>();
    a.beta2 = ja.at("beta2").get<double>();
    a.epsilon = ja.at("epsilon").get<double>();
    a.l2_lambda = ja.at("l2_lambda").get<double>();
    std::vector<DenseLayer> layers;
    for (const auto& jl : j.at("layers")) {
      DenseLayer L;
      L.in = jl.at("in").get<std::size_t>();
      L.out = jl.at("out").get<std::size_t>();
      L.weights = jl.at("weights").get<std::vector<double>>();
      L.bias = jl.at("bias").get<std::vector<double>>();
      L.m_weights = jl.at("m_weights").get<std::vector<double>>();
      L.v_weights = jl.at("v_weights").get<std::vector<double>>();
      L.m_bias = jl.at("m_bias").get<std::vector<double>>();
      L.v_bias = jl.at("v_bias").get<std::vector<double>>();
      layers.push_back(std::move(L));
    }
    return MlpModel(std::move(layers), a, j.at("step").get<std::uint64_t>());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const MlpModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out << checkpoint_to_string(model) << '\n';
}

MlpModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_string(ss.str());
}

}  // namespace mmsleep
