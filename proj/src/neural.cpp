#include "sts/neural.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <sstream>
#include <string>

#include "format_util.hpp"
#include "sts/random.hpp"

namespace sts {

NNModel::NNModel(unsigned input_bits, std::vector<DenseLayer> layers, double output_scale)
    : input_bits_(input_bits), layers_(std::move(layers)), output_scale_(output_scale) {
  if (layers_.empty()) throw std::invalid_argument("network needs at least one layer");
  std::size_t width = input_bits_;
  for (const auto& l : layers_) {
    if (l.inputs != width) throw std::invalid_argument("layer input width does not match previous layer");
    if (l.weights.size() != l.inputs * l.outputs || l.bias.size() != l.outputs)
      throw std::invalid_argument("layer parameter count does not match its shape");
    for (double v : l.weights)
      if (!std::isfinite(v)) throw std::invalid_argument("non-finite weight");
    for (double v : l.bias)
      if (!std::isfinite(v)) throw std::invalid_argument("non-finite bias");
    width = l.outputs;
  }
  if (width != 1 || layers_.back().relu) throw std::invalid_argument("network must end in one linear output neuron");
  if (!(output_scale_ > 0.0) || !std::isfinite(output_scale_)) throw std::invalid_argument("bad output scale");
}

NNModel NNModel::initialize(int hidden_layers, unsigned input_bits, double output_scale, std::uint64_t seed,
                            std::size_t width) {
  if (hidden_layers < 0 || hidden_layers > 2) throw std::invalid_argument("hidden layers must be 0, 1 or 2");
  Rng rng(seed);
  std::vector<DenseLayer> layers;
  auto make = [&](std::size_t in, std::size_t out, bool relu) {
    DenseLayer l{in, out, relu, std::vector<double>(in * out), std::vector<double>(out, 0.0)};
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    for (auto& w : l.weights) w = (2.0 * rng.uniform01() - 1.0) * limit;
    layers.push_back(std::move(l));
  };
  make(input_bits, width, true);
  for (int k = 0; k < hidden_layers; ++k) make(width, width, true);
  make(width, 1, false);
  return NNModel(input_bits, std::move(layers), output_scale);
}

double NNModel::forward(std::span<const double> input) const {
  std::vector<double> cur(input.begin(), input.end()), next;
  for (const auto& l : layers_) {
    next.assign(l.outputs, 0.0);
    for (std::size_t o = 0; o < l.outputs; ++o) {
      const double* row = &l.weights[o * l.inputs];
      double acc = l.bias[o];
      for (std::size_t i = 0; i < l.inputs; ++i) acc += row[i] * cur[i];
      next[o] = l.relu ? std::max(0.0, acc) : acc;
    }
    cur.swap(next);
  }
  return cur[0];
}

double NNModel::predict(std::uint64_t key) const { return forward(encode_key(key, input_bits_)) * output_scale_; }

std::size_t NNModel::parameter_count() const {
  std::size_t c = 0;
  for (const auto& l : layers_) c += l.weights.size() + l.bias.size();
  return c;
}

std::vector<double> NNModel::parameters() const {
  std::vector<double> p;
  p.reserve(parameter_count());
  for (const auto& l : layers_) {
    p.insert(p.end(), l.weights.begin(), l.weights.end());
    p.insert(p.end(), l.bias.begin(), l.bias.end());
  }
  return p;
}

void NNModel::set_parameters(std::span<const double> params) {
  if (params.size() != parameter_count()) throw std::invalid_argument("parameter vector has wrong length");
  std::size_t k = 0;
  for (auto& l : layers_) {
    for (auto& w : l.weights) w = params[k++];
    for (auto& b : l.bias) b = params[k++];
  }
}

std::vector<double> encode_key(std::uint64_t x, unsigned bits) {
  if (bits == 0 || bits > 64) throw std::invalid_argument("input width must be in [1, 64] bits");
  if (bits < 64 && (x >> bits) != 0)
    throw std::invalid_argument("key " + std::to_string(x) + " does not fit in " + std::to_string(bits) + " bits");
  std::vector<double> out(bits);
  for (unsigned i = 0; i < bits; ++i) out[i] = static_cast<double>((x >> (bits - 1 - i)) & 1u);
  return out;
}

namespace {

// Scratch buffers for one backpropagation pass.
struct Workspace {
  std::vector<std::vector<double>> act;  // act[0] = input, act[l+1] = output of layer l
  std::vector<double> delta, prev_delta;
};

double accumulate_sample(const NNModel& model, std::span<const double> input, double target, double weight,
                         Workspace& ws, std::vector<double>* grad) {
  const auto& layers = model.layers();
  ws.act.resize(layers.size() + 1);
  ws.act[0].assign(input.begin(), input.end());
  for (std::size_t li = 0; li < layers.size(); ++li) {
    const auto& l = layers[li];
    auto& out = ws.act[li + 1];
    out.assign(l.outputs, 0.0);
    const auto& in = ws.act[li];
    for (std::size_t o = 0; o < l.outputs; ++o) {
      const double* row = &l.weights[o * l.inputs];
      double acc = l.bias[o];
      for (std::size_t i = 0; i < l.inputs; ++i) acc += row[i] * in[i];
      out[o] = l.relu ? std::max(0.0, acc) : acc;
    }
  }
  const double err = ws.act.back()[0] - target;
  if (grad == nullptr) return err * err;

  // Offsets of each layer's block in the flat gradient.
  std::size_t offset = grad->size();
  ws.delta.assign(1, 2.0 * err * weight);
  for (std::size_t li = layers.size(); li-- > 0;) {
    const auto& l = layers[li];
    offset -= l.weights.size() + l.bias.size();
    double* gw = grad->data() + offset;
    double* gb = gw + l.weights.size();
    const auto& in = ws.act[li];
    for (std::size_t o = 0; o < l.outputs; ++o) {
      const double d = ws.delta[o];
      if (d == 0.0) continue;
      double* grow = gw + o * l.inputs;
      for (std::size_t i = 0; i < l.inputs; ++i) grow[i] += d * in[i];
      gb[o] += d;
    }
    if (li == 0) break;
    ws.prev_delta.assign(l.inputs, 0.0);
    for (std::size_t o = 0; o < l.outputs; ++o) {
      const double d = ws.delta[o];
      if (d == 0.0) continue;
      const double* row = &l.weights[o * l.inputs];
      for (std::size_t i = 0; i < l.inputs; ++i) ws.prev_delta[i] += row[i] * d;
    }
    // ReLU derivative of the layer below, taken from its stored output.
    if (layers[li - 1].relu)
      for (std::size_t i = 0; i < l.inputs; ++i)
        if (in[i] <= 0.0) ws.prev_delta[i] = 0.0;
    ws.delta.swap(ws.prev_delta);
  }
  return err * err;
}

}  // namespace

double loss_and_gradient(const NNModel& model, std::span<const double> inputs, std::span<const double> targets,
                         std::vector<double>* gradient) {
  const std::size_t d = model.input_bits();
  if (targets.empty() || inputs.size() != targets.size() * d)
    throw std::invalid_argument("inputs must hold one row of input_bits values per target");
  if (gradient) gradient->assign(model.parameter_count(), 0.0);
  const double weight = 1.0 / static_cast<double>(targets.size());
  Workspace ws;
  double loss = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i)
    loss += accumulate_sample(model, inputs.subspan(i * d, d), targets[i], weight, ws, gradient);
  return loss * weight;
}

TrainResult nn_train(const SampleSet& samples, int hidden_layers, const TrainConfig& config, unsigned input_bits) {
  const std::size_t n = samples.size();
  if (n < 2) throw std::invalid_argument("training needs at least two samples");
  if (!(config.tolerance > 0.0)) throw std::invalid_argument("training tolerance must be positive");
  if (config.batch_size == 0) throw std::invalid_argument("batch size must be positive");

  double scale = 0.0;
  for (double y : samples.y) scale = std::max(scale, std::abs(y));
  if (scale == 0.0) scale = 1.0;

  const std::size_t d = input_bits;
  std::vector<double> inputs(n * d), targets(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(samples.x[i] >= 0.0)) throw std::invalid_argument("network inputs must be non-negative keys");
    const auto bits = encode_key(static_cast<std::uint64_t>(samples.x[i]), input_bits);
    std::copy(bits.begin(), bits.end(), inputs.begin() + static_cast<std::ptrdiff_t>(i * d));
    targets[i] = samples.y[i] / scale;
  }

  TrainResult result{NNModel::initialize(hidden_layers, input_bits, scale, config.seed), {}};
  NNModel& model = result.model;
  Rng rng(config.seed ^ 0x9e3779b97f4a7c15ULL);

  auto check = [&](double e) {
    if (!std::isfinite(e))
      throw TrainingDiverged("training diverged (non-finite loss); try a smaller learning rate than " +
                             std::to_string(config.learning_rate));
    return e;
  };
  result.history.push_back(check(loss_and_gradient(model, inputs, targets, nullptr)));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> batch_in, batch_t, grad;
  std::vector<double> params = model.parameters();
  for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
    rng.shuffle(order.begin(), order.end());
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t end = std::min(n, start + config.batch_size);
      batch_in.clear();
      batch_t.clear();
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t i = order[k];
        batch_in.insert(batch_in.end(), inputs.begin() + static_cast<std::ptrdiff_t>(i * d),
                        inputs.begin() + static_cast<std::ptrdiff_t>((i + 1) * d));
        batch_t.push_back(targets[i]);
      }
      check(loss_and_gradient(model, batch_in, batch_t, &grad));
      for (std::size_t p = 0; p < params.size(); ++p) params[p] -= config.learning_rate * grad[p];
      for (double v : params)
        if (!std::isfinite(v)) check(v);
      model.set_parameters(params);
    }
    const double e = check(loss_and_gradient(model, inputs, targets, nullptr));
    const double prev = result.history.back();
    result.history.push_back(e);
    if (std::abs(e - prev) <= config.tolerance) break;
  }
  return result;
}

std::string serialize(const NNModel& model) {
  std::ostringstream out;
  out << "nn " << model.hidden_layers() << ' ' << model.input_bits() << '\n';
  out << "scale " << detail::format_double(model.output_scale()) << '\n';
  for (const auto& l : model.layers()) {
    out << "layer " << l.inputs << ' ' << l.outputs << ' ' << (l.relu ? 1 : 0) << '\n';
    for (std::size_t i = 0; i < l.weights.size(); ++i) out << (i ? " " : "") << detail::format_double(l.weights[i]);
    out << '\n';
    for (std::size_t i = 0; i < l.bias.size(); ++i) out << (i ? " " : "") << detail::format_double(l.bias[i]);
    out << '\n';
  }
  return out.str();
}

NNModel parse_nn(std::istream& in) {
  std::string tag, tok;
  int hidden = 0;
  unsigned bits = 0;
  if (!(in >> tag >> hidden >> bits) || tag != "nn") throw std::runtime_error("expected an 'nn K d' model header");
  if (!(in >> tag >> tok) || tag != "scale") throw std::runtime_error("expected 'scale' line in nn model");
  const double scale = detail::parse_double(tok);
  std::vector<DenseLayer> layers;
  for (int i = 0; i < hidden + 2; ++i) {
    DenseLayer l;
    int relu = 0;
    if (!(in >> tag >> l.inputs >> l.outputs >> relu) || tag != "layer")
      throw std::runtime_error("expected 'layer in out relu' in nn model");
    l.relu = relu != 0;
    l.weights.resize(l.inputs * l.outputs);
    l.bias.resize(l.outputs);
    for (auto& w : l.weights) {
      if (!(in >> tok)) throw std::runtime_error("truncated nn weights");
      w = detail::parse_double(tok);
    }
    for (auto& b : l.bias) {
      if (!(in >> tok)) throw std::runtime_error("truncated nn biases");
      b = detail::parse_double(tok);
    }
    layers.push_back(std::move(l));
  }
  return NNModel(bits, std::move(layers), scale);
}

}  // namespace sts
