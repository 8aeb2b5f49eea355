#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sts/regression.hpp"

namespace sts {

/// Fully connected layer; `weights` is outputs x inputs, row-major.
struct DenseLayer {
  std::size_t inputs = 0;
  std::size_t outputs = 0;
  bool relu = true;
  std::vector<double> weights;
  std::vector<double> bias;

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

inline constexpr std::size_t kNeuralWidth = 256;

/// Feed-forward ReLU regressor over the binary expansion of a key.
///
/// NN0 is one 256-unit ReLU layer on the d input bits followed by a linear
/// output neuron; NN1 and NN2 insert one or two further 256-unit layers.
/// The network is trained on rank / output_scale and predictions are
/// multiplied back by output_scale.
class NNModel {
 public:
  NNModel(unsigned input_bits, std::vector<DenseLayer> layers, double output_scale);

  /// Glorot-uniform weights, zero biases.
  static NNModel initialize(int hidden_layers, unsigned input_bits, double output_scale, std::uint64_t seed,
                            std::size_t width = kNeuralWidth);

  /// Number of ReLU layers beyond the first (0 for NN0).
  int hidden_layers() const { return static_cast<int>(layers_.size()) - 2; }
  unsigned input_bits() const { return input_bits_; }
  double output_scale() const { return output_scale_; }
  const std::vector<DenseLayer>& layers() const { return layers_; }

  /// Network output before output scaling.
  double forward(std::span<const double> input) const;
  double predict(std::uint64_t key) const;

  std::size_t parameter_count() const;
  /// Flat parameter vector: for each layer, weights then biases.
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> params);

  friend bool operator==(const NNModel&, const NNModel&) = default;

 private:
  unsigned input_bits_;
  std::vector<DenseLayer> layers_;
  double output_scale_;
};

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 64;
  std::size_t max_epochs = 200;
  double tolerance = 1e-7;  // on the normalized training MSE
  std::uint64_t seed = 1;
};

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainResult {
  NNModel model;
  /// Normalized training MSE: entry 0 is the initialization, then one per epoch.
  std::vector<double> history;
};

/// Most-significant bit first, entries in {0, 1}. Throws if x >= 2^d.
std::vector<double> encode_key(std::uint64_t x, unsigned bits);

inline double nn_forward(const NNModel& model, std::uint64_t x) { return model.predict(x); }

/// Batch loss (1/B) sum (f(x_i) - t_i)^2 over `inputs` (B rows of input_bits
/// values). When `gradient` is non-null it receives dLoss/dParameters in the
/// layout of NNModel::parameters().
double loss_and_gradient(const NNModel& model, std::span<const double> inputs, std::span<const double> targets,
                         std::vector<double>* gradient);

/// Mini-batch gradient descent on the mean squared error. Stops when the
/// epoch-to-epoch change of the training error is within the tolerance or
/// after max_epochs.
TrainResult nn_train(const SampleSet& samples, int hidden_layers, const TrainConfig& config, unsigned input_bits);

/// `nn K d`, `scale s`, then per layer `layer in out relu` and two lines of
/// row-major weights and biases.
std::string serialize(const NNModel& model);
NNModel parse_nn(std::istream& in);

}  // namespace sts
