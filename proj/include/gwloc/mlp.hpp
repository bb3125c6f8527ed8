#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gwloc/dataset.hpp"
#include "gwloc/wavefield.hpp"

namespace gwloc::neuralloc {

using wavefield::Point;

enum class Optimizer { kAdam, kSgd };

const char* to_string(Optimizer optimizer);
Optimizer optimizer_from_string(const std::string& name);

struct MlpConfig {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden{300, 200, 50};
  std::size_t output_dim = 2;
  double dropout = 0.05;
  std::size_t epochs = 50;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  Optimizer optimizer = Optimizer::kAdam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;

  void validate() const;
  // input_dim, hidden..., output_dim
  std::vector<std::size_t> layer_dims() const;
};

struct Dense {
  Eigen::MatrixXd weights;  // out x in
  Eigen::VectorXd bias;
};

struct MlpModel {
  MlpConfig config;
  std::vector<Dense> layers;
  dataset::Standardization standardization;
  std::vector<double> training_log;

  static MlpModel zeros(const MlpConfig& config);
  // Weights ~ U(-sqrt(6 / fan_in), +sqrt(6 / fan_in)), biases zero.
  static MlpModel he_uniform(const MlpConfig& config, std::uint64_t seed);

  // Throws kShape unless the layer chain matches config.layer_dims().
  void check_shapes() const;
  std::size_t parameter_count() const;
};

enum class Mode { kTrain, kInfer };

// Activations kept for backprop; every matrix has one column per sample.
struct ForwardCache {
  std::vector<Eigen::MatrixXd> inputs;  // input to layer l (masked activation of layer l-1)
  std::vector<Eigen::MatrixXd> pre;     // hidden pre-activations
  std::vector<Eigen::MatrixXd> masks;   // inverted-dropout multipliers; empty in Infer mode or p = 0
  Eigen::MatrixXd output;               // output_dim x batch
};

// ReLU hidden layers, identity output. In Train mode each hidden activation
// is multiplied by Bernoulli(1 - p) / (1 - p), drawn from dropout_seed.
ForwardCache forward_batch(const MlpModel& model, const Eigen::MatrixXd& inputs, Mode mode,
                           std::uint64_t dropout_seed = 0);

struct ForwardResult {
  Point prediction;
  ForwardCache cache;
};

ForwardResult forward(const MlpModel& model, std::span<const double> input, Mode mode,
                      std::uint64_t dropout_seed = 0);

// Euclidean distance between prediction and label.
double loss(Point prediction, Point label);
// d loss / d prediction; the zero vector when prediction == label.
Point loss_gradient(Point prediction, Point label);

struct Gradients {
  std::vector<Dense> layers;
};

// Gradient of the batch-mean Euclidean loss; labels is output_dim x batch.
Gradients backward_batch(const MlpModel& model, const ForwardCache& cache, const Eigen::MatrixXd& labels);
// Same, reusing the storage already held by `grads`.
void backward_into(const MlpModel& model, const ForwardCache& cache, const Eigen::MatrixXd& labels, Gradients& grads);
Gradients backward(const MlpModel& model, const ForwardCache& cache, Point label);

// `epoch` counts from 1.
using EpochCallback = std::function<void(std::size_t epoch, double mean_loss)>;

// Requires a standardized dataset; input_dim is taken from the dataset.
MlpModel train(const dataset::WaveDataset& ds, MlpConfig config, const EpochCallback& on_epoch = {});

// Flattens q-major, standardizes with the model's statistics unless the
// sample already is, then runs Infer mode. The output is not clipped.
Point predict(const MlpModel& model, std::span<const float> sample, bool standardized = false);
Point predict(const MlpModel& model, const wavefield::TimeMatrix& sample, bool standardized = false);

}  // namespace gwloc::neuralloc
