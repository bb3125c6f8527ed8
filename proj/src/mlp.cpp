#include "gwloc/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "gwloc/error.hpp"
#include "gwloc/rng.hpp"

namespace gwloc::neuralloc {

namespace {

constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kShuffleStream = 2;
constexpr std::uint64_t kDropoutStream = 3;

std::string dims_text(std::size_t rows, std::size_t cols) {
  return std::to_string(rows) + "x" + std::to_string(cols);
}

// Adam moments or nothing, per layer.
struct OptimizerState {
  std::vector<Dense> m;
  std::vector<Dense> v;
  std::size_t step = 0;
};

void adam_step(double* param, const double* grad, double* m, double* v, Eigen::Index n, const MlpConfig& c,
               double correction1, double correction2) {
  for (Eigen::Index i = 0; i < n; ++i) {
    m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * grad[i];
    v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * grad[i] * grad[i];
    param[i] -= c.learning_rate * (m[i] / correction1) / (std::sqrt(v[i] / correction2) + c.epsilon);
  }
}

void apply_update(MlpModel& model, const Gradients& grads, OptimizerState& state) {
  const MlpConfig& c = model.config;
  ++state.step;
  if (c.optimizer == Optimizer::kSgd) {
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
      model.layers[l].weights.noalias() -= c.learning_rate * grads.layers[l].weights;
      model.layers[l].bias.noalias() -= c.learning_rate * grads.layers[l].bias;
    }
    return;
  }
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    Dense& p = model.layers[l];
    const Dense& g = grads.layers[l];
    adam_step(p.weights.data(), g.weights.data(), state.m[l].weights.data(), state.v[l].weights.data(),
              p.weights.size(), c, correction1, correction2);
    adam_step(p.bias.data(), g.bias.data(), state.m[l].bias.data(), state.v[l].bias.data(), p.bias.size(), c,
              correction1, correction2);
  }
}

}  // namespace

const char* to_string(Optimizer optimizer) { return optimizer == Optimizer::kAdam ? "adam" : "sgd"; }

Optimizer optimizer_from_string(const std::string& name) {
  if (name == "adam") return Optimizer::kAdam;
  if (name == "sgd") return Optimizer::kSgd;
  fail(ErrorCode::kInvalidArgument, "unknown optimizer '" + name + "' (expected adam or sgd)");
}

void MlpConfig::validate() const {
  if (input_dim < 1 || output_dim < 1) fail(ErrorCode::kInvalidArgument, "layer dimensions must be at least 1");
  if (hidden.empty()) fail(ErrorCode::kInvalidArgument, "at least one hidden layer is required");
  for (std::size_t h : hidden) {
    if (h < 1) fail(ErrorCode::kInvalidArgument, "hidden layer widths must be at least 1");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) fail(ErrorCode::kInvalidArgument, "dropout rate must lie in [0, 1)");
  if (epochs < 1) fail(ErrorCode::kInvalidArgument, "epochs must be at least 1");
  if (batch_size < 1) fail(ErrorCode::kInvalidArgument, "batch size must be at least 1");
  if (!(learning_rate > 0.0)) fail(ErrorCode::kInvalidArgument, "learning rate must be positive");
}

std::vector<std::size_t> MlpConfig::layer_dims() const {
  std::vector<std::size_t> dims{input_dim};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(output_dim);
  return dims;
}

MlpModel MlpModel::zeros(const MlpConfig& config) {
  config.validate();
  MlpModel model;
  model.config = config;
  const auto dims = config.layer_dims();
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const auto rows = static_cast<Eigen::Index>(dims[l + 1]);
    const auto cols = static_cast<Eigen::Index>(dims[l]);
    model.layers.push_back({Eigen::MatrixXd::Zero(rows, cols), Eigen::VectorXd::Zero(rows)});
  }
  return model;
}

MlpModel MlpModel::he_uniform(const MlpConfig& config, std::uint64_t seed) {
  MlpModel model = zeros(config);
  Rng rng(seed);
  for (auto& layer : model.layers) {
    const double limit = std::sqrt(6.0 / static_cast<double>(layer.weights.cols()));
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) layer.weights(r, c) = rng.uniform(-limit, limit);
    }
  }
  return model;
}

void MlpModel::check_shapes() const {
  const auto dims = config.layer_dims();
  if (layers.size() + 1 != dims.size()) fail(ErrorCode::kShape, "layer count does not match the configuration");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& w = layers[l].weights;
    if (static_cast<std::size_t>(w.rows()) != dims[l + 1] || static_cast<std::size_t>(w.cols()) != dims[l] ||
        static_cast<std::size_t>(layers[l].bias.size()) != dims[l + 1]) {
      fail(ErrorCode::kShape, "layer " + std::to_string(l) + " is " +
                                  dims_text(static_cast<std::size_t>(w.rows()), static_cast<std::size_t>(w.cols())) +
                                  ", expected " + dims_text(dims[l + 1], dims[l]));
    }
  }
  if (standardization.size() != 0 && standardization.size() != config.input_dim) {
    fail(ErrorCode::kShape, "standardization length does not match the input dimension");
  }
}

std::size_t MlpModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
  return n;
}

ForwardCache forward_batch(const MlpModel& model, const Eigen::MatrixXd& inputs, Mode mode,
                           std::uint64_t dropout_seed) {
  if (static_cast<std::size_t>(inputs.rows()) != model.config.input_dim) {
    fail(ErrorCode::kShape, "input has " + std::to_string(inputs.rows()) + " features, model expects " +
                                std::to_string(model.config.input_dim));
  }
  const double p = model.config.dropout;
  const bool drop = mode == Mode::kTrain && p > 0.0;
  const double keep_scale = 1.0 / (1.0 - p);
  Rng rng(dropout_seed);

  ForwardCache cache;
  cache.inputs.push_back(inputs);
  const std::size_t hidden_layers = model.layers.size() - 1;
  for (std::size_t l = 0; l < hidden_layers; ++l) {
    const Dense& layer = model.layers[l];
    Eigen::MatrixXd z = layer.weights * cache.inputs.back();
    z.colwise() += layer.bias;
    Eigen::MatrixXd a = z.cwiseMax(0.0);
    if (drop) {
      Eigen::MatrixXd mask(a.rows(), a.cols());
      for (Eigen::Index c = 0; c < mask.cols(); ++c) {
        for (Eigen::Index r = 0; r < mask.rows(); ++r) mask(r, c) = rng.bernoulli(1.0 - p) ? keep_scale : 0.0;
      }
      a = a.cwiseProduct(mask);
      cache.masks.push_back(std::move(mask));
    }
    cache.pre.push_back(std::move(z));
    cache.inputs.push_back(std::move(a));
  }
  const Dense& out = model.layers.back();
  cache.output = out.weights * cache.inputs.back();
  cache.output.colwise() += out.bias;
  return cache;
}

ForwardResult forward(const MlpModel& model, std::span<const double> input, Mode mode, std::uint64_t dropout_seed) {
  const Eigen::Map<const Eigen::VectorXd> column(input.data(), static_cast<Eigen::Index>(input.size()));
  ForwardResult result{{}, forward_batch(model, column, mode, dropout_seed)};
  result.prediction = {result.cache.output(0, 0), model.config.output_dim > 1 ? result.cache.output(1, 0) : 0.0};
  return result;
}

double loss(Point prediction, Point label) {
  return std::sqrt((label.x - prediction.x) * (label.x - prediction.x) +
                   (label.y - prediction.y) * (label.y - prediction.y));
}

Point loss_gradient(Point prediction, Point label) {
  const double d = loss(prediction, label);
  if (d == 0.0) return {0.0, 0.0};
  return {(prediction.x - label.x) / d, (prediction.y - label.y) / d};
}

void backward_into(const MlpModel& model, const ForwardCache& cache, const Eigen::MatrixXd& labels, Gradients& grads) {
  const std::size_t layer_count = model.layers.size();
  const bool masked = !cache.masks.empty();
  if (cache.inputs.size() != layer_count || cache.pre.size() + 1 != layer_count ||
      (masked && cache.masks.size() + 1 != layer_count) || labels.rows() != cache.output.rows() ||
      labels.cols() != cache.output.cols()) {
    fail(ErrorCode::kShape, "forward cache does not match the model or the labels");
  }
  for (std::size_t l = 0; l < layer_count; ++l) {
    if (cache.inputs[l].rows() != model.layers[l].weights.cols()) {
      fail(ErrorCode::kShape, "forward cache layer " + std::to_string(l) + " does not match the model");
    }
  }

  const auto batch = static_cast<double>(labels.cols());
  Eigen::MatrixXd delta = cache.output - labels;
  for (Eigen::Index c = 0; c < delta.cols(); ++c) {
    const double norm = delta.col(c).norm();
    if (norm == 0.0) {
      delta.col(c).setZero();
    } else {
      delta.col(c) /= norm * batch;
    }
  }

  grads.layers.resize(layer_count);
  for (std::size_t l = layer_count; l-- > 0;) {
    grads.layers[l].weights.resize(model.layers[l].weights.rows(), model.layers[l].weights.cols());
    grads.layers[l].weights.noalias() = delta * cache.inputs[l].transpose();
    grads.layers[l].bias = delta.rowwise().sum();
    if (l == 0) break;
    Eigen::MatrixXd upstream = model.layers[l].weights.transpose() * delta;
    const Eigen::MatrixXd& z = cache.pre[l - 1];
    upstream = upstream.cwiseProduct((z.array() > 0.0).cast<double>().matrix());
    if (masked) upstream = upstream.cwiseProduct(cache.masks[l - 1]);
    delta = std::move(upstream);
  }
}

Gradients backward_batch(const MlpModel& model, const ForwardCache& cache, const Eigen::MatrixXd& labels) {
  Gradients grads;
  backward_into(model, cache, labels, grads);
  return grads;
}

Gradients backward(const MlpModel& model, const ForwardCache& cache, Point label) {
  Eigen::MatrixXd labels(2, 1);
  labels << label.x, label.y;
  return backward_batch(model, cache, labels);
}

MlpModel train(const dataset::WaveDataset& ds, MlpConfig config, const EpochCallback& on_epoch) {
  if (!ds.standardized || !ds.standardization) {
    fail(ErrorCode::kInvalidArgument, "training needs a standardized dataset");
  }
  if (ds.train.empty()) fail(ErrorCode::kSplit, "train split is empty");
  config.input_dim = ds.feature_count();
  config.output_dim = 2;
  config.validate();

  MlpModel model = MlpModel::he_uniform(config, derive_seed(config.seed, kInitStream));
  model.standardization = *ds.standardization;

  OptimizerState state;
  if (config.optimizer == Optimizer::kAdam) {
    for (const auto& l : model.layers) {
      Dense zero{Eigen::MatrixXd::Zero(l.weights.rows(), l.weights.cols()), Eigen::VectorXd::Zero(l.bias.size())};
      state.m.push_back(zero);
      state.v.push_back(std::move(zero));
    }
  }

  const auto features = static_cast<Eigen::Index>(config.input_dim);
  std::vector<std::size_t> order = ds.train;
  Gradients grads;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    Rng shuffle(derive_seed(derive_seed(config.seed, kShuffleStream), epoch));
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle.below(i)]);

    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t count = std::min(config.batch_size, order.size() - start);
      Eigen::MatrixXd inputs(features, static_cast<Eigen::Index>(count));
      Eigen::MatrixXd labels(2, static_cast<Eigen::Index>(count));
      for (std::size_t b = 0; b < count; ++b) {
        const dataset::WaveSample& s = ds.samples[order[start + b]];
        double* column = inputs.col(static_cast<Eigen::Index>(b)).data();
        std::copy(s.data.begin(), s.data.end(), column);
        labels(0, static_cast<Eigen::Index>(b)) = s.label.x;
        labels(1, static_cast<Eigen::Index>(b)) = s.label.y;
      }
      const std::uint64_t dropout_seed = derive_seed(derive_seed(config.seed, kDropoutStream), state.step);
      const ForwardCache cache = forward_batch(model, inputs, Mode::kTrain, dropout_seed);
      loss_sum += (cache.output - labels).colwise().norm().sum();
      backward_into(model, cache, labels, grads);
      apply_update(model, grads, state);
    }
    const double mean_loss = loss_sum / static_cast<double>(order.size());
    if (!std::isfinite(mean_loss)) {
      fail(ErrorCode::kTraining, "training diverged at epoch " + std::to_string(epoch) + " (non-finite loss)");
    }
    model.training_log.push_back(mean_loss);
    if (on_epoch) on_epoch(epoch, mean_loss);
  }
  model.check_shapes();
  return model;
}

Point predict(const MlpModel& model, std::span<const float> sample, bool standardized) {
  if (sample.size() != model.config.input_dim) {
    fail(ErrorCode::kShape, "sample has " + std::to_string(sample.size()) + " features, model expects " +
                                std::to_string(model.config.input_dim));
  }
  std::vector<double> input(sample.begin(), sample.end());
  if (!standardized) {
    if (model.standardization.size() != input.size()) {
      fail(ErrorCode::kInvalidArgument, "model carries no standardization statistics for raw input");
    }
    for (std::size_t j = 0; j < input.size(); ++j) input[j] = model.standardization.transform(j, input[j]);
  }
  return forward(model, input, Mode::kInfer).prediction;
}

Point predict(const MlpModel& model, const wavefield::TimeMatrix& sample, bool standardized) {
  const std::vector<float> flat = dataset::to_floats(sample);
  return predict(model, flat, standardized);
}

}  // namespace gwloc::neuralloc
