#include "gwloc/mlp_io.hpp"

#include <string>

#include "gwloc/container.hpp"
#include "gwloc/error.hpp"

namespace gwloc::neuralloc {

using nlohmann::json;

std::vector<std::uint8_t> serialize(const MlpModel& model) {
  model.check_shapes();
  const MlpConfig& c = model.config;
  json stats = nullptr;
  if (model.standardization.size() != 0) {
    stats = {{"mean", model.standardization.mean}, {"std", model.standardization.stddev}};
  }
  json header = {
      {"format", "GWNN"},
      {"version", 1},
      {"layer_dims", c.layer_dims()},
      {"activation", "relu"},
      {"dropout", c.dropout},
      {"optimizer",
       {{"name", to_string(c.optimizer)},
        {"learning_rate", c.learning_rate},
        {"beta1", c.beta1},
        {"beta2", c.beta2},
        {"epsilon", c.epsilon},
        {"batch_size", c.batch_size},
        {"epochs", c.epochs}}},
      {"seed", c.seed},
      {"standardization", stats},
      {"training_log", model.training_log},
      {"parameter_count", model.parameter_count()},
      {"parameter_order", "per layer: weights row-major (out x in), then biases"},
      {"dtype", "float32-le"},
  };

  container::FloatWriter writer;
  writer.reserve(model.parameter_count());
  for (const auto& layer : model.layers) {
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index col = 0; col < layer.weights.cols(); ++col) writer.put_double(layer.weights(r, col));
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) writer.put_double(layer.bias(r));
  }
  return container::pack(kCheckpointMagic, header, writer.bytes());
}

MlpModel deserialize(std::span<const std::uint8_t> bytes) {
  const container::Unpacked unpacked = container::unpack(kCheckpointMagic, bytes);
  const json& h = unpacked.header;
  MlpModel model;
  try {
    if (h.at("format") != "GWNN" || h.at("version") != 1) fail(ErrorCode::kFormat, "unsupported GWNN version");
    const auto dims = h.at("layer_dims").get<std::vector<std::size_t>>();
    if (dims.size() < 3) fail(ErrorCode::kFormat, "GWNN needs at least one hidden layer");
    MlpConfig c;
    c.input_dim = dims.front();
    c.output_dim = dims.back();
    c.hidden.assign(dims.begin() + 1, dims.end() - 1);
    c.dropout = h.at("dropout").get<double>();
    const json& opt = h.at("optimizer");
    c.optimizer = optimizer_from_string(opt.at("name").get<std::string>());
    c.learning_rate = opt.at("learning_rate").get<double>();
    c.beta1 = opt.at("beta1").get<double>();
    c.beta2 = opt.at("beta2").get<double>();
    c.epsilon = opt.at("epsilon").get<double>();
    c.batch_size = opt.at("batch_size").get<std::size_t>();
    c.epochs = opt.at("epochs").get<std::size_t>();
    c.seed = h.at("seed").get<std::uint64_t>();
    model = MlpModel::zeros(c);
    if (!h.at("standardization").is_null()) {
      model.standardization.mean = h["standardization"].at("mean").get<std::vector<double>>();
      model.standardization.stddev = h["standardization"].at("std").get<std::vector<double>>();
    }
    model.training_log = h.at("training_log").get<std::vector<double>>();
  } catch (const json::exception& e) {
    fail(ErrorCode::kFormat, std::string("GWNN header: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kFormat) throw;
    fail(ErrorCode::kFormat, std::string("GWNN header: ") + e.what());
  }

  if (unpacked.payload.size() != model.parameter_count() * 4) {
    fail(ErrorCode::kFormat, "GWNN payload size does not match the layer dimensions");
  }
  container::FloatReader reader(unpacked.payload);
  for (auto& layer : model.layers) {
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      for (Eigen::Index col = 0; col < layer.weights.cols(); ++col) layer.weights(r, col) = reader.get();
    }
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias(r) = reader.get();
  }
  try {
    model.check_shapes();
  } catch (const Error& e) {
    fail(ErrorCode::kFormat, std::string("GWNN content: ") + e.what());
  }
  return model;
}

void save(const MlpModel& model, const std::string& path) { container::write_file(path, serialize(model)); }

MlpModel load(const std::string& path) { return deserialize(container::read_file(path)); }

}  // namespace gwloc::neuralloc
