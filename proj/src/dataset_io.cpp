#include "gwloc/dataset_io.hpp"

#include <cmath>
#include <string>

#include "gwloc/container.hpp"
#include "gwloc/error.hpp"

namespace gwloc::dataset {

using nlohmann::json;

namespace {

json point_to_json(Point p) { return json::array({p.x, p.y}); }

Point point_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) fail(ErrorCode::kFormat, "point must be [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

json points_to_json(const std::vector<Point>& points) {
  json out = json::array();
  for (const auto& p : points) out.push_back(point_to_json(p));
  return out;
}

std::vector<Point> points_from_json(const json& j) {
  std::vector<Point> out;
  for (const auto& p : j) out.push_back(point_from_json(p));
  return out;
}

json window_to_json(const wavefield::ExcitationWindow& w) {
  return {{"enabled", w.enabled}, {"center_hz", w.center_hz}, {"width_hz", w.width_hz}};
}

wavefield::ExcitationWindow window_from_json(const json& j) {
  wavefield::ExcitationWindow w;
  w.enabled = j.at("enabled").get<bool>();
  w.center_hz = j.at("center_hz").get<double>();
  w.width_hz = j.at("width_hz").get<double>();
  return w;
}

json stats_to_json(const Standardization& s) { return {{"mean", s.mean}, {"std", s.stddev}}; }

}  // namespace

json modes_to_json(const std::vector<dispersion::ModeCurve>& modes) {
  json out = json::array();
  for (const auto& m : modes) {
    if (m.kind == dispersion::ModeKind::kLinear) {
      out.push_back({{"kind", "linear"}, {"c", m.constant}});
    } else {
      out.push_back({{"kind", "sqrt"}, {"d", m.constant}});
    }
  }
  return out;
}

std::vector<dispersion::ModeCurve> modes_from_json(const json& j) {
  std::vector<dispersion::ModeCurve> out;
  for (const auto& m : j) {
    const std::string kind = m.at("kind").get<std::string>();
    if (kind == "linear") {
      out.push_back(dispersion::ModeCurve::linear(m.at("c").get<double>()));
    } else if (kind == "sqrt") {
      out.push_back(dispersion::ModeCurve::square_root(m.at("d").get<double>()));
    } else {
      fail(ErrorCode::kFormat, "unknown mode kind '" + kind + "'");
    }
  }
  return out;
}

// threads is deliberately absent: it must not influence any output byte.
json config_to_json(const GenerationConfig& c) {
  return {
      {"samples", c.samples},
      {"bins", c.bins},
      {"f_max_hz", c.f_max_hz},
      {"sensors", c.sensors},
      {"plate_length", c.plate_length},
      {"plate_width", c.plate_width},
      {"modes", modes_to_json(c.modes)},
      {"alpha_mode", c.alpha_mode == AlphaMode::kFixed ? "fixed" : "truncnorm"},
      {"fixed_alpha", c.fixed_alpha},
      {"snr_db", container::snr_to_json(c.snr_db)},
      {"train_fraction", c.train_fraction},
      {"per_sample_sensors", c.per_sample_sensors},
      {"window", window_to_json(c.window)},
      {"seed", c.seed},
  };
}

GenerationConfig config_from_json(const json& j) {
  GenerationConfig c;
  c.samples = j.at("samples").get<std::size_t>();
  c.bins = j.at("bins").get<std::size_t>();
  c.f_max_hz = j.at("f_max_hz").get<double>();
  c.sensors = j.at("sensors").get<std::size_t>();
  c.plate_length = j.at("plate_length").get<double>();
  c.plate_width = j.at("plate_width").get<double>();
  c.modes = modes_from_json(j.at("modes"));
  c.alpha_mode = j.at("alpha_mode").get<std::string>() == "fixed" ? AlphaMode::kFixed : AlphaMode::kTruncatedNormal;
  c.fixed_alpha = j.at("fixed_alpha").get<double>();
  c.snr_db = container::snr_from_json(j.at("snr_db"));
  c.train_fraction = j.at("train_fraction").get<double>();
  c.per_sample_sensors = j.at("per_sample_sensors").get<bool>();
  c.window = window_from_json(j.at("window"));
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

std::vector<std::uint8_t> serialize(const WaveDataset& ds) {
  ds.validate();
  const std::size_t t = ds.samples.size();
  const std::size_t record = ds.feature_count();

  json samples = json::array();
  for (const auto& s : ds.samples) {
    json entry = {{"alpha", s.alpha},
                  {"label", point_to_json(s.label)},
                  {"seed", s.seed},
                  {"snr_db", container::snr_to_json(s.snr_db)}};
    if (s.sensors) entry["sensors"] = points_to_json(*s.sensors);
    samples.push_back(std::move(entry));
  }
  json pairs = json::array();
  for (const auto& p : ds.pairs) pairs.push_back({p.tx, p.rx});

  const std::size_t clean_records = ds.has_clean ? t : 0;
  json header = {
      {"format", "GWDS"},
      {"version", 1},
      {"Q", ds.bins()},
      {"M", ds.pair_count()},
      {"m", ds.sensors.size()},
      {"t", t},
      {"f_max_hz", ds.grid.f_max()},
      {"plate", {{"length", ds.plate_length}, {"width", ds.plate_width}}},
      {"sensors", points_to_json(ds.sensors)},
      {"pairs", pairs},
      {"modes", modes_to_json(ds.modes)},
      {"window", window_to_json(ds.window)},
      {"split", {{"train", ds.train}, {"test", ds.test}}},
      {"samples", samples},
      {"standardization", ds.standardization ? stats_to_json(*ds.standardization) : json(nullptr)},
      {"standardized", ds.standardized},
      {"has_clean", ds.has_clean},
      {"flatten_order", kFlattenOrder},
      {"seed", ds.seed},
      {"config", config_to_json(ds.config)},
      {"payload",
       {{"dtype", "float32-le"},
        {"record_floats", record},
        {"data_offset", 0},
        {"clean_offset", t * record * 4},
        {"labels_offset", (t + clean_records) * record * 4},
        {"size", (t + clean_records) * record * 4 + t * 8}}},
  };

  container::FloatWriter writer;
  writer.reserve((t + clean_records) * record + 2 * t);
  for (const auto& s : ds.samples) writer.put(s.data);
  if (ds.has_clean) {
    for (const auto& s : ds.samples) writer.put(s.clean);
  }
  for (const auto& s : ds.samples) {
    writer.put_double(s.label.x);
    writer.put_double(s.label.y);
  }
  return container::pack(kDatasetMagic, header, writer.bytes());
}

WaveDataset deserialize(std::span<const std::uint8_t> bytes) {
  const container::Unpacked unpacked = container::unpack(kDatasetMagic, bytes);
  const json& h = unpacked.header;
  WaveDataset ds;
  try {
    if (h.at("format") != "GWDS" || h.at("version") != 1) fail(ErrorCode::kFormat, "unsupported GWDS version");
    ds.grid = wavefield::FrequencyGrid(h.at("Q").get<std::size_t>(), h.at("f_max_hz").get<double>());
    ds.plate_length = h.at("plate").at("length").get<double>();
    ds.plate_width = h.at("plate").at("width").get<double>();
    ds.sensors = points_from_json(h.at("sensors"));
    for (const auto& p : h.at("pairs")) ds.pairs.push_back({p.at(0).get<std::size_t>(), p.at(1).get<std::size_t>()});
    ds.modes = modes_from_json(h.at("modes"));
    ds.window = window_from_json(h.at("window"));
    ds.train = h.at("split").at("train").get<std::vector<std::size_t>>();
    ds.test = h.at("split").at("test").get<std::vector<std::size_t>>();
    if (!h.at("standardization").is_null()) {
      Standardization stats;
      stats.mean = h["standardization"].at("mean").get<std::vector<double>>();
      stats.stddev = h["standardization"].at("std").get<std::vector<double>>();
      ds.standardization = std::move(stats);
    }
    ds.standardized = h.at("standardized").get<bool>();
    ds.has_clean = h.at("has_clean").get<bool>();
    ds.seed = h.at("seed").get<std::uint64_t>();
    ds.config = config_from_json(h.at("config"));
    if (h.at("M").get<std::size_t>() != ds.pairs.size() || h.at("m").get<std::size_t>() != ds.sensors.size()) {
      fail(ErrorCode::kFormat, "header M/m disagree with the pair and sensor lists");
    }
    const std::size_t t = h.at("t").get<std::size_t>();
    const auto& entries = h.at("samples");
    if (entries.size() != t) fail(ErrorCode::kFormat, "sample table length differs from t");
    ds.samples.resize(t);
    for (std::size_t i = 0; i < t; ++i) {
      const json& e = entries[i];
      WaveSample& s = ds.samples[i];
      s.alpha = e.at("alpha").get<double>();
      s.label = point_from_json(e.at("label"));
      s.seed = e.at("seed").get<std::uint64_t>();
      s.snr_db = container::snr_from_json(e.at("snr_db"));
      if (e.contains("sensors")) s.sensors = points_from_json(e["sensors"]);
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::kFormat, std::string("GWDS header: ") + e.what());
  }

  const std::size_t t = ds.samples.size();
  const std::size_t record = ds.feature_count();
  const std::size_t expected = ((ds.has_clean ? 2 : 1) * t * record + 2 * t) * 4;
  if (unpacked.payload.size() != expected) {
    fail(ErrorCode::kFormat, "GWDS payload is " + std::to_string(unpacked.payload.size()) +
                                 " bytes, header implies " + std::to_string(expected));
  }
  container::FloatReader reader(unpacked.payload);
  for (auto& s : ds.samples) {
    s.data.resize(record);
    reader.get(s.data);
  }
  if (ds.has_clean) {
    for (auto& s : ds.samples) {
      s.clean.resize(record);
      reader.get(s.clean);
    }
  }
  for (std::size_t i = 0; i < t; ++i) {
    const float x = reader.get();
    const float y = reader.get();
    const Point& label = ds.samples[i].label;
    if (x != static_cast<float>(label.x) || y != static_cast<float>(label.y)) {
      fail(ErrorCode::kFormat, "label payload of sample " + std::to_string(i) + " disagrees with the header");
    }
  }
  try {
    ds.validate();
  } catch (const Error& e) {
    fail(ErrorCode::kFormat, std::string("GWDS content: ") + e.what());
  }
  return ds;
}

void save(const WaveDataset& ds, const std::string& path) { container::write_file(path, serialize(ds)); }

WaveDataset load(const std::string& path) { return deserialize(container::read_file(path)); }

}  // namespace gwloc::dataset
