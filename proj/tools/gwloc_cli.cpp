#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gwloc/gwloc.h"

using json = nlohmann::json;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RuntimeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(gwloc_status status, std::initializer_list<gwloc_status> usage = {GWLOC_ERR_INVALID_ARGUMENT}) {
  if (status == GWLOC_OK) return;
  std::string msg = std::string(gwloc_status_string(status)) + ": " + gwloc_last_error();
  for (gwloc_status s : usage) {
    if (s == status) throw UsageError(msg);
  }
  throw RuntimeError(msg);
}

// ---- config file --------------------------------------------------------------

class ConfigParser {
 public:
  ConfigParser(std::string text, std::string name) : text_(std::move(text)), name_(std::move(name)) {}

  // Returns {section -> {key -> value}}; top-level keys live under "".
  json parse() {
    json out = json::object();
    out[""] = json::object();
    std::string section;
    while (pos_ < text_.size()) {
      skip_blank();
      if (pos_ >= text_.size()) break;
      const char c = text_[pos_];
      if (c == '\n') {
        ++pos_;
        ++line_;
        continue;
      }
      if (c == '#') {
        skip_comment();
        continue;
      }
      if (c == '[') {
        ++pos_;
        section = read_key();
        skip_blank();
        expect(']');
        if (!out.contains(section)) out[section] = json::object();
      } else {
        const std::string key = read_key();
        skip_blank();
        expect('=');
        json value = read_value();
        if (out[section].contains(key)) error("duplicate key '" + key + "'");
        out[section][key] = std::move(value);
      }
      end_of_line();
    }
    return out;
  }

 private:
  [[noreturn]] void error(const std::string& msg) const {
    throw UsageError(name_ + ":" + std::to_string(line_) + ": " + msg);
  }

  void skip_blank() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\r')) ++pos_;
  }

  void skip_space() {
    while (pos_ < text_.size()) {
      skip_blank();
      if (pos_ < text_.size() && text_[pos_] == '#') skip_comment();
      if (pos_ < text_.size() && text_[pos_] == '\n') {
        ++pos_;
        ++line_;
        continue;
      }
      break;
    }
  }

  void skip_comment() {
    while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
  }

  void end_of_line() {
    skip_blank();
    if (pos_ < text_.size() && text_[pos_] == '#') skip_comment();
    if (pos_ < text_.size() && text_[pos_] != '\n') error("unexpected text after value");
  }

  void expect(char c) {
    if (pos_ >= text_.size() || text_[pos_] != c) error(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string read_key() {
    skip_blank();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_' ||
                                   text_[pos_] == '-')) {
      ++pos_;
    }
    if (pos_ == start) error("expected a key");
    return text_.substr(start, pos_ - start);
  }

  json read_value() {
    skip_blank();
    if (pos_ >= text_.size()) error("missing value");
    const char c = text_[pos_];
    if (c == '"') return read_string();
    if (c == '[') return read_array();
    if (c == '{') return read_table();
    return read_scalar();
  }

  json read_string() {
    ++pos_;
    std::string s;
    while (pos_ < text_.size() && text_[pos_] != '"') {
      if (text_[pos_] == '\n') error("unterminated string");
      if (text_[pos_] == '\\' && pos_ + 1 < text_.size()) ++pos_;
      s += text_[pos_++];
    }
    expect('"');
    return s;
  }

  json read_array() {
    ++pos_;
    json arr = json::array();
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == ']') {
      ++pos_;
      return arr;
    }
    while (true) {
      skip_space();
      arr.push_back(read_value());
      skip_space();
      if (pos_ < text_.size() && text_[pos_] == ',') {
        ++pos_;
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == ']') break;
        continue;
      }
      break;
    }
    expect(']');
    return arr;
  }

  json read_table() {
    ++pos_;
    json table = json::object();
    skip_blank();
    if (pos_ < text_.size() && text_[pos_] == '}') {
      ++pos_;
      return table;
    }
    while (true) {
      const std::string key = read_key();
      skip_blank();
      expect('=');
      table[key] = read_value();
      skip_blank();
      if (pos_ < text_.size() && text_[pos_] == ',') {
        ++pos_;
        continue;
      }
      break;
    }
    expect('}');
    return table;
  }

  json read_scalar() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] != ',' && text_[pos_] != ']' && text_[pos_] != '}' &&
           text_[pos_] != '#' && text_[pos_] != '\n' && text_[pos_] != ' ' && text_[pos_] != '\t' &&
           text_[pos_] != '\r') {
      ++pos_;
    }
    const std::string token = text_.substr(start, pos_ - start);
    if (token == "true") return true;
    if (token == "false") return false;
    if (token == "inf" || token == "+inf") return "inf";
    if (token.empty()) error("missing value");
    char* end = nullptr;
    errno = 0;
    if (token.find_first_of(".eE") == std::string::npos) {
      const long long v = std::strtoll(token.c_str(), &end, 10);
      if (*end == '\0' && errno == 0) return v;
    }
    const double d = std::strtod(token.c_str(), &end);
    if (*end != '\0' || errno != 0) error("cannot parse value '" + token + "'");
    return d;
  }

  std::string text_;
  std::string name_;
  std::size_t pos_ = 0;
  int line_ = 1;
};

const std::vector<std::string> kSections = {"gen", "train", "heatmap", "eval"};

const json kKnownKeys = {
    {"", {"seed", "threads"}},
    {"gen",
     {"t", "q", "f_max", "sensors", "plate_length", "plate_width", "modes", "alpha", "snr", "ideal", "full_scale",
      "train_fraction", "per_sample_sensors", "window", "window_center", "window_width"}},
    {"train", {"epochs", "hidden", "dropout", "batch_size", "learning_rate", "optimizer"}},
    {"heatmap", {"index", "resolution", "subsamples", "clean"}},
    {"eval", {"snrs", "split", "physical", "physical_resolution", "subsamples"}},
};

bool known(const std::string& section, const std::string& key) {
  for (const auto& k : kKnownKeys[""]) {
    if (k == key) return true;
  }
  for (const auto& k : kKnownKeys[section]) {
    if (k == key) return true;
  }
  return false;
}

// Flattens the top level and `command`'s section; keys in other sections are checked but ignored.
json load_config(const std::string& path, const std::string& command) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read config file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  const json sections = ConfigParser(buffer.str(), path).parse();
  json flat = json::object();
  for (const auto& [section, keys] : sections.items()) {
    if (!section.empty() && std::find(kSections.begin(), kSections.end(), section) == kSections.end()) {
      throw UsageError(path + ": unknown section [" + section + "]");
    }
    for (const auto& [key, value] : keys.items()) {
      bool ok = false;
      if (section.empty()) {
        for (const auto& s : kSections) ok = ok || known(s, key);
      } else {
        ok = known(section, key);
      }
      if (!ok) throw UsageError(path + ": unknown key '" + key + "'" + (section.empty() ? "" : " in [" + section + "]"));
    }
  }
  for (const auto& [key, value] : sections[""].items()) {
    if (known(command, key)) flat[key] = value;
  }
  if (sections.contains(command)) {
    for (const auto& [key, value] : sections[command].items()) flat[key] = value;
  }
  return flat;
}

// ---- value resolution -----------------------------------------------------------

std::vector<std::string> split_list(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::stringstream ss(text);
  while (std::getline(ss, item, sep)) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    parts.push_back(b == std::string::npos ? "" : item.substr(b, e - b + 1));
  }
  return parts;
}

double parse_double(const std::string& text, const std::string& what) {
  if (text == "inf" || text == "+inf") return INFINITY;
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || *end != '\0' || errno != 0 || std::isnan(v)) {
    throw UsageError(what + ": '" + text + "' is not a number");
  }
  return v;
}

std::vector<double> parse_doubles(const std::string& text, const std::string& what) {
  std::vector<double> out;
  for (const auto& p : split_list(text, ',')) out.push_back(parse_double(p, what));
  if (out.empty()) throw UsageError(what + ": list is empty");
  return out;
}

std::pair<std::uint32_t, std::uint32_t> parse_resolution(const std::string& text, const std::string& what) {
  const auto x = text.find_first_of("xX");
  if (x == std::string::npos) throw UsageError(what + ": expected NxM, got '" + text + "'");
  const double nx = parse_double(text.substr(0, x), what);
  const double ny = parse_double(text.substr(x + 1), what);
  if (nx < 1 || ny < 1 || nx != std::floor(nx) || ny != std::floor(ny) || nx > 1e5 || ny > 1e5) {
    throw UsageError(what + ": expected positive integers NxM, got '" + text + "'");
  }
  return {static_cast<std::uint32_t>(nx), static_cast<std::uint32_t>(ny)};
}

json snr_json(double snr) { return std::isinf(snr) && snr > 0 ? json("inf") : json(snr); }

// Resolves each setting as flag > config file > default and records the result.
class Resolver {
 public:
  Resolver(json file, json& effective) : file_(std::move(file)), effective_(effective) {}

  template <typename T>
  T pick(const std::string& key, const CLI::Option* flag, const T& flag_value, const T& fallback) {
    T value = fallback;
    if (flag != nullptr && flag->count() > 0) {
      value = flag_value;
    } else if (file_.contains(key)) {
      try {
        value = file_.at(key).get<T>();
      } catch (const json::exception&) {
        throw UsageError("config key '" + key + "' has the wrong type");
      }
    }
    effective_[key] = value;
    return value;
  }

  // Numeric setting that may be "inf".
  double pick_real(const std::string& key, const CLI::Option* flag, const std::string& flag_value, double fallback) {
    double value = fallback;
    if (flag != nullptr && flag->count() > 0) {
      value = parse_double(flag_value, "--" + key);
    } else if (file_.contains(key)) {
      const json& v = file_.at(key);
      if (v.is_string()) {
        value = parse_double(v.get<std::string>(), key);
      } else if (v.is_number()) {
        value = v.get<double>();
      } else {
        throw UsageError("config key '" + key + "' must be a number");
      }
    }
    effective_[key] = snr_json(value);
    return value;
  }

  bool has_file(const std::string& key) const { return file_.contains(key); }
  const json& file(const std::string& key) const { return file_.at(key); }

 private:
  json file_;
  json& effective_;
};

std::uint32_t to_u32(long long v, const std::string& what) {
  if (v < 0 || v > 0xffffffffLL) throw UsageError(what + " out of range");
  return static_cast<std::uint32_t>(v);
}

std::uint32_t resolve_threads(Resolver& r, const CLI::Option* flag, long long flag_value) {
  json scratch;
  long long fallback = 0;
  if (const char* env = std::getenv("GWLOC_THREADS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    fallback = std::strtoll(env, &end, 10);
    if (*end != '\0' || fallback < 0) throw UsageError("GWLOC_THREADS must be a non-negative integer");
  }
  Resolver local(r.has_file("threads") ? json{{"threads", r.file("threads")}} : json::object(), scratch);
  return to_u32(local.pick<long long>("threads", flag, flag_value, fallback), "threads");
}

std::string sidecar_path(const std::string& path) {
  std::filesystem::path p(path);
  return p.replace_extension(".json").string();
}

void require_input(const std::string& path, const std::string& what) {
  if (!std::filesystem::is_regular_file(path)) throw UsageError(what + " '" + path + "' does not exist");
}

struct DatasetHandle {
  gwloc_dataset* ptr = nullptr;
  ~DatasetHandle() { gwloc_dataset_free(ptr); }
};

struct ModelHandle {
  gwloc_model* ptr = nullptr;
  ModelHandle() = default;
  ModelHandle(ModelHandle&& o) noexcept : ptr(o.ptr) { o.ptr = nullptr; }
  ModelHandle(const ModelHandle&) = delete;
  ~ModelHandle() { gwloc_model_free(ptr); }
};

// ---- commands -------------------------------------------------------------------

struct GenFlags {
  long long t = 0, q = 0, sensors = 0, seed = 0, threads = 0;
  std::string f_max, plate_length, plate_width, alpha, snr, train_fraction, window_center, window_width, out;
  bool ideal = false, full_scale = false, per_sample_sensors = false, window = false;
  CLI::Option *o_t, *o_q, *o_sensors, *o_seed, *o_threads, *o_f_max, *o_pl, *o_pw, *o_alpha, *o_snr, *o_tf,
      *o_wc, *o_ww, *o_ideal, *o_full, *o_pss, *o_window;
};

std::vector<gwloc_mode> modes_from_config(const json& value) {
  if (!value.is_array() || value.empty()) throw UsageError("config key 'modes' must be a non-empty array");
  std::vector<gwloc_mode> modes;
  for (const auto& m : value) {
    if (!m.is_object() || !m.contains("kind")) throw UsageError("each mode needs a kind");
    const std::string kind = m.at("kind").is_string() ? m.at("kind").get<std::string>() : "";
    if (kind == "linear" && m.contains("c") && m.at("c").is_number()) {
      modes.push_back({GWLOC_MODE_LINEAR, m.at("c").get<double>()});
    } else if (kind == "sqrt" && m.contains("d") && m.at("d").is_number()) {
      modes.push_back({GWLOC_MODE_SQUARE_ROOT, m.at("d").get<double>()});
    } else {
      throw UsageError("modes: expected {kind=\"linear\", c=...} or {kind=\"sqrt\", d=...}");
    }
  }
  return modes;
}

int run_gen(const GenFlags& f, const json& file) {
  json effective = json::object();
  Resolver r(file, effective);
  gwloc_gen_config c;
  gwloc_gen_config_default(&c);

  const bool full = r.pick<bool>("full_scale", f.o_full, f.full_scale, false);
  const bool ideal = r.pick<bool>("ideal", f.o_ideal, f.ideal, false);
  c.samples = to_u32(r.pick<long long>("t", f.o_t, f.t, full ? 2500 : c.samples), "t");
  c.bins = to_u32(r.pick<long long>("q", f.o_q, f.q, full ? 1000 : c.bins), "q");
  c.f_max_hz = r.pick_real("f_max", f.o_f_max, f.f_max, c.f_max_hz);
  c.sensors = to_u32(r.pick<long long>("sensors", f.o_sensors, f.sensors, c.sensors), "sensors");
  c.plate_length = r.pick_real("plate_length", f.o_pl, f.plate_length, c.plate_length);
  c.plate_width = r.pick_real("plate_width", f.o_pw, f.plate_width, c.plate_width);
  c.train_fraction = r.pick_real("train_fraction", f.o_tf, f.train_fraction, c.train_fraction);
  c.per_sample_sensors = r.pick<bool>("per_sample_sensors", f.o_pss, f.per_sample_sensors, false) ? 1 : 0;
  c.window_enabled = r.pick<bool>("window", f.o_window, f.window, false) ? 1 : 0;
  c.window_center_hz = r.pick_real("window_center", f.o_wc, f.window_center, c.window_center_hz);
  c.window_width_hz = r.pick_real("window_width", f.o_ww, f.window_width, c.window_width_hz);
  c.seed = static_cast<std::uint64_t>(r.pick<long long>("seed", f.o_seed, f.seed, 0));

  std::vector<gwloc_mode> modes;
  if (r.has_file("modes")) {
    modes = modes_from_config(r.file("modes"));
    c.modes = modes.data();
    c.mode_count = modes.size();
  }

  std::string alpha = "truncnorm";
  if (f.o_alpha->count() > 0) {
    alpha = f.alpha;
  } else if (r.has_file("alpha")) {
    const json& v = r.file("alpha");
    alpha = v.is_string() ? v.get<std::string>() : v.is_number() ? std::to_string(v.get<double>()) : "";
  }
  if (ideal) {
    if (f.o_alpha->count() > 0 || f.o_snr->count() > 0) throw UsageError("--ideal cannot be combined with --alpha or --snr");
    gwloc_gen_config_make_ideal(&c);
    effective["alpha"] = 1.0;
    effective["snr"] = "inf";
  } else {
    if (alpha == "truncnorm") {
      c.alpha_fixed = 0;
      effective["alpha"] = "truncnorm";
    } else {
      c.alpha_fixed = 1;
      c.fixed_alpha = parse_double(alpha, "--alpha");
      effective["alpha"] = c.fixed_alpha;
    }
    c.snr_db = r.pick_real("snr", f.o_snr, f.snr, c.snr_db);
  }
  json unused;
  Resolver tr(file, unused);
  c.threads = resolve_threads(tr, f.o_threads, f.threads);

  DatasetHandle ds;
  check(gwloc_dataset_generate(&c, &ds.ptr), {GWLOC_ERR_INVALID_ARGUMENT, GWLOC_ERR_DOMAIN});
  check(gwloc_dataset_save(ds.ptr, f.out.c_str()));
  gwloc_dataset_info info;
  check(gwloc_dataset_get_info(ds.ptr, &info));
  std::printf("gen: t=%u Q=%u M=%u train=%u test=%u seed=%llu -> %s\n", info.samples, info.bins, info.pairs,
              info.train_count, info.test_count, static_cast<unsigned long long>(info.seed), f.out.c_str());
  std::printf("sha256 %s\n", gwloc_dataset_hash(ds.ptr));
  return 0;
}

struct TrainFlags {
  std::string data, out, hidden, dropout, lr, optimizer;
  long long epochs = 0, batch = 0, seed = 0, threads = 0;
  CLI::Option *o_hidden, *o_dropout, *o_lr, *o_opt, *o_epochs, *o_batch, *o_seed, *o_threads;
};

void on_epoch(std::uint32_t epoch, double loss, void*) {
  std::printf("epoch %u loss %.6f\n", epoch, loss);
  std::fflush(stdout);
}

int run_train(const TrainFlags& f, const json& file) {
  require_input(f.data, "dataset");
  json effective = json::object();
  Resolver r(file, effective);
  gwloc_train_config c;
  gwloc_train_config_default(&c);

  std::vector<std::uint32_t> hidden = {300, 200, 50};
  if (f.o_hidden->count() > 0) {
    hidden.clear();
    for (const auto& p : split_list(f.hidden, ',')) {
      const double v = parse_double(p, "--hidden");
      if (v < 1 || v != std::floor(v) || v > 1e6) throw UsageError("--hidden: '" + p + "' is not a positive width");
      hidden.push_back(static_cast<std::uint32_t>(v));
    }
  } else if (r.has_file("hidden")) {
    try {
      hidden = r.file("hidden").get<std::vector<std::uint32_t>>();
    } catch (const json::exception&) {
      throw UsageError("config key 'hidden' must be an array of widths");
    }
  }
  if (hidden.empty()) throw UsageError("hidden layer list is empty");
  effective["hidden"] = hidden;
  c.hidden = hidden.data();
  c.hidden_count = hidden.size();
  c.dropout = r.pick_real("dropout", f.o_dropout, f.dropout, c.dropout);
  c.epochs = to_u32(r.pick<long long>("epochs", f.o_epochs, f.epochs, c.epochs), "epochs");
  c.batch_size = to_u32(r.pick<long long>("batch_size", f.o_batch, f.batch, c.batch_size), "batch_size");
  c.learning_rate = r.pick_real("learning_rate", f.o_lr, f.lr, c.learning_rate);
  const std::string opt = r.pick<std::string>("optimizer", f.o_opt, f.optimizer, "adam");
  if (opt == "adam") {
    c.optimizer = GWLOC_OPT_ADAM;
  } else if (opt == "sgd") {
    c.optimizer = GWLOC_OPT_SGD;
  } else {
    throw UsageError("optimizer must be adam or sgd");
  }
  c.seed = static_cast<std::uint64_t>(r.pick<long long>("seed", f.o_seed, f.seed, 0));
  json unused;
  Resolver tr(file, unused);
  resolve_threads(tr, f.o_threads, f.threads);

  DatasetHandle ds;
  check(gwloc_dataset_load(f.data.c_str(), &ds.ptr));
  ModelHandle model;
  check(gwloc_model_train(ds.ptr, &c, on_epoch, nullptr, &model.ptr));
  check(gwloc_model_save(model.ptr, f.out.c_str()));
  std::printf("model -> %s sha256 %s\n", f.out.c_str(), gwloc_model_hash(model.ptr));
  return 0;
}

struct HeatmapFlags {
  std::string data, resolution, csv, json_out;
  long long index = 0, subsamples = 0, threads = 0;
  bool clean = false;
  CLI::Option *o_index, *o_res, *o_sub, *o_clean, *o_threads, *o_json;
};

int run_heatmap(const HeatmapFlags& f, const json& file) {
  require_input(f.data, "dataset");
  json effective = json::object();
  Resolver r(file, effective);
  gwloc_heatmap_config c;
  gwloc_heatmap_config_default(&c);
  const long long index = r.pick<long long>("index", f.o_index, f.index, 0);
  const auto [nx, ny] = parse_resolution(
      r.pick<std::string>("resolution", f.o_res, f.resolution, std::to_string(c.nx) + "x" + std::to_string(c.ny)),
      "resolution");
  c.nx = nx;
  c.ny = ny;
  c.subsamples = to_u32(r.pick<long long>("subsamples", f.o_sub, f.subsamples, c.subsamples), "subsamples");
  c.use_clean = r.pick<bool>("clean", f.o_clean, f.clean, false) ? 1 : 0;
  json unused;
  Resolver tr(file, unused);
  c.threads = resolve_threads(tr, f.o_threads, f.threads);
  effective["data"] = f.data;

  DatasetHandle ds;
  check(gwloc_dataset_load(f.data.c_str(), &ds.ptr));
  gwloc_dataset_info info;
  check(gwloc_dataset_get_info(ds.ptr, &info));
  if (index < 0 || static_cast<unsigned long long>(index) >= info.samples) {
    throw UsageError("--index " + std::to_string(index) + " out of range (dataset has " +
                     std::to_string(info.samples) + " samples)");
  }
  gwloc_heatmap* map = nullptr;
  check(gwloc_heatmap_compute(ds.ptr, static_cast<std::size_t>(index), &c, &map));
  std::unique_ptr<gwloc_heatmap, void (*)(gwloc_heatmap*)> guard(map, gwloc_heatmap_free);
  const std::string json_path = f.o_json->count() > 0 ? f.json_out : sidecar_path(f.csv);
  effective["dataset_sha256"] = gwloc_dataset_hash(ds.ptr);
  check(gwloc_heatmap_write(map, f.csv.c_str(), json_path.c_str(), effective.dump().c_str()));
  double ax, ay, score, tx, ty;
  check(gwloc_heatmap_argmax(map, &ax, &ay, &score));
  check(gwloc_heatmap_truth(map, &tx, &ty));
  std::printf("argmax (%.4f, %.4f) score %.6g\ntruth  (%.4f, %.4f) error %.4f m\n", ax, ay, score, tx, ty,
              std::hypot(ax - tx, ay - ty));
  return 0;
}

struct EvalFlags {
  std::string data, snrs, split, physical_resolution, out, json_out;
  std::vector<std::string> dnn;
  long long seed = 0, subsamples = 0, threads = 0;
  bool physical = false;
  CLI::Option *o_snrs, *o_split, *o_pres, *o_seed, *o_sub, *o_threads, *o_physical, *o_json;
};

int run_eval(const EvalFlags& f, const json& file) {
  require_input(f.data, "dataset");
  json effective = json::object();
  Resolver r(file, effective);
  gwloc_sweep_config c;
  gwloc_sweep_config_default(&c);

  std::vector<double> snrs(c.snrs, c.snrs + c.snr_count);
  if (f.o_snrs->count() > 0) {
    snrs = parse_doubles(f.snrs, "--snrs");
  } else if (r.has_file("snrs")) {
    const json& v = r.file("snrs");
    if (!v.is_array() || v.empty()) throw UsageError("config key 'snrs' must be a non-empty array");
    snrs.clear();
    for (const auto& s : v) {
      snrs.push_back(s.is_string() ? parse_double(s.get<std::string>(), "snrs") : s.get<double>());
    }
  }
  json snr_list = json::array();
  for (double s : snrs) snr_list.push_back(snr_json(s));
  effective["snrs"] = snr_list;
  c.snrs = snrs.data();
  c.snr_count = snrs.size();
  const std::string split = r.pick<std::string>("split", f.o_split, f.split, "test");
  c.split = split.c_str();
  c.physical = r.pick<bool>("physical", f.o_physical, f.physical, false) ? 1 : 0;
  const auto [nx, ny] = parse_resolution(
      r.pick<std::string>("physical_resolution", f.o_pres, f.physical_resolution, "50x50"), "physical_resolution");
  c.physical_nx = nx;
  c.physical_ny = ny;
  c.physical_subsamples = to_u32(r.pick<long long>("subsamples", f.o_sub, f.subsamples, 4), "subsamples");
  c.seed = static_cast<std::uint64_t>(r.pick<long long>("seed", f.o_seed, f.seed, 0));
  json unused;
  Resolver tr(file, unused);
  c.threads = resolve_threads(tr, f.o_threads, f.threads);

  std::vector<std::string> ids;
  std::vector<std::string> paths;
  for (const auto& spec : f.dnn) {
    const auto eq = spec.find('=');
    std::string id = eq == std::string::npos ? std::filesystem::path(spec).stem().string() : spec.substr(0, eq);
    std::string path = eq == std::string::npos ? spec : spec.substr(eq + 1);
    if (id.empty() || id == "physical") throw UsageError("--dnn: invalid model id '" + id + "'");
    if (std::find(ids.begin(), ids.end(), id) != ids.end()) throw UsageError("--dnn: duplicate model id '" + id + "'");
    require_input(path, "model");
    ids.push_back(std::move(id));
    paths.push_back(std::move(path));
  }
  if (ids.empty() && !c.physical) throw UsageError("eval needs at least one method (--dnn or --physical)");
  json dnn_echo = json::array();
  for (std::size_t i = 0; i < ids.size(); ++i) dnn_echo.push_back({{"id", ids[i]}, {"path", paths[i]}});
  effective["dnn"] = dnn_echo;
  effective["data"] = f.data;

  DatasetHandle ds;
  check(gwloc_dataset_load(f.data.c_str(), &ds.ptr));
  std::vector<ModelHandle> models(paths.size());
  std::vector<const gwloc_model*> model_ptrs;
  std::vector<const char*> id_ptrs;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    check(gwloc_model_load(paths[i].c_str(), &models[i].ptr));
    model_ptrs.push_back(models[i].ptr);
    id_ptrs.push_back(ids[i].c_str());
  }
  gwloc_report* report = nullptr;
  check(gwloc_eval_sweep(ds.ptr, &c, model_ptrs.data(), id_ptrs.data(), model_ptrs.size(), &report));
  std::unique_ptr<gwloc_report, void (*)(gwloc_report*)> guard(report, gwloc_report_free);
  const std::string json_path = f.o_json->count() > 0 ? f.json_out : sidecar_path(f.out);
  check(gwloc_report_write(report, f.out.c_str(), json_path.c_str(), effective.dump().c_str()));
  std::printf("%-12s %8s %10s %10s %6s\n", "method", "snr_db", "ale_mean", "ale_std", "n");
  for (std::size_t i = 0; i < gwloc_report_row_count(report); ++i) {
    gwloc_report_row row;
    check(gwloc_report_get_row(report, i, &row));
    std::printf("%-12s %8.2f %10.5f %10.5f %6zu\n", row.method, row.snr_db, row.ale_mean, row.ale_std, row.n);
  }
  std::printf("report -> %s\n", f.out.c_str());
  return 0;
}

const char* kFooter = R"(Files:
  GWDS  dataset file, magic "GWDS0001": 8-byte magic, u64 little-endian header
        length, JSON header, float32 little-endian payload (q-major Q x M).
  GWNN  checkpoint file, magic "GWNN0001": same container; payload holds each
        layer's row-major weights followed by its biases.

Config file (--config): TOML-style "key = value" lines, '#' comments.
  Top-level keys apply to every command; [gen], [train], [heatmap] and [eval]
  sections apply to one command. Command-line flags override the file, which
  overrides the built-in defaults.
    seed, threads
    [gen]     t, q, f_max, sensors, plate_length, plate_width, alpha
              ("truncnorm" or a number), snr (number or inf), ideal,
              full_scale, train_fraction, per_sample_sensors, window,
              window_center, window_width,
              modes = [{kind = "linear", c = 5400.0}, {kind = "sqrt", d = 0.25}]
    [train]   epochs, hidden = [300, 200, 50], dropout, batch_size,
              learning_rate, optimizer ("adam" or "sgd")
    [heatmap] index, resolution = "100x100", subsamples, clean
    [eval]    snrs = [5, 10, 15, 20, 25], split, physical,
              physical_resolution = "50x50", subsamples

Environment: GWLOC_THREADS is used when --threads is not given.
Exit status: 0 success, 1 runtime or format failure, 2 usage error.)";

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Guided-wave damage localization: simulate, train, localize, evaluate.", "gwloc"};
  app.footer(kFooter);
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", gwloc_version());
  std::string config_path;
  app.add_option("--config", config_path, "TOML-style config file")->check(CLI::ExistingFile);

  GenFlags g;
  auto* gen = app.add_subcommand("gen", "Simulate a dataset and write a GWDS file");
  g.o_t = gen->add_option("--t", g.t, "Number of samples (default 500; 2500 with --full-scale)");
  g.o_q = gen->add_option("--q", g.q, "Frequency bins Q (default 250; 1000 with --full-scale)");
  g.o_f_max = gen->add_option("--f-max", g.f_max, "Highest frequency in Hz (default 1e6)");
  g.o_sensors = gen->add_option("--sensors", g.sensors, "Number of sensors m (default 8)");
  g.o_pl = gen->add_option("--plate-length", g.plate_length, "Plate length in m (default 1)");
  g.o_pw = gen->add_option("--plate-width", g.plate_width, "Plate width in m (default 1)");
  g.o_alpha = gen->add_option("--alpha", g.alpha, "truncnorm (default) or a fixed value in [0.7, 1.3]");
  g.o_snr = gen->add_option("--snr", g.snr, "Noise level in dB, or inf (default 25)");
  g.o_ideal = gen->add_flag("--ideal", g.ideal, "alpha = 1 and no noise");
  g.o_full = gen->add_flag("--full-scale", g.full_scale, "Default to t = 2500, Q = 1000");
  g.o_tf = gen->add_option("--train-fraction", g.train_fraction, "Train split share (default 0.8)");
  g.o_pss = gen->add_flag("--per-sample-sensors", g.per_sample_sensors, "Draw a new sensor layout per sample");
  g.o_window = gen->add_flag("--window", g.window, "Apply a Gaussian excitation window");
  g.o_wc = gen->add_option("--window-center", g.window_center, "Window center in Hz (default 250e3)");
  g.o_ww = gen->add_option("--window-width", g.window_width, "Window width in Hz (default 100e3)");
  g.o_seed = gen->add_option("--seed", g.seed, "Master seed (default 0)");
  g.o_threads = gen->add_option("--threads", g.threads, "Worker cap; 0 uses every core");
  gen->add_option("--out", g.out, "Output GWDS file")->required();

  TrainFlags t;
  auto* train = app.add_subcommand("train", "Train the regression network and write a GWNN checkpoint");
  train->add_option("--data", t.data, "Training GWDS file")->required();
  t.o_epochs = train->add_option("--epochs", t.epochs, "Epochs (default 50)");
  t.o_hidden = train->add_option("--hidden", t.hidden, "Hidden widths, comma separated (default 300,200,50)");
  t.o_dropout = train->add_option("--dropout", t.dropout, "Dropout probability (default 0.05)");
  t.o_batch = train->add_option("--batch-size", t.batch, "Mini-batch size (default 32)");
  t.o_lr = train->add_option("--learning-rate", t.lr, "Step size (default 1e-3)");
  t.o_opt = train->add_option("--optimizer", t.optimizer, "adam (default) or sgd");
  t.o_seed = train->add_option("--seed", t.seed, "Training seed (default 0)");
  t.o_threads = train->add_option("--threads", t.threads, "Worker cap; 0 uses every core");
  train->add_option("--out", t.out, "Output GWNN file")->required();

  HeatmapFlags h;
  auto* heatmap = app.add_subcommand("heatmap", "Score a grid of candidate damage locations for one sample");
  heatmap->add_option("--data", h.data, "GWDS file")->required();
  h.o_index = heatmap->add_option("--index", h.index, "Sample index (default 0)");
  h.o_res = heatmap->add_option("--resolution", h.resolution, "Grid NxM (default 100x100)");
  h.o_sub = heatmap->add_option("--subsamples", h.subsamples, "Template points per cell side (default 4)");
  h.o_clean = heatmap->add_flag("--clean", h.clean, "Score the noiseless record");
  h.o_threads = heatmap->add_option("--threads", h.threads, "Worker cap; 0 uses every core");
  heatmap->add_option("--csv", h.csv, "Output score CSV (ny rows of nx values, y ascending)")->required();
  h.o_json = heatmap->add_option("--json", h.json_out, "Output JSON sidecar (default: CSV path with .json)");

  EvalFlags e;
  auto* ev = app.add_subcommand("eval", "Sweep SNRs and report the average localization error");
  ev->add_option("--data", e.data, "GWDS file with a clean payload")->required();
  e.o_snrs = ev->add_option("--snrs", e.snrs, "SNR grid in dB, comma separated (default 5,10,15,20,25)");
  ev->add_option("--dnn", e.dnn, "GWNN checkpoint, optionally id=path; repeatable");
  e.o_physical = ev->add_flag("--physical", e.physical, "Include the grid-search baseline");
  e.o_pres = ev->add_option("--physical-resolution", e.physical_resolution, "Baseline grid NxM (default 50x50)");
  e.o_sub = ev->add_option("--subsamples", e.subsamples, "Baseline template points per cell side (default 4)");
  e.o_split = ev->add_option("--split", e.split, "test (default), train or all");
  e.o_seed = ev->add_option("--seed", e.seed, "Noise seed (default 0)");
  e.o_threads = ev->add_option("--threads", e.threads, "Worker cap; 0 uses every core");
  ev->add_option("--out", e.out, "Output report CSV")->required();
  e.o_json = ev->add_option("--json", e.json_out, "Output JSON sidecar (default: CSV path with .json)");

  for (auto* sub : {gen, train, heatmap, ev}) sub->footer(kFooter);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    const CLI::App* active = app.get_subcommands().front();
    const std::string name = active->get_name();
    const json file = config_path.empty() ? json::object() : load_config(config_path, name);
    if (name == "gen") return run_gen(g, file);
    if (name == "train") return run_train(t, file);
    if (name == "heatmap") return run_heatmap(h, file);
    return run_eval(e, file);
  } catch (const UsageError& err) {
    std::fprintf(stderr, "gwloc: %s\n", err.what());
    return kExitUsage;
  } catch (const std::exception& err) {
    std::fprintf(stderr, "gwloc: %s\n", err.what());
    return kExitRuntime;
  }
}
