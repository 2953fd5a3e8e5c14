#include "pat/io/run_config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

namespace pat::io {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw std::invalid_argument("run config: " + where + ": " + what);
}

void require_object(const json& j, const std::string& where,
                    const std::set<std::string>& allowed) {
  if (!j.is_object()) fail(where, "expected an object");
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key)) fail(where, "unknown key \"" + key + "\"");
}

double get_number(const json& j, const std::string& where, const std::string& key,
                  double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) fail(where, "\"" + key + "\" must be a number");
  return j.at(key).get<double>();
}

std::int64_t get_integer(const json& j, const std::string& where, const std::string& key,
                         std::int64_t fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer()) fail(where, "\"" + key + "\" must be an integer");
  return j.at(key).get<std::int64_t>();
}

bool get_bool(const json& j, const std::string& where, const std::string& key, bool fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_boolean()) fail(where, "\"" + key + "\" must be a boolean");
  return j.at(key).get<bool>();
}

std::string get_string(const json& j, const std::string& where, const std::string& key,
                       const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_string()) fail(where, "\"" + key + "\" must be a string");
  return j.at(key).get<std::string>();
}

}  // namespace

RunConfig default_run_config() {
  RunConfig cfg;
  cfg.geometry = default_geometry();
  cfg.sync_model_shapes();
  return cfg;
}

nlohmann::json geometry_to_json(const ImagingGeometry& g) {
  json j;
  j["grid_nx"] = g.grid_nx;
  j["grid_ny"] = g.grid_ny;
  j["pixel_pitch"] = g.pixel_pitch;
  j["sound_speed"] = g.sound_speed;
  j["sensor_count"] = g.sensor_count;
  j["sample_rate"] = g.sample_rate;
  j["sample_count"] = g.sample_count;
  j["center_frequency"] = g.center_frequency;
  j["fractional_bandwidth"] = g.fractional_bandwidth;
  j["sensor_positions"] = g.sensor_x;
  return j;
}

ImagingGeometry geometry_from_json(const nlohmann::json& j) {
  const std::string where = "geometry";
  require_object(j, where,
                 {"grid_nx", "grid_ny", "pixel_pitch", "sound_speed", "sensor_count",
                  "sample_rate", "sample_count", "center_frequency", "fractional_bandwidth",
                  "sensor_positions"});
  ImagingGeometry d = default_geometry();
  ImagingGeometry g;
  g.grid_nx = static_cast<int>(get_integer(j, where, "grid_nx", d.grid_nx));
  g.grid_ny = static_cast<int>(get_integer(j, where, "grid_ny", d.grid_ny));
  g.pixel_pitch = get_number(j, where, "pixel_pitch", d.pixel_pitch);
  g.sound_speed = get_number(j, where, "sound_speed", d.sound_speed);
  g.sensor_count = static_cast<int>(get_integer(j, where, "sensor_count", d.sensor_count));
  g.sample_rate = get_number(j, where, "sample_rate", d.sample_rate);
  g.sample_count = static_cast<int>(get_integer(j, where, "sample_count", d.sample_count));
  g.center_frequency = get_number(j, where, "center_frequency", d.center_frequency);
  g.fractional_bandwidth = get_number(j, where, "fractional_bandwidth", d.fractional_bandwidth);
  if (j.contains("sensor_positions")) {
    if (!j.at("sensor_positions").is_array()) fail(where, "\"sensor_positions\" must be an array");
    g.sensor_x = j.at("sensor_positions").get<std::vector<double>>();
  } else {
    g.sensor_x.resize(static_cast<size_t>(g.sensor_count));
    const double pitch = g.grid_nx * g.pixel_pitch / g.sensor_count;
    for (int i = 0; i < g.sensor_count; ++i) g.sensor_x[static_cast<size_t>(i)] = (i + 0.5) * pitch;
  }
  g.validate();
  return g;
}

RunConfig parse_run_config(const nlohmann::json& j) {
  require_object(j, "root",
                 {"geometry", "model", "train", "dataset", "deterministic", "threads"});
  RunConfig cfg = default_run_config();

  if (j.contains("geometry")) cfg.geometry = geometry_from_json(j.at("geometry"));

  if (j.contains("model")) {
    const json& m = j.at("model");
    const std::string where = "model";
    require_object(m, where, {"base_channels", "variant", "aux_weight"});
    cfg.model.base_channels =
        static_cast<int>(get_integer(m, where, "base_channels", cfg.model.base_channels));
    cfg.model.variant =
        ynet::variant_from_string(get_string(m, where, "variant", to_string(cfg.model.variant)));
    cfg.model.aux_weight = get_number(m, where, "aux_weight", cfg.model.aux_weight);
  }

  if (j.contains("train")) {
    const json& t = j.at("train");
    const std::string where = "train";
    require_object(t, where,
                   {"learning_rate", "batch_size", "epochs", "seed", "checkpoint_interval"});
    cfg.train.learning_rate = get_number(t, where, "learning_rate", cfg.train.learning_rate);
    cfg.train.batch_size =
        static_cast<int>(get_integer(t, where, "batch_size", cfg.train.batch_size));
    cfg.train.epochs = static_cast<int>(get_integer(t, where, "epochs", cfg.train.epochs));
    cfg.train.seed = static_cast<std::uint64_t>(
        get_integer(t, where, "seed", static_cast<std::int64_t>(cfg.train.seed)));
    cfg.train.checkpoint_interval = static_cast<int>(
        get_integer(t, where, "checkpoint_interval", cfg.train.checkpoint_interval));
    if (cfg.train.learning_rate <= 0.0) fail(where, "learning_rate must be positive");
    if (cfg.train.batch_size <= 0) fail(where, "batch_size must be positive");
    if (cfg.train.epochs <= 0) fail(where, "epochs must be positive");
    if (cfg.train.checkpoint_interval < 0) fail(where, "checkpoint_interval must be >= 0");
  }

  if (j.contains("dataset")) {
    const json& ds = j.at("dataset");
    const std::string where = "dataset";
    require_object(ds, where,
                   {"train_count", "test_count", "seed", "noise_snr_db", "vessel", "mask_dir"});
    cfg.dataset.train_count =
        static_cast<int>(get_integer(ds, where, "train_count", cfg.dataset.train_count));
    cfg.dataset.test_count =
        static_cast<int>(get_integer(ds, where, "test_count", cfg.dataset.test_count));
    cfg.dataset.seed = static_cast<std::uint64_t>(
        get_integer(ds, where, "seed", static_cast<std::int64_t>(cfg.dataset.seed)));
    cfg.dataset.noise_snr_db = get_number(ds, where, "noise_snr_db", cfg.dataset.noise_snr_db);
    cfg.dataset.mask_dir = get_string(ds, where, "mask_dir", cfg.dataset.mask_dir);
    if (ds.contains("vessel")) {
      const json& v = ds.at("vessel");
      const std::string vwhere = "dataset.vessel";
      require_object(v, vwhere, {"branch_count", "steps", "step_length", "thickness"});
      cfg.dataset.vessel.branch_count = static_cast<int>(
          get_integer(v, vwhere, "branch_count", cfg.dataset.vessel.branch_count));
      cfg.dataset.vessel.steps =
          static_cast<int>(get_integer(v, vwhere, "steps", cfg.dataset.vessel.steps));
      cfg.dataset.vessel.step_length =
          get_number(v, vwhere, "step_length", cfg.dataset.vessel.step_length);
      cfg.dataset.vessel.thickness =
          static_cast<int>(get_integer(v, vwhere, "thickness", cfg.dataset.vessel.thickness));
    }
    if (cfg.dataset.train_count < 0 || cfg.dataset.test_count < 0)
      fail(where, "sample counts must be >= 0");
  }

  cfg.deterministic = get_bool(j, "root", "deterministic", cfg.deterministic);
  cfg.threads = static_cast<int>(get_integer(j, "root", "threads", cfg.threads));
  if (cfg.threads < 0) fail("root", "threads must be >= 0");

  cfg.sync_model_shapes();
  cfg.model.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("run config: cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("run config: " + path.string() + ": " + e.what());
  }
  return parse_run_config(j);
}

}  // namespace pat::io
