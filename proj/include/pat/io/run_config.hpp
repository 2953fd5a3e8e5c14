#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "pat/geometry.hpp"
#include "pat/phantom.hpp"
#include "pat/ynet.hpp"

namespace pat::io {

struct DatasetConfig {
  int train_count = 256;
  int test_count = 32;
  std::uint64_t seed = 7;
  double noise_snr_db = 60.0;
  VesselParams vessel;
  std::string mask_dir;  // optional: masks to compose instead of procedural ones
};

struct TrainParams {
  double learning_rate = 0.005;
  int batch_size = 8;
  int epochs = 60;
  std::uint64_t seed = 7;
  int checkpoint_interval = 10;  // epochs; 0 = only at completion
};

// One JSON document drives every command. Unknown keys anywhere are
// rejected; docs/run_config.schema.json is the published schema.
struct RunConfig {
  ImagingGeometry geometry;
  ynet::Config model;  // signal/image shapes are derived from the geometry
  TrainParams train;
  DatasetConfig dataset;
  bool deterministic = true;  // strict sequential mode
  int threads = 0;            // 0 = automatic

  void sync_model_shapes() {
    model.signal_h = geometry.sample_count;
    model.signal_w = geometry.sensor_count;
    model.image_h = geometry.grid_ny;
    model.image_w = geometry.grid_nx;
  }
};

RunConfig default_run_config();
RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);

nlohmann::json geometry_to_json(const ImagingGeometry& g);
ImagingGeometry geometry_from_json(const nlohmann::json& j);

}  // namespace pat::io
