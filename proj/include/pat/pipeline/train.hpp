#pragma once

#include <filesystem>

#include "pat/pipeline/dataset.hpp"
#include "pat/ynet.hpp"

namespace pat::pipeline {

struct TrainOptions {
  io::TrainParams train;
  ynet::Config model;               // shapes must match the dataset geometry
  std::filesystem::path out_dir;
  std::filesystem::path resume;     // optional checkpoint to continue from
  bool quiet = false;
};

struct TrainResult {
  std::filesystem::path checkpoint;  // written at completion
  std::filesystem::path loss_log;
  double initial_total = 0.0;
  double final_total = 0.0;
};

// Seeded training over the manifest's train split: per-epoch shuffling,
// forward/loss/backward/Adam per batch, CSV loss log, checkpoints at the
// configured epoch interval and at completion. Per-epoch shuffle seeds
// derive from (seed, epoch), so a resumed run replays the identical batch
// sequence. Aborts on a non-finite loss, naming the offending batch.
TrainResult train(const DatasetManifest& manifest, const TrainOptions& options);

}  // namespace pat::pipeline
