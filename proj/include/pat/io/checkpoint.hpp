#pragma once

#include <filesystem>
#include <optional>

#include "pat/nn/adam.hpp"
#include "pat/ynet.hpp"

namespace pat::io {

// Checkpoint container: "PATC" magic, version byte, little-endian u32 JSON
// header length, the JSON header (architecture, epoch, optimizer
// hyperparameters, tensor directory), then one PATN tensor blob per
// directory entry. Saving the optimizer state makes resumed training
// reproduce an uninterrupted run.
struct Checkpoint {
  ynet::Model<float> model;
  std::optional<nn::AdamState<float>> adam;
  int epoch = 0;
};

void save_checkpoint(const std::filesystem::path& path, const ynet::Model<float>& model,
                     const nn::AdamState<float>* adam, int epoch);

Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace pat::io
