#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "pat/pipeline/dataset.hpp"

namespace pat::pipeline {

// Method names: "das", "ubp", or a network variant ("full",
// "enc1_only_skips", "enc2_only_skips", "unet_post"). Learned methods need a
// checkpoint whose variant tag matches.
bool is_learned_method(const std::string& method);

struct EvalOptions {
  std::vector<std::string> methods;
  std::map<std::string, std::filesystem::path> checkpoints;
  std::filesystem::path out_dir;
  bool write_diff_images = false;
};

struct MethodAggregate {
  std::string method;
  int count = 0;
  double ssim_mean = 0, ssim_std = 0;
  double psnr_mean = 0, psnr_std = 0;
  double snr_mean = 0, snr_std = 0;
};

struct EvalResult {
  std::filesystem::path csv;
  std::vector<MethodAggregate> aggregates;
};

// Reconstructs every test sample with every method, scores SSIM/PSNR/SNR
// against the clamped ground truth and writes one CSV row per (sample,
// method) followed by per-method mean and std rows.
EvalResult evaluate(const DatasetManifest& manifest, const EvalOptions& options);

struct ReconResult {
  PressureImage image;
  double seconds = 0.0;  // reconstruction wall time
};

// Single-shot inference: a sinogram tensor drives any method (DAS runs
// first for the network variants that consume a beamformed image); an image
// tensor can only feed the image-input variants directly.
ReconResult reconstruct_single(const std::filesystem::path& input, const std::string& method,
                               const std::filesystem::path& checkpoint,
                               const ImagingGeometry& geometry);

}  // namespace pat::pipeline
