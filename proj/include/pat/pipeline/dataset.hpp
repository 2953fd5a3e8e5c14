#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pat/image.hpp"
#include "pat/io/run_config.hpp"
#include "pat/tensor.hpp"

namespace pat::pipeline {

struct SampleEntry {
  std::string id;
  std::string split;  // "train" or "test"
  std::string gt, sinogram, das;  // paths relative to the manifest directory
};

struct DatasetManifest {
  std::filesystem::path root;  // directory holding manifest.json
  ImagingGeometry geometry;
  std::uint64_t seed = 0;
  double noise_snr_db = 60.0;
  int train_count = 0;
  int test_count = 0;
  std::vector<SampleEntry> samples;

  std::vector<const SampleEntry*> split(const std::string& tag) const;
};

// Generates ground truth -> sinogram -> beamformed triples, entirely from
// the dataset seed: phantom composition, projection, band-pass, 60 dB noise
// and the DAS image, one sample at a time. Per-sample seeds derive from the
// master seed and the sample index, so any subset is reproducible.
DatasetManifest build_dataset(const std::filesystem::path& out_dir,
                              const io::DatasetConfig& dataset,
                              const ImagingGeometry& geometry,
                              bool write_previews = true);

DatasetManifest load_manifest(const std::filesystem::path& dir_or_file);

struct LoadedSample {
  PressureImage gt;
  Sinogram sinogram;
  PressureImage das;
};

LoadedSample load_sample(const DatasetManifest& manifest, const SampleEntry& entry);

// Network-facing views: (1, 1, H, W) float tensors. Sinograms are scaled by
// their max absolute value so encoder inputs live in [-1, 1].
nn::Tensor<float> sinogram_to_input(const Sinogram& s);
nn::Tensor<float> image_to_input(const PressureImage& img);
PressureImage tensor_to_image(const nn::Tensor<float>& t);

}  // namespace pat::pipeline
