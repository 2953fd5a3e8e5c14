#include "pat/pipeline/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "pat/beamform.hpp"
#include "pat/forward_model.hpp"
#include "pat/io/image_io.hpp"
#include "pat/io/tensor_file.hpp"
#include "pat/phantom.hpp"
#include "pat/rng.hpp"

namespace pat::pipeline {

namespace {

using nlohmann::json;

std::string sample_id(int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "s%04d", index);
  return buf;
}

std::vector<float> to_f32(const std::vector<double>& v) {
  return std::vector<float>(v.begin(), v.end());
}

void write_image_f32(const std::filesystem::path& path, const PressureImage& img) {
  io::write_tensor_file(path, io::TensorFile::from_f32(
                                  to_f32(img.values),
                                  {static_cast<std::uint64_t>(img.height),
                                   static_cast<std::uint64_t>(img.width)}));
}

void write_sinogram_f32(const std::filesystem::path& path, const Sinogram& s) {
  io::write_tensor_file(path, io::TensorFile::from_f32(
                                  to_f32(s.values),
                                  {static_cast<std::uint64_t>(s.sample_count),
                                   static_cast<std::uint64_t>(s.sensor_count)}));
}

std::vector<std::filesystem::path> list_mask_files(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension().string();
    if (ext == ".pgm" || ext == ".png" || ext == ".PGM" || ext == ".PNG")
      files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty())
    throw std::invalid_argument("build_dataset: no PGM/PNG masks in " + dir.string());
  return files;
}

}  // namespace

std::vector<const SampleEntry*> DatasetManifest::split(const std::string& tag) const {
  std::vector<const SampleEntry*> out;
  for (const auto& s : samples)
    if (s.split == tag) out.push_back(&s);
  return out;
}

DatasetManifest build_dataset(const std::filesystem::path& out_dir,
                              const io::DatasetConfig& dataset,
                              const ImagingGeometry& geometry, bool write_previews) {
  if (dataset.train_count + dataset.test_count < 1)
    throw std::invalid_argument("build_dataset: need at least one sample");
  geometry.validate();

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir))
    throw std::runtime_error("build_dataset: cannot create " + out_dir.string());

  std::vector<std::filesystem::path> mask_files;
  if (!dataset.mask_dir.empty()) mask_files = list_mask_files(dataset.mask_dir);

  DatasetManifest manifest;
  manifest.root = out_dir;
  manifest.geometry = geometry;
  manifest.seed = dataset.seed;
  manifest.noise_snr_db = dataset.noise_snr_db;
  manifest.train_count = dataset.train_count;
  manifest.test_count = dataset.test_count;

  const int total = dataset.train_count + dataset.test_count;
  for (int i = 0; i < total; ++i) {
    const std::uint64_t base = derive_seed(dataset.seed, static_cast<std::uint64_t>(i));
    BinaryMask mask;
    if (mask_files.empty()) {
      mask = procedural_vessel_mask(derive_seed(base, 0), dataset.vessel);
    } else {
      mask = io::read_mask(mask_files[static_cast<size_t>(i) % mask_files.size()]);
    }
    const PressureImage gt = compose_vessel_phantom(mask, derive_seed(base, 1));
    Sinogram sino = apply_bandpass(forward_project(gt, geometry), geometry);
    sino = add_noise(sino, dataset.noise_snr_db, derive_seed(base, 2));
    const PressureImage das = das_reconstruct(sino, geometry);

    SampleEntry entry;
    entry.id = sample_id(i);
    entry.split = i < dataset.train_count ? "train" : "test";
    entry.gt = entry.id + "_gt.patn";
    entry.sinogram = entry.id + "_sino.patn";
    entry.das = entry.id + "_das.patn";
    write_image_f32(out_dir / entry.gt, gt);
    write_sinogram_f32(out_dir / entry.sinogram, sino);
    write_image_f32(out_dir / entry.das, das);
    if (write_previews) {
      io::write_pgm(out_dir / (entry.id + "_gt.pgm"), io::quantize_unit(gt), gt.width, gt.height);
      io::write_pgm(out_dir / (entry.id + "_das.pgm"), io::quantize_signed(das), das.width,
                    das.height);
    }
    manifest.samples.push_back(std::move(entry));
  }

  json j;
  j["format"] = "pat-dataset";
  j["version"] = 1;
  j["seed"] = dataset.seed;
  j["noise_snr_db"] = dataset.noise_snr_db;
  j["counts"] = {{"train", dataset.train_count}, {"test", dataset.test_count}};
  j["geometry"] = io::geometry_to_json(geometry);
  json samples = json::array();
  for (const auto& s : manifest.samples)
    samples.push_back({{"id", s.id},
                       {"split", s.split},
                       {"gt", s.gt},
                       {"sinogram", s.sinogram},
                       {"das", s.das}});
  j["samples"] = samples;

  std::ofstream out(out_dir / "manifest.json");
  if (!out) throw std::runtime_error("build_dataset: cannot write manifest.json");
  out << j.dump(2) << "\n";
  return manifest;
}

DatasetManifest load_manifest(const std::filesystem::path& dir_or_file) {
  std::filesystem::path file = dir_or_file;
  if (std::filesystem::is_directory(file)) file /= "manifest.json";
  std::ifstream in(file);
  if (!in) throw std::runtime_error("load_manifest: cannot open " + file.string());
  json j;
  in >> j;
  if (j.value("format", "") != "pat-dataset")
    throw std::runtime_error("load_manifest: " + file.string() + " is not a dataset manifest");

  DatasetManifest manifest;
  manifest.root = file.parent_path();
  manifest.geometry = io::geometry_from_json(j.at("geometry"));
  manifest.seed = j.at("seed").get<std::uint64_t>();
  manifest.noise_snr_db = j.at("noise_snr_db").get<double>();
  manifest.train_count = j.at("counts").at("train").get<int>();
  manifest.test_count = j.at("counts").at("test").get<int>();

  std::set<std::string> seen;
  for (const auto& s : j.at("samples")) {
    SampleEntry entry;
    entry.id = s.at("id").get<std::string>();
    entry.split = s.at("split").get<std::string>();
    entry.gt = s.at("gt").get<std::string>();
    entry.sinogram = s.at("sinogram").get<std::string>();
    entry.das = s.at("das").get<std::string>();
    if (!seen.insert(entry.id).second)
      throw std::runtime_error("load_manifest: duplicate sample id " + entry.id);
    if (entry.split != "train" && entry.split != "test")
      throw std::runtime_error("load_manifest: bad split tag for " + entry.id);
    for (const auto& rel : {entry.gt, entry.sinogram, entry.das})
      if (!std::filesystem::exists(manifest.root / rel))
        throw std::runtime_error("load_manifest: missing file " + rel);
    manifest.samples.push_back(std::move(entry));
  }
  return manifest;
}

LoadedSample load_sample(const DatasetManifest& manifest, const SampleEntry& entry) {
  LoadedSample out;
  const auto gt = io::read_tensor_file(manifest.root / entry.gt);
  const auto sino = io::read_tensor_file(manifest.root / entry.sinogram);
  const auto das = io::read_tensor_file(manifest.root / entry.das);
  if (gt.dims.size() != 2 || sino.dims.size() != 2 || das.dims.size() != 2)
    throw std::runtime_error("load_sample: expected 2D tensors for " + entry.id);

  out.gt.height = static_cast<int>(gt.dims[0]);
  out.gt.width = static_cast<int>(gt.dims[1]);
  out.gt.values = gt.as_f64();
  out.das.height = static_cast<int>(das.dims[0]);
  out.das.width = static_cast<int>(das.dims[1]);
  out.das.values = das.as_f64();
  out.sinogram.sample_count = static_cast<int>(sino.dims[0]);
  out.sinogram.sensor_count = static_cast<int>(sino.dims[1]);
  out.sinogram.values = sino.as_f64();
  return out;
}

nn::Tensor<float> sinogram_to_input(const Sinogram& s) {
  nn::Tensor<float> t({1, 1, s.sample_count, s.sensor_count});
  double peak = 0.0;
  for (double v : s.values) peak = std::max(peak, std::abs(v));
  const double inv = peak > 0.0 ? 1.0 / peak : 0.0;
  for (size_t i = 0; i < s.values.size(); ++i)
    t[static_cast<std::int64_t>(i)] = static_cast<float>(s.values[i] * inv);
  return t;
}

nn::Tensor<float> image_to_input(const PressureImage& img) {
  nn::Tensor<float> t({1, 1, img.height, img.width});
  for (size_t i = 0; i < img.values.size(); ++i)
    t[static_cast<std::int64_t>(i)] = static_cast<float>(img.values[i]);
  return t;
}

PressureImage tensor_to_image(const nn::Tensor<float>& t) {
  if (t.ndim() != 4 || t.dim(0) != 1 || t.dim(1) != 1)
    throw std::invalid_argument("tensor_to_image: expected a (1, 1, H, W) tensor");
  PressureImage img(static_cast<int>(t.dim(3)), static_cast<int>(t.dim(2)));
  for (size_t i = 0; i < img.values.size(); ++i)
    img.values[i] = static_cast<double>(t[static_cast<std::int64_t>(i)]);
  return img;
}

}  // namespace pat::pipeline
