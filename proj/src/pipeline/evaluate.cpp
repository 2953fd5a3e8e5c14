#include "pat/pipeline/evaluate.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "pat/beamform.hpp"
#include "pat/io/checkpoint.hpp"
#include "pat/io/image_io.hpp"
#include "pat/io/tensor_file.hpp"
#include "pat/metrics.hpp"

namespace pat::pipeline {

namespace {

PressureImage clamp01(const PressureImage& img) {
  PressureImage out = img;
  for (double& v : out.values) v = std::clamp(v, 0.0, 1.0);
  return out;
}

std::string format_metric(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

// Network inference over one sample with a frozen model.
PressureImage infer(ynet::Model<float>& model, const Sinogram& sino, const PressureImage& das) {
  const bool needs_signals = model.config.variant == ynet::Variant::full ||
                             model.config.variant == ynet::Variant::enc1_only_skips;
  auto das_var = nn::make_var(image_to_input(das));
  nn::Var<float> sino_var;
  if (needs_signals) sino_var = nn::make_var(sinogram_to_input(sino));
  auto fwd = ynet::ynet_forward(model, needs_signals ? &sino_var : nullptr, das_var,
                                nn::BatchNormMode::eval);
  return tensor_to_image(fwd.output->value);
}

struct Accumulator {
  int count = 0;
  double sum = 0, sq = 0;
  void push(double v) {
    ++count;
    sum += v;
    sq += v * v;
  }
  double mean() const { return count ? sum / count : 0.0; }
  double stddev() const {
    if (!count) return 0.0;
    return std::sqrt(std::max(0.0, sq / count - mean() * mean()));
  }
};

}  // namespace

bool is_learned_method(const std::string& method) {
  return method != "das" && method != "ubp";
}

EvalResult evaluate(const DatasetManifest& manifest, const EvalOptions& options) {
  const auto entries = manifest.split("test");
  if (entries.empty()) throw std::invalid_argument("evaluate: empty test split");
  if (options.methods.empty()) throw std::invalid_argument("evaluate: no methods requested");

  std::map<std::string, ynet::Model<float>> models;
  for (const auto& method : options.methods) {
    if (!is_learned_method(method)) continue;
    (void)ynet::variant_from_string(method);  // validates the name
    auto it = options.checkpoints.find(method);
    if (it == options.checkpoints.end())
      throw std::invalid_argument("evaluate: missing checkpoint for learned method " + method);
    io::Checkpoint ckpt = io::load_checkpoint(it->second);
    if (ynet::to_string(ckpt.model.config.variant) != method)
      throw std::invalid_argument("evaluate: checkpoint " + it->second.string() +
                                  " holds variant " + ynet::to_string(ckpt.model.config.variant) +
                                  ", not " + method);
    models.emplace(method, std::move(ckpt.model));
  }

  std::error_code ec;
  std::filesystem::create_directories(options.out_dir, ec);
  if (!std::filesystem::is_directory(options.out_dir))
    throw std::runtime_error("evaluate: cannot create " + options.out_dir.string());
  const std::filesystem::path csv_path = options.out_dir / "metrics.csv";
  std::ofstream csv(csv_path);
  if (!csv) throw std::runtime_error("evaluate: cannot write " + csv_path.string());
  csv << "sample_id,method,ssim,psnr_db,snr_db\n";

  std::map<std::string, std::array<Accumulator, 3>> stats;
  for (const auto* entry : entries) {
    const LoadedSample sample = load_sample(manifest, *entry);
    const PressureImage gt = clamp01(sample.gt);
    const BinaryMask background = background_from_ground_truth(gt);

    for (const auto& method : options.methods) {
      PressureImage recon;
      if (method == "das") {
        recon = das_reconstruct(sample.sinogram, manifest.geometry);
      } else if (method == "ubp") {
        recon = ubp_reconstruct(sample.sinogram, manifest.geometry);
      } else {
        recon = infer(models.at(method), sample.sinogram, sample.das);
      }
      const PressureImage scored = clamp01(recon);
      const double s = ssim(scored, gt);
      const double p = psnr(scored, gt);
      double n = std::numeric_limits<double>::quiet_NaN();
      try {
        n = snr(scored, background);
      } catch (const std::invalid_argument&) {
        // degenerate background (uniform image); recorded as nan
      }
      csv << entry->id << "," << method << "," << format_metric(s) << ","
          << format_metric(p) << "," << format_metric(n) << "\n";
      auto& acc = stats[method];
      acc[0].push(s);
      acc[1].push(p);
      if (std::isfinite(n)) acc[2].push(n);

      if (options.write_diff_images) {
        PressureImage diff(gt.width, gt.height);
        for (size_t i = 0; i < diff.values.size(); ++i)
          diff.values[i] = std::abs(gt.values[i] - scored.values[i]);
        io::write_pgm(options.out_dir / (entry->id + "_" + method + "_diff.pgm"),
                      io::quantize_unit(diff), diff.width, diff.height);
      }
    }
  }

  EvalResult result;
  result.csv = csv_path;
  for (const auto& method : options.methods) {
    const auto& acc = stats.at(method);
    csv << "mean," << method << "," << format_metric(acc[0].mean()) << ","
        << format_metric(acc[1].mean()) << "," << format_metric(acc[2].mean()) << "\n";
    csv << "std," << method << "," << format_metric(acc[0].stddev()) << ","
        << format_metric(acc[1].stddev()) << "," << format_metric(acc[2].stddev()) << "\n";
    MethodAggregate agg;
    agg.method = method;
    agg.count = acc[0].count;
    agg.ssim_mean = acc[0].mean();
    agg.ssim_std = acc[0].stddev();
    agg.psnr_mean = acc[1].mean();
    agg.psnr_std = acc[1].stddev();
    agg.snr_mean = acc[2].mean();
    agg.snr_std = acc[2].stddev();
    result.aggregates.push_back(agg);
  }
  return result;
}

ReconResult reconstruct_single(const std::filesystem::path& input, const std::string& method,
                               const std::filesystem::path& checkpoint,
                               const ImagingGeometry& geometry) {
  const io::TensorFile file = io::read_tensor_file(input);
  if (file.dims.size() != 2)
    throw std::invalid_argument("reconstruct_single: expected a 2D tensor input");
  const auto rows = static_cast<int>(file.dims[0]);
  const auto cols = static_cast<int>(file.dims[1]);

  Sinogram sino;
  PressureImage image_input;
  bool have_sinogram = false;
  if (rows == geometry.sample_count && cols == geometry.sensor_count) {
    sino.sample_count = rows;
    sino.sensor_count = cols;
    sino.values = file.as_f64();
    have_sinogram = true;
  } else if (rows == geometry.grid_ny && cols == geometry.grid_nx) {
    image_input.height = rows;
    image_input.width = cols;
    image_input.values = file.as_f64();
  } else {
    throw std::invalid_argument(
        "reconstruct_single: input dimensions match neither the sinogram nor the image grid");
  }

  std::optional<io::Checkpoint> ckpt;
  if (is_learned_method(method)) {
    (void)ynet::variant_from_string(method);
    if (checkpoint.empty())
      throw std::invalid_argument("reconstruct_single: method " + method +
                                  " requires a checkpoint");
    ckpt = io::load_checkpoint(checkpoint);
    if (ynet::to_string(ckpt->model.config.variant) != method)
      throw std::invalid_argument("reconstruct_single: checkpoint variant mismatch");
    const bool needs_signals = method == "full" || method == "enc1_only_skips";
    if (needs_signals && !have_sinogram)
      throw std::invalid_argument("reconstruct_single: method " + method +
                                  " needs a sinogram input");
  } else if (!have_sinogram) {
    throw std::invalid_argument("reconstruct_single: " + method + " needs a sinogram input");
  }

  const auto t0 = std::chrono::steady_clock::now();
  ReconResult result;
  if (method == "das") {
    result.image = das_reconstruct(sino, geometry);
  } else if (method == "ubp") {
    result.image = ubp_reconstruct(sino, geometry);
  } else {
    const PressureImage beamformed =
        have_sinogram ? das_reconstruct(sino, geometry) : image_input;
    result.image = infer(ckpt->model, sino, beamformed);
  }
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

}  // namespace pat::pipeline
