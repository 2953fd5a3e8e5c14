#include "pat/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <map>

#include <CLI11.hpp>

#include "pat/io/checkpoint.hpp"
#include "pat/io/image_io.hpp"
#include "pat/io/run_config.hpp"
#include "pat/io/tensor_file.hpp"
#include "pat/metrics.hpp"
#include "pat/parallel.hpp"
#include "pat/pipeline/dataset.hpp"
#include "pat/pipeline/evaluate.hpp"
#include "pat/pipeline/train.hpp"

namespace pat::cli {

namespace {

io::RunConfig resolve_config(const std::string& config_path) {
  io::RunConfig cfg =
      config_path.empty() ? io::default_run_config() : io::load_run_config(config_path);
  if (cfg.deterministic) {
    set_max_threads(1);  // strict sequential mode
  } else if (cfg.threads > 0) {
    set_max_threads(cfg.threads);
  }
  return cfg;
}

void write_image_outputs(const std::filesystem::path& out_dir, const std::string& stem,
                         const PressureImage& img, bool signed_range) {
  const auto values = std::vector<float>(img.values.begin(), img.values.end());
  io::write_tensor_file(out_dir / (stem + ".patn"),
                        io::TensorFile::from_f32(values,
                                                 {static_cast<std::uint64_t>(img.height),
                                                  static_cast<std::uint64_t>(img.width)}));
  io::write_pgm(out_dir / (stem + ".pgm"),
                signed_range ? io::quantize_signed(img) : io::quantize_unit(img), img.width,
                img.height);
}

std::vector<std::string> split_csv_list(const std::string& text) {
  std::vector<std::string> out;
  std::string current;
  for (char c : text) {
    if (c == ',') {
      if (!current.empty()) out.push_back(current);
      current.clear();
    } else {
      current += c;
    }
  }
  if (!current.empty()) out.push_back(current);
  return out;
}

int run_gen(const std::string& config_path, int count, int test_count, std::int64_t seed,
            const std::string& out) {
  io::RunConfig cfg = resolve_config(config_path);
  if (count >= 0) cfg.dataset.train_count = count;
  if (test_count >= 0) cfg.dataset.test_count = test_count;
  if (seed >= 0) cfg.dataset.seed = static_cast<std::uint64_t>(seed);
  if (cfg.dataset.train_count + cfg.dataset.test_count < 1)
    throw CLI::ValidationError("--count", "need at least one sample");

  const auto manifest = pipeline::build_dataset(out, cfg.dataset, cfg.geometry);
  std::printf("wrote %zu samples (%d train / %d test) to %s\n", manifest.samples.size(),
              manifest.train_count, manifest.test_count, out.c_str());
  return 0;
}

int run_train(const std::string& config_path, const std::string& data, const std::string& out,
              const std::string& variant, const std::string& resume) {
  io::RunConfig cfg = resolve_config(config_path);
  const auto manifest = pipeline::load_manifest(data);

  pipeline::TrainOptions options;
  options.train = cfg.train;
  options.model = cfg.model;
  if (!variant.empty()) options.model.variant = ynet::variant_from_string(variant);
  options.model.signal_h = manifest.geometry.sample_count;
  options.model.signal_w = manifest.geometry.sensor_count;
  options.model.image_h = manifest.geometry.grid_ny;
  options.model.image_w = manifest.geometry.grid_nx;
  options.out_dir = out;
  options.resume = resume;

  const auto result = pipeline::train(manifest, options);
  std::printf("checkpoint: %s\nloss log: %s\ntotal loss %.6g -> %.6g\n",
              result.checkpoint.c_str(), result.loss_log.c_str(), result.initial_total,
              result.final_total);
  return 0;
}

int run_eval(const std::string& config_path, const std::string& data, const std::string& out,
             const std::string& methods, const std::vector<std::string>& ckpt_specs,
             bool diff) {
  io::RunConfig cfg = resolve_config(config_path);
  (void)cfg;
  const auto manifest = pipeline::load_manifest(data);

  pipeline::EvalOptions options;
  options.methods = split_csv_list(methods);
  options.out_dir = out;
  options.write_diff_images = diff;
  for (const auto& spec : ckpt_specs) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos)
      throw CLI::ValidationError("--ckpt", "expected method=path, got \"" + spec + "\"");
    options.checkpoints[spec.substr(0, eq)] = spec.substr(eq + 1);
  }

  const auto result = pipeline::evaluate(manifest, options);
  for (const auto& agg : result.aggregates)
    std::printf("%-16s ssim %.4f +/- %.4f   psnr %.3f dB   snr %.3f dB   (n=%d)\n",
                agg.method.c_str(), agg.ssim_mean, agg.ssim_std, agg.psnr_mean, agg.snr_mean,
                agg.count);
  std::printf("metrics: %s\n", result.csv.c_str());
  return 0;
}

int run_recon(const std::string& config_path, const std::string& input,
              const std::string& method, const std::string& ckpt, const std::string& out,
              int profile_row, int profile_col) {
  io::RunConfig cfg = resolve_config(config_path);
  std::error_code ec;
  std::filesystem::create_directories(out, ec);

  const auto result = pipeline::reconstruct_single(input, method, ckpt, cfg.geometry);
  const std::string stem = std::filesystem::path(input).stem().string() + "_" + method;
  const bool signed_range = method == "das" || method == "ubp";
  write_image_outputs(out, stem, result.image, signed_range);
  std::printf("reconstruction time: %.4f s\n", result.seconds);

  if (profile_row >= 0 || profile_col >= 0) {
    const auto axis = profile_row >= 0 ? ProfileAxis::row : ProfileAxis::column;
    const int index = profile_row >= 0 ? profile_row : profile_col;
    const auto profile = line_profile(result.image, axis, index);
    const std::filesystem::path csv_path = std::filesystem::path(out) / (stem + "_profile.csv");
    std::FILE* csv = std::fopen(csv_path.c_str(), "w");
    if (!csv) throw std::runtime_error("recon: cannot write " + csv_path.string());
    std::fprintf(csv, "index,value\n");
    for (size_t i = 0; i < profile.size(); ++i)
      std::fprintf(csv, "%zu,%.9g\n", i, profile[i]);
    std::fclose(csv);
  }
  return 0;
}

}  // namespace

int dispatch(const std::vector<std::string>& args) {
  CLI::App app{"Photoacoustic tomography reconstruction toolkit"};
  app.require_subcommand(1);

  std::string config_path, data, out, variant, resume, input, method = "das", ckpt, methods;
  std::vector<std::string> ckpt_specs;
  int count = -1, test_count = -1, profile_row = -1, profile_col = -1;
  std::int64_t seed = -1;
  bool diff = false;

  auto* gen = app.add_subcommand("gen", "Generate a synthetic dataset");
  gen->add_option("--config", config_path, "Run configuration JSON");
  gen->add_option("--count", count, "Training sample count")->check(CLI::PositiveNumber);
  gen->add_option("--test-count", test_count, "Test sample count")
      ->check(CLI::NonNegativeNumber);
  gen->add_option("--seed", seed, "Dataset seed")->check(CLI::NonNegativeNumber);
  gen->add_option("--out", out, "Output directory")->required();

  auto* train = app.add_subcommand("train", "Train a reconstruction network");
  train->add_option("--config", config_path, "Run configuration JSON");
  train->add_option("--data", data, "Dataset directory")->required();
  train->add_option("--out", out, "Output directory")->required();
  train->add_option("--variant", variant,
                    "full | enc1_only_skips | enc2_only_skips | unet_post");
  train->add_option("--resume", resume, "Checkpoint to resume from");

  auto* eval = app.add_subcommand("eval", "Evaluate methods on the test split");
  eval->add_option("--config", config_path, "Run configuration JSON");
  eval->add_option("--data", data, "Dataset directory")->required();
  eval->add_option("--out", out, "Output directory")->required();
  eval->add_option("--methods", methods, "Comma-separated method list")->required();
  eval->add_option("--ckpt", ckpt_specs, "method=checkpoint.patc (repeatable)");
  eval->add_flag("--diff", diff, "Write |gt - reconstruction| images");

  auto* recon = app.add_subcommand("recon", "Reconstruct a single input tensor");
  recon->add_option("--config", config_path, "Run configuration JSON");
  recon->add_option("--input", input, "PATN sinogram or image")->required();
  recon->add_option("--method", method, "das | ubp | network variant");
  recon->add_option("--ckpt", ckpt, "Checkpoint for learned methods");
  recon->add_option("--out", out, "Output directory")->required();
  recon->add_option("--profile-row", profile_row, "Export a row profile CSV");
  recon->add_option("--profile-col", profile_col, "Export a column profile CSV");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (gen->parsed()) return run_gen(config_path, count, test_count, seed, out);
    if (train->parsed()) return run_train(config_path, data, out, variant, resume);
    if (eval->parsed()) return run_eval(config_path, data, out, methods, ckpt_specs, diff);
    if (recon->parsed())
      return run_recon(config_path, input, method, ckpt, out, profile_row, profile_col);
  } catch (const CLI::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}

}  // namespace pat::cli
