#include "pat/pipeline/train.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "pat/io/checkpoint.hpp"
#include "pat/rng.hpp"

namespace pat::pipeline {

namespace {

struct HostSample {
  nn::Tensor<float> sinogram;  // (1, 1, T, J), max-abs normalized
  nn::Tensor<float> das;       // (1, 1, H, W)
  nn::Tensor<float> gt;        // (1, 1, H, W)
};

nn::Tensor<float> assemble_batch(const std::vector<HostSample>& pool,
                                 const std::vector<size_t>& order, size_t begin, size_t end,
                                 nn::Tensor<float> HostSample::* field) {
  const auto& proto = pool[order[begin]].*field;
  nn::Tensor<float> batch({static_cast<std::int64_t>(end - begin), proto.dim(1),
                           proto.dim(2), proto.dim(3)});
  const std::int64_t stride = proto.numel();
  for (size_t i = begin; i < end; ++i) {
    const auto& src = pool[order[i]].*field;
    std::copy(src.vec().begin(), src.vec().end(),
              batch.vec().begin() + static_cast<std::int64_t>(i - begin) * stride);
  }
  return batch;
}

void shuffle_indices(std::vector<size_t>& order, Rng& rng) {
  for (size_t i = order.size(); i > 1; --i)
    std::swap(order[i - 1], order[static_cast<size_t>(rng.uniform_int(i))]);
}

}  // namespace

TrainResult train(const DatasetManifest& manifest, const TrainOptions& options) {
  const auto entries = manifest.split("train");
  if (entries.empty()) throw std::invalid_argument("train: empty train split");
  options.model.validate();
  if (options.model.signal_h != manifest.geometry.sample_count ||
      options.model.signal_w != manifest.geometry.sensor_count ||
      options.model.image_h != manifest.geometry.grid_ny ||
      options.model.image_w != manifest.geometry.grid_nx)
    throw std::invalid_argument("train: model shapes do not match the dataset geometry");

  std::error_code ec;
  std::filesystem::create_directories(options.out_dir, ec);
  if (!std::filesystem::is_directory(options.out_dir))
    throw std::runtime_error("train: cannot create " + options.out_dir.string());

  std::vector<HostSample> pool;
  pool.reserve(entries.size());
  for (const auto* entry : entries) {
    const LoadedSample sample = load_sample(manifest, *entry);
    pool.push_back({sinogram_to_input(sample.sinogram), image_to_input(sample.das),
                    image_to_input(sample.gt)});
  }

  ynet::Model<float> model;
  nn::AdamConfig adam_cfg;
  adam_cfg.learning_rate = options.train.learning_rate;
  std::optional<nn::AdamState<float>> adam;
  int start_epoch = 0;
  if (!options.resume.empty()) {
    io::Checkpoint ckpt = io::load_checkpoint(options.resume);
    model = std::move(ckpt.model);
    if (!ckpt.adam)
      throw std::invalid_argument("train: checkpoint has no optimizer state to resume from");
    adam = std::move(ckpt.adam);
    start_epoch = ckpt.epoch;
  } else {
    model = ynet::init_model<float>(options.model, options.train.seed);
    adam.emplace(adam_cfg, model.params);
  }
  const bool needs_signals = model.config.variant == ynet::Variant::full ||
                             model.config.variant == ynet::Variant::enc1_only_skips;

  const std::filesystem::path log_path = options.out_dir / "loss_log.csv";
  std::ofstream log(log_path);
  if (!log) throw std::runtime_error("train: cannot write " + log_path.string());
  log << "epoch,batch,l_rec,l_aux,total\n";

  TrainResult result;
  result.loss_log = log_path;
  bool first = true;

  std::vector<size_t> order(pool.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  const size_t batch_size = static_cast<size_t>(options.train.batch_size);

  const auto t0 = std::chrono::steady_clock::now();
  for (int epoch = start_epoch; epoch < options.train.epochs; ++epoch) {
    Rng shuffle_rng(derive_seed(options.train.seed, 100000 + static_cast<std::uint64_t>(epoch)));
    shuffle_indices(order, shuffle_rng);

    int batch_index = 0;
    for (size_t begin = 0; begin < order.size(); begin += batch_size, ++batch_index) {
      const size_t end = std::min(begin + batch_size, order.size());
      auto gt = assemble_batch(pool, order, begin, end, &HostSample::gt);
      auto das = nn::make_var(assemble_batch(pool, order, begin, end, &HostSample::das));
      nn::Var<float> sino;
      if (needs_signals)
        sino = nn::make_var(assemble_batch(pool, order, begin, end, &HostSample::sinogram));

      auto fwd = ynet::ynet_forward(model, needs_signals ? &sino : nullptr, das,
                                    nn::BatchNormMode::train);
      auto loss = ynet::compute_loss(model, fwd.output, fwd.enc2_bottleneck, gt);

      const double total = static_cast<double>(loss.total->value[0]);
      const double rec = static_cast<double>(loss.reconstruction->value[0]);
      const double aux = static_cast<double>(loss.auxiliary->value[0]);
      if (!std::isfinite(total))
        throw std::runtime_error("train: non-finite loss at epoch " + std::to_string(epoch) +
                                 " batch " + std::to_string(batch_index));
      if (first) {
        result.initial_total = total;
        first = false;
      }
      result.final_total = total;

      char line[128];
      std::snprintf(line, sizeof(line), "%d,%d,%.9g,%.9g,%.9g\n", epoch, batch_index, rec,
                    aux, total);
      log << line;

      model.params.zero_grad();
      nn::backward(loss.total);
      adam->step(model.params);
    }

    if (options.train.checkpoint_interval > 0 &&
        (epoch + 1) % options.train.checkpoint_interval == 0 &&
        epoch + 1 < options.train.epochs) {
      char name[48];
      std::snprintf(name, sizeof(name), "checkpoint_epoch%04d.patc", epoch + 1);
      io::save_checkpoint(options.out_dir / name, model, &*adam, epoch + 1);
    }
    if (!options.quiet) {
      const double secs = std::chrono::duration<double>(
          std::chrono::steady_clock::now() - t0).count();
      std::fprintf(stderr, "epoch %d/%d  total %.6g  (%.1fs)\n", epoch + 1,
                   options.train.epochs, result.final_total, secs);
    }
  }

  result.checkpoint = options.out_dir / "checkpoint_final.patc";
  io::save_checkpoint(result.checkpoint, model, &*adam, options.train.epochs);
  log.flush();
  return result;
}

}  // namespace pat::pipeline
