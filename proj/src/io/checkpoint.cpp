#include "pat/io/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "pat/io/tensor_file.hpp"

namespace pat::io {

namespace {

using nlohmann::json;

constexpr char kMagic[4] = {'P', 'A', 'T', 'C'};
constexpr std::uint8_t kVersion = 1;

std::vector<std::uint64_t> shape_to_dims(const std::vector<std::int64_t>& shape) {
  return {shape.begin(), shape.end()};
}

void append_tensor(json& directory, std::vector<const nn::Tensor<float>*>& blobs,
                   const std::string& name, const std::string& kind,
                   const nn::Tensor<float>& t) {
  directory.push_back({{"name", name}, {"kind", kind}});
  blobs.push_back(&t);
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ynet::Model<float>& model,
                     const nn::AdamState<float>* adam, int epoch) {
  json header;
  header["format"] = "pat-checkpoint";
  header["version"] = kVersion;
  header["model"] = {{"base_channels", model.config.base_channels},
                     {"variant", ynet::to_string(model.config.variant)},
                     {"aux_weight", model.config.aux_weight},
                     {"signal_h", model.config.signal_h},
                     {"signal_w", model.config.signal_w},
                     {"image_h", model.config.image_h},
                     {"image_w", model.config.image_w}};
  header["epoch"] = epoch;
  if (adam) {
    header["adam"] = {{"t", adam->step_count()},
                      {"learning_rate", adam->config().learning_rate},
                      {"beta1", adam->config().beta1},
                      {"beta2", adam->config().beta2},
                      {"epsilon", adam->config().epsilon}};
  }

  json directory = json::array();
  std::vector<const nn::Tensor<float>*> blobs;
  for (const auto& name : model.params.param_names())
    append_tensor(directory, blobs, name, "param", model.params.param(name)->value);
  for (const auto& name : model.params.stats_names()) {
    const auto* stats = model.params.norm_stats(name);
    append_tensor(directory, blobs, name, "running_mean", stats->mean);
    append_tensor(directory, blobs, name, "running_var", stats->var);
  }
  if (adam) {
    auto* mutable_adam = const_cast<nn::AdamState<float>*>(adam);
    for (const auto& name : model.params.param_names()) {
      append_tensor(directory, blobs, name, "adam_m", mutable_adam->first_moment(name));
      append_tensor(directory, blobs, name, "adam_v", mutable_adam->second_moment(name));
    }
  }
  header["tensors"] = directory;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("checkpoint: cannot open " + path.string() + " for writing");
  const std::string header_text = header.dump();
  out.write(kMagic, 4);
  out.put(static_cast<char>(kVersion));
  const auto len = static_cast<std::uint32_t>(header_text.size());
  std::uint8_t len_bytes[4];
  for (int i = 0; i < 4; ++i) len_bytes[i] = static_cast<std::uint8_t>(len >> (8 * i));
  out.write(reinterpret_cast<const char*>(len_bytes), 4);
  out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
  for (const auto* blob : blobs)
    write_tensor_stream(out, TensorFile::from_f32(blob->vec(), shape_to_dims(blob->shape())));
  if (!out) throw std::runtime_error("checkpoint: write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("checkpoint: bad magic in " + path.string());
  const int version = in.get();
  if (version != kVersion)
    throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
  std::uint8_t len_bytes[4];
  in.read(reinterpret_cast<char*>(len_bytes), 4);
  std::uint32_t len = 0;
  for (int i = 0; i < 4; ++i) len |= static_cast<std::uint32_t>(len_bytes[i]) << (8 * i);
  std::string header_text(len, '\0');
  in.read(header_text.data(), static_cast<std::streamsize>(len));
  if (!in) throw std::runtime_error("checkpoint: truncated header in " + path.string());

  const json header = json::parse(header_text);
  ynet::Config config;
  const json& m = header.at("model");
  config.base_channels = m.at("base_channels").get<int>();
  config.variant = ynet::variant_from_string(m.at("variant").get<std::string>());
  config.aux_weight = m.at("aux_weight").get<double>();
  config.signal_h = m.at("signal_h").get<std::int64_t>();
  config.signal_w = m.at("signal_w").get<std::int64_t>();
  config.image_h = m.at("image_h").get<std::int64_t>();
  config.image_w = m.at("image_w").get<std::int64_t>();

  Checkpoint ckpt;
  ckpt.model = ynet::init_model<float>(config, 0);
  ckpt.epoch = header.at("epoch").get<int>();
  if (header.contains("adam")) {
    nn::AdamConfig acfg;
    acfg.learning_rate = header.at("adam").at("learning_rate").get<double>();
    acfg.beta1 = header.at("adam").at("beta1").get<double>();
    acfg.beta2 = header.at("adam").at("beta2").get<double>();
    acfg.epsilon = header.at("adam").at("epsilon").get<double>();
    ckpt.adam.emplace(acfg, ckpt.model.params);
    ckpt.adam->set_step_count(header.at("adam").at("t").get<long>());
  }

  for (const auto& entry : header.at("tensors")) {
    const std::string name = entry.at("name").get<std::string>();
    const std::string kind = entry.at("kind").get<std::string>();
    const TensorFile blob = read_tensor_stream(in);
    const std::vector<float> data = blob.as_f32();

    nn::Tensor<float>* target = nullptr;
    if (kind == "param") {
      target = &ckpt.model.params.param(name)->value;
    } else if (kind == "running_mean") {
      target = &ckpt.model.params.norm_stats(name)->mean;
    } else if (kind == "running_var") {
      target = &ckpt.model.params.norm_stats(name)->var;
    } else if (kind == "adam_m" || kind == "adam_v") {
      if (!ckpt.adam) throw std::runtime_error("checkpoint: optimizer tensor without adam header");
      target = kind == "adam_m" ? &ckpt.adam->first_moment(name)
                                : &ckpt.adam->second_moment(name);
    } else {
      throw std::runtime_error("checkpoint: unknown tensor kind " + kind);
    }
    if (static_cast<std::uint64_t>(target->numel()) != blob.element_count())
      throw std::runtime_error("checkpoint: size mismatch for " + name);
    std::copy(data.begin(), data.end(), target->vec().begin());
  }
  return ckpt;
}

}  // namespace pat::io
