#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pat/nn/adam.hpp"
#include "pat/nn/ops.hpp"
#include "pat/nn/params.hpp"
#include "pat/rng.hpp"

// Dual-encoder reconstruction network. Encoder I contracts the raw sensor
// record, Encoder II contracts the beamformed image, and a single decoder
// mirrors Encoder II with skip connections from both branches; Encoder I
// features are bilinearly resized to the decoder resolution before
// concatenation. A 20x3 stride-(20,1) convolution squares Encoder I's
// asymmetric bottom feature map so both bottlenecks concatenate.
namespace pat::ynet {

enum class Variant { full, enc2_only_skips, enc1_only_skips, unet_post };

inline std::string to_string(Variant v) {
  switch (v) {
    case Variant::full: return "full";
    case Variant::enc2_only_skips: return "enc2_only_skips";
    case Variant::enc1_only_skips: return "enc1_only_skips";
    case Variant::unet_post: return "unet_post";
  }
  return "full";
}

inline Variant variant_from_string(const std::string& s) {
  if (s == "full") return Variant::full;
  if (s == "enc2_only_skips") return Variant::enc2_only_skips;
  if (s == "enc1_only_skips") return Variant::enc1_only_skips;
  if (s == "unet_post") return Variant::unet_post;
  throw std::invalid_argument("unknown variant: " + s);
}

struct Config {
  int base_channels = 16;
  Variant variant = Variant::full;
  double aux_weight = 0.5;
  std::int64_t signal_h = 2560, signal_w = 128;
  std::int64_t image_h = 128, image_w = 128;

  // Channel plan [c, 2c, 4c, 8c, 16c] per encoder layer 1..5; the decoder
  // walks it backwards.
  std::int64_t enc_channels(int layer) const {
    return static_cast<std::int64_t>(base_channels) << (layer - 1);
  }
  std::int64_t dec_channels(int layer) const {
    return static_cast<std::int64_t>(base_channels) << (5 - layer);
  }

  std::int64_t bottleneck_h() const { return image_h / 16; }
  std::int64_t bottleneck_w() const { return image_w / 16; }

  void validate() const {
    if (base_channels < 1) throw std::invalid_argument("config: base_channels must be >= 1");
    if (aux_weight < 0.0) throw std::invalid_argument("config: aux_weight must be >= 0");
    if (image_h % 16 != 0 || image_w % 16 != 0 || image_h < 16 || image_w < 16)
      throw std::invalid_argument("config: image dimensions must be positive multiples of 16");
    if (signal_h % 320 != 0 || signal_w % 16 != 0)
      throw std::invalid_argument(
          "config: signal height must divide by 320 (four pools and the 20x3 bottom "
          "convolution) and width by 16");
    if (signal_h / 320 != image_h / 16 || signal_w / 16 != image_w / 16)
      throw std::invalid_argument("config: encoder bottleneck grids do not match");
  }
};

template <typename T>
struct Model {
  Config config;
  nn::ParameterSet<T> params;
};

namespace detail {

template <typename T>
nn::Var<T> he_kernel(nn::ParameterSet<T>& params, const std::string& name,
                     std::vector<std::int64_t> shape, std::int64_t fan_in, Rng& rng) {
  nn::Tensor<T> k(std::move(shape));
  const double sd = std::sqrt(2.0 / static_cast<double>(fan_in));
  for (auto& v : k.vec()) v = static_cast<T>(rng.normal(0.0, sd));
  return params.add_param(name, std::move(k));
}

template <typename T>
void add_conv_block(nn::ParameterSet<T>& params, const std::string& prefix,
                    std::int64_t in_ch, std::int64_t out_ch, std::int64_t kh,
                    std::int64_t kw, Rng& rng) {
  he_kernel(params, prefix + ".w", {out_ch, in_ch, kh, kw}, in_ch * kh * kw, rng);
  params.add_param(prefix + ".bn.scale", nn::Tensor<T>::full({out_ch}, T(1)));
  params.add_param(prefix + ".bn.shift", nn::Tensor<T>({out_ch}));
  params.add_norm_stats(prefix + ".bn", out_ch);
}

}  // namespace detail

// Fresh parameters: He-initialized kernels, batch-norm scale 1 / shift 0,
// running statistics at (0, 1). Deterministic per seed.
template <typename T>
Model<T> init_model(const Config& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  Model<T> model;
  model.config = config;
  auto& p = model.params;
  const std::int64_t c16 = config.enc_channels(5);

  for (const char* enc : {"enc1", "enc2"}) {
    for (int layer = 1; layer <= 5; ++layer) {
      const std::int64_t in_ch = layer == 1 ? 1 : config.enc_channels(layer - 1);
      const std::int64_t out_ch = config.enc_channels(layer);
      const std::string base = std::string(enc) + ".l" + std::to_string(layer);
      detail::add_conv_block(p, base + ".c1", in_ch, out_ch, 3, 3, rng);
      detail::add_conv_block(p, base + ".c2", out_ch, out_ch, 3, 3, rng);
    }
    if (std::string(enc) == "enc1")
      detail::add_conv_block(p, "enc1.bottom", c16, c16, 20, 3, rng);
  }

  const int admitted = config.variant == Variant::full ? 2 : 1;
  for (int layer = 1; layer <= 5; ++layer) {
    const std::int64_t width = config.dec_channels(layer);
    const std::int64_t in_ch = layer == 1 ? c16 * admitted : width * (1 + admitted);
    const std::string base = "dec.l" + std::to_string(layer);
    detail::add_conv_block(p, base + ".c1", in_ch, width, 3, 3, rng);
    detail::add_conv_block(p, base + ".c2", width, width, 3, 3, rng);
    if (layer <= 4)
      detail::he_kernel(p, base + ".up.w", {width, config.dec_channels(layer + 1), 2, 2},
                        width * 4, rng);
  }

  detail::he_kernel(p, "out.w", {1, config.dec_channels(5), 1, 1}, config.dec_channels(5), rng);
  p.add_param("out.b", nn::Tensor<T>({1}));
  detail::he_kernel(p, "aux.w", {1, c16, 1, 1}, c16, rng);
  return model;
}

namespace detail {

template <typename T>
nn::Var<T> conv_block(Model<T>& m, const std::string& prefix, const nn::Var<T>& x,
                      const nn::ConvSpec& cs, nn::BatchNormMode mode) {
  auto y = nn::conv2d(x, m.params.param(prefix + ".w"), cs);
  y = nn::batch_norm2d(y, m.params.param(prefix + ".bn.scale"),
                       m.params.param(prefix + ".bn.shift"),
                       m.params.norm_stats(prefix + ".bn"), mode);
  return nn::relu(y);
}

}  // namespace detail

template <typename T>
struct EncoderOutput {
  std::vector<nn::Var<T>> skips;  // layer 1..4 outputs, finest first
  nn::Var<T> bottleneck;
};

template <typename T>
EncoderOutput<T> encoder_forward(Model<T>& m, const std::string& enc, const nn::Var<T>& input,
                                 nn::BatchNormMode mode) {
  const nn::ConvSpec same{1, 1, 1, 1};
  EncoderOutput<T> out;
  nn::Var<T> x = input;
  for (int layer = 1; layer <= 5; ++layer) {
    if (layer > 1) x = nn::max_pool2x2(x);
    const std::string base = enc + ".l" + std::to_string(layer);
    x = detail::conv_block(m, base + ".c1", x, same, mode);
    x = detail::conv_block(m, base + ".c2", x, same, mode);
    if (layer <= 4) out.skips.push_back(x);
  }
  out.bottleneck = x;
  return out;
}

// Raw sensor records (B, 1, signal_h, signal_w) -> skips plus the squared
// bottleneck z1 of shape (B, 16c, image_h/16, image_w/16).
template <typename T>
EncoderOutput<T> encoder1_forward(Model<T>& m, const nn::Var<T>& signals,
                                  nn::BatchNormMode mode) {
  const auto& s = signals->value;
  if (s.ndim() != 4 || s.dim(1) != 1 || s.dim(2) != m.config.signal_h ||
      s.dim(3) != m.config.signal_w)
    throw std::invalid_argument("encoder1_forward: expected (B, 1, " +
                                std::to_string(m.config.signal_h) + ", " +
                                std::to_string(m.config.signal_w) + "), got " + s.shape_str());
  auto out = encoder_forward(m, "enc1", signals, mode);
  const nn::ConvSpec squash{20, 1, 0, 1};
  out.bottleneck = detail::conv_block(m, "enc1.bottom", out.bottleneck, squash, mode);
  return out;
}

// Beamformed images (B, 1, image_h, image_w) -> skips plus bottleneck z2.
template <typename T>
EncoderOutput<T> encoder2_forward(Model<T>& m, const nn::Var<T>& images,
                                  nn::BatchNormMode mode) {
  const auto& s = images->value;
  if (s.ndim() != 4 || s.dim(1) != 1 || s.dim(2) != m.config.image_h ||
      s.dim(3) != m.config.image_w)
    throw std::invalid_argument("encoder2_forward: expected (B, 1, " +
                                std::to_string(m.config.image_h) + ", " +
                                std::to_string(m.config.image_w) + "), got " + s.shape_str());
  return encoder_forward(m, "enc2", images, mode);
}

// Five layers mirroring Encoder II. Layer 1 consumes the admitted
// bottlenecks; layers 2..5 concatenate the previous feature with the
// admitted mirrored skips (Encoder I skips resized first), run two 3x3
// blocks, and up-convolve except at the last layer, which ends in a linear
// 1x1 projection.
template <typename T>
nn::Var<T> decoder_forward(Model<T>& m, const EncoderOutput<T>* enc1,
                           const EncoderOutput<T>* enc2, nn::BatchNormMode mode) {
  const Variant variant = m.config.variant;
  const bool admit1 = variant == Variant::full || variant == Variant::enc1_only_skips;
  const bool admit2 = variant != Variant::enc1_only_skips;
  if (admit1 && enc1 == nullptr)
    throw std::invalid_argument("decoder_forward: variant requires Encoder I features");
  if (admit2 && enc2 == nullptr)
    throw std::invalid_argument("decoder_forward: variant requires Encoder II features");

  const nn::ConvSpec same{1, 1, 1, 1};
  std::vector<nn::Var<T>> bottlenecks;
  if (admit1) bottlenecks.push_back(enc1->bottleneck);
  if (admit2) bottlenecks.push_back(enc2->bottleneck);
  nn::Var<T> x = bottlenecks.size() == 1 ? bottlenecks.front() : nn::concat_channels(bottlenecks);

  for (int layer = 1; layer <= 5; ++layer) {
    if (layer > 1) {
      const std::int64_t h = x->value.dim(2), w = x->value.dim(3);
      std::vector<nn::Var<T>> inputs{x};
      const size_t skip_index = static_cast<size_t>(5 - layer);
      if (admit1) inputs.push_back(nn::resize_bilinear(enc1->skips[skip_index], h, w));
      if (admit2) inputs.push_back(enc2->skips[skip_index]);
      x = nn::concat_channels(inputs);
    }
    const std::string base = "dec.l" + std::to_string(layer);
    x = detail::conv_block(m, base + ".c1", x, same, mode);
    x = detail::conv_block(m, base + ".c2", x, same, mode);
    if (layer <= 4) x = nn::up_conv2d(x, m.params.param(base + ".up.w"), 2);
  }
  return nn::bias_add(nn::conv2d(x, m.params.param("out.w")), m.params.param("out.b"));
}

template <typename T>
struct ForwardResult {
  nn::Var<T> output;           // (B, 1, image_h, image_w)
  nn::Var<T> enc2_bottleneck;  // z2, auxiliary-loss target input
};

// Composes the stages per variant. `signals` may be null only for the
// unet_post variant; Encoder I runs only when the variant admits it.
template <typename T>
ForwardResult<T> ynet_forward(Model<T>& m, const nn::Var<T>* signals,
                              const nn::Var<T>& beamformed, nn::BatchNormMode mode) {
  const Variant variant = m.config.variant;
  const bool needs_signals = variant == Variant::full || variant == Variant::enc1_only_skips;
  if (needs_signals && signals == nullptr)
    throw std::invalid_argument("ynet_forward: variant " + to_string(variant) +
                                " requires the raw-signal input");

  auto enc2 = encoder2_forward(m, beamformed, mode);
  std::optional<EncoderOutput<T>> enc1;
  if (needs_signals) enc1 = encoder1_forward(m, *signals, mode);
  auto output = decoder_forward(m, enc1 ? &*enc1 : nullptr, &enc2, mode);
  return {output, enc2.bottleneck};
}

template <typename T>
struct LossTerms {
  nn::Var<T> total, reconstruction, auxiliary;
};

// total = mse(f, gt) + lambda * mse(P(z2), R(gt)) with P the 1x1 projection
// and R block-average downsampling to the bottleneck grid.
template <typename T>
LossTerms<T> compute_loss(Model<T>& m, const nn::Var<T>& output, const nn::Var<T>& z2,
                          const nn::Tensor<T>& ground_truth) {
  if (!output->value.same_shape(ground_truth))
    throw std::invalid_argument("compute_loss: output/ground-truth shape mismatch");
  auto gt = nn::make_var(ground_truth);
  auto rec = nn::mse(output, gt);

  auto projected = nn::conv2d(z2, m.params.param("aux.w"));
  auto coarse = nn::make_var(
      nn::area_downsample(ground_truth, z2->value.dim(2), z2->value.dim(3)));
  auto aux = nn::mse(projected, coarse);

  auto total = nn::add(rec, nn::scale(aux, static_cast<T>(m.config.aux_weight)));
  return {total, rec, aux};
}

}  // namespace pat::ynet
