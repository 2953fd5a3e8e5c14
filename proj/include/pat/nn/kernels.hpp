#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <vector>

#include "pat/parallel.hpp"
#include "pat/tensor.hpp"

// Raw, non-differentiable compute kernels. Convolutions run as strip-mined
// im2col plus a GEMM; everything else is direct loops. All kernels are
// deterministic: accumulation order per output element never depends on the
// worker count.
namespace pat::nn {

struct ConvSpec {
  std::int64_t stride_h = 1, stride_w = 1;
  std::int64_t pad_h = 0, pad_w = 0;
};

namespace detail {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapRowMat = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMapRowMat = Eigen::Map<const RowMat<T>>;
template <typename T>
using StridedMap =
    Eigen::Map<RowMat<T>, Eigen::Unaligned, Eigen::OuterStride<>>;

inline std::int64_t conv_out_dim(std::int64_t in, std::int64_t k, std::int64_t s,
                                 std::int64_t p) {
  return (in + 2 * p - k) / s + 1;
}

// Rows of `col` are (ci, p, q) kernel taps, columns are the output positions
// of rows [oh0, oh1).
template <typename T>
void im2col_strip(const T* x, std::int64_t ci_count, std::int64_t h, std::int64_t w,
                  std::int64_t kh, std::int64_t kw, const ConvSpec& cs,
                  std::int64_t oh0, std::int64_t oh1, std::int64_t wo, T* col) {
  const std::int64_t strip = oh1 - oh0;
  for (std::int64_t ci = 0; ci < ci_count; ++ci) {
    const T* plane = x + ci * h * w;
    for (std::int64_t p = 0; p < kh; ++p) {
      for (std::int64_t q = 0; q < kw; ++q) {
        T* row = col + ((ci * kh + p) * kw + q) * strip * wo;
        for (std::int64_t oh = oh0; oh < oh1; ++oh) {
          T* dst = row + (oh - oh0) * wo;
          const std::int64_t ih = oh * cs.stride_h - cs.pad_h + p;
          if (ih < 0 || ih >= h) {
            std::fill(dst, dst + wo, T(0));
            continue;
          }
          const T* src = plane + ih * w;
          if (cs.stride_w == 1) {
            const std::int64_t lo = std::max<std::int64_t>(0, cs.pad_w - q);
            const std::int64_t hi = std::min<std::int64_t>(wo, w + cs.pad_w - q);
            std::fill(dst, dst + std::min(lo, wo), T(0));
            if (hi > lo)
              std::memcpy(dst + lo, src + lo - cs.pad_w + q,
                          static_cast<size_t>(hi - lo) * sizeof(T));
            if (hi < wo) std::fill(dst + std::max<std::int64_t>(hi, 0), dst + wo, T(0));
          } else {
            for (std::int64_t ow = 0; ow < wo; ++ow) {
              const std::int64_t iw = ow * cs.stride_w - cs.pad_w + q;
              dst[ow] = (iw >= 0 && iw < w) ? src[iw] : T(0);
            }
          }
        }
      }
    }
  }
}

// Transpose of im2col_strip: scatter-adds `col` back into the input plane.
template <typename T>
void col2im_strip(const T* col, T* x, std::int64_t ci_count, std::int64_t h,
                  std::int64_t w, std::int64_t kh, std::int64_t kw, const ConvSpec& cs,
                  std::int64_t oh0, std::int64_t oh1, std::int64_t wo) {
  const std::int64_t strip = oh1 - oh0;
  for (std::int64_t ci = 0; ci < ci_count; ++ci) {
    T* plane = x + ci * h * w;
    for (std::int64_t p = 0; p < kh; ++p) {
      for (std::int64_t q = 0; q < kw; ++q) {
        const T* row = col + ((ci * kh + p) * kw + q) * strip * wo;
        for (std::int64_t oh = oh0; oh < oh1; ++oh) {
          const T* src = row + (oh - oh0) * wo;
          const std::int64_t ih = oh * cs.stride_h - cs.pad_h + p;
          if (ih < 0 || ih >= h) continue;
          T* dst = plane + ih * w;
          for (std::int64_t ow = 0; ow < wo; ++ow) {
            const std::int64_t iw = ow * cs.stride_w - cs.pad_w + q;
            if (iw >= 0 && iw < w) dst[iw] += src[ow];
          }
        }
      }
    }
  }
}

inline std::int64_t strip_rows(std::int64_t rows, std::int64_t wo, std::int64_t ho,
                               size_t elem_size) {
  constexpr std::int64_t budget = 4 << 20;  // col buffer target, bytes
  const std::int64_t per_row = rows * wo * static_cast<std::int64_t>(elem_size);
  return std::clamp<std::int64_t>(budget / std::max<std::int64_t>(per_row, 1), 1, ho);
}

}  // namespace detail

// x (N, Ci, H, W) cross-correlated with k (Co, Ci, kh, kw), zero padding.
template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const Tensor<T>& k, const ConvSpec& cs) {
  if (x.ndim() != 4 || k.ndim() != 4)
    throw std::invalid_argument("conv2d: expected 4D input and kernel");
  if (x.dim(1) != k.dim(1))
    throw std::invalid_argument("conv2d: input channels " + std::to_string(x.dim(1)) +
                                " do not match kernel channels " + std::to_string(k.dim(1)));
  const std::int64_t n = x.dim(0), ci = x.dim(1), h = x.dim(2), w = x.dim(3);
  const std::int64_t co = k.dim(0), kh = k.dim(2), kw = k.dim(3);
  const std::int64_t ho = detail::conv_out_dim(h, kh, cs.stride_h, cs.pad_h);
  const std::int64_t wo = detail::conv_out_dim(w, kw, cs.stride_w, cs.pad_w);
  if (ho < 1 || wo < 1) throw std::invalid_argument("conv2d: empty output");

  Tensor<T> y({n, co, ho, wo});
  const std::int64_t rows = ci * kh * kw;
  const std::int64_t strip = detail::strip_rows(rows, wo, ho, sizeof(T));
  const std::int64_t strips_per_sample = (ho + strip - 1) / strip;

  parallel_for(n * strips_per_sample, [&](std::int64_t item) {
    const std::int64_t b = item / strips_per_sample;
    const std::int64_t oh0 = (item % strips_per_sample) * strip;
    const std::int64_t oh1 = std::min(oh0 + strip, ho);
    std::vector<T> col(static_cast<size_t>(rows * (oh1 - oh0) * wo));
    detail::im2col_strip(x.data() + b * ci * h * w, ci, h, w, kh, kw, cs, oh0, oh1,
                         wo, col.data());
    detail::ConstMapRowMat<T> kmat(k.data(), co, rows);
    detail::ConstMapRowMat<T> cmat(col.data(), rows, (oh1 - oh0) * wo);
    detail::StridedMap<T> ymat(y.data() + (b * co * ho + oh0) * wo, co, (oh1 - oh0) * wo,
                               Eigen::OuterStride<>(ho * wo));
    ymat.noalias() = kmat * cmat;
  });
  return y;
}

// Accumulates the input gradient of conv2d_forward into gx.
template <typename T>
void conv2d_backward_input_acc(const Tensor<T>& gy, const Tensor<T>& k,
                               const ConvSpec& cs, Tensor<T>& gx) {
  const std::int64_t n = gx.dim(0), ci = gx.dim(1), h = gx.dim(2), w = gx.dim(3);
  const std::int64_t co = k.dim(0), kh = k.dim(2), kw = k.dim(3);
  const std::int64_t ho = gy.dim(2), wo = gy.dim(3);
  const std::int64_t rows = ci * kh * kw;
  const std::int64_t strip = detail::strip_rows(rows, wo, ho, sizeof(T));

  // Strips scatter into overlapping input rows, so strips stay sequential
  // within a sample; samples write disjoint planes.
  parallel_for(n, [&](std::int64_t b) {
    std::vector<T> col;
    for (std::int64_t oh0 = 0; oh0 < ho; oh0 += strip) {
      const std::int64_t oh1 = std::min(oh0 + strip, ho);
      col.assign(static_cast<size_t>(rows * (oh1 - oh0) * wo), T(0));
      detail::ConstMapRowMat<T> kmat(k.data(), co, rows);
      detail::StridedMap<T> gymat(
          const_cast<T*>(gy.data()) + (b * co * ho + oh0) * wo, co, (oh1 - oh0) * wo,
          Eigen::OuterStride<>(ho * wo));
      detail::MapRowMat<T> cmat(col.data(), rows, (oh1 - oh0) * wo);
      cmat.noalias() = kmat.transpose() * gymat;
      detail::col2im_strip(col.data(), gx.data() + b * ci * h * w, ci, h, w, kh, kw,
                           cs, oh0, oh1, wo);
    }
  });
}

// Accumulates the kernel gradient of conv2d_forward into gk.
template <typename T>
void conv2d_backward_kernel_acc(const Tensor<T>& gy, const Tensor<T>& x,
                                const ConvSpec& cs, Tensor<T>& gk) {
  const std::int64_t n = x.dim(0), ci = x.dim(1), h = x.dim(2), w = x.dim(3);
  const std::int64_t co = gk.dim(0), kh = gk.dim(2), kw = gk.dim(3);
  const std::int64_t ho = gy.dim(2), wo = gy.dim(3);
  const std::int64_t rows = ci * kh * kw;
  const std::int64_t strip = detail::strip_rows(rows, wo, ho, sizeof(T));

  // Per-sample partial gradients, then an ordered reduction.
  std::vector<Tensor<T>> partial(static_cast<size_t>(n));
  parallel_for(n, [&](std::int64_t b) {
    Tensor<T> acc({co, rows});
    std::vector<T> col;
    for (std::int64_t oh0 = 0; oh0 < ho; oh0 += strip) {
      const std::int64_t oh1 = std::min(oh0 + strip, ho);
      col.resize(static_cast<size_t>(rows * (oh1 - oh0) * wo));
      detail::im2col_strip(x.data() + b * ci * h * w, ci, h, w, kh, kw, cs, oh0, oh1,
                           wo, col.data());
      detail::ConstMapRowMat<T> cmat(col.data(), rows, (oh1 - oh0) * wo);
      detail::StridedMap<T> gymat(
          const_cast<T*>(gy.data()) + (b * co * ho + oh0) * wo, co, (oh1 - oh0) * wo,
          Eigen::OuterStride<>(ho * wo));
      detail::MapRowMat<T> amat(acc.data(), co, rows);
      amat.noalias() += gymat * cmat.transpose();
    }
    partial[static_cast<size_t>(b)] = std::move(acc);
  });
  for (std::int64_t b = 0; b < n; ++b)
    for (std::int64_t i = 0; i < gk.numel(); ++i) gk[i] += partial[static_cast<size_t>(b)][i];
}

// Transposed convolution. Kernel layout (Ci, Co, kh, kw): up_conv with a
// kernel K is the exact adjoint of conv2d with the same K, i.e.
// <up_conv(x; K), y> == <x, conv2d(y; K, stride)>.
template <typename T>
Tensor<T> upconv2d_forward(const Tensor<T>& x, const Tensor<T>& k, std::int64_t stride) {
  if (x.ndim() != 4 || k.ndim() != 4)
    throw std::invalid_argument("up_conv2d: expected 4D input and kernel");
  if (x.dim(1) != k.dim(0))
    throw std::invalid_argument("up_conv2d: input channels do not match kernel");
  const std::int64_t n = x.dim(0), ci = x.dim(1), h = x.dim(2), w = x.dim(3);
  const std::int64_t co = k.dim(1), kh = k.dim(2), kw = k.dim(3);
  const std::int64_t ho = (h - 1) * stride + kh;
  const std::int64_t wo = (w - 1) * stride + kw;

  Tensor<T> y({n, co, ho, wo});
  parallel_for(n, [&](std::int64_t b) {
    const T* xb = x.data() + b * ci * h * w;
    T* yb = y.data() + b * co * ho * wo;
    for (std::int64_t a = 0; a < ci; ++a) {
      for (std::int64_t c = 0; c < co; ++c) {
        const T* kpq = k.data() + (a * co + c) * kh * kw;
        for (std::int64_t i = 0; i < h; ++i) {
          for (std::int64_t p = 0; p < kh; ++p) {
            T* dst = yb + c * ho * wo + (i * stride + p) * wo;
            const T* src = xb + a * h * w + i * w;
            for (std::int64_t j = 0; j < w; ++j) {
              const T v = src[j];
              if (v == T(0)) continue;
              T* out = dst + j * stride;
              for (std::int64_t q = 0; q < kw; ++q) out[q] += v * kpq[p * kw + q];
            }
          }
        }
      }
    }
  });
  return y;
}

template <typename T>
void upconv2d_backward_input_acc(const Tensor<T>& gy, const Tensor<T>& k,
                                 std::int64_t stride, Tensor<T>& gx) {
  // d/dx of the scatter is the matching stride-`stride` convolution.
  const std::int64_t n = gx.dim(0), ci = gx.dim(1), h = gx.dim(2), w = gx.dim(3);
  const std::int64_t co = k.dim(1), kh = k.dim(2), kw = k.dim(3);
  parallel_for(n, [&](std::int64_t b) {
    for (std::int64_t a = 0; a < ci; ++a) {
      T* dst = gx.data() + (b * ci + a) * h * w;
      for (std::int64_t i = 0; i < h; ++i) {
        for (std::int64_t j = 0; j < w; ++j) {
          T acc = T(0);
          for (std::int64_t c = 0; c < co; ++c) {
            const T* gplane = gy.data() + (b * co + c) * gy.dim(2) * gy.dim(3);
            const T* kpq = k.data() + (a * co + c) * kh * kw;
            for (std::int64_t p = 0; p < kh; ++p)
              for (std::int64_t q = 0; q < kw; ++q)
                acc += gplane[(i * stride + p) * gy.dim(3) + j * stride + q] *
                       kpq[p * kw + q];
          }
          dst[i * w + j] += acc;
        }
      }
    }
  });
}

template <typename T>
void upconv2d_backward_kernel_acc(const Tensor<T>& gy, const Tensor<T>& x,
                                  std::int64_t stride, Tensor<T>& gk) {
  const std::int64_t n = x.dim(0), ci = x.dim(1), h = x.dim(2), w = x.dim(3);
  const std::int64_t co = gk.dim(1), kh = gk.dim(2), kw = gk.dim(3);
  for (std::int64_t b = 0; b < n; ++b) {
    for (std::int64_t a = 0; a < ci; ++a) {
      for (std::int64_t c = 0; c < co; ++c) {
        T* kacc = gk.data() + (a * co + c) * kh * kw;
        const T* xp = x.data() + (b * ci + a) * h * w;
        const T* gp = gy.data() + (b * co + c) * gy.dim(2) * gy.dim(3);
        for (std::int64_t i = 0; i < h; ++i)
          for (std::int64_t j = 0; j < w; ++j) {
            const T v = xp[i * w + j];
            if (v == T(0)) continue;
            for (std::int64_t p = 0; p < kh; ++p)
              for (std::int64_t q = 0; q < kw; ++q)
                kacc[p * kw + q] +=
                    v * gp[(i * stride + p) * gy.dim(3) + j * stride + q];
          }
      }
    }
  }
}

template <typename T>
Tensor<T> maxpool2x2_forward(const Tensor<T>& x, std::vector<std::int64_t>& argmax) {
  if (x.ndim() != 4) throw std::invalid_argument("max_pool2d: expected 4D input");
  const std::int64_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  if (h % 2 != 0 || w % 2 != 0)
    throw std::invalid_argument("max_pool2d: spatial dimensions must be even");
  Tensor<T> y({n, c, h / 2, w / 2});
  argmax.assign(static_cast<size_t>(y.numel()), 0);
  parallel_for(n * c, [&](std::int64_t plane) {
    const T* src = x.data() + plane * h * w;
    T* dst = y.data() + plane * (h / 2) * (w / 2);
    std::int64_t* arg = argmax.data() + plane * (h / 2) * (w / 2);
    std::int64_t o = 0;
    for (std::int64_t i = 0; i < h; i += 2) {
      for (std::int64_t j = 0; j < w; j += 2, ++o) {
        // Row-major scan; ties keep the first occurrence.
        std::int64_t best = i * w + j;
        T bv = src[best];
        const std::int64_t cand[3] = {i * w + j + 1, (i + 1) * w + j, (i + 1) * w + j + 1};
        for (std::int64_t idx : cand) {
          if (src[idx] > bv) {
            bv = src[idx];
            best = idx;
          }
        }
        dst[o] = bv;
        arg[o] = plane * h * w + best;
      }
    }
  });
  return y;
}

template <typename T>
void maxpool2x2_backward_acc(const Tensor<T>& gy, const std::vector<std::int64_t>& argmax,
                             Tensor<T>& gx) {
  for (std::int64_t i = 0; i < gy.numel(); ++i) gx[argmax[static_cast<size_t>(i)]] += gy[i];
}

// Bilinear resize with corner alignment; same-size resize is the identity.
template <typename T>
struct ResizePlan {
  std::vector<std::int64_t> i0, i1;
  std::vector<T> f;
  void build(std::int64_t in, std::int64_t out) {
    i0.resize(static_cast<size_t>(out));
    i1.resize(static_cast<size_t>(out));
    f.resize(static_cast<size_t>(out));
    const double scale = out > 1 ? static_cast<double>(in - 1) / (out - 1) : 0.0;
    for (std::int64_t o = 0; o < out; ++o) {
      const double src = o * scale;
      std::int64_t lo = static_cast<std::int64_t>(std::floor(src));
      lo = std::clamp<std::int64_t>(lo, 0, in - 1);
      const std::int64_t hi = std::min<std::int64_t>(lo + 1, in - 1);
      i0[static_cast<size_t>(o)] = lo;
      i1[static_cast<size_t>(o)] = hi;
      f[static_cast<size_t>(o)] = static_cast<T>(src - static_cast<double>(lo));
    }
  }
};

template <typename T>
Tensor<T> resize_bilinear_forward(const Tensor<T>& x, std::int64_t th, std::int64_t tw) {
  if (x.ndim() != 4) throw std::invalid_argument("resize_bilinear: expected 4D input");
  if (th < 1 || tw < 1) throw std::invalid_argument("resize_bilinear: target must be >= 1");
  const std::int64_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  ResizePlan<T> rows, cols;
  rows.build(h, th);
  cols.build(w, tw);
  Tensor<T> y({n, c, th, tw});
  parallel_for(n * c, [&](std::int64_t plane) {
    const T* src = x.data() + plane * h * w;
    T* dst = y.data() + plane * th * tw;
    for (std::int64_t i = 0; i < th; ++i) {
      const T fy = rows.f[static_cast<size_t>(i)];
      const T* r0 = src + rows.i0[static_cast<size_t>(i)] * w;
      const T* r1 = src + rows.i1[static_cast<size_t>(i)] * w;
      for (std::int64_t j = 0; j < tw; ++j) {
        const T fx = cols.f[static_cast<size_t>(j)];
        const std::int64_t c0 = cols.i0[static_cast<size_t>(j)];
        const std::int64_t c1 = cols.i1[static_cast<size_t>(j)];
        dst[i * tw + j] = (T(1) - fy) * ((T(1) - fx) * r0[c0] + fx * r0[c1]) +
                          fy * ((T(1) - fx) * r1[c0] + fx * r1[c1]);
      }
    }
  });
  return y;
}

template <typename T>
void resize_bilinear_backward_acc(const Tensor<T>& gy, Tensor<T>& gx) {
  const std::int64_t n = gx.dim(0), c = gx.dim(1), h = gx.dim(2), w = gx.dim(3);
  const std::int64_t th = gy.dim(2), tw = gy.dim(3);
  ResizePlan<T> rows, cols;
  rows.build(h, th);
  cols.build(w, tw);
  parallel_for(n * c, [&](std::int64_t plane) {
    const T* src = gy.data() + plane * th * tw;
    T* dst = gx.data() + plane * h * w;
    for (std::int64_t i = 0; i < th; ++i) {
      const T fy = rows.f[static_cast<size_t>(i)];
      T* r0 = dst + rows.i0[static_cast<size_t>(i)] * w;
      T* r1 = dst + rows.i1[static_cast<size_t>(i)] * w;
      for (std::int64_t j = 0; j < tw; ++j) {
        const T g = src[i * tw + j];
        const T fx = cols.f[static_cast<size_t>(j)];
        const std::int64_t c0 = cols.i0[static_cast<size_t>(j)];
        const std::int64_t c1 = cols.i1[static_cast<size_t>(j)];
        r0[c0] += (T(1) - fy) * (T(1) - fx) * g;
        r0[c1] += (T(1) - fy) * fx * g;
        r1[c0] += fy * (T(1) - fx) * g;
        r1[c1] += fy * fx * g;
      }
    }
  });
}

// Block-average downsampling; target must divide the input evenly. Used for
// the coarse supervision target of the auxiliary loss.
template <typename T>
Tensor<T> area_downsample(const Tensor<T>& x, std::int64_t th, std::int64_t tw) {
  if (x.ndim() != 4) throw std::invalid_argument("area_downsample: expected 4D input");
  const std::int64_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  if (th < 1 || tw < 1 || h % th != 0 || w % tw != 0)
    throw std::invalid_argument("area_downsample: target must divide input dimensions");
  const std::int64_t bh = h / th, bw = w / tw;
  Tensor<T> y({n, c, th, tw});
  for (std::int64_t plane = 0; plane < n * c; ++plane) {
    const T* src = x.data() + plane * h * w;
    T* dst = y.data() + plane * th * tw;
    for (std::int64_t i = 0; i < th; ++i)
      for (std::int64_t j = 0; j < tw; ++j) {
        double acc = 0.0;
        for (std::int64_t di = 0; di < bh; ++di)
          for (std::int64_t dj = 0; dj < bw; ++dj)
            acc += static_cast<double>(src[(i * bh + di) * w + j * bw + dj]);
        dst[i * tw + j] = static_cast<T>(acc / static_cast<double>(bh * bw));
      }
  }
  return y;
}

}  // namespace pat::nn
