#pragma once

#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

#include "pat/nn/autodiff.hpp"
#include "pat/nn/kernels.hpp"

// Differentiable operations over Var<T>. Forward values are computed by the
// kernels in kernels.hpp; each closure implements the exact transpose (or
// subgradient) of its forward map.
namespace pat::nn {

template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& k, const ConvSpec& cs = {}) {
  Tensor<T> y = conv2d_forward(x->value, k->value, cs);
  return make_op<T>(std::move(y), {x, k}, [x, k, cs](VarNode<T>& node) {
    if (x->needs_grad) conv2d_backward_input_acc(node.grad, k->value, cs, x->ensure_grad());
    if (k->needs_grad) conv2d_backward_kernel_acc(node.grad, x->value, cs, k->ensure_grad());
  });
}

template <typename T>
Var<T> up_conv2d(const Var<T>& x, const Var<T>& k, std::int64_t stride = 2) {
  Tensor<T> y = upconv2d_forward(x->value, k->value, stride);
  return make_op<T>(std::move(y), {x, k}, [x, k, stride](VarNode<T>& node) {
    if (x->needs_grad) upconv2d_backward_input_acc(node.grad, k->value, stride, x->ensure_grad());
    if (k->needs_grad) upconv2d_backward_kernel_acc(node.grad, x->value, stride, k->ensure_grad());
  });
}

template <typename T>
Var<T> relu(const Var<T>& x) {
  Tensor<T> y = x->value;
  for (auto& v : y.vec()) v = v > T(0) ? v : T(0);
  return make_op<T>(std::move(y), {x}, [x](VarNode<T>& node) {
    if (!x->needs_grad) return;
    auto& gx = x->ensure_grad();
    // Subgradient 0 at exactly 0.
    for (std::int64_t i = 0; i < node.grad.numel(); ++i)
      if (node.value[i] > T(0)) gx[i] += node.grad[i];
  });
}

// Per-channel bias over a (N, C, H, W) tensor.
template <typename T>
Var<T> bias_add(const Var<T>& x, const Var<T>& b) {
  if (x->value.ndim() != 4 || b->value.ndim() != 1 || b->value.dim(0) != x->value.dim(1))
    throw std::invalid_argument("bias_add: bias length must equal channel count");
  Tensor<T> y = x->value;
  const std::int64_t c = y.dim(1), plane = y.dim(2) * y.dim(3), n = y.dim(0);
  for (std::int64_t bi = 0; bi < n; ++bi)
    for (std::int64_t ci = 0; ci < c; ++ci) {
      T* dst = y.data() + (bi * c + ci) * plane;
      const T bv = b->value[ci];
      for (std::int64_t i = 0; i < plane; ++i) dst[i] += bv;
    }
  return make_op<T>(std::move(y), {x, b}, [x, b, c, plane, n](VarNode<T>& node) {
    if (x->needs_grad) {
      auto& gx = x->ensure_grad();
      for (std::int64_t i = 0; i < node.grad.numel(); ++i) gx[i] += node.grad[i];
    }
    if (b->needs_grad) {
      auto& gb = b->ensure_grad();
      for (std::int64_t bi = 0; bi < n; ++bi)
        for (std::int64_t ci = 0; ci < c; ++ci) {
          const T* src = node.grad.data() + (bi * c + ci) * plane;
          double acc = 0.0;
          for (std::int64_t i = 0; i < plane; ++i) acc += static_cast<double>(src[i]);
          gb[ci] += static_cast<T>(acc);
        }
    }
  });
}

enum class BatchNormMode { train, eval };

// Running statistics owned by the model, updated in train mode.
template <typename T>
struct BatchNormStats {
  Tensor<T> mean;
  Tensor<T> var;
};

template <typename T>
Var<T> batch_norm2d(const Var<T>& x, const Var<T>& scale, const Var<T>& shift,
                    BatchNormStats<T>* running, BatchNormMode mode,
                    double momentum = 0.1, double epsilon = 1e-5) {
  if (x->value.ndim() != 4)
    throw std::invalid_argument("batch_norm2d: expected 4D input");
  const std::int64_t n = x->value.dim(0), c = x->value.dim(1);
  const std::int64_t plane = x->value.dim(2) * x->value.dim(3);
  if (scale->value.numel() != c || shift->value.numel() != c)
    throw std::invalid_argument("batch_norm2d: scale/shift length must equal channel count");

  const std::int64_t m = n * plane;  // normalization set size per channel
  auto mu = std::make_shared<std::vector<double>>(static_cast<size_t>(c), 0.0);
  auto inv_sigma = std::make_shared<std::vector<double>>(static_cast<size_t>(c), 0.0);

  if (mode == BatchNormMode::train) {
    for (std::int64_t ci = 0; ci < c; ++ci) {
      double sum = 0.0, sq = 0.0;
      for (std::int64_t bi = 0; bi < n; ++bi) {
        const T* src = x->value.data() + (bi * c + ci) * plane;
        for (std::int64_t i = 0; i < plane; ++i) {
          const double v = static_cast<double>(src[i]);
          sum += v;
          sq += v * v;
        }
      }
      const double mean = sum / static_cast<double>(m);
      const double var = std::max(0.0, sq / static_cast<double>(m) - mean * mean);
      (*mu)[static_cast<size_t>(ci)] = mean;
      (*inv_sigma)[static_cast<size_t>(ci)] = 1.0 / std::sqrt(var + epsilon);
      if (running) {
        const double unbiased = m > 1 ? var * static_cast<double>(m) / (m - 1) : var;
        running->mean[ci] = static_cast<T>((1.0 - momentum) * running->mean[ci] + momentum * mean);
        running->var[ci] = static_cast<T>((1.0 - momentum) * running->var[ci] + momentum * unbiased);
      }
    }
  } else {
    if (!running)
      throw std::invalid_argument("batch_norm2d: eval mode requires running statistics");
    for (std::int64_t ci = 0; ci < c; ++ci) {
      (*mu)[static_cast<size_t>(ci)] = static_cast<double>(running->mean[ci]);
      (*inv_sigma)[static_cast<size_t>(ci)] =
          1.0 / std::sqrt(static_cast<double>(running->var[ci]) + epsilon);
    }
  }

  Tensor<T> y(x->value.shape());
  for (std::int64_t bi = 0; bi < n; ++bi)
    for (std::int64_t ci = 0; ci < c; ++ci) {
      const T* src = x->value.data() + (bi * c + ci) * plane;
      T* dst = y.data() + (bi * c + ci) * plane;
      const T g = scale->value[ci], b = shift->value[ci];
      const T cmu = static_cast<T>((*mu)[static_cast<size_t>(ci)]);
      const T cis = static_cast<T>((*inv_sigma)[static_cast<size_t>(ci)]);
      for (std::int64_t i = 0; i < plane; ++i) dst[i] = g * (src[i] - cmu) * cis + b;
    }

  const bool train = mode == BatchNormMode::train;
  return make_op<T>(std::move(y), {x, scale, shift},
                    [x, scale, shift, mu, inv_sigma, n, c, plane, m, train](VarNode<T>& node) {
    for (std::int64_t ci = 0; ci < c; ++ci) {
      const double cmu = (*mu)[static_cast<size_t>(ci)];
      const double cis = (*inv_sigma)[static_cast<size_t>(ci)];
      const double g = static_cast<double>(scale->value[ci]);

      double sum_dy = 0.0, sum_dy_xhat = 0.0;
      for (std::int64_t bi = 0; bi < n; ++bi) {
        const T* dy = node.grad.data() + (bi * c + ci) * plane;
        const T* xv = x->value.data() + (bi * c + ci) * plane;
        for (std::int64_t i = 0; i < plane; ++i) {
          const double d = static_cast<double>(dy[i]);
          sum_dy += d;
          sum_dy_xhat += d * (static_cast<double>(xv[i]) - cmu) * cis;
        }
      }
      if (shift->needs_grad) shift->ensure_grad()[ci] += static_cast<T>(sum_dy);
      if (scale->needs_grad) scale->ensure_grad()[ci] += static_cast<T>(sum_dy_xhat);
      if (!x->needs_grad) continue;

      auto& gx = x->ensure_grad();
      if (train) {
        const double mean_dy = sum_dy / static_cast<double>(m);
        const double mean_dy_xhat = sum_dy_xhat / static_cast<double>(m);
        for (std::int64_t bi = 0; bi < n; ++bi) {
          const T* dy = node.grad.data() + (bi * c + ci) * plane;
          const T* xv = x->value.data() + (bi * c + ci) * plane;
          T* dst = gx.data() + (bi * c + ci) * plane;
          for (std::int64_t i = 0; i < plane; ++i) {
            const double xhat = (static_cast<double>(xv[i]) - cmu) * cis;
            dst[i] += static_cast<T>(g * cis *
                                     (static_cast<double>(dy[i]) - mean_dy - xhat * mean_dy_xhat));
          }
        }
      } else {
        for (std::int64_t bi = 0; bi < n; ++bi) {
          const T* dy = node.grad.data() + (bi * c + ci) * plane;
          T* dst = gx.data() + (bi * c + ci) * plane;
          for (std::int64_t i = 0; i < plane; ++i)
            dst[i] += static_cast<T>(g * cis * static_cast<double>(dy[i]));
        }
      }
    }
  });
}

template <typename T>
Var<T> max_pool2x2(const Var<T>& x) {
  auto argmax = std::make_shared<std::vector<std::int64_t>>();
  Tensor<T> y = maxpool2x2_forward(x->value, *argmax);
  return make_op<T>(std::move(y), {x}, [x, argmax](VarNode<T>& node) {
    if (x->needs_grad) maxpool2x2_backward_acc(node.grad, *argmax, x->ensure_grad());
  });
}

template <typename T>
Var<T> resize_bilinear(const Var<T>& x, std::int64_t th, std::int64_t tw) {
  Tensor<T> y = resize_bilinear_forward(x->value, th, tw);
  return make_op<T>(std::move(y), {x}, [x](VarNode<T>& node) {
    if (x->needs_grad) resize_bilinear_backward_acc(node.grad, x->ensure_grad());
  });
}

template <typename T>
Var<T> concat_channels(const std::vector<Var<T>>& xs) {
  if (xs.empty()) throw std::invalid_argument("concat_channels: empty input list");
  const auto& first = xs.front()->value;
  if (first.ndim() != 4) throw std::invalid_argument("concat_channels: expected 4D inputs");
  std::int64_t channels = 0;
  for (const auto& x : xs) {
    if (x->value.ndim() != 4 || x->value.dim(0) != first.dim(0) ||
        x->value.dim(2) != first.dim(2) || x->value.dim(3) != first.dim(3))
      throw std::invalid_argument("concat_channels: batch/spatial dimensions must match");
    channels += x->value.dim(1);
  }
  const std::int64_t n = first.dim(0), plane = first.dim(2) * first.dim(3);
  Tensor<T> y({n, channels, first.dim(2), first.dim(3)});
  std::int64_t offset = 0;
  for (const auto& x : xs) {
    const std::int64_t xc = x->value.dim(1);
    for (std::int64_t bi = 0; bi < n; ++bi)
      std::memcpy(y.data() + (bi * channels + offset) * plane,
                  x->value.data() + bi * xc * plane,
                  static_cast<size_t>(xc * plane) * sizeof(T));
    offset += xc;
  }
  return make_op<T>(std::move(y), xs, [xs, channels, n, plane](VarNode<T>& node) {
    std::int64_t off = 0;
    for (const auto& x : xs) {
      const std::int64_t xc = x->value.dim(1);
      if (x->needs_grad) {
        auto& gx = x->ensure_grad();
        for (std::int64_t bi = 0; bi < n; ++bi) {
          const T* src = node.grad.data() + (bi * channels + off) * plane;
          T* dst = gx.data() + bi * xc * plane;
          for (std::int64_t i = 0; i < xc * plane; ++i) dst[i] += src[i];
        }
      }
      off += xc;
    }
  });
}

// Half squared Frobenius distance per sample, averaged over the batch
// (leading dimension).
template <typename T>
Var<T> mse(const Var<T>& f, const Var<T>& target) {
  if (!f->value.same_shape(target->value))
    throw std::invalid_argument("mse: shape mismatch " + f->value.shape_str() + " vs " +
                                target->value.shape_str());
  if (f->value.ndim() < 1) throw std::invalid_argument("mse: expected at least 1D input");
  const std::int64_t batch = f->value.dim(0);
  double acc = 0.0;
  for (std::int64_t i = 0; i < f->value.numel(); ++i) {
    const double d = static_cast<double>(f->value[i]) - static_cast<double>(target->value[i]);
    acc += d * d;
  }
  Tensor<T> y({1});
  y[0] = static_cast<T>(0.5 * acc / static_cast<double>(batch));
  return make_op<T>(std::move(y), {f, target}, [f, target, batch](VarNode<T>& node) {
    const T g = node.grad[0] / static_cast<T>(batch);
    if (f->needs_grad) {
      auto& gf = f->ensure_grad();
      for (std::int64_t i = 0; i < gf.numel(); ++i)
        gf[i] += g * (f->value[i] - target->value[i]);
    }
    if (target->needs_grad) {
      auto& gt = target->ensure_grad();
      for (std::int64_t i = 0; i < gt.numel(); ++i)
        gt[i] -= g * (f->value[i] - target->value[i]);
    }
  });
}

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
  if (!a->value.same_shape(b->value)) throw std::invalid_argument("add: shape mismatch");
  Tensor<T> y = a->value;
  for (std::int64_t i = 0; i < y.numel(); ++i) y[i] += b->value[i];
  return make_op<T>(std::move(y), {a, b}, [a, b](VarNode<T>& node) {
    for (const auto& p : {a, b}) {
      if (!p->needs_grad) continue;
      auto& gp = p->ensure_grad();
      for (std::int64_t i = 0; i < gp.numel(); ++i) gp[i] += node.grad[i];
    }
  });
}

template <typename T>
Var<T> scale(const Var<T>& x, T factor) {
  Tensor<T> y = x->value;
  for (auto& v : y.vec()) v *= factor;
  return make_op<T>(std::move(y), {x}, [x, factor](VarNode<T>& node) {
    if (!x->needs_grad) return;
    auto& gx = x->ensure_grad();
    for (std::int64_t i = 0; i < gx.numel(); ++i) gx[i] += factor * node.grad[i];
  });
}

template <typename T>
Var<T> sum(const Var<T>& x) {
  double acc = 0.0;
  for (std::int64_t i = 0; i < x->value.numel(); ++i) acc += static_cast<double>(x->value[i]);
  Tensor<T> y({1});
  y[0] = static_cast<T>(acc);
  return make_op<T>(std::move(y), {x}, [x](VarNode<T>& node) {
    if (!x->needs_grad) return;
    auto& gx = x->ensure_grad();
    for (std::int64_t i = 0; i < gx.numel(); ++i) gx[i] += node.grad[0];
  });
}

}  // namespace pat::nn
