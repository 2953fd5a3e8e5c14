#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "pat/nn/autodiff.hpp"
#include "pat/rng.hpp"

namespace pat::nn {

// Central-difference verification of backward passes. `build` must be a pure
// function of the leaf values that returns a scalar; it is re-evaluated with
// perturbed inputs, so anything stateful (running statistics) has to be
// recreated inside it. Returns the maximum relative error over at least
// `coords_per_input` randomly chosen coordinates of every input,
// relative error = |fd - analytic| / max(1, |fd|, |analytic|).
template <typename T>
double finite_diff_check(
    const std::function<Var<T>(const std::vector<Var<T>>&)>& build,
    std::vector<Tensor<T>> inputs, T eps, Rng& rng, int coords_per_input = 32) {
  if (!(eps > T(0))) throw std::invalid_argument("finite_diff_check: eps must be positive");

  std::vector<Var<T>> leaves;
  leaves.reserve(inputs.size());
  for (auto& input : inputs) leaves.push_back(make_var(input, /*requires_grad=*/true));

  auto out = build(leaves);
  if (out->value.numel() != 1)
    throw std::invalid_argument("finite_diff_check: build must return a scalar");
  if (!std::isfinite(static_cast<double>(out->value[0])))
    throw std::invalid_argument("finite_diff_check: non-finite forward value");
  backward(out);

  auto eval = [&](const std::vector<Var<T>>& vars) {
    auto y = build(vars);
    const double v = static_cast<double>(y->value[0]);
    if (!std::isfinite(v))
      throw std::invalid_argument("finite_diff_check: non-finite forward value");
    return v;
  };

  double worst = 0.0;
  for (size_t input_idx = 0; input_idx < leaves.size(); ++input_idx) {
    auto& leaf = leaves[input_idx];
    const std::int64_t n = leaf->value.numel();
    const int coords = static_cast<int>(std::min<std::int64_t>(coords_per_input, n));
    for (int c = 0; c < coords; ++c) {
      const std::int64_t idx =
          n == coords ? c : static_cast<std::int64_t>(rng.uniform_int(static_cast<std::uint64_t>(n)));
      const T saved = leaf->value[idx];
      leaf->value[idx] = saved + eps;
      const double plus = eval(leaves);
      leaf->value[idx] = saved - eps;
      const double minus = eval(leaves);
      leaf->value[idx] = saved;

      const double fd = (plus - minus) / (2.0 * static_cast<double>(eps));
      const double an = leaf->grad.numel() > 0 ? static_cast<double>(leaf->grad[idx]) : 0.0;
      const double err = std::abs(fd - an) / std::max({1.0, std::abs(fd), std::abs(an)});
      worst = std::max(worst, err);
    }
  }
  return worst;
}

}  // namespace pat::nn
