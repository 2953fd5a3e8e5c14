#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "pat/nn/params.hpp"

namespace pat::nn {

struct AdamConfig {
  double learning_rate = 0.005;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Bias-corrected Adam. Moments are zero-initialized; the step counter
// increments once per step() call.
template <typename T>
class AdamState {
 public:
  AdamState() = default;
  AdamState(AdamConfig config, const ParameterSet<T>& params) : config_(config) {
    for (const auto& name : params.param_names()) {
      const auto& shape = params.param(name)->value.shape();
      m_.emplace(name, Tensor<T>(shape));
      v_.emplace(name, Tensor<T>(shape));
    }
  }

  void step(ParameterSet<T>& params) {
    ++t_;
    const double corr1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
    const double corr2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
    for (const auto& name : params.param_names()) {
      auto var = params.param(name);
      auto mit = m_.find(name);
      if (mit == m_.end())
        throw std::invalid_argument("adam_step: no state for parameter " + name);
      Tensor<T>& m = mit->second;
      Tensor<T>& v = v_.at(name);
      if (!m.same_shape(var->value))
        throw std::invalid_argument("adam_step: state shape mismatch for " + name);
      const Tensor<T>& g = var->ensure_grad();

      const T b1 = static_cast<T>(config_.beta1), b2 = static_cast<T>(config_.beta2);
      for (std::int64_t i = 0; i < m.numel(); ++i) {
        m[i] = b1 * m[i] + (T(1) - b1) * g[i];
        v[i] = b2 * v[i] + (T(1) - b2) * g[i] * g[i];
        const double mhat = static_cast<double>(m[i]) / corr1;
        const double vhat = static_cast<double>(v[i]) / corr2;
        var->value[i] -= static_cast<T>(config_.learning_rate * mhat /
                                        (std::sqrt(vhat) + config_.epsilon));
      }
    }
  }

  long step_count() const { return t_; }
  void set_step_count(long t) { t_ = t; }
  const AdamConfig& config() const { return config_; }

  Tensor<T>& first_moment(const std::string& name) { return m_.at(name); }
  Tensor<T>& second_moment(const std::string& name) { return v_.at(name); }

 private:
  AdamConfig config_;
  long t_ = 0;
  std::unordered_map<std::string, Tensor<T>> m_, v_;
};

}  // namespace pat::nn
