#pragma once

#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "pat/nn/autodiff.hpp"
#include "pat/nn/ops.hpp"

namespace pat::nn {

// Named parameter leaves plus non-trainable buffers (batch-norm running
// statistics), both with deterministic iteration order.
template <typename T>
class ParameterSet {
 public:
  Var<T> add_param(const std::string& name, Tensor<T> value) {
    if (params_.count(name)) throw std::invalid_argument("duplicate parameter: " + name);
    auto var = make_var(std::move(value), /*requires_grad=*/true);
    param_names_.push_back(name);
    params_.emplace(name, var);
    return var;
  }

  BatchNormStats<T>* add_norm_stats(const std::string& name, std::int64_t channels) {
    if (stats_.count(name)) throw std::invalid_argument("duplicate buffer: " + name);
    auto stats = std::make_unique<BatchNormStats<T>>();
    stats->mean = Tensor<T>({channels});
    stats->var = Tensor<T>::full({channels}, T(1));
    auto* raw = stats.get();
    stats_names_.push_back(name);
    stats_.emplace(name, std::move(stats));
    return raw;
  }

  Var<T> param(const std::string& name) const {
    auto it = params_.find(name);
    if (it == params_.end()) throw std::invalid_argument("unknown parameter: " + name);
    return it->second;
  }

  BatchNormStats<T>* norm_stats(const std::string& name) const {
    auto it = stats_.find(name);
    if (it == stats_.end()) throw std::invalid_argument("unknown buffer: " + name);
    return it->second.get();
  }

  const std::vector<std::string>& param_names() const { return param_names_; }
  const std::vector<std::string>& stats_names() const { return stats_names_; }

  void zero_grad() {
    for (const auto& name : param_names_) params_.at(name)->zero_grad();
  }

  std::int64_t parameter_count() const {
    std::int64_t total = 0;
    for (const auto& name : param_names_) total += params_.at(name)->value.numel();
    return total;
  }

 private:
  std::vector<std::string> param_names_;
  std::unordered_map<std::string, Var<T>> params_;
  std::vector<std::string> stats_names_;
  std::unordered_map<std::string, std::unique_ptr<BatchNormStats<T>>> stats_;
};

}  // namespace pat::nn
