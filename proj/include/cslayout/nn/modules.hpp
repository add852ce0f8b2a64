// Copyright (C) 2026 The cslayout Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "cslayout/nn/tensor.hpp"
#include "cslayout/random.hpp"

namespace cslayout::nn {

/// Ordered, named parameter list. Order is the checkpoint order.
class ParamSet {
 public:
  Tensor add(std::string name, Shape shape, std::vector<double> value);

  const std::vector<std::pair<std::string, Tensor>>& items() const { return items_; }
  std::vector<Tensor> tensors() const;
  std::size_t total_size() const;
  void zero_grad();
  bool all_finite() const;

 private:
  std::vector<std::pair<std::string, Tensor>> items_;
};

/// He-normal weights scaled by `gain`, zero bias.
class Linear {
 public:
  Linear() = default;
  Linear(ParamSet& ps, const std::string& name, std::size_t in, std::size_t out, Rng& rng,
         double gain = 1.0);
  Tensor operator()(const Tensor& x) const;

  Tensor weight, bias;
};

class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(ParamSet& ps, const std::string& name, std::size_t in_ch, std::size_t out_ch,
         std::size_t kernel, std::size_t stride, std::size_t pad, Rng& rng);
  Tensor operator()(const Tensor& x) const;
  std::size_t out_size(std::size_t in) const { return (in + 2 * pad - kernel) / stride + 1; }

  Tensor weight, bias;
  std::size_t kernel = 3, stride = 1, pad = 1;
};

/// Linear layers with leaky ReLU between them; the last layer is linear.
class Mlp {
 public:
  Mlp() = default;
  Mlp(ParamSet& ps, const std::string& name, std::size_t in, const std::vector<std::size_t>& hidden,
      std::size_t out, Rng& rng, double out_gain = 1.0);
  Tensor operator()(const Tensor& x) const;

 private:
  std::vector<Linear> layers_;
};

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam over a fixed parameter list. Parameters without a gradient are skipped.
class Adam {
 public:
  Adam(std::vector<Tensor> params, AdamConfig cfg);
  void step();
  const AdamConfig& config() const { return cfg_; }

 private:
  std::vector<Tensor> params_;
  AdamConfig cfg_;
  std::vector<std::vector<double>> m_, v_;
  std::size_t t_ = 0;
};

}  // namespace cslayout::nn
