// Copyright (C) 2026 The cslayout Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "cslayout/nn/modules.hpp"

#include <cmath>
#include <stdexcept>

#include "cslayout/nn/ops.hpp"

namespace cslayout::nn {

Tensor ParamSet::add(std::string name, Shape shape, std::vector<double> value) {
  for (const auto& [n, _] : items_) {
    if (n == name) throw std::logic_error("ParamSet: duplicate parameter " + name);
  }
  Tensor t = Tensor::parameter(std::move(shape), std::move(value));
  items_.emplace_back(std::move(name), t);
  return t;
}

std::vector<Tensor> ParamSet::tensors() const {
  std::vector<Tensor> out;
  out.reserve(items_.size());
  for (const auto& [_, t] : items_) out.push_back(t);
  return out;
}

std::size_t ParamSet::total_size() const {
  std::size_t n = 0;
  for (const auto& [_, t] : items_) n += t.size();
  return n;
}

void ParamSet::zero_grad() {
  for (auto& [_, t] : items_) t.zero_grad();
}

bool ParamSet::all_finite() const {
  for (const auto& [_, t] : items_) {
    for (double v : t.value()) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

namespace {

std::vector<double> he_normal(std::size_t n, std::size_t fan_in, double gain, Rng& rng) {
  const double sd = gain * std::sqrt(2.0 / static_cast<double>(fan_in));
  std::vector<double> v(n);
  for (auto& x : v) x = sd * rng.normal();
  return v;
}

}  // namespace

Linear::Linear(ParamSet& ps, const std::string& name, std::size_t in, std::size_t out, Rng& rng,
               double gain) {
  weight = ps.add(name + ".weight", {out, in}, he_normal(out * in, in, gain, rng));
  bias = ps.add(name + ".bias", {out}, std::vector<double>(out, 0.0));
}

Tensor Linear::operator()(const Tensor& x) const { return linear(x, weight, bias); }

Conv2d::Conv2d(ParamSet& ps, const std::string& name, std::size_t in_ch, std::size_t out_ch,
               std::size_t k, std::size_t s, std::size_t p, Rng& rng)
    : kernel(k), stride(s), pad(p) {
  const std::size_t fan_in = in_ch * k * k;
  weight = ps.add(name + ".weight", {out_ch, in_ch, k, k}, he_normal(out_ch * fan_in, fan_in, 1.0, rng));
  bias = ps.add(name + ".bias", {out_ch}, std::vector<double>(out_ch, 0.0));
}

Tensor Conv2d::operator()(const Tensor& x) const { return conv2d(x, weight, bias, stride, pad); }

Mlp::Mlp(ParamSet& ps, const std::string& name, std::size_t in, const std::vector<std::size_t>& hidden,
         std::size_t out, Rng& rng, double out_gain) {
  std::size_t prev = in;
  for (std::size_t i = 0; i < hidden.size(); ++i) {
    layers_.emplace_back(ps, name + "." + std::to_string(i), prev, hidden[i], rng);
    prev = hidden[i];
  }
  layers_.emplace_back(ps, name + "." + std::to_string(hidden.size()), prev, out, rng, out_gain);
}

Tensor Mlp::operator()(const Tensor& x) const {
  Tensor h = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    h = layers_[i](h);
    if (i + 1 < layers_.size()) h = leaky_relu(h);
  }
  return h;
}

Adam::Adam(std::vector<Tensor> params, AdamConfig cfg) : params_(std::move(params)), cfg_(cfg) {
  for (const auto& p : params_) {
    m_.emplace_back(p.size(), 0.0);
    v_.emplace_back(p.size(), 0.0);
  }
}

void Adam::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    auto g = params_[i].grad();
    if (g.empty()) continue;
    auto w = params_[i].mutable_value();
    auto& m = m_[i];
    auto& v = v_[i];
    for (std::size_t j = 0; j < w.size(); ++j) {
      m[j] = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * g[j];
      v[j] = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * g[j] * g[j];
      w[j] -= cfg_.lr * (m[j] / bc1) / (std::sqrt(v[j] / bc2) + cfg_.eps);
    }
  }
}

}  // namespace cslayout::nn
