// Copyright (C) 2026 The cslayout Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "cslayout/nn/tensor.hpp"

namespace cslayout::testing {

struct GradCheck {
  std::vector<double> analytic;
  std::vector<double> numeric;
  // ||analytic - numeric|| / max(||analytic||, ||numeric||); 0 when both vanish.
  double relative_error = 0.0;
};

inline double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double scale = std::sqrt(std::max(na, nb));
  return scale == 0.0 ? 0.0 : std::sqrt(diff) / scale;
}

/// Compares the reverse-mode gradient of the scalar `f(x)` at `x0` with
/// central differences of step `eps`.
inline GradCheck check_gradient(const std::function<nn::Tensor(const nn::Tensor&)>& f,
                                const nn::Shape& shape, const std::vector<double>& x0, double eps = 1e-6) {
  GradCheck out;
  const nn::Tensor x = nn::Tensor::parameter(shape, x0);
  const nn::Tensor y = f(x);
  y.backward();
  out.analytic.assign(x.grad().begin(), x.grad().end());
  out.analytic.resize(x0.size(), 0.0);
  nn::NoGradGuard guard;
  std::vector<double> xp = x0;
  for (std::size_t i = 0; i < x0.size(); ++i) {
    xp[i] = x0[i] + eps;
    const double hi = f(nn::Tensor::constant(shape, xp)).item();
    xp[i] = x0[i] - eps;
    const double lo = f(nn::Tensor::constant(shape, xp)).item();
    xp[i] = x0[i];
    out.numeric.push_back((hi - lo) / (2.0 * eps));
  }
  out.relative_error = relative_error(out.analytic, out.numeric);
  return out;
}

/// Same check for a gradient with respect to existing parameter tensors:
/// `loss()` rebuilds the graph from the current parameter values.
inline GradCheck check_parameter_gradient(const std::function<nn::Tensor()>& loss,
                                          const std::vector<nn::Tensor>& params, double eps = 1e-6) {
  GradCheck out;
  for (auto p : params) p.zero_grad();
  loss().backward();
  for (const auto& p : params) {
    const auto g = p.grad();
    for (std::size_t i = 0; i < p.size(); ++i) out.analytic.push_back(g.empty() ? 0.0 : g[i]);
  }
  nn::NoGradGuard guard;
  for (auto p : params) {
    auto v = p.mutable_value();
    for (std::size_t i = 0; i < v.size(); ++i) {
      const double x0 = v[i];
      v[i] = x0 + eps;
      const double hi = loss().item();
      v[i] = x0 - eps;
      const double lo = loss().item();
      v[i] = x0;
      out.numeric.push_back((hi - lo) / (2.0 * eps));
    }
  }
  for (auto p : params) p.zero_grad();
  out.relative_error = relative_error(out.analytic, out.numeric);
  return out;
}

}  // namespace cslayout::testing
