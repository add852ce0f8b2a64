// Copyright (C) 2026 The cslayout Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cslayout/nn/tensor.hpp"

namespace cslayout::nn {

/// x[B,I] · W[O,I]^T + b[O] -> [B,O]
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);

/// x[B,C,H,W] with weight[O,C,k,k], bias[O]; zero padding.
Tensor conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias, std::size_t stride,
              std::size_t pad);

Tensor leaky_relu(const Tensor& x, double slope = 0.01);
Tensor sigmoid(const Tensor& x);
Tensor exp(const Tensor& x);
Tensor add(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double s);

/// Same values, new shape.
Tensor reshape(const Tensor& x, Shape shape);

/// Row-wise ops on 2D tensors [R, N].
Tensor concat_cols(const std::vector<Tensor>& parts);
Tensor slice_cols(const Tensor& x, std::size_t start, std::size_t len);
Tensor gather_rows(const Tensor& x, std::span<const std::size_t> rows);
Tensor softmax_rows(const Tensor& x);

/// Σ weights[i] * parts[i] for scalar parts.
Tensor weighted_sum(const std::vector<Tensor>& parts, const std::vector<double>& weights);

/// Sum of all elements as a scalar.
Tensor sum(const Tensor& x);

/// Stable log(1 + exp(x)).
double softplus(double x);

}  // namespace cslayout::nn
