// Copyright (C) 2026 The cslayout Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "cslayout/dataset.hpp"
#include "cslayout/model.hpp"

namespace cslayout {

struct TrainConfig {
  double lambda_adv = 0.01;
  double alpha = 1.0;  // weight of L_trans1, L_trans2 and L_size
  double lr = 1e-4;
  std::size_t batch_size = 32;
  std::size_t steps = 2000;
  std::uint64_t seed = 7;
  ModelConfig model;  // model.seed is overridden by `seed`
};

/// Losses of one step, measured before that step's updates.
struct LossRecord {
  std::size_t step = 0;
  double L_D = 0, L_G = 0, L_trans1 = 0, L_trans2 = 0, L_size = 0;
  double joint = 0;  // L_G + alpha * (L_trans1 + L_trans2 + L_size)

  friend bool operator==(const LossRecord&, const LossRecord&) = default;
};

/// A non-finite loss or parameter. what() names the step and the quantity.
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainResult {
  Model model;
  std::vector<LossRecord> history;
};

using TrainCallback = std::function<void(const LossRecord&)>;

/// Alternates a discriminator step on detached soft renders with a joint
/// step through g1, the soft rasterizer, d1, trans1, trans2 and g2. Every
/// variant of each batch sample contributes to the transfer and size terms.
/// Single-threaded and deterministic in `cfg.seed`.
TrainResult train(const Corpus& corpus, const TrainConfig& cfg, const TrainCallback& on_step = {});

/// step,L_D,L_G,L_trans1,L_trans2,L_size with round-trip precision.
void write_loss_csv(std::ostream& os, const std::vector<LossRecord>& history);

}  // namespace cslayout
