// Copyright (C) 2026 The cslayout Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cslayout/domains.hpp"
#include "cslayout/layout.hpp"
#include "cslayout/nn/tensor.hpp"
#include "cslayout/slots.hpp"

namespace cslayout {

/// One ground-truth instance in slot coordinates.
struct SlotTarget {
  int category = 0;
  double cx = 0, cy = 0, ex = 0, ey = 0;
  int orientation = 0;
};

/// Targets for the first `max_slots` furniture of `layout`, in list order.
std::vector<SlotTarget> slot_targets(const Layout& layout, std::size_t max_slots);

/// Greedy assignment of ground-truth instances to slots, in ground-truth
/// order. Each instance takes the free slot that minimizes (argmax category
/// differs, L1 center distance); ties go to the lower slot index.
/// `flat` holds one sample's slots. Result[i] is the slot of target i.
std::vector<std::size_t> match_slots(std::span<const double> flat, std::size_t num_slots,
                                     std::size_t num_categories,
                                     const std::vector<SlotTarget>& targets);

/// The parts of L_g, summed over one sample's slots.
struct GeneratorLossTerms {
  double box = 0.0;          // L1 on matched center and extent
  double category = 0.0;     // cross-entropy on matched slots
  double orientation = 0.0;  // cross-entropy on matched slots
  double presence = 0.0;     // BCE on every slot
  double adversarial = 0.0;  // -log d_fake
  double total = 0.0;        // L_g + lambda_adv * adversarial

  double reconstruction() const { return box + category + orientation + presence; }
};

/// Binary cross-entropy with ground truth labelled 1: -log d_real - log(1 - d_fake).
double loss_discriminator(double d_real, double d_fake);
/// Batch mean of the above.
double loss_discriminator(std::span<const double> d_real, std::span<const double> d_fake);

/// L_G for one sample. Slot centers and extents are in normalized form.
GeneratorLossTerms loss_generator(const SlotGrid& slots, const Layout& target, double d_fake,
                                  double lambda_adv);

/// L1 over size and location plus cross-entropy of pred.category at the
/// ground-truth argmax.
double loss_trans1(const LocalFurniture& pred, const LocalFurniture& gt);
/// L1 over the three size components.
double loss_trans2(const DimensionalSize& pred, const DimensionalSize& gt);
double loss_size(const DimensionalSize& pred, const DimensionalSize& gt);

namespace nn {

/// Mean over the batch of softplus(-real) + softplus(fake) on D logits [B,1].
Tensor discriminator_loss(const Tensor& real_logits, const Tensor& fake_logits);

/// Mean of -log sigmoid(fake) over the batch.
Tensor adversarial_loss(const Tensor& fake_logits);

/// Mean over the batch of L_g. `flat` is [B, K*stride]. When `terms` is
/// given it receives the batch-mean terms (adversarial and total unset).
Tensor slot_loss(const Tensor& flat, std::size_t num_slots, std::size_t num_categories,
                 const std::vector<std::vector<SlotTarget>>& targets,
                 GeneratorLossTerms* terms = nullptr);

/// Mean over rows of the row-wise L1 distance. `target` is row-major [R,N].
Tensor l1_loss(const Tensor& pred, std::span<const double> target);

/// Mean over rows of -log softmax(logits)[label].
Tensor cross_entropy(const Tensor& logits, std::span<const std::size_t> labels);

}  // namespace nn

}  // namespace cslayout
