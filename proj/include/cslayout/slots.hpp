// Copyright (C) 2026 The cslayout Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "cslayout/dataset.hpp"
#include "cslayout/layout.hpp"

namespace cslayout {

/// One generator output slot. Center and extents are normalized to the
/// scene bounds; extents are the plan-view AABB size along x and y.
struct Slot {
  double presence_logit = 0.0;
  std::vector<double> category_logits;
  Point2 center;
  double extent_x = 0.0;
  double extent_y = 0.0;
  std::array<double, kOrientationCount> orientation_logits{};

  friend bool operator==(const Slot&, const Slot&) = default;
};

/// Fixed-capacity parametric layout. Flat layout per slot:
/// [presence, category logits (C), cx, cy, ex, ey, orientation logits (4)].
struct SlotGrid {
  std::size_t num_categories = 0;
  std::vector<Slot> slots;

  static constexpr std::size_t stride(std::size_t num_categories) { return num_categories + 9; }

  struct Offsets {
    std::size_t presence, category, cx, cy, ex, ey, orientation;
  };
  static constexpr Offsets offsets(std::size_t c) {
    return {0, 1, 1 + c, 2 + c, 3 + c, 4 + c, 5 + c};
  }

  std::vector<double> flatten() const;
  static SlotGrid from_flat(std::span<const double> flat, std::size_t num_slots,
                            std::size_t num_categories);

  friend bool operator==(const SlotGrid&, const SlotGrid&) = default;
};

inline constexpr std::size_t kDefaultSlotCount = 16;
inline constexpr double kEncodeLogit = 12.0;

double sigmoid(double x);

/// Ground-truth layout in slot form: furniture i goes to slot i, presence and
/// class logits at +/-kEncodeLogit. Furniture beyond `num_slots` is dropped.
SlotGrid encode_layout(const Layout& layout, std::size_t num_slots, std::size_t num_categories);

/// Slots with presence probability > 0.5 become furniture of the argmax
/// category at its catalog default size and the argmax orientation.
Layout decode_slots(const SlotGrid& slots, const RoomScene& scene, const Catalog& catalog);

/// Normalized scene coordinates <-> meters.
Point2 normalize_point(const Point2& p, const AABB& bounds);
Point2 denormalize_point(const Point2& p, const AABB& bounds);

}  // namespace cslayout
