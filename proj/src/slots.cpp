// Copyright (C) 2026 The cslayout Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "cslayout/slots.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cslayout {

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

std::vector<double> SlotGrid::flatten() const {
  const std::size_t d = stride(num_categories);
  const Offsets o = offsets(num_categories);
  std::vector<double> flat(slots.size() * d, 0.0);
  for (std::size_t k = 0; k < slots.size(); ++k) {
    double* row = flat.data() + k * d;
    const Slot& s = slots[k];
    row[o.presence] = s.presence_logit;
    std::copy(s.category_logits.begin(), s.category_logits.end(), row + o.category);
    row[o.cx] = s.center.x;
    row[o.cy] = s.center.y;
    row[o.ex] = s.extent_x;
    row[o.ey] = s.extent_y;
    std::copy(s.orientation_logits.begin(), s.orientation_logits.end(), row + o.orientation);
  }
  return flat;
}

SlotGrid SlotGrid::from_flat(std::span<const double> flat, std::size_t num_slots,
                             std::size_t num_categories) {
  const std::size_t d = stride(num_categories);
  if (flat.size() != num_slots * d) throw std::invalid_argument("SlotGrid::from_flat: size mismatch");
  const Offsets o = offsets(num_categories);
  SlotGrid g;
  g.num_categories = num_categories;
  g.slots.resize(num_slots);
  for (std::size_t k = 0; k < num_slots; ++k) {
    const double* row = flat.data() + k * d;
    Slot& s = g.slots[k];
    s.presence_logit = row[o.presence];
    s.category_logits.assign(row + o.category, row + o.category + num_categories);
    s.center = {row[o.cx], row[o.cy]};
    s.extent_x = row[o.ex];
    s.extent_y = row[o.ey];
    std::copy(row + o.orientation, row + o.orientation + kOrientationCount,
              s.orientation_logits.begin());
  }
  return g;
}

Point2 normalize_point(const Point2& p, const AABB& b) {
  return {(p.x - b.x_min) / b.width(), (p.y - b.y_min) / b.height()};
}

Point2 denormalize_point(const Point2& p, const AABB& b) {
  return {b.x_min + p.x * b.width(), b.y_min + p.y * b.height()};
}

SlotGrid encode_layout(const Layout& layout, std::size_t num_slots, std::size_t num_categories) {
  SlotGrid g;
  g.num_categories = num_categories;
  g.slots.resize(num_slots);
  const AABB& bounds = layout.scene.bounds;
  for (std::size_t k = 0; k < num_slots; ++k) {
    Slot& s = g.slots[k];
    s.category_logits.assign(num_categories, -kEncodeLogit);
    s.orientation_logits.fill(-kEncodeLogit);
    if (k >= layout.furniture.size()) {
      s.presence_logit = -kEncodeLogit;
      s.center = {0.5, 0.5};
      s.extent_x = s.extent_y = 0.0;
      continue;
    }
    const FurnitureInstance& f = layout.furniture[k];
    if (f.category.id < 0 || static_cast<std::size_t>(f.category.id) >= num_categories) {
      throw DomainError("encode_layout: category id outside the slot grid's class range");
    }
    const AABB box = aabb(f);
    s.presence_logit = kEncodeLogit;
    s.category_logits[static_cast<std::size_t>(f.category.id)] = kEncodeLogit;
    s.orientation_logits[static_cast<std::size_t>(f.orientation)] = kEncodeLogit;
    s.center = normalize_point(f.position, bounds);
    s.extent_x = box.width() / bounds.width();
    s.extent_y = box.height() / bounds.height();
  }
  return g;
}

Layout decode_slots(const SlotGrid& slots, const RoomScene& scene, const Catalog& catalog) {
  Layout out;
  out.scene = scene;
  for (const Slot& s : slots.slots) {
    if (!(sigmoid(s.presence_logit) > 0.5)) continue;
    const auto cat_it = std::max_element(s.category_logits.begin(), s.category_logits.end());
    const int id = static_cast<int>(cat_it - s.category_logits.begin());
    if (!catalog.contains(id)) continue;
    const auto or_it = std::max_element(s.orientation_logits.begin(), s.orientation_logits.end());
    const auto facing = static_cast<Orientation>(or_it - s.orientation_logits.begin());
    out.furniture.push_back(
        catalog.make_instance(id, denormalize_point(s.center, scene.bounds), facing));
  }
  return out;
}

}  // namespace cslayout
