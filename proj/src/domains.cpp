// Copyright (C) 2026 The cslayout Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "cslayout/domains.hpp"

#include <algorithm>

#include "cslayout/slots.hpp"

namespace cslayout {

int LocalFurniture::argmax_category() const {
  if (category.empty()) return -1;
  return static_cast<int>(std::max_element(category.begin(), category.end()) - category.begin());
}

DimensionalSize to_dimensional(const Size3& m) {
  return {{m.length / kDimensionalScale, m.width / kDimensionalScale, m.height / kDimensionalScale}};
}

Size3 from_dimensional(const DimensionalSize& d) {
  return {d.size.length * kDimensionalScale, d.size.width * kDimensionalScale,
          d.size.height * kDimensionalScale};
}

LocalFurniture local_furniture_of(const Layout& layout, std::size_t index,
                                  std::size_t num_categories) {
  const FurnitureInstance& f = layout.furniture.at(index);
  LocalFurniture tp;
  tp.size = to_dimensional(f.size).size;
  tp.location = normalize_point(f.position, layout.scene.bounds);
  tp.category.assign(num_categories, 0.0);
  tp.category.at(static_cast<std::size_t>(f.category.id)) = 1.0;
  return tp;
}

Layout compose_custom_layout(const Layout& base, const CategoryCode& label_1,
                             const DimensionalSize& ls2, SizeCode label_2, bool* ambiguous) {
  const auto target = find_target_instance(base, label_1.id, ambiguous);
  if (!target) {
    throw DomainError("compose_custom_layout: no customized '" + label_1.name + "' in the layout");
  }
  Layout out = base;
  FurnitureInstance& f = out.furniture[*target];
  const Size3 size = f.size_range.clamp(from_dimensional(ls2));
  f = resize_anchored(f, size, label_2);
  return out;
}

}  // namespace cslayout
