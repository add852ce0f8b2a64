// Copyright (C) 2026 The cslayout Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstddef>
#include <vector>

#include "cslayout/layout.hpp"

namespace cslayout {

/// Meters per normalized unit in the local and dimensional domains. A power
/// of two, so normalizing and denormalizing a size is exact.
inline constexpr double kDimensionalScale = 2.0;

/// tp1: one customized item pulled out of a layout. `size` is normalized by
/// kDimensionalScale, `location` by the scene bounds; `category` is a
/// probability distribution over catalog ids.
struct LocalFurniture {
  Size3 size;
  Point2 location;
  std::vector<double> category;

  int argmax_category() const;
};

/// tp2, ls1, ls2: the size alone, normalized by kDimensionalScale.
struct DimensionalSize {
  Size3 size;

  friend bool operator==(const DimensionalSize&, const DimensionalSize&) = default;
};

DimensionalSize to_dimensional(const Size3& meters);
Size3 from_dimensional(const DimensionalSize& d);

/// Ground-truth tp1 of instance `index` (one-hot category).
LocalFurniture local_furniture_of(const Layout& layout, std::size_t index,
                                  std::size_t num_categories);

/// Replaces the size of the customized instance of `label_1` with the
/// denormalized `ls2`, clamped to its range and anchored per `label_2`.
/// Throws DomainError when the layout has no customized instance of label_1.
Layout compose_custom_layout(const Layout& base, const CategoryCode& label_1,
                             const DimensionalSize& ls2, SizeCode label_2,
                             bool* ambiguous = nullptr);

}  // namespace cslayout
