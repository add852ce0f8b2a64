// Copyright (C) 2026 The cslayout Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <string>
#include <vector>

#include "cslayout/domains.hpp"
#include "cslayout/layout.hpp"
#include "cslayout/model.hpp"
#include "cslayout/slots.hpp"

namespace cslayout {

/// One entry of l_in: grow the customized item of `category_id` by `code`.
struct SizeRequest {
  int category_id = 0;
  SizeCode code = SizeCode::Default;

  friend bool operator==(const SizeRequest&, const SizeRequest&) = default;
};

struct RequestOutcome {
  SizeRequest request;
  bool applied = false;  // false when g1 placed no such customized item
  std::string message;
  LocalFurniture tp1;
  DimensionalSize ls1, ls2;
};

struct InferResult {
  SlotGrid slots;  // g1 output
  Layout base;     // decoded g1 layout at default sizes
  Layout layout;   // after every applied request, in order
  std::vector<RequestOutcome> outcomes;
};

/// M(x_in, l_in): scene raster -> g1 -> decode, then per request
/// trans1 -> trans2 -> g2 -> compose. Throws DomainError for an unknown or
/// non-customized category id. Pure given the model.
InferResult infer(const Model& model, const RoomScene& scene, const std::vector<SizeRequest>& requests);

}  // namespace cslayout
