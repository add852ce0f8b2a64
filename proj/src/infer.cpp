// Copyright (C) 2026 The cslayout Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "cslayout/infer.hpp"

namespace cslayout {

InferResult infer(const Model& model, const RoomScene& scene, const std::vector<SizeRequest>& requests) {
  const Catalog& cat = model.catalog();
  for (const auto& r : requests) {
    if (!cat.contains(r.category_id)) {
      throw DomainError("unknown category id " + std::to_string(r.category_id));
    }
    if (!cat.at(r.category_id).code.customized) {
      throw DomainError("category '" + cat.at(r.category_id).code.name + "' is not customized furniture");
    }
  }
  InferResult out;
  out.slots = model.g1_forward(scene);
  out.base = decode_slots(out.slots, scene, cat);
  out.layout = out.base;
  for (const auto& r : requests) {
    RequestOutcome o;
    o.request = r;
    const CategoryCode& label = cat.at(r.category_id).code;
    o.tp1 = model.trans1_forward(out.slots, label);
    o.ls1 = model.trans2_forward(o.tp1);
    o.ls2 = model.g2_forward(o.ls1, r.code);
    bool ambiguous = false;
    if (find_target_instance(out.layout, r.category_id, &ambiguous)) {
      out.layout = compose_custom_layout(out.layout, label, o.ls2, r.code);
      o.applied = true;
      if (ambiguous) o.message = "several '" + label.name + "' placed; resized the largest";
    } else {
      o.message = "no '" + label.name + "' in the generated layout";
    }
    out.outcomes.push_back(std::move(o));
  }
  return out;
}

}  // namespace cslayout
