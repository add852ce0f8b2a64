// Copyright (C) 2026 The cslayout Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cslayout/dataset.hpp"
#include "cslayout/layout.hpp"
#include "cslayout/raster.hpp"

namespace cslayout {

// JSON forms used by the service and the CLI. Lengths are meters.
//
// scene:  {"room_type": "bedroom", "bounds": [x0, y0, x1, y1],
//          "walls": [{"a": [x, y], "b": [x, y], "thickness": t}],
//          "doors": [[x0, y0, x1, y1]], "windows": [[x0, y0, x1, y1]]}
// layout: {"scene": scene, "furniture": [furniture]}
// furniture: {"category_id", "category", "customized", "x", "y", "length",
//             "width", "height", "orientation", "default_size": [l, w, h],
//             "size_range": [lmin, lmax, wmin, wmax, hmin, hmax]}

nlohmann::json to_json(const RoomScene& s);
nlohmann::json to_json(const FurnitureInstance& f);
nlohmann::json to_json(const Layout& l);
nlohmann::json to_json(const Violation& v);
nlohmann::json to_json(const Palette& p);

/// Throws DataError with a field path on schema violations.
RoomScene scene_from_json(const nlohmann::json& j);
/// Fields omitted from a furniture entry fall back to the catalog entry
/// (default size, range, customized flag); orientation defaults to North.
Layout layout_from_json(const nlohmann::json& j, const Catalog& catalog);

/// A scene or layout file: either the JSON above or a sample record.
Layout read_layout_file(const std::filesystem::path& p, const Catalog& catalog);

}  // namespace cslayout
