// Copyright (C) 2026 The cslayout Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

#include "cslayout/dataset.hpp"
#include "cslayout/raster.hpp"
#include "cslayout/random.hpp"
#include "support/gradcheck.hpp"

namespace cslayout::testing {

/// Decodes the hard raster of `l` and compares each category mask with the
/// category's AABBs under a 1-pixel band: decoded pixels lie within one pixel
/// of a box, and pixels more than one pixel inside a box are decoded unless
/// a later item of another category covers them. Empty on success.
inline std::string check_decode(const Layout& l, const RenderConfig& cfg) {
  const RenderedImage img = rasterize_layout(l, cfg);
  const auto masks = decode_category_masks(img, cfg.palette);
  const AABB& b = l.scene.bounds;
  // Letterboxed, centered mapping written out independently.
  const double scale = std::min(cfg.width / b.width(), cfg.height / b.height());
  const double ox = 0.5 * (cfg.width - b.width() * scale), oy = 0.5 * (cfg.height - b.height() * scale);
  const double px = 1.0 / scale;
  const auto inside = [](const AABB& a, double x, double y, double grow) {
    return x >= a.x_min - grow && x < a.x_max + grow && y >= a.y_min - grow && y < a.y_max + grow;
  };
  std::vector<AABB> boxes;
  for (const auto& f : l.furniture) boxes.push_back(aabb(f));
  std::ostringstream err;
  int problems = 0;
  for (int r = 0; r < cfg.height; ++r) {
    const double y = b.y_max - (r + 0.5 - oy) / scale;
    for (int c = 0; c < cfg.width; ++c) {
      const double x = b.x_min + (c + 0.5 - ox) / scale;
      const std::size_t at = static_cast<std::size_t>(r) * cfg.width + c;
      std::vector<int> ids;
      for (const auto& [id, m] : masks) {
        if (m[at]) ids.push_back(id);
      }
      if (ids.size() > 1) ++problems;
      for (int id : ids) {
        bool near = false;
        for (std::size_t i = 0; i < boxes.size(); ++i) {
          near = near || (l.furniture[i].category.id == id && inside(boxes[i], x, y, px));
        }
        if (!near && problems++ < 3) err << "pixel (" << r << "," << c << ") decoded as " << id << " far from its boxes; ";
      }
      for (std::size_t i = 0; i < boxes.size(); ++i) {
        if (!inside(boxes[i], x, y, -px)) continue;
        const int id = l.furniture[i].category.id;
        bool covered = false;
        for (std::size_t j = i + 1; j < boxes.size(); ++j) {
          covered = covered || (l.furniture[j].category.id != id && inside(boxes[j], x, y, px));
        }
        if (covered) continue;
        const auto it = masks.find(id);
        if ((it == masks.end() || !it->second[at]) && problems++ < 3) {
          err << "pixel (" << r << "," << c << ") inside item " << i << " not decoded; ";
        }
      }
    }
  }
  return problems == 0 ? "" : err.str() + std::to_string(problems) + " problem pixels";
}

/// A room with random non-overlapping furniture of random categories.
inline Layout random_render_layout(Rng& rng, const Catalog& cat) {
  Layout l;
  const double w = rng.uniform(2.5, 8.0), h = rng.uniform(2.5, 8.0);
  l.scene.bounds = {0, 0, w, h};
  l.scene.walls = {{{0, 0.05}, {w, 0.05}, 0.1}, {{0.05, 0}, {0.05, h}, 0.1}};
  l.scene.doors = {{0.5, 0, 1.3, 0.1}};
  const auto n = rng.uniform_int(1, 8);
  for (int tries = 0; tries < 200 && static_cast<std::int64_t>(l.furniture.size()) < n; ++tries) {
    const int id = static_cast<int>(rng.uniform_int(0, static_cast<std::int64_t>(cat.size()) - 1));
    FurnitureInstance f = cat.make_instance(id, {rng.uniform(0, w), rng.uniform(0, h)},
                                            static_cast<Orientation>(rng.uniform_int(0, 3)));
    f.size.length *= rng.uniform(0.5, 1.2);
    f.size.width *= rng.uniform(0.5, 1.2);
    const AABB fb = aabb(f);
    if (fb.x_min < 0.1 || fb.y_min < 0.1 || fb.x_max > w || fb.y_max > h) continue;
    const bool clash = std::any_of(l.furniture.begin(), l.furniture.end(),
                                   [&](const FurnitureInstance& g) { return intersection_area(aabb(g), fb) > 0; });
    if (!clash) l.furniture.push_back(f);
  }
  return l;
}

/// Gradient check of soft_rasterize_backward on a random small instance:
/// the scalar is Σ weights * image.
inline GradCheck check_soft_raster_gradient(Rng& rng, std::size_t num_slots, std::size_t num_categories, int size,
                                            double softness) {
  RenderConfig cfg;
  cfg.height = size;
  cfg.width = size + 2;
  cfg.softness = softness;
  const AABB bounds{0, 0, rng.uniform(2, 4), rng.uniform(2, 4)};
  RenderedImage bg(cfg.height, cfg.width, {255, 255, 255});
  for (double& v : bg.pixels) v = rng.uniform();
  const std::size_t stride = num_categories + 9;
  const auto o = [&] { return std::array<std::size_t, 7>{0, 1, 1 + num_categories, 2 + num_categories,
                                                         3 + num_categories, 4 + num_categories, 5 + num_categories}; }();
  std::vector<double> flat(num_slots * stride);
  for (std::size_t k = 0; k < num_slots; ++k) {
    double* row = flat.data() + k * stride;
    row[o[0]] = rng.uniform(-2, 2);
    for (std::size_t j = 0; j < num_categories; ++j) row[o[1] + j] = rng.uniform(-2, 2);
    row[o[2]] = rng.uniform(0.2, 0.8);
    row[o[3]] = rng.uniform(0.2, 0.8);
    row[o[4]] = rng.uniform(0.2, 0.6);
    row[o[5]] = rng.uniform(0.2, 0.6);
    for (std::size_t j = 0; j < 4; ++j) row[o[6] + j] = rng.uniform(-1, 1);
  }
  std::vector<double> weights(bg.pixels.size());
  for (double& v : weights) v = rng.uniform(-1, 1);
  const auto scalar = [&](const std::vector<double>& f) {
    const SoftRasterInput in{f, num_slots, num_categories, &bg, bounds};
    const RenderedImage img = soft_rasterize(in, cfg);
    double s = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) s += weights[i] * img.pixels[i];
    return s;
  };
  GradCheck out;
  out.analytic.assign(flat.size(), 0.0);
  const SoftRasterInput in{flat, num_slots, num_categories, &bg, bounds};
  soft_rasterize_backward(in, cfg, weights, out.analytic);
  const double eps = 1e-6;
  std::vector<double> fp = flat;
  for (std::size_t i = 0; i < flat.size(); ++i) {
    fp[i] = flat[i] + eps;
    const double hi = scalar(fp);
    fp[i] = flat[i] - eps;
    const double lo = scalar(fp);
    fp[i] = flat[i];
    out.numeric.push_back((hi - lo) / (2 * eps));
  }
  out.relative_error = relative_error(out.analytic, out.numeric);
  return out;
}

}  // namespace cslayout::testing
