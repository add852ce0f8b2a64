// Copyright (C) 2026 The cslayout Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cslayout/layout.hpp"
#include "cslayout/slots.hpp"

namespace cslayout {

struct Rgb8 {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb8&, const Rgb8&) = default;
  friend auto operator<=>(const Rgb8&, const Rgb8&) = default;
};

/// Flat-color palette. Scene elements and categories get distinct 8-bit
/// colors so a hard raster can be decoded back into element masks.
class Palette {
 public:
  static constexpr std::size_t kMaxCategories = 32;

  /// The fixed palette: white background, black walls, then door, window
  /// and up to kMaxCategories category colors.
  static Palette standard();

  Rgb8 background() const { return background_; }
  Rgb8 wall() const { return wall_; }
  Rgb8 door() const { return door_; }
  Rgb8 window() const { return window_; }
  Rgb8 category(int id) const { return categories_.at(static_cast<std::size_t>(id)); }
  std::size_t num_categories() const { return categories_.size(); }

  /// Category id for an exact category color.
  std::optional<int> category_of(Rgb8 c) const;

  /// {"background":[r,g,b], "wall":..., "door":..., "window":..., "categories":[[r,g,b],...]}
  std::string to_json() const;
  /// SHA-256 of to_json(), lowercase hex.
  std::string hash() const;

  friend bool operator==(const Palette&, const Palette&) = default;

 private:
  Rgb8 background_, wall_, door_, window_;
  std::vector<Rgb8> categories_;
  std::map<Rgb8, int> inverse_;
};

struct RenderConfig {
  int height = 256;
  int width = 256;
  double softness = 0.02;  // meters, sigmoid edge falloff of soft rasterization
  Palette palette = Palette::standard();
};

/// H×W×3 intensities in [0,1], row-major, channel-interleaved. Row 0 is the
/// top of the plan (largest y).
struct RenderedImage {
  int height = 0;
  int width = 0;
  std::vector<double> pixels;

  RenderedImage() = default;
  RenderedImage(int h, int w, Rgb8 fill);

  double& at(int row, int col, int ch) { return pixels[(static_cast<std::size_t>(row) * width + col) * 3 + ch]; }
  double at(int row, int col, int ch) const {
    return pixels[(static_cast<std::size_t>(row) * width + col) * 3 + ch];
  }
  Rgb8 rgb8(int row, int col) const;

  friend bool operator==(const RenderedImage&, const RenderedImage&) = default;
};

/// World-to-pixel mapping preserving aspect ratio, letterboxed and centered.
struct PixelMapping {
  double scale = 1.0;  // pixels per meter
  double offset_x = 0.0;
  double offset_y = 0.0;
  AABB bounds;
  int height = 0;
  int width = 0;

  PixelMapping(const AABB& bounds, int height, int width);

  double col_of(double x) const { return offset_x + (x - bounds.x_min) * scale; }
  double row_of(double y) const { return offset_y + (bounds.y_max - y) * scale; }
  /// World coordinates of a pixel center.
  double x_of_col(int c) const { return bounds.x_min + (c + 0.5 - offset_x) / scale; }
  double y_of_row(int r) const { return bounds.y_max - (r + 0.5 - offset_y) / scale; }
};

/// Throws DomainError for bounds without area or a non-positive image size.
RenderedImage rasterize_scene(const RoomScene& scene, const RenderConfig& cfg);

/// Scene raster with furniture AABBs filled in list order.
RenderedImage rasterize_layout(const Layout& layout, const RenderConfig& cfg);

/// Per-category occupancy masks recovered through the inverse palette.
std::map<int, std::vector<std::uint8_t>> decode_category_masks(const RenderedImage& img,
                                                               const Palette& palette);

/// Differentiable rasterization of a slot grid over a scene background.
/// `flat` uses the SlotGrid flat layout; see soft_rasterize_backward.
struct SoftRasterInput {
  std::span<const double> flat;
  std::size_t num_slots = 0;
  std::size_t num_categories = 0;
  const RenderedImage* background = nullptr;
  AABB bounds;
};

RenderedImage soft_rasterize(const SoftRasterInput& in, const RenderConfig& cfg);
RenderedImage soft_rasterize(const SlotGrid& slots, const RoomScene& scene, const RenderConfig& cfg);

/// Vector-Jacobian product: gradient of sum(grad_out * image) with respect
/// to the flat slot parameters, accumulated into `grad_flat`.
void soft_rasterize_backward(const SoftRasterInput& in, const RenderConfig& cfg,
                             std::span<const double> grad_out, std::span<double> grad_flat);

/// 8-bit RGB PNG encoding of an image.
std::vector<std::uint8_t> encode_png(const RenderedImage& img);
/// Decodes an 8-bit RGB (or RGBA/gray, converted) PNG. Throws std::runtime_error.
RenderedImage decode_png(std::span<const std::uint8_t> bytes);

}  // namespace cslayout
