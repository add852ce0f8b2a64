// Copyright (C) 2026 The cslayout Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "cslayout/dataset.hpp"
#include "cslayout/domains.hpp"
#include "cslayout/nn/modules.hpp"
#include "cslayout/nn/tensor.hpp"
#include "cslayout/raster.hpp"
#include "cslayout/slots.hpp"

namespace cslayout {

/// Architecture hyperparameters. All five modules are built from these.
struct ModelConfig {
  std::size_t num_slots = kDefaultSlotCount;
  std::size_t num_categories = 0;  // taken from the catalog
  int resolution = 32;             // model-side raster size, a multiple of 8
  double softness = 0.1;           // meters, soft raster edge falloff
  std::vector<std::size_t> g1_channels{16, 32, 32};
  std::size_t g1_hidden = 256;
  std::vector<std::size_t> d1_channels{16, 32, 32};
  std::vector<std::size_t> mlp_hidden{256, 256};
  std::uint64_t seed = 0;

  RenderConfig render_config() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Per opening kind (first door, first window): center normalized to the
/// bounds, then a one-hot of the nearest bounds edge (bottom, right, top,
/// left). All zero when the scene has no such opening.
inline constexpr std::size_t kOpeningFeatureCount = 6;
/// Room-type one-hot, bounds extents, door block, window block; the non-image
/// scene input of g1.
inline constexpr std::size_t kSceneFeatureCount = kRoomTypeCount + 2 + 2 * kOpeningFeatureCount;
/// Meters that map bounds extents to feature scale.
inline constexpr double kSceneFeatureScale = 8.0;
std::vector<double> scene_features(const RoomScene& scene);

/// Image [H,W,3] -> CHW order for the conv stacks.
std::vector<double> to_chw(const RenderedImage& img);

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// g1, d1, trans1, trans2, g2 and their parameters.
class Model {
 public:
  Model(ModelConfig cfg, Catalog catalog);
  // Copies would alias the parameter tensors.
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;
  Model(Model&&) = default;
  Model& operator=(Model&&) = default;

  const ModelConfig& config() const { return cfg_; }
  const Catalog& catalog() const { return catalog_; }
  std::size_t slot_stride() const { return SlotGrid::stride(cfg_.num_categories); }
  std::size_t slot_width() const { return cfg_.num_slots * slot_stride(); }

  nn::ParamSet& params() { return params_; }
  const nn::ParamSet& params() const { return params_; }
  /// Parameter subsets by module, in ParamSet order.
  std::vector<nn::Tensor> discriminator_params() const;
  std::vector<nn::Tensor> generator_params() const;

  /// g1: images [B,3,R,R] (CHW, from the scene raster at config resolution)
  /// and scene features [B, kSceneFeatureCount] -> flat slots [B, K*stride].
  /// Center and extent columns are in (0,1); the rest are logits.
  nn::Tensor g1(const nn::Tensor& images, const nn::Tensor& scene) const;
  /// d1: images [B,3,R,R] -> logits [B,1].
  nn::Tensor d1(const nn::Tensor& images) const;

  /// The layout encoding trans1 consumes: per slot sigmoid(presence),
  /// softmax(category), center, extent, softmax(orientation).
  nn::Tensor layout_features(const nn::Tensor& flat) const;

  /// trans1: flat slots [R, K*stride] and one-hot label_1 [R, C] ->
  /// raw [R, 5 + C] = [log size (3), location logits (2), category logits].
  nn::Tensor trans1(const nn::Tensor& flat, const nn::Tensor& label1) const;
  /// trans2: trans1 raw output -> log ls1 [R,3].
  nn::Tensor trans2(const nn::Tensor& t1_raw) const;
  /// g2: log ls1 [R,3] and one-hot label_2 [R,5] -> log ls2 [R,3].
  nn::Tensor g2(const nn::Tensor& log_ls1, const nn::Tensor& label2) const;

  /// Helpers decoding the raw trans1 output.
  static nn::Tensor tp1_size(const nn::Tensor& t1_raw);
  static nn::Tensor tp1_location(const nn::Tensor& t1_raw);
  nn::Tensor tp1_category_logits(const nn::Tensor& t1_raw) const;

  /// Scene raster fed to g1, at model resolution.
  RenderedImage scene_image(const RoomScene& scene) const;

  /// Domain-struct wrappers (inference mode, no graph).
  SlotGrid g1_forward(const RoomScene& scene) const;
  SlotGrid g1_forward(const RenderedImage& image, const RoomScene& scene) const;
  double d1_forward(const RenderedImage& image) const;
  LocalFurniture trans1_forward(const SlotGrid& slots, const CategoryCode& label_1) const;
  DimensionalSize trans2_forward(const LocalFurniture& tp1) const;
  DimensionalSize g2_forward(const DimensionalSize& ls1, SizeCode label_2) const;

  /// Versioned binary container; see README for the layout.
  void save(const std::filesystem::path& path) const;
  static Model load(const std::filesystem::path& path);

  static constexpr char kMagic[8] = {'C', 'S', 'L', 'C', 'K', 'P', 'T', '1'};
  static constexpr std::uint32_t kVersion = 1;

 private:
  void build();
  void check_image(const nn::Tensor& images, const char* who) const;

  ModelConfig cfg_;
  Catalog catalog_;
  nn::ParamSet params_;
  std::size_t d1_param_begin_ = 0, d1_param_end_ = 0;

  std::vector<nn::Conv2d> g1_convs_;
  nn::Mlp g1_head_;
  std::vector<nn::Conv2d> d1_convs_;
  nn::Linear d1_out_;
  nn::Mlp trans1_, trans2_, g2_;
};

/// Differentiable batch render: flat slots [B, K*stride] over per-sample
/// backgrounds -> images [B,3,H,W] in CHW order.
nn::Tensor soft_render(const nn::Tensor& flat, std::size_t num_slots, std::size_t num_categories,
                       const std::vector<const RenderedImage*>& backgrounds,
                       const std::vector<AABB>& bounds, const RenderConfig& cfg);

/// One-hot rows.
nn::Tensor one_hot(std::span<const std::size_t> labels, std::size_t n);

}  // namespace cslayout
