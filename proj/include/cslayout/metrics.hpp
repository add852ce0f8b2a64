// Copyright (C) 2026 The cslayout Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cslayout/dataset.hpp"
#include "cslayout/domains.hpp"
#include "cslayout/layout.hpp"
#include "cslayout/model.hpp"

namespace cslayout {

/// Pooled over pairs: Σ per-category min(#pred, #gt) / Σ #gt. 1 when the
/// ground truth holds no furniture.
double mode_accuracy(std::span<const Layout> preds, std::span<const Layout> gts);

/// Within each category, pairs are matched greedily by descending IoU.
/// Σ matched IoU / Σ #gt, unmatched ground truth counting 0; 1 when the
/// ground truth holds no furniture.
double mean_iou(std::span<const Layout> preds, std::span<const Layout> gts);

/// Fraction of samples whose argmax category equals the ground truth.
double transfer_accuracy(std::span<const LocalFurniture> preds, std::span<const CategoryCode> gts);

/// What a dimensional size reveals about its size code: left/right and
/// up/down are indistinguishable without a position.
enum class SizeClass { Same, WidthDoubled, LengthDoubled };

SizeClass size_class_of(SizeCode code);

/// Per-axis ratio to the default compared against 1 and 2 with relative
/// tolerance `tol`. Anything that is not a clean single-axis doubling, or a
/// clean identity, is ambiguous and reported as Same.
SizeClass classify_size(const DimensionalSize& pred, const DimensionalSize& default_size, double tol = 0.1);

struct SizePrediction {
  DimensionalSize predicted;
  DimensionalSize default_size;
};

double size_accuracy(std::span<const SizePrediction> preds, std::span<const SizeCode> gts, double tol = 0.1);

/// Everything the metrics need from one sample.
struct VariantPrediction {
  LocalFurniture tp1;
  DimensionalSize ls2;
};

struct SamplePrediction {
  Layout layout;                            // default-size layout
  std::vector<VariantPrediction> variants;  // one per sample variant
};

class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual std::string name() const = 0;
  /// `index` is the sample's position in the evaluated corpus.
  virtual SamplePrediction predict(const Sample& sample, std::size_t index) const = 0;
};

/// Runs the trained pipeline.
class ModelPredictor : public Predictor {
 public:
  explicit ModelPredictor(const Model& model) : model_(model) {}
  std::string name() const override { return "model"; }
  SamplePrediction predict(const Sample& sample, std::size_t index) const override;

 private:
  const Model& model_;
};

/// Returns the ground truth.
class OraclePredictor : public Predictor {
 public:
  std::string name() const override { return "oracle"; }
  SamplePrediction predict(const Sample& sample, std::size_t index) const override;
};

/// 2 to 6 random catalog items at uniform positions and facings, a uniform
/// customized category guess, and a uniform size code applied to the
/// default size. Deterministic in (seed, index).
class RandomPlacementPredictor : public Predictor {
 public:
  RandomPlacementPredictor(const Catalog& catalog, std::uint64_t seed) : catalog_(catalog), seed_(seed) {}
  std::string name() const override { return "random"; }
  SamplePrediction predict(const Sample& sample, std::size_t index) const override;

 private:
  const Catalog& catalog_;
  std::uint64_t seed_;
};

struct MetricStat {
  double value = 0.0;  // pooled over every sample of the row
  double mean = 0.0;   // over evaluation batches
  double std = 0.0;    // population standard deviation over batches
};

struct ReportRow {
  std::string room_type;  // "overall" for the pooled row
  std::size_t samples = 0;
  std::size_t variants = 0;
  std::size_t batches = 0;
  MetricStat mode, mean_iou, transfer, size;
};

struct EvalReport {
  std::string predictor;
  std::size_t batch_size = 100;
  std::vector<ReportRow> rows;  // room types present, in enum order
  ReportRow overall;

  nlohmann::json to_json() const;
  /// Fixed-width text table, one line per room type plus the overall row.
  std::string to_table() const;
};

struct EvalConfig {
  std::size_t batch_size = 100;
  double size_tolerance = 0.1;
};

/// Throws DataError on an empty corpus.
EvalReport evaluate(const Predictor& predictor, const Corpus& test, const EvalConfig& cfg = {});

}  // namespace cslayout
