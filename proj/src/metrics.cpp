// Copyright (C) 2026 The cslayout Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "cslayout/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>
#include <tuple>

#include <nlohmann/json.hpp>

#include "cslayout/random.hpp"

namespace cslayout {

namespace {

void require_paired(std::size_t a, std::size_t b, const char* who) {
  if (a != b) throw std::invalid_argument(std::string(who) + ": prediction and ground-truth lists differ in length");
}

std::map<int, std::vector<AABB>> boxes_by_category(const Layout& l) {
  std::map<int, std::vector<AABB>> out;
  for (const auto& f : l.furniture) out[f.category.id].push_back(aabb(f));
  return out;
}

// Σ IoU of the greedy max-IoU matching between two box lists.
double greedy_iou_sum(const std::vector<AABB>& gt, const std::vector<AABB>& pred) {
  std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    for (std::size_t j = 0; j < pred.size(); ++j) {
      const double v = iou(gt[i], pred[j]);
      if (v > 0.0) pairs.emplace_back(v, i, j);
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) {
    if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
    return std::tie(std::get<1>(a), std::get<2>(a)) < std::tie(std::get<1>(b), std::get<2>(b));
  });
  std::vector<bool> gt_used(gt.size()), pred_used(pred.size());
  double sum = 0.0;
  for (const auto& [v, i, j] : pairs) {
    if (gt_used[i] || pred_used[j]) continue;
    gt_used[i] = pred_used[j] = true;
    sum += v;
  }
  return sum;
}

}  // namespace

double mode_accuracy(std::span<const Layout> preds, std::span<const Layout> gts) {
  require_paired(preds.size(), gts.size(), "mode_accuracy");
  std::size_t hit = 0, total = 0;
  for (std::size_t p = 0; p < gts.size(); ++p) {
    std::map<int, std::size_t> g, q;
    for (const auto& f : gts[p].furniture) ++g[f.category.id];
    for (const auto& f : preds[p].furniture) ++q[f.category.id];
    for (const auto& [id, n] : g) {
      total += n;
      const auto it = q.find(id);
      if (it != q.end()) hit += std::min(n, it->second);
    }
  }
  return total == 0 ? 1.0 : static_cast<double>(hit) / static_cast<double>(total);
}

double mean_iou(std::span<const Layout> preds, std::span<const Layout> gts) {
  require_paired(preds.size(), gts.size(), "mean_iou");
  double sum = 0.0;
  std::size_t total = 0;
  for (std::size_t p = 0; p < gts.size(); ++p) {
    const auto g = boxes_by_category(gts[p]);
    const auto q = boxes_by_category(preds[p]);
    for (const auto& [id, boxes] : g) {
      total += boxes.size();
      const auto it = q.find(id);
      if (it != q.end()) sum += greedy_iou_sum(boxes, it->second);
    }
  }
  return total == 0 ? 1.0 : sum / static_cast<double>(total);
}

double transfer_accuracy(std::span<const LocalFurniture> preds, std::span<const CategoryCode> gts) {
  require_paired(preds.size(), gts.size(), "transfer_accuracy");
  if (gts.empty()) return 1.0;
  std::size_t hit = 0;
  for (std::size_t i = 0; i < gts.size(); ++i) hit += preds[i].argmax_category() == gts[i].id ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(gts.size());
}

SizeClass size_class_of(SizeCode code) {
  switch (code) {
    case SizeCode::WidthLeft:
    case SizeCode::WidthRight: return SizeClass::WidthDoubled;
    case SizeCode::LengthUp:
    case SizeCode::LengthDown: return SizeClass::LengthDoubled;
    case SizeCode::Default: break;
  }
  return SizeClass::Same;
}

SizeClass classify_size(const DimensionalSize& pred, const DimensionalSize& def, double tol) {
  const auto near = [tol](double ratio, double target) { return std::abs(ratio - target) <= tol * target; };
  const double rw = pred.size.width / def.size.width;
  const double rl = pred.size.length / def.size.length;
  if (near(rw, 2.0) && near(rl, 1.0)) return SizeClass::WidthDoubled;
  if (near(rl, 2.0) && near(rw, 1.0)) return SizeClass::LengthDoubled;
  return SizeClass::Same;
}

double size_accuracy(std::span<const SizePrediction> preds, std::span<const SizeCode> gts, double tol) {
  require_paired(preds.size(), gts.size(), "size_accuracy");
  if (gts.empty()) return 1.0;
  std::size_t hit = 0;
  for (std::size_t i = 0; i < gts.size(); ++i) {
    hit += classify_size(preds[i].predicted, preds[i].default_size, tol) == size_class_of(gts[i]) ? 1 : 0;
  }
  return static_cast<double>(hit) / static_cast<double>(gts.size());
}

// ---------------------------------------------------------------------------
// Predictors

namespace {

DimensionalSize default_of(const Sample& s, const CategoryCode& cat, const Catalog* catalog) {
  if (const auto idx = find_target_instance(s.layout, cat.id)) {
    return to_dimensional(s.layout.furniture[*idx].default_size);
  }
  if (catalog && catalog->contains(cat.id)) return to_dimensional(catalog->at(cat.id).default_size);
  throw DataError(s.id + ": variant targets a category absent from the layout");
}

}  // namespace

SamplePrediction ModelPredictor::predict(const Sample& sample, std::size_t) const {
  SamplePrediction out;
  const SlotGrid slots = model_.g1_forward(sample.layout.scene);
  out.layout = decode_slots(slots, sample.layout.scene, model_.catalog());
  for (const auto& v : sample.variants) {
    VariantPrediction vp;
    vp.tp1 = model_.trans1_forward(slots, v.target_category);
    vp.ls2 = model_.g2_forward(model_.trans2_forward(vp.tp1), v.size_code);
    out.variants.push_back(std::move(vp));
  }
  return out;
}

SamplePrediction OraclePredictor::predict(const Sample& sample, std::size_t) const {
  SamplePrediction out;
  out.layout = sample.layout;
  const std::size_t c = [&] {
    int mx = -1;
    for (const auto& f : sample.layout.furniture) mx = std::max(mx, f.category.id);
    for (const auto& v : sample.variants) mx = std::max(mx, v.target_category.id);
    return static_cast<std::size_t>(mx + 1);
  }();
  for (const auto& v : sample.variants) {
    VariantPrediction vp;
    const auto idx = find_target_instance(sample.layout, v.target_category.id);
    const auto res = find_target_instance(v.result, v.target_category.id);
    if (!idx || !res) throw DataError(sample.id + ": variant targets a category absent from the layout");
    vp.tp1 = local_furniture_of(sample.layout, *idx, c);
    vp.ls2 = to_dimensional(v.result.furniture[*res].size);
    out.variants.push_back(std::move(vp));
  }
  return out;
}

SamplePrediction RandomPlacementPredictor::predict(const Sample& sample, std::size_t index) const {
  Rng rng(mix_seed(seed_, index));
  SamplePrediction out;
  out.layout.scene = sample.layout.scene;
  const AABB& b = sample.layout.scene.bounds;
  const auto n = rng.uniform_int(2, 6);
  const auto c = static_cast<std::int64_t>(catalog_.size());
  for (std::int64_t i = 0; i < n; ++i) {
    const int id = static_cast<int>(rng.uniform_int(0, c - 1));
    const auto facing = static_cast<Orientation>(rng.uniform_int(0, kOrientationCount - 1));
    const Point2 p{rng.uniform(b.x_min, b.x_max), rng.uniform(b.y_min, b.y_max)};
    out.layout.furniture.push_back(catalog_.make_instance(id, p, facing));
  }
  const std::vector<int> custom = catalog_.customized_ids();
  for (const auto& v : sample.variants) {
    VariantPrediction vp;
    const int guess = custom.at(static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(custom.size()) - 1)));
    vp.tp1.size = to_dimensional(catalog_.at(guess).default_size).size;
    vp.tp1.location = {rng.uniform(), rng.uniform()};
    vp.tp1.category.assign(catalog_.size(), 0.0);
    vp.tp1.category[static_cast<std::size_t>(guess)] = 1.0;
    const auto code = kAllSizeCodes[static_cast<std::size_t>(rng.uniform_int(0, kSizeCodeCount - 1))];
    DimensionalSize d = default_of(sample, v.target_category, &catalog_);
    if (size_class_of(code) == SizeClass::WidthDoubled) d.size.width *= 2.0;
    if (size_class_of(code) == SizeClass::LengthDoubled) d.size.length *= 2.0;
    vp.ls2 = d;
    out.variants.push_back(std::move(vp));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

struct Collected {
  std::vector<Layout> pred, gt;
  std::vector<LocalFurniture> tp1;
  std::vector<CategoryCode> categories;
  std::vector<SizePrediction> sizes;
  std::vector<SizeCode> codes;
};

struct Scores {
  double mode, iou, transfer, size;
};

Scores score(const Collected& c, double tol) {
  return {mode_accuracy(c.pred, c.gt), mean_iou(c.pred, c.gt), transfer_accuracy(c.tp1, c.categories),
          size_accuracy(c.sizes, c.codes, tol)};
}

MetricStat stat(double pooled, const std::vector<double>& per_batch) {
  MetricStat s;
  s.value = pooled;
  double m = 0.0;
  for (double v : per_batch) m += v;
  m /= static_cast<double>(per_batch.size());
  double var = 0.0;
  for (double v : per_batch) var += (v - m) * (v - m);
  s.mean = m;
  s.std = std::sqrt(var / static_cast<double>(per_batch.size()));
  return s;
}

void append(Collected& dst, const Collected& src, std::size_t i, const std::vector<std::size_t>& var_begin) {
  dst.pred.push_back(src.pred[i]);
  dst.gt.push_back(src.gt[i]);
  for (std::size_t v = var_begin[i]; v < var_begin[i + 1]; ++v) {
    dst.tp1.push_back(src.tp1[v]);
    dst.categories.push_back(src.categories[v]);
    dst.sizes.push_back(src.sizes[v]);
    dst.codes.push_back(src.codes[v]);
  }
}

ReportRow make_row(const std::string& name, const std::vector<std::size_t>& members, const Collected& all,
                   const std::vector<std::size_t>& var_begin, const EvalConfig& cfg) {
  ReportRow row;
  row.room_type = name;
  row.samples = members.size();
  Collected pooled;
  std::vector<double> mode, iou, transfer, size;
  for (std::size_t start = 0; start < members.size(); start += cfg.batch_size) {
    Collected batch;
    const std::size_t end = std::min(members.size(), start + cfg.batch_size);
    for (std::size_t m = start; m < end; ++m) {
      append(batch, all, members[m], var_begin);
      append(pooled, all, members[m], var_begin);
    }
    const Scores s = score(batch, cfg.size_tolerance);
    mode.push_back(s.mode);
    iou.push_back(s.iou);
    transfer.push_back(s.transfer);
    size.push_back(s.size);
  }
  row.batches = mode.size();
  row.variants = pooled.codes.size();
  const Scores p = score(pooled, cfg.size_tolerance);
  row.mode = stat(p.mode, mode);
  row.mean_iou = stat(p.iou, iou);
  row.transfer = stat(p.transfer, transfer);
  row.size = stat(p.size, size);
  return row;
}

}  // namespace

EvalReport evaluate(const Predictor& predictor, const Corpus& test, const EvalConfig& cfg) {
  if (test.samples.empty()) throw DataError("evaluate: empty test corpus");
  if (cfg.batch_size == 0) throw std::invalid_argument("evaluate: batch size must be positive");
  Collected all;
  std::vector<std::size_t> var_begin{0};
  const Catalog* catalog = test.catalog.empty() ? nullptr : &test.catalog;
  for (std::size_t i = 0; i < test.samples.size(); ++i) {
    const Sample& s = test.samples[i];
    SamplePrediction p = predictor.predict(s, i);
    if (p.variants.size() != s.variants.size()) {
      throw std::logic_error("evaluate: predictor returned the wrong number of variants");
    }
    all.pred.push_back(std::move(p.layout));
    all.gt.push_back(s.layout);
    for (std::size_t v = 0; v < s.variants.size(); ++v) {
      const LayoutVariant& gv = s.variants[v];
      all.tp1.push_back(std::move(p.variants[v].tp1));
      all.categories.push_back(gv.target_category);
      all.sizes.push_back({p.variants[v].ls2, default_of(s, gv.target_category, catalog)});
      all.codes.push_back(gv.size_code);
    }
    var_begin.push_back(all.codes.size());
  }

  EvalReport report;
  report.predictor = predictor.name();
  report.batch_size = cfg.batch_size;
  std::vector<std::size_t> everyone;
  for (RoomType t : kAllRoomTypes) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < test.samples.size(); ++i) {
      if (test.samples[i].layout.scene.room_type == t) members.push_back(i);
    }
    if (!members.empty()) report.rows.push_back(make_row(std::string(to_string(t)), members, all, var_begin, cfg));
  }
  for (std::size_t i = 0; i < test.samples.size(); ++i) everyone.push_back(i);
  report.overall = make_row("overall", everyone, all, var_begin, cfg);
  return report;
}

namespace {

nlohmann::json stat_json(const MetricStat& s) { return {{"value", s.value}, {"mean", s.mean}, {"std", s.std}}; }

nlohmann::json row_json(const ReportRow& r) {
  return {{"room_type", r.room_type}, {"samples", r.samples},         {"variants", r.variants},
          {"batches", r.batches},     {"mode", stat_json(r.mode)},     {"mean_iou", stat_json(r.mean_iou)},
          {"transfer", stat_json(r.transfer)}, {"size", stat_json(r.size)}};
}

}  // namespace

nlohmann::json EvalReport::to_json() const {
  nlohmann::json rows_json = nlohmann::json::array();
  for (const auto& r : rows) rows_json.push_back(row_json(r));
  return {{"format", "cslayout-eval"}, {"version", 1},       {"predictor", predictor},
          {"batch_size", batch_size},  {"rows", rows_json},  {"overall", row_json(overall)}};
}

std::string EvalReport::to_table() const {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-14s %7s  %-15s %-15s %-15s %-15s\n", "room type", "samples", "Mode", "mean IoU",
                "Transfer", "Size");
  out += buf;
  const auto cell = [](const MetricStat& s) {
    char c[32];
    std::snprintf(c, sizeof c, "%.3f+-%.3f", s.mean, s.std);
    return std::string(c);
  };
  const auto line = [&](const ReportRow& r) {
    std::snprintf(buf, sizeof buf, "%-14s %7zu  %-15s %-15s %-15s %-15s\n", r.room_type.c_str(), r.samples,
                  cell(r.mode).c_str(), cell(r.mean_iou).c_str(), cell(r.transfer).c_str(), cell(r.size).c_str());
    out += buf;
  };
  for (const auto& r : rows) line(r);
  line(overall);
  return out;
}

}  // namespace cslayout
