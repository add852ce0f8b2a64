// Copyright (C) 2026 The cslayout Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "cslayout/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "cslayout/losses.hpp"
#include "cslayout/nn/ops.hpp"

namespace cslayout {

namespace ops = cslayout::nn;
using nn::Tensor;

namespace {

struct VariantRow {
  std::size_t sample = 0;
  std::size_t label1 = 0;
  std::size_t code = 0;
  std::array<double, 5> tp1{};  // size (3), location (2)
  std::array<double, 3> ls1{};
  std::array<double, 3> ls2{};
};

struct Prepared {
  std::vector<RenderedImage> backgrounds;
  std::vector<std::vector<double>> images;  // CHW
  std::vector<std::vector<double>> real;    // CHW soft render of the encoded ground truth
  std::vector<std::vector<double>> scene;
  std::vector<AABB> bounds;
  std::vector<std::vector<SlotTarget>> targets;
  std::vector<std::vector<VariantRow>> variants;
};

Prepared prepare(const Corpus& corpus, const Model& model) {
  const ModelConfig& mc = model.config();
  const RenderConfig rc = mc.render_config();
  Prepared p;
  const std::size_t n = corpus.samples.size();
  p.backgrounds.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Sample& s = corpus.samples[i];
    const Layout& base = s.layout;
    if (base.furniture.size() > mc.num_slots) {
      throw DataError(s.id + ": " + std::to_string(base.furniture.size()) + " furniture exceed " +
                      std::to_string(mc.num_slots) + " slots");
    }
    p.backgrounds.push_back(model.scene_image(base.scene));
    p.images.push_back(to_chw(p.backgrounds.back()));
    const SlotGrid enc = encode_layout(base, mc.num_slots, mc.num_categories);
    const std::vector<double> flat = enc.flatten();
    p.real.push_back(to_chw(soft_rasterize(
        SoftRasterInput{flat, mc.num_slots, mc.num_categories, &p.backgrounds.back(), base.scene.bounds}, rc)));
    p.scene.push_back(scene_features(base.scene));
    p.bounds.push_back(base.scene.bounds);
    p.targets.push_back(slot_targets(base, mc.num_slots));

    std::vector<VariantRow> rows;
    for (const LayoutVariant& v : s.variants) {
      const auto idx = find_target_instance(base, v.target_category.id);
      const auto res_idx = find_target_instance(v.result, v.target_category.id);
      if (!idx || !res_idx) throw DataError(s.id + ": variant targets a category absent from the layout");
      VariantRow r;
      r.sample = i;
      r.label1 = static_cast<std::size_t>(v.target_category.id);
      r.code = static_cast<std::size_t>(v.size_code);
      const LocalFurniture tp = local_furniture_of(base, *idx, mc.num_categories);
      r.tp1 = {tp.size.length, tp.size.width, tp.size.height, tp.location.x, tp.location.y};
      r.ls1 = {tp.size.length, tp.size.width, tp.size.height};
      const Size3 g = to_dimensional(v.result.furniture[*res_idx].size).size;
      r.ls2 = {g.length, g.width, g.height};
      rows.push_back(r);
    }
    p.variants.push_back(std::move(rows));
  }
  return p;
}

class BatchSampler {
 public:
  BatchSampler(std::size_t n, std::size_t batch, std::uint64_t seed)
      : n_(n), batch_(batch), rng_(mix_seed(seed, 0x62617463ULL)) {}

  std::vector<std::size_t> next() {
    std::vector<std::size_t> out;
    if (batch_ >= n_) {
      for (std::size_t i = 0; i < n_; ++i) out.push_back(i);
      return out;
    }
    while (out.size() < batch_) {
      if (pos_ == order_.size()) refill();
      out.push_back(order_[pos_++]);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

 private:
  void refill() {
    order_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) order_[i] = i;
    rng_.shuffle(order_);
    pos_ = 0;
  }

  std::size_t n_, batch_;
  Rng rng_;
  std::vector<std::size_t> order_;
  std::size_t pos_ = 0;
};

Tensor stack(const std::vector<std::vector<double>>& rows, const std::vector<std::size_t>& idx,
             nn::Shape item_shape) {
  const std::size_t per = nn::numel(item_shape);
  std::vector<double> v;
  v.reserve(idx.size() * per);
  for (std::size_t i : idx) v.insert(v.end(), rows[i].begin(), rows[i].end());
  nn::Shape shape{idx.size()};
  shape.insert(shape.end(), item_shape.begin(), item_shape.end());
  return Tensor::constant(std::move(shape), std::move(v));
}

void check_finite(double v, const char* what, std::size_t step) {
  if (!std::isfinite(v)) {
    throw TrainingError("training diverged at step " + std::to_string(step) + ": " + what + " = " +
                        std::to_string(v));
  }
}

}  // namespace

TrainResult train(const Corpus& corpus, const TrainConfig& cfg, const TrainCallback& on_step) {
  if (corpus.samples.empty()) throw DataError("train: empty corpus");
  if (!(cfg.lr >= 0.0) || !(cfg.lambda_adv >= 0.0) || !(cfg.alpha >= 0.0) || cfg.batch_size == 0) {
    throw std::invalid_argument("train: weights and learning rate must be non-negative, batch positive");
  }
  bool any_variant = false;
  for (const auto& s : corpus.samples) any_variant = any_variant || !s.variants.empty();
  if (!any_variant) throw DataError("train: corpus has no layout variants");

  ModelConfig mc = cfg.model;
  mc.seed = cfg.seed;
  TrainResult result{Model(mc, corpus.catalog), {}};
  Model& model = result.model;
  const std::size_t k = model.config().num_slots, c = model.config().num_categories;
  const auto r = static_cast<std::size_t>(model.config().resolution);
  const RenderConfig rc = model.config().render_config();
  const Prepared data = prepare(corpus, model);

  nn::Adam opt_d(model.discriminator_params(), {cfg.lr});
  nn::Adam opt_g(model.generator_params(), {cfg.lr});
  BatchSampler sampler(corpus.samples.size(), cfg.batch_size, cfg.seed);

  for (std::size_t step = 0; step < cfg.steps; ++step) {
    const std::vector<std::size_t> idx = sampler.next();
    const Tensor images = stack(data.images, idx, {3, r, r});
    const Tensor real = stack(data.real, idx, {3, r, r});
    const Tensor scene = stack(data.scene, idx, {kSceneFeatureCount});
    std::vector<const RenderedImage*> bgs;
    std::vector<AABB> bounds;
    std::vector<std::vector<SlotTarget>> targets;
    std::vector<const VariantRow*> rows;
    std::vector<std::size_t> row_sample;
    for (std::size_t b = 0; b < idx.size(); ++b) {
      bgs.push_back(&data.backgrounds[idx[b]]);
      bounds.push_back(data.bounds[idx[b]]);
      targets.push_back(data.targets[idx[b]]);
      for (const VariantRow& v : data.variants[idx[b]]) {
        rows.push_back(&v);
        row_sample.push_back(b);
      }
    }

    LossRecord rec;
    rec.step = step;
    model.params().zero_grad();

    const Tensor flat = model.g1(images, scene);
    const Tensor fake = soft_render(flat, k, c, bgs, bounds, rc);

    // (a) discriminator on detached fakes.
    {
      const Tensor ld = ops::discriminator_loss(model.d1(real), model.d1(fake.detach()));
      rec.L_D = ld.item();
      check_finite(rec.L_D, "L_D", step);
      ld.backward();
      opt_d.step();
      model.params().zero_grad();
    }

    // (b) joint generator / transfer / size step.
    const Tensor l_adv = ops::adversarial_loss(model.d1(fake));
    const Tensor l_g = ops::slot_loss(flat, k, c, targets);
    const Tensor l_G = ops::weighted_sum({l_g, l_adv}, {1.0, cfg.lambda_adv});
    std::vector<Tensor> parts{l_G};
    std::vector<double> weights{1.0};
    if (!rows.empty()) {
      std::vector<std::size_t> lab1, lab2;
      std::vector<double> gt_tp1, gt_ls1, gt_ls2;
      for (const VariantRow* v : rows) {
        lab1.push_back(v->label1);
        lab2.push_back(v->code);
        gt_tp1.insert(gt_tp1.end(), v->tp1.begin(), v->tp1.end());
        gt_ls1.insert(gt_ls1.end(), v->ls1.begin(), v->ls1.end());
        gt_ls2.insert(gt_ls2.end(), v->ls2.begin(), v->ls2.end());
      }
      const Tensor t1 = model.trans1(ops::gather_rows(flat, row_sample), one_hot(lab1, c));
      const Tensor l_t1 = ops::weighted_sum(
          {ops::l1_loss(ops::concat_cols({Model::tp1_size(t1), Model::tp1_location(t1)}), gt_tp1),
           ops::cross_entropy(model.tp1_category_logits(t1), lab1)},
          {1.0, 1.0});
      const Tensor log_ls1 = model.trans2(t1);
      const Tensor l_t2 = ops::l1_loss(ops::exp(log_ls1), gt_ls1);
      const Tensor log_ls2 = model.g2(log_ls1, one_hot(lab2, kSizeCodeCount));
      const Tensor l_size = ops::l1_loss(ops::exp(log_ls2), gt_ls2);
      rec.L_trans1 = l_t1.item();
      rec.L_trans2 = l_t2.item();
      rec.L_size = l_size.item();
      parts.insert(parts.end(), {l_t1, l_t2, l_size});
      weights.insert(weights.end(), {cfg.alpha, cfg.alpha, cfg.alpha});
    }
    const Tensor joint = ops::weighted_sum(parts, weights);
    rec.L_G = l_G.item();
    rec.joint = joint.item();
    check_finite(rec.L_G, "L_G", step);
    check_finite(rec.joint, "joint loss", step);
    joint.backward();
    opt_g.step();
    if (!model.params().all_finite()) {
      throw TrainingError("training diverged at step " + std::to_string(step) + ": non-finite parameters");
    }
    result.history.push_back(rec);
    if (on_step) on_step(rec);
  }
  model.params().zero_grad();
  return result;
}

void write_loss_csv(std::ostream& os, const std::vector<LossRecord>& history) {
  os << "step,L_D,L_G,L_trans1,L_trans2,L_size\n";
  char buf[256];
  for (const auto& r : history) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.step, r.L_D, r.L_G, r.L_trans1,
                  r.L_trans2, r.L_size);
    os << buf;
  }
}

}  // namespace cslayout
