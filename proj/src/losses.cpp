// Copyright (C) 2026 The cslayout Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "cslayout/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cslayout/nn/ops.hpp"

namespace cslayout {

using nn::softplus;

std::vector<SlotTarget> slot_targets(const Layout& layout, std::size_t max_slots) {
  const AABB& b = layout.scene.bounds;
  std::vector<SlotTarget> out;
  const std::size_t n = std::min(max_slots, layout.furniture.size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto& f = layout.furniture[i];
    const AABB box = aabb(f);
    const Point2 c = normalize_point(f.position, b);
    out.push_back({f.category.id, c.x, c.y, box.width() / b.width(), box.height() / b.height(),
                   static_cast<int>(f.orientation)});
  }
  return out;
}

namespace {

std::size_t argmax(const double* v, std::size_t n) {
  return static_cast<std::size_t>(std::max_element(v, v + n) - v);
}

double sgn(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

// -log softmax(logits)[label]; adds the gradient times `scale` into `grad`.
double softmax_ce(const double* logits, std::size_t n, std::size_t label, double* grad,
                  double scale) {
  const double mx = *std::max_element(logits, logits + n);
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) z += std::exp(logits[i] - mx);
  const double lse = mx + std::log(z);
  if (grad) {
    for (std::size_t i = 0; i < n; ++i) {
      grad[i] += scale * (std::exp(logits[i] - lse) - (i == label ? 1.0 : 0.0));
    }
  }
  return lse - logits[label];
}

// L_g for one sample; gradient (times `scale`) accumulated into `grad` when non-null.
GeneratorLossTerms slot_loss_one(const double* flat, std::size_t k, std::size_t c,
                                 const std::vector<SlotTarget>& targets, double* grad,
                                 double scale) {
  if (targets.size() > k) throw std::invalid_argument("slot_loss: more targets than slots");
  const std::size_t stride = SlotGrid::stride(c);
  const auto o = SlotGrid::offsets(c);
  const auto match = match_slots({flat, k * stride}, k, c, targets);
  std::vector<bool> used(k, false);
  GeneratorLossTerms t;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const SlotTarget& tg = targets[i];
    const std::size_t s = match[i];
    used[s] = true;
    const double* row = flat + s * stride;
    double* g = grad ? grad + s * stride : nullptr;
    const double d[4] = {row[o.cx] - tg.cx, row[o.cy] - tg.cy, row[o.ex] - tg.ex, row[o.ey] - tg.ey};
    const std::size_t off[4] = {o.cx, o.cy, o.ex, o.ey};
    for (int a = 0; a < 4; ++a) {
      t.box += std::abs(d[a]);
      if (g) g[off[a]] += scale * sgn(d[a]);
    }
    t.category += softmax_ce(row + o.category, c, static_cast<std::size_t>(tg.category),
                             g ? g + o.category : nullptr, scale);
    t.orientation += softmax_ce(row + o.orientation, kOrientationCount,
                                static_cast<std::size_t>(tg.orientation),
                                g ? g + o.orientation : nullptr, scale);
  }
  for (std::size_t s = 0; s < k; ++s) {
    const double x = flat[s * stride + o.presence];
    if (used[s]) {
      t.presence += softplus(-x);
      if (grad) grad[s * stride + o.presence] += scale * (sigmoid(x) - 1.0);
    } else {
      t.presence += softplus(x);
      if (grad) grad[s * stride + o.presence] += scale * sigmoid(x);
    }
  }
  t.total = t.reconstruction();
  return t;
}

double clamp_prob(double p) {
  constexpr double lo = std::numeric_limits<double>::min();
  return std::clamp(p, lo, 1.0);
}

}  // namespace

std::vector<std::size_t> match_slots(std::span<const double> flat, std::size_t k, std::size_t c,
                                     const std::vector<SlotTarget>& targets) {
  const std::size_t stride = SlotGrid::stride(c);
  if (flat.size() != k * stride) throw std::invalid_argument("match_slots: slot buffer size mismatch");
  if (targets.size() > k) throw std::invalid_argument("match_slots: more targets than slots");
  const auto o = SlotGrid::offsets(c);
  std::vector<bool> used(k, false);
  std::vector<std::size_t> out;
  out.reserve(targets.size());
  for (const SlotTarget& tg : targets) {
    std::size_t best = k;
    int best_mismatch = 2;
    double best_dist = 0.0;
    for (std::size_t s = 0; s < k; ++s) {
      if (used[s]) continue;
      const double* row = flat.data() + s * stride;
      const int mismatch = argmax(row + o.category, c) == static_cast<std::size_t>(tg.category) ? 0 : 1;
      const double dist = std::abs(row[o.cx] - tg.cx) + std::abs(row[o.cy] - tg.cy);
      if (mismatch < best_mismatch || (mismatch == best_mismatch && dist < best_dist)) {
        best = s;
        best_mismatch = mismatch;
        best_dist = dist;
      }
    }
    used[best] = true;
    out.push_back(best);
  }
  return out;
}

double loss_discriminator(double d_real, double d_fake) {
  return -std::log(clamp_prob(d_real)) - std::log(clamp_prob(1.0 - d_fake));
}

double loss_discriminator(std::span<const double> d_real, std::span<const double> d_fake) {
  if (d_real.size() != d_fake.size() || d_real.empty()) {
    throw std::invalid_argument("loss_discriminator: batches must be nonempty and equal-sized");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < d_real.size(); ++i) s += loss_discriminator(d_real[i], d_fake[i]);
  return s / static_cast<double>(d_real.size());
}

GeneratorLossTerms loss_generator(const SlotGrid& slots, const Layout& target, double d_fake,
                                  double lambda_adv) {
  const std::size_t k = slots.slots.size();
  const std::vector<double> flat = slots.flatten();
  GeneratorLossTerms t =
      slot_loss_one(flat.data(), k, slots.num_categories, slot_targets(target, k), nullptr, 1.0);
  t.adversarial = -std::log(clamp_prob(d_fake));
  t.total = t.reconstruction() + lambda_adv * t.adversarial;
  return t;
}

namespace {

double l1(const Size3& a, const Size3& b) {
  return std::abs(a.length - b.length) + std::abs(a.width - b.width) + std::abs(a.height - b.height);
}

}  // namespace

double loss_trans1(const LocalFurniture& pred, const LocalFurniture& gt) {
  if (pred.category.size() != gt.category.size() || gt.category.empty()) {
    throw std::invalid_argument("loss_trans1: category distributions differ in length");
  }
  const double loc = std::abs(pred.location.x - gt.location.x) + std::abs(pred.location.y - gt.location.y);
  const auto label = static_cast<std::size_t>(gt.argmax_category());
  return l1(pred.size, gt.size) + loc - std::log(clamp_prob(pred.category[label]));
}

double loss_trans2(const DimensionalSize& pred, const DimensionalSize& gt) {
  return l1(pred.size, gt.size);
}

double loss_size(const DimensionalSize& pred, const DimensionalSize& gt) {
  return l1(pred.size, gt.size);
}

namespace nn {

Tensor discriminator_loss(const Tensor& real, const Tensor& fake) {
  if (real.size() != fake.size() || real.size() == 0) {
    throw std::invalid_argument("discriminator_loss: batches must be nonempty and equal-sized");
  }
  const double n = static_cast<double>(real.size());
  double v = 0.0;
  for (std::size_t i = 0; i < real.size(); ++i) v += softplus(-real.value()[i]) + softplus(fake.value()[i]);
  return Tensor::make({}, {v / n}, {real, fake}, [n](Node& self) {
    const double g = self.grad[0] / n;
    if (self.parents[0]->requires_grad) {
      auto& gr = self.parents[0]->grad_buffer();
      for (std::size_t i = 0; i < gr.size(); ++i) gr[i] += g * (cslayout::sigmoid(self.parents[0]->value[i]) - 1.0);
    }
    if (self.parents[1]->requires_grad) {
      auto& gf = self.parents[1]->grad_buffer();
      for (std::size_t i = 0; i < gf.size(); ++i) gf[i] += g * cslayout::sigmoid(self.parents[1]->value[i]);
    }
  });
}

Tensor adversarial_loss(const Tensor& fake) {
  if (fake.size() == 0) throw std::invalid_argument("adversarial_loss: empty batch");
  const double n = static_cast<double>(fake.size());
  double v = 0.0;
  for (double x : fake.value()) v += softplus(-x);
  return Tensor::make({}, {v / n}, {fake}, [n](Node& self) {
    auto& g = self.parents[0]->grad_buffer();
    for (std::size_t i = 0; i < g.size(); ++i) {
      g[i] += self.grad[0] / n * (cslayout::sigmoid(self.parents[0]->value[i]) - 1.0);
    }
  });
}

Tensor slot_loss(const Tensor& flat, std::size_t k, std::size_t c,
                 const std::vector<std::vector<SlotTarget>>& targets, GeneratorLossTerms* terms) {
  const std::size_t stride = SlotGrid::stride(c);
  if (flat.shape().size() != 2 || flat.dim(1) != k * stride || flat.dim(0) != targets.size() ||
      targets.empty()) {
    throw std::invalid_argument("slot_loss: expected flat [B, K*stride] with one target list per row");
  }
  const std::size_t batch = targets.size();
  const double inv = 1.0 / static_cast<double>(batch);
  GeneratorLossTerms sum;
  for (std::size_t b = 0; b < batch; ++b) {
    const auto t = slot_loss_one(flat.value().data() + b * k * stride, k, c, targets[b], nullptr, 1.0);
    sum.box += t.box * inv;
    sum.category += t.category * inv;
    sum.orientation += t.orientation * inv;
    sum.presence += t.presence * inv;
  }
  sum.total = sum.reconstruction();
  if (terms) *terms = sum;
  return Tensor::make({}, {sum.total}, {flat}, [k, c, stride, targets, inv](Node& self) {
    auto& g = self.parents[0]->grad_buffer();
    const auto& v = self.parents[0]->value;
    for (std::size_t b = 0; b < targets.size(); ++b) {
      slot_loss_one(v.data() + b * k * stride, k, c, targets[b], g.data() + b * k * stride,
                    self.grad[0] * inv);
    }
  });
}

Tensor l1_loss(const Tensor& pred, std::span<const double> target) {
  if (pred.shape().size() != 2 || pred.size() != target.size() || pred.dim(0) == 0) {
    throw std::invalid_argument("l1_loss: expected pred [R,N] matching the target size");
  }
  const double inv = 1.0 / static_cast<double>(pred.dim(0));
  std::vector<double> t(target.begin(), target.end());
  double v = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) v += std::abs(pred.value()[i] - t[i]);
  return Tensor::make({}, {v * inv}, {pred}, [t = std::move(t), inv](Node& self) {
    auto& g = self.parents[0]->grad_buffer();
    const auto& p = self.parents[0]->value;
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[0] * inv * sgn(p[i] - t[i]);
  });
}

Tensor cross_entropy(const Tensor& logits, std::span<const std::size_t> labels) {
  if (logits.shape().size() != 2 || logits.dim(0) != labels.size() || labels.empty()) {
    throw std::invalid_argument("cross_entropy: expected logits [R,N] with one label per row");
  }
  const std::size_t rows = logits.dim(0), n = logits.dim(1);
  std::vector<std::size_t> lab(labels.begin(), labels.end());
  for (auto l : lab) {
    if (l >= n) throw std::invalid_argument("cross_entropy: label out of range");
  }
  const double inv = 1.0 / static_cast<double>(rows);
  double v = 0.0;
  for (std::size_t r = 0; r < rows; ++r) v += softmax_ce(logits.value().data() + r * n, n, lab[r], nullptr, 0.0);
  return Tensor::make({}, {v * inv}, {logits}, [lab = std::move(lab), n, inv](Node& self) {
    auto& g = self.parents[0]->grad_buffer();
    const auto& x = self.parents[0]->value;
    for (std::size_t r = 0; r < lab.size(); ++r) {
      softmax_ce(x.data() + r * n, n, lab[r], g.data() + r * n, self.grad[0] * inv);
    }
  });
}

}  // namespace nn

}  // namespace cslayout
