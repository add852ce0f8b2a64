// Copyright (C) 2026 The cslayout Authors
// SPDX-License-Identifier: Apache-2.0
//

#include <cmath>

#include <gtest/gtest.h>

#include "cslayout/losses.hpp"
#include "cslayout/nn/ops.hpp"
#include "support/loss_checks.hpp"

namespace cslayout {
namespace {

using nn::Tensor;

TEST(LossDiscriminator, HandValues) {
  EXPECT_NEAR(loss_discriminator(0.8, 0.3), -std::log(0.8) - std::log(0.7), 1e-15);
  EXPECT_NEAR(loss_discriminator(1.0, 0.0), 0.0, 1e-15);
  EXPECT_TRUE(std::isfinite(loss_discriminator(0.0, 1.0)));  // clamped, not infinite
  const std::vector<double> r{0.9, 0.5}, f{0.1, 0.5};
  EXPECT_NEAR(loss_discriminator(r, f), (2 * -std::log(0.9) + 2 * -std::log(0.5)) / 2, 1e-15);
  EXPECT_THROW(loss_discriminator(r, std::vector<double>{0.1}), std::invalid_argument);
}

TEST(LossDiscriminator, TensorFormAgreesOnLogits) {
  const Tensor real = Tensor::constant({2, 1}, {1.5, -0.3});
  const Tensor fake = Tensor::constant({2, 1}, {-2.0, 0.7});
  const std::vector<double> dr{sigmoid(1.5), sigmoid(-0.3)}, df{sigmoid(-2.0), sigmoid(0.7)};
  EXPECT_NEAR(nn::discriminator_loss(real, fake).item(), loss_discriminator(dr, df), 1e-12);
  EXPECT_NEAR(nn::adversarial_loss(fake).item(), (-std::log(df[0]) - std::log(df[1])) / 2, 1e-12);
}

TEST(LossTrans, HandValues) {
  LocalFurniture p{{1.0, 0.5, 0.4}, {0.2, 0.3}, {0.25, 0.75}};
  LocalFurniture g{{0.9, 0.5, 0.5}, {0.1, 0.5}, {0.0, 1.0}};
  EXPECT_NEAR(loss_trans1(p, g), 0.1 + 0.0 + 0.1 + 0.1 + 0.2 - std::log(0.75), 1e-12);
  EXPECT_NEAR(loss_trans2({{1, 2, 3}}, {{1.5, 2, 2}}), 1.5, 1e-15);
  EXPECT_NEAR(loss_size({{1, 2, 3}}, {{1, 2, 3}}), 0.0, 1e-15);
  p.category.push_back(0.0);
  EXPECT_THROW(loss_trans1(p, g), std::invalid_argument);
}

TEST(MatchSlots, CategoryFirstThenDistanceThenIndex) {
  const std::size_t c = 2, k = 3, st = SlotGrid::stride(c);
  const auto o = SlotGrid::offsets(c);
  std::vector<double> flat(k * st, 0.0);
  // slot 0: category 1 near (0.1, 0.1); slots 1 and 2: category 0 at (0.5, 0.5).
  flat[0 * st + o.category + 1] = 1;
  flat[0 * st + o.cx] = flat[0 * st + o.cy] = 0.1;
  for (std::size_t s : {1u, 2u}) {
    flat[s * st + o.category] = 1;
    flat[s * st + o.cx] = flat[s * st + o.cy] = 0.5;
  }
  const std::vector<SlotTarget> t{{0, 0.1, 0.1, 0.1, 0.1, 0}, {0, 0.5, 0.5, 0.1, 0.1, 0}, {1, 0.9, 0.9, 0.1, 0.1, 0}};
  EXPECT_EQ(match_slots(flat, k, c, t), (std::vector<std::size_t>{1, 2, 0}));
  EXPECT_THROW(match_slots(std::span<const double>(flat).first(5), k, c, t), std::invalid_argument);
}

// With every slot value zero the matching is the identity and each term has
// a closed form in the targets.
TEST(LossGenerator, ZeroSlotsClosedForm) {
  const Corpus corpus = make_fixture_corpus(3, 11);
  const std::size_t c = corpus.catalog.size(), k = kDefaultSlotCount;
  for (const auto& s : corpus.samples) {
    SlotGrid zero = SlotGrid::from_flat(std::vector<double>(k * SlotGrid::stride(c), 0.0), k, c);
    const auto t = loss_generator(zero, s.layout, 0.25, 0.5);
    const double n = static_cast<double>(s.layout.furniture.size());
    double box = 0.0;
    const AABB& b = s.layout.scene.bounds;
    for (const auto& f : s.layout.furniture) {
      const AABB a = aabb(f);
      box += (f.position.x - b.x_min) / b.width() + (f.position.y - b.y_min) / b.height() +
             a.width() / b.width() + a.height() / b.height();
    }
    EXPECT_NEAR(t.box, box, 1e-12) << s.id;
    EXPECT_NEAR(t.category, n * std::log(static_cast<double>(c)), 1e-12);
    EXPECT_NEAR(t.orientation, n * std::log(4.0), 1e-12);
    EXPECT_NEAR(t.presence, static_cast<double>(k) * std::log(2.0), 1e-12);
    EXPECT_NEAR(t.adversarial, std::log(4.0), 1e-12);
    EXPECT_NEAR(t.total, t.reconstruction() + 0.5 * std::log(4.0), 1e-12);
  }
}

TEST(LossGenerator, EncodedGroundTruthIsNearZero) {
  const Corpus corpus = make_fixture_corpus(3, 12);
  for (const auto& s : corpus.samples) {
    const auto enc = encode_layout(s.layout, kDefaultSlotCount, corpus.catalog.size());
    const auto t = loss_generator(enc, s.layout, 1.0, 0.01);
    EXPECT_LT(t.box, 1e-12);
    EXPECT_LT(t.total, 1e-3);
  }
}

TEST(SlotLoss, TensorFormAgreesWithScalarForm) {
  const Corpus corpus = make_fixture_corpus(2, 13);
  const std::size_t c = corpus.catalog.size(), k = kDefaultSlotCount, st = SlotGrid::stride(c);
  Rng rng(4);
  std::vector<double> flat;
  std::vector<std::vector<SlotTarget>> targets;
  double expect = 0.0;
  for (const auto& s : corpus.samples) {
    std::vector<double> row(k * st);
    for (auto& v : row) v = rng.uniform(-1, 1);
    expect += loss_generator(SlotGrid::from_flat(row, k, c), s.layout, 0.5, 0.0).total / 2;
    flat.insert(flat.end(), row.begin(), row.end());
    targets.push_back(slot_targets(s.layout, k));
  }
  GeneratorLossTerms terms;
  const Tensor l = nn::slot_loss(Tensor::constant({2, k * st}, flat), k, c, targets, &terms);
  EXPECT_NEAR(l.item(), expect, 1e-12);
  EXPECT_NEAR(terms.total, expect, 1e-12);
}

TEST(SlotLoss, GradientMatchesFiniteDifferences) {
  const Corpus corpus = make_fixture_corpus(1, 14);
  const std::size_t c = corpus.catalog.size(), k = 8, st = SlotGrid::stride(c);
  Rng rng(5);
  std::vector<double> x0(k * st);
  for (auto& v : x0) v = rng.uniform(-1, 1);
  auto layout = corpus.samples[0].layout;
  layout.furniture.resize(std::min<std::size_t>(layout.furniture.size(), k));
  const std::vector<std::vector<SlotTarget>> targets{slot_targets(layout, k)};
  const auto g = testing::check_gradient([&](const Tensor& x) { return nn::slot_loss(x, k, c, targets); },
                                         {1, k * st}, x0);
  EXPECT_LT(g.relative_error, 1e-7);
}

TEST(TensorLosses, CrossEntropyAndL1) {
  const Tensor logits = Tensor::constant({2, 3}, {0, 0, 0, 1, 2, 3});
  const std::vector<std::size_t> labels{1, 2};
  const double lse = std::log(std::exp(1.0) + std::exp(2.0) + std::exp(3.0));
  EXPECT_NEAR(nn::cross_entropy(logits, labels).item(), (std::log(3.0) + lse - 3.0) / 2, 1e-12);
  const std::vector<double> target{1, 0, 0, 1, 1, 1};
  EXPECT_NEAR(nn::l1_loss(logits, target).item(), (1 + 0 + 0 + 0 + 1 + 2) / 2.0, 1e-15);
  Rng rng(6);
  std::vector<double> x0(6);
  for (auto& v : x0) v = rng.uniform(-2, 2);
  EXPECT_LT(testing::check_gradient([&](const Tensor& x) { return nn::cross_entropy(x, labels); }, {2, 3}, x0)
                .relative_error,
            1e-7);
  EXPECT_LT(testing::check_gradient([&](const Tensor& x) { return nn::l1_loss(x, target); }, {2, 3}, x0)
                .relative_error,
            1e-7);
}

class LossGradient : public ::testing::TestWithParam<testing::LossKind> {};

TEST_P(LossGradient, MatchesFiniteDifferencesOnTinyModel) {
  for (std::uint64_t seed = 1; seed <= 2; ++seed) {
    const auto g = testing::check_loss_gradient(GetParam(), seed);
    EXPECT_GT(g.analytic.size(), 10u);
    EXPECT_LT(g.relative_error, 1e-4) << testing::loss_name(GetParam()) << " seed " << seed;
  }
}

INSTANTIATE_TEST_SUITE_P(AllLosses, LossGradient, ::testing::ValuesIn(testing::kAllLossKinds),
                         [](const auto& info) { return std::string(testing::loss_name(info.param)).substr(2); });

}  // namespace
}  // namespace cslayout
