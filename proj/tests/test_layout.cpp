// Copyright (C) 2026 The cslayout Authors
// SPDX-License-Identifier: Apache-2.0
//

#include <gtest/gtest.h>

#include "cslayout/layout.hpp"
#include "support/properties.hpp"

namespace cslayout {
namespace {

FurnitureInstance item(double x, double y, double w, double l, Orientation o = Orientation::North) {
  FurnitureInstance f;
  f.category = {1, "wardrobe", true};
  f.customized = true;
  f.position = {x, y};
  f.size = {l, w, 2.0};
  f.default_size = f.size;
  f.size_range = {0.1, 10, 0.1, 10, 2.0, 2.0};
  f.orientation = o;
  return f;
}

TEST(Enums, RoundTripNames) {
  for (auto c : kAllSizeCodes) EXPECT_EQ(parse_size_code(to_string(c)), c);
  for (auto t : kAllRoomTypes) EXPECT_EQ(parse_room_type(to_string(t)), t);
  for (int i = 0; i < 4; ++i) {
    const auto o = static_cast<Orientation>(i);
    EXPECT_EQ(parse_orientation(to_string(o)), o);
  }
  EXPECT_FALSE(parse_size_code("HeightUp"));
  EXPECT_FALSE(parse_room_type("garage"));
}

TEST(Iou, HandCaseIsOneSeventh) {
  EXPECT_EQ(iou({0, 0, 2, 2}, {1, 1, 3, 3}), 1.0 / 7.0);
}

TEST(Iou, DisjointTouchingAndDegenerate) {
  EXPECT_EQ(iou({0, 0, 1, 1}, {2, 2, 3, 3}), 0.0);
  EXPECT_EQ(iou({0, 0, 1, 1}, {1, 0, 2, 1}), 0.0);
  EXPECT_EQ(iou({0, 0, 0, 0}, {0, 0, 0, 0}), 0.0);
  EXPECT_EQ(iou({0, 0, 2, 2}, {0, 0, 1, 1}), 0.25);
}

TEST(Iou, PropertiesOnRandomPairs) {
  Rng rng(11);
  for (int i = 0; i < 2000; ++i) {
    const AABB a = testing::random_box(rng), b = testing::random_box(rng);
    EXPECT_EQ(testing::check_iou_pair(a, b), "") << i;
  }
}

TEST(Aabb, SwapsExtentsForSideFacings) {
  const auto n = aabb(item(0, 0, 2.0, 1.0, Orientation::North));
  const auto e = aabb(item(0, 0, 2.0, 1.0, Orientation::East));
  EXPECT_DOUBLE_EQ(n.width(), 2.0);
  EXPECT_DOUBLE_EQ(n.height(), 1.0);
  EXPECT_DOUBLE_EQ(e.width(), 1.0);
  EXPECT_DOUBLE_EQ(e.height(), 2.0);
}

TEST(SizeCode, NorthFacingPlanView) {
  const auto f = item(2.0, 2.0, 1.0, 0.6);
  const auto left = apply_size_code(f, SizeCode::WidthLeft);
  EXPECT_NEAR(aabb(left).x_max, aabb(f).x_max, 1e-12);
  EXPECT_DOUBLE_EQ(aabb(left).x_min, aabb(f).x_min - 1.0);
  const auto right = apply_size_code(f, SizeCode::WidthRight);
  EXPECT_NEAR(aabb(right).x_min, aabb(f).x_min, 1e-12);
  const auto up = apply_size_code(f, SizeCode::LengthUp);
  EXPECT_NEAR(aabb(up).y_min, aabb(f).y_min, 1e-12);
  EXPECT_DOUBLE_EQ(aabb(up).y_max, aabb(f).y_max + 0.6);
  const auto down = apply_size_code(f, SizeCode::LengthDown);
  EXPECT_NEAR(aabb(down).y_max, aabb(f).y_max, 1e-12);
}

TEST(SizeCode, SouthFacingMirrorsGrowth) {
  // Facing south the item's left is world +x.
  const auto f = item(2.0, 2.0, 1.0, 0.6, Orientation::South);
  const auto left = apply_size_code(f, SizeCode::WidthLeft);
  EXPECT_NEAR(aabb(left).x_min, aabb(f).x_min, 1e-12);
  EXPECT_DOUBLE_EQ(aabb(left).x_max, aabb(f).x_max + 1.0);
}

TEST(SizeCode, ClampsToRange) {
  auto f = item(0, 0, 1.0, 1.0);
  f.size_range.width_max = 1.5;
  const auto g = apply_size_code(f, SizeCode::WidthRight);
  EXPECT_EQ(g.size.width, 1.5);
  EXPECT_NEAR(aabb(g).x_min, aabb(f).x_min, 1e-12);
}

TEST(SizeCode, FinishedFurnitureIsADomainError) {
  auto f = item(0, 0, 1, 1);
  f.customized = false;
  EXPECT_THROW(apply_size_code(f, SizeCode::WidthLeft), DomainError);
  EXPECT_THROW(apply_size_code(f, SizeCode::Default), DomainError);
}

TEST(SizeCode, RandomGrowthProperties) {
  Rng rng(5);
  for (int i = 0; i < 500; ++i) {
    const auto f = testing::random_customized(rng);
    for (auto c : kAllSizeCodes) EXPECT_EQ(testing::check_size_code(f, c), "") << i;
  }
}

TEST(ResizeAnchored, DefaultKeepsCenter) {
  const auto f = item(1, 1, 1, 1, Orientation::West);
  const auto g = resize_anchored(f, {2, 2, 2}, SizeCode::Default);
  EXPECT_EQ(g.position, f.position);
  EXPECT_EQ(g.size, (Size3{2, 2, 2}));
}

Layout room(std::vector<FurnitureInstance> items) {
  Layout l;
  l.scene.bounds = {0, 0, 4, 4};
  l.furniture = std::move(items);
  return l;
}

TEST(Validate, ReportsOverlapAndOutOfBounds) {
  const auto l = room({item(1, 1, 1, 1), item(1.5, 1, 1, 1), item(10, 10, 1, 1)});
  const auto v = validate_layout(l, false);
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(v[0].kind, Violation::Kind::OutOfBounds);
  EXPECT_EQ(v[0].first, 2u);
  EXPECT_EQ(v[1].kind, Violation::Kind::Overlap);
  EXPECT_EQ(v[1].first, 0u);
  EXPECT_EQ(v[1].second, 1u);
  EXPECT_EQ(validate_layout(l, true).size(), 1u);
}

TEST(Validate, TouchingIsNotOverlap) {
  EXPECT_TRUE(validate_layout(room({item(1, 1, 1, 1), item(2, 1, 1, 1)}), false).empty());
}

TEST(Validate, SceneProblems) {
  RoomScene s;
  s.bounds = {0, 0, 4, 3};
  s.walls = {{{0, 0}, {4, 0}, 0.1}};
  s.doors = {{1, 0, 2, 0.05}};
  s.windows = {{1, 2.9, 2, 3}};
  const auto p = validate_scene(s);
  ASSERT_EQ(p.size(), 2u);  // wall box pokes below y=0, window has no wall
  s.bounds = {0, 0, 0, 3};
  EXPECT_EQ(validate_scene(s).size(), 1u);
}

TEST(FindTarget, LargestDefaultAreaWins) {
  auto small = item(0, 0, 1, 1), big = item(2, 2, 2, 1), other = item(1, 1, 3, 3);
  other.category.id = 2;
  bool ambiguous = false;
  EXPECT_EQ(find_target_instance(room({small, other, big}), 1, &ambiguous), 2u);
  EXPECT_TRUE(ambiguous);
  EXPECT_EQ(find_target_instance(room({small}), 1, &ambiguous), 0u);
  EXPECT_FALSE(ambiguous);
  EXPECT_FALSE(find_target_instance(room({other}), 1));
  auto finished = big;
  finished.customized = false;
  EXPECT_FALSE(find_target_instance(room({finished}), 1));
}

}  // namespace
}  // namespace cslayout
