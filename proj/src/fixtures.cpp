// Copyright (C) 2026 The cslayout Authors
// SPDX-License-Identifier: Apache-2.0
//

// Procedural desk-scale corpus. Rooms are rectangles with one door and one
// window; furniture follows per-room-type rules keyed on the door wall, so
// the layout is a learnable function of the empty room.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cslayout/dataset.hpp"
#include "cslayout/random.hpp"

namespace cslayout {

namespace {

constexpr std::int64_t kWallMm = 120;

// Walls are indexed counter-clockwise from the bottom: 0 bottom, 1 right,
// 2 top, 3 left.
enum class Role { Primary, SideA, SideB };

// Integer-mm room description used while placing; converted at the end.
struct Room {
  std::int64_t w = 0;  // outer x extent
  std::int64_t d = 0;  // outer y extent
  int door_wall = 0;

  int wall_for(Role r) const {
    switch (r) {
      case Role::Primary: return (door_wall + 2) % 4;
      case Role::SideA: return (door_wall + 1) % 4;
      case Role::SideB: return (door_wall + 3) % 4;
    }
    return 0;
  }
  // Interior span along a wall's axis.
  std::int64_t along_lo() const { return kWallMm; }
  std::int64_t along_hi(int wall) const { return (wall % 2 == 0 ? w : d) - kWallMm; }
};

struct Placed {
  int category = 0;
  std::int64_t cx = 0, cy = 0;  // mm
  Orientation facing = Orientation::North;
  std::int64_t ex = 0, ey = 0;  // AABB extents, mm
  int wall = -1;
  std::int64_t along = 0;       // center coordinate along the wall axis
  std::int64_t along_size = 0;  // footprint along the wall axis

  std::int64_t x0() const { return cx - ex / 2; }
  std::int64_t x1() const { return cx + ex / 2; }
  std::int64_t y0() const { return cy - ey / 2; }
  std::int64_t y1() const { return cy + ey / 2; }
};

struct MmSize {
  std::int64_t length, width;
};

MmSize mm_size(const Catalog& cat, int id) {
  const auto& d = cat.at(id).default_size;
  return {to_mm(d.length), to_mm(d.width)};
}

Orientation facing_away_from(int wall) {
  switch (wall) {
    case 0: return Orientation::North;
    case 1: return Orientation::West;
    case 2: return Orientation::South;
    default: return Orientation::East;
  }
}

Placed against_wall(const Room& room, const Catalog& cat, int id, int wall, std::int64_t along) {
  const MmSize s = mm_size(cat, id);
  Placed p;
  p.category = id;
  p.wall = wall;
  p.along = along;
  p.along_size = s.width;
  p.facing = facing_away_from(wall);
  switch (wall) {
    case 0: p.cx = along; p.cy = kWallMm + s.length / 2; break;
    case 2: p.cx = along; p.cy = room.d - kWallMm - s.length / 2; break;
    case 3: p.cx = kWallMm + s.length / 2; p.cy = along; break;
    default: p.cx = room.w - kWallMm - s.length / 2; p.cy = along; break;
  }
  const bool swapped = wall % 2 == 1;
  p.ex = swapped ? s.length : s.width;
  p.ey = swapped ? s.width : s.length;
  return p;
}

bool overlaps(const Placed& a, const Placed& b) {
  return std::min(a.x1(), b.x1()) > std::max(a.x0(), b.x0()) &&
         std::min(a.y1(), b.y1()) > std::max(a.y0(), b.y0());
}

bool fits(const Room& room, const Placed& p, const std::vector<Placed>& placed) {
  if (p.x0() < kWallMm || p.y0() < kWallMm || p.x1() > room.w - kWallMm ||
      p.y1() > room.d - kWallMm) {
    return false;
  }
  return std::none_of(placed.begin(), placed.end(),
                      [&](const Placed& q) { return overlaps(p, q); });
}

// Where along a wall an item goes.
enum class Anchor { Center, Start, End, TowardPrimary, TowardDoor };

std::int64_t along_for(const Room& room, const Catalog& cat, int id, int wall, Anchor a) {
  const std::int64_t half = mm_size(cat, id).width / 2;
  const std::int64_t lo = room.along_lo() + half;
  const std::int64_t hi = room.along_hi(wall) - half;
  const std::int64_t mid = (room.along_lo() + room.along_hi(wall)) / 2;
  // For side walls, the primary wall sits at the high or low end of the axis.
  const int primary = room.wall_for(Role::Primary);
  const bool primary_high = primary == 1 || primary == 2;
  switch (a) {
    case Anchor::Center: return mid;
    case Anchor::Start: return lo;
    case Anchor::End: return hi;
    case Anchor::TowardPrimary: return primary_high ? hi : lo;
    case Anchor::TowardDoor: return primary_high ? lo : hi;
  }
  return mid;
}

class Placer {
 public:
  Placer(const Room& room, const Catalog& cat) : room_(room), cat_(cat) {}

  // First anchor that fits wins; returns the index or nullopt.
  std::optional<std::size_t> on_wall(const char* name, Role role, std::initializer_list<Anchor> anchors) {
    const int id = require(name);
    const int wall = room_.wall_for(role);
    for (Anchor a : anchors) {
      Placed p = against_wall(room_, cat_, id, wall, along_for(room_, cat_, id, wall, a));
      if (fits(room_, p, placed_)) return push(p);
    }
    return std::nullopt;
  }

  // Touching `ref` along the same wall; side = -1 lower coordinate, +1 higher.
  std::optional<std::size_t> beside(const char* name, std::size_t ref, int side) {
    const int id = require(name);
    const Placed& r = placed_.at(ref);
    const std::int64_t half = mm_size(cat_, id).width / 2;
    const std::int64_t along = r.along + side * (r.along_size / 2 + half);
    Placed p = against_wall(room_, cat_, id, r.wall, along);
    if (!fits(room_, p, placed_)) return std::nullopt;
    return push(p);
  }

  // Facing `ref` with a clearance gap in front of it.
  std::optional<std::size_t> in_front_of(const char* name, std::size_t ref, std::int64_t gap) {
    const int id = require(name);
    const Placed r = placed_.at(ref);
    const MmSize s = mm_size(cat_, id);
    const MmSize rs = mm_size(cat_, r.category);
    const LocalFrame fr = local_frame(r.facing);
    const std::int64_t dist = rs.length / 2 + gap + s.length / 2;
    Placed p;
    p.category = id;
    p.cx = r.cx + static_cast<std::int64_t>(fr.v.x) * dist;
    p.cy = r.cy + static_cast<std::int64_t>(fr.v.y) * dist;
    p.facing = static_cast<Orientation>((static_cast<int>(r.facing) + 2) % 4);
    const bool swapped = p.facing == Orientation::East || p.facing == Orientation::West;
    p.ex = swapped ? s.length : s.width;
    p.ey = swapped ? s.width : s.length;
    if (!fits(room_, p, placed_)) return std::nullopt;
    return push(p);
  }

  std::optional<std::size_t> at_center(const char* name) {
    const int id = require(name);
    const MmSize s = mm_size(cat_, id);
    Placed p;
    p.category = id;
    p.cx = room_.w / 2;
    p.cy = room_.d / 2;
    p.facing = facing_away_from(room_.wall_for(Role::Primary));
    const bool swapped = p.facing == Orientation::East || p.facing == Orientation::West;
    p.ex = swapped ? s.length : s.width;
    p.ey = swapped ? s.width : s.length;
    if (!fits(room_, p, placed_)) return std::nullopt;
    return push(p);
  }

  const std::vector<Placed>& placed() const { return placed_; }

 private:
  int require(const char* name) const { return *cat_.find(name); }
  std::size_t push(const Placed& p) {
    placed_.push_back(p);
    return placed_.size() - 1;
  }

  const Room& room_;
  const Catalog& cat_;
  std::vector<Placed> placed_;
};

struct Extents {
  std::int64_t w_lo, w_hi, d_lo, d_hi;
};

Extents room_extents(RoomType t) {
  switch (t) {
    case RoomType::Balcony: return {2800, 4400, 1500, 2000};
    case RoomType::Bedroom: return {3400, 4800, 3400, 4800};
    case RoomType::Kitchen: return {2800, 4000, 2600, 3600};
    case RoomType::Bathroom: return {2200, 3200, 2200, 3000};
    case RoomType::LivingDining: return {4200, 6000, 4200, 6000};
    case RoomType::Study: return {2800, 4000, 2800, 4000};
    case RoomType::Tatami: return {3000, 4200, 3000, 4200};
  }
  return {3000, 4000, 3000, 4000};
}

void furnish(Placer& pl, RoomType t) {
  using A = Anchor;
  switch (t) {
    case RoomType::Bedroom: {
      auto bed = pl.on_wall("bed", Role::Primary, {A::Center});
      if (bed) {
        pl.beside("nightstand", *bed, -1);
        pl.beside("nightstand", *bed, +1);
      }
      pl.on_wall("wardrobe", Role::SideA, {A::TowardDoor, A::Center});
      break;
    }
    case RoomType::Study: {
      auto desk = pl.on_wall("desk", Role::Primary, {A::Center});
      if (desk) pl.in_front_of("chair", *desk, 100);
      pl.on_wall("bookshelf", Role::SideB, {A::Center, A::TowardDoor});
      break;
    }
    case RoomType::Tatami:
      pl.on_wall("tatami_platform", Role::Primary, {A::Start});
      pl.on_wall("desk", Role::Primary, {A::End});
      pl.on_wall("wardrobe", Role::SideA, {A::TowardDoor, A::Center});
      break;
    case RoomType::LivingDining:
      pl.on_wall("sofa", Role::Primary, {A::Center});
      pl.on_wall("tv_cabinet", Role::SideA, {A::Center});
      pl.on_wall("sideboard", Role::SideB, {A::Center});
      pl.at_center("dining_table");
      break;
    case RoomType::Kitchen:
      pl.on_wall("kitchen_counter", Role::Primary, {A::Center});
      pl.on_wall("fridge", Role::SideA, {A::TowardPrimary, A::Center, A::TowardDoor});
      pl.on_wall("tall_cabinet", Role::SideB, {A::TowardPrimary, A::Center, A::TowardDoor});
      break;
    case RoomType::Bathroom:
      pl.on_wall("vanity", Role::Primary, {A::Center});
      pl.on_wall("toilet", Role::SideA, {A::TowardPrimary, A::Center});
      pl.on_wall("shower", Role::SideB, {A::TowardPrimary, A::Center, A::TowardDoor});
      break;
    case RoomType::Balcony:
      pl.on_wall("storage_cabinet", Role::Primary, {A::Start});
      pl.on_wall("washing_machine", Role::Primary, {A::End});
      break;
  }
}

// Opening of `len` mm on `wall` starting at `offset` along the wall axis.
AABB opening(const Room& room, int wall, std::int64_t offset, std::int64_t len) {
  // Coordinates are formed in millimeters so records round-trip exactly.
  const double a0 = from_mm(offset), a1 = from_mm(offset + len);
  const double t = from_mm(kWallMm);
  switch (wall) {
    case 0: return {a0, 0.0, a1, t};
    case 2: return {a0, from_mm(room.d - kWallMm), a1, from_mm(room.d)};
    case 3: return {0.0, a0, t, a1};
    default: return {from_mm(room.w - kWallMm), a0, from_mm(room.w), a1};
  }
}

std::int64_t random_mm(Rng& rng, std::int64_t lo, std::int64_t hi, std::int64_t step) {
  return lo + step * rng.uniform_int(0, (hi - lo) / step);
}

Sample make_sample(std::size_t index, RoomType type, Rng& rng, const Catalog& cat,
                   std::uint64_t seed) {
  const Extents ex = room_extents(type);
  Room room;
  room.w = random_mm(rng, ex.w_lo, ex.w_hi, 100);
  room.d = random_mm(rng, ex.d_lo, ex.d_hi, 100);
  // Door on the longer dimension's wall pair keeps balconies usable.
  room.door_wall = static_cast<int>(rng.uniform_int(0, 3));
  if (type == RoomType::Balcony && room.door_wall % 2 == 1) room.door_wall -= 1;

  Sample s;
  s.id = "fx" + std::to_string(seed) + "_" + std::to_string(index);
  RoomScene& sc = s.layout.scene;
  sc.room_type = type;
  sc.bounds = {0.0, 0.0, from_mm(room.w), from_mm(room.d)};
  const double t = from_mm(kWallMm), h = from_mm(kWallMm / 2);
  const double w = from_mm(room.w), d = from_mm(room.d);
  const double wh = from_mm(room.w - kWallMm / 2), dh = from_mm(room.d - kWallMm / 2);
  sc.walls = {{{0.0, h}, {w, h}, t}, {{wh, 0.0}, {wh, d}, t},
              {{0.0, dh}, {w, dh}, t}, {{h, 0.0}, {h, d}, t}};

  const auto wall_len = [&](int wall) { return wall % 2 == 0 ? room.w : room.d; };
  constexpr std::int64_t kDoor = 800;
  const std::int64_t door_max = wall_len(room.door_wall) - kWallMm - 100 - kDoor;
  sc.doors.push_back(opening(room, room.door_wall,
                             random_mm(rng, kWallMm + 100, std::max(kWallMm + 100, door_max), 50),
                             kDoor));
  const int window_wall = (room.door_wall + 1 + static_cast<int>(rng.uniform_int(0, 2))) % 4;
  const std::int64_t win = std::min<std::int64_t>(1200, wall_len(window_wall) - 2 * kWallMm - 400);
  const std::int64_t win_max = wall_len(window_wall) - kWallMm - 200 - win;
  sc.windows.push_back(opening(room, window_wall,
                               random_mm(rng, kWallMm + 200, std::max(kWallMm + 200, win_max), 50),
                               win));

  Placer pl(room, cat);
  furnish(pl, type);
  for (const auto& p : pl.placed()) {
    s.layout.furniture.push_back(
        cat.make_instance(p.category, {from_mm(p.cx), from_mm(p.cy)}, p.facing));
  }

  std::vector<std::size_t> customized;
  for (std::size_t i = 0; i < s.layout.furniture.size(); ++i) {
    if (s.layout.furniture[i].customized) customized.push_back(i);
  }
  const std::size_t target =
      customized.at(static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(customized.size()) - 1)));
  const FurnitureInstance& base = s.layout.furniture[target];
  for (SizeCode code : kAllSizeCodes) {
    LayoutVariant v;
    v.target_category = base.category;
    v.size_code = code;
    v.result = s.layout;
    FurnitureInstance grown = apply_size_code(base, code);
    grown.position = {from_mm(to_mm(grown.position.x)), from_mm(to_mm(grown.position.y))};
    grown.size = {from_mm(to_mm(grown.size.length)), from_mm(to_mm(grown.size.width)),
                  from_mm(to_mm(grown.size.height))};
    v.result.furniture[target] = grown;
    s.variants.push_back(std::move(v));
  }
  return s;
}

}  // namespace

Corpus make_fixture_corpus(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw DomainError("make_fixture_corpus: n must be at least 1");
  Corpus c;
  c.catalog = standard_catalog();
  c.samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(mix_seed(seed, i));
    const RoomType type = kAllRoomTypes[i % kRoomTypeCount];
    c.samples.push_back(make_sample(i, type, rng, c.catalog, seed));
  }
  c.per_type_counts = count_room_types(c.samples);
  return c;
}

}  // namespace cslayout
