// Copyright (C) 2026 The cslayout Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cslayout {

/// Raised when an operation is applied to a value outside its domain
/// (e.g. a size code on finished furniture).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Plan-view point in meters. Origin is the bottom-left of the room
/// bounding box; y grows "up" in plan view.
struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

/// length is the plan-view up/down extent for a North-facing item, width the
/// left/right extent. height is carried but unused by 2D geometry.
struct Size3 {
  double length = 0.0;
  double width = 0.0;
  double height = 0.0;

  friend bool operator==(const Size3&, const Size3&) = default;
};

struct SizeRange {
  double length_min = 0.0, length_max = 0.0;
  double width_min = 0.0, width_max = 0.0;
  double height_min = 0.0, height_max = 0.0;

  bool contains(const Size3& s, double tol = 0.0) const;
  Size3 clamp(const Size3& s) const;

  friend bool operator==(const SizeRange&, const SizeRange&) = default;
};

/// Direction the front of the furniture faces.
enum class Orientation : std::uint8_t { North = 0, East = 1, South = 2, West = 3 };

inline constexpr int kOrientationCount = 4;

std::string_view to_string(Orientation o);
std::optional<Orientation> parse_orientation(std::string_view s);

/// label_2: the five growth modes of a customized item.
enum class SizeCode : std::uint8_t {
  Default = 0,
  WidthLeft = 1,
  WidthRight = 2,
  LengthUp = 3,
  LengthDown = 4,
};

inline constexpr int kSizeCodeCount = 5;
inline constexpr std::array<SizeCode, kSizeCodeCount> kAllSizeCodes = {
    SizeCode::Default, SizeCode::WidthLeft, SizeCode::WidthRight,
    SizeCode::LengthUp, SizeCode::LengthDown};

std::string_view to_string(SizeCode c);
std::optional<SizeCode> parse_size_code(std::string_view s);

enum class RoomType : std::uint8_t {
  Balcony = 0,
  Bedroom,
  Kitchen,
  Bathroom,
  LivingDining,
  Study,
  Tatami,
};

inline constexpr int kRoomTypeCount = 7;
inline constexpr std::array<RoomType, kRoomTypeCount> kAllRoomTypes = {
    RoomType::Balcony,  RoomType::Bedroom, RoomType::Kitchen, RoomType::Bathroom,
    RoomType::LivingDining, RoomType::Study, RoomType::Tatami};

std::string_view to_string(RoomType t);
std::optional<RoomType> parse_room_type(std::string_view s);

/// label_1: a furniture category.
struct CategoryCode {
  int id = 0;
  std::string name;
  bool customized = false;

  friend bool operator==(const CategoryCode&, const CategoryCode&) = default;
};

struct AABB {
  double x_min = 0.0, y_min = 0.0, x_max = 0.0, y_max = 0.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }

  friend bool operator==(const AABB&, const AABB&) = default;
};

/// Area of the intersection, 0 when disjoint.
double intersection_area(const AABB& a, const AABB& b);

double iou(const AABB& a, const AABB& b);

struct FurnitureInstance {
  CategoryCode category;
  Point2 position;  // box center
  Size3 size;
  Orientation orientation = Orientation::North;
  Size3 default_size;
  SizeRange size_range;
  bool customized = false;

  friend bool operator==(const FurnitureInstance&, const FurnitureInstance&) = default;
};

/// Axis-aligned footprint. Width and length swap for East/West facings.
AABB aabb(const FurnitureInstance& f);

/// Unit vectors of the furniture's local frame in world coordinates: `u`
/// runs along the width axis (towards the item's right), `v` along the
/// length axis (towards its front).
struct LocalFrame {
  Point2 u;
  Point2 v;
};
LocalFrame local_frame(Orientation o);

/// Gives `f` a new size while keeping the edge opposite the growth direction
/// of `code` fixed. Axes not grown by `code` stay centered. No clamping.
FurnitureInstance resize_anchored(const FurnitureInstance& f, const Size3& new_size,
                                  SizeCode code);

/// Applies one of the five growth modes. Growth directions are expressed in
/// the furniture's local frame (for a North-facing item "left" is -x and
/// "up" is +y). The grown size is clamped to `f.size_range`, then anchored.
/// Throws DomainError for non-customized furniture.
FurnitureInstance apply_size_code(const FurnitureInstance& f, SizeCode code);

struct WallSegment {
  Point2 a;
  Point2 b;
  double thickness = 0.0;

  /// Footprint of the segment widened by thickness.
  AABB box() const;

  friend bool operator==(const WallSegment&, const WallSegment&) = default;
};

/// x_i: the empty room.
struct RoomScene {
  RoomType room_type = RoomType::Bedroom;
  std::vector<WallSegment> walls;
  std::vector<AABB> doors;
  std::vector<AABB> windows;
  AABB bounds;

  friend bool operator==(const RoomScene&, const RoomScene&) = default;
};

/// y_i: a scene plus its furniture.
struct Layout {
  RoomScene scene;
  std::vector<FurnitureInstance> furniture;

  friend bool operator==(const Layout&, const Layout&) = default;
};

/// y_i^j: `result` is `base` with the targeted instance resized by `size_code`.
struct LayoutVariant {
  CategoryCode target_category;
  SizeCode size_code = SizeCode::Default;
  Layout result;

  friend bool operator==(const LayoutVariant&, const LayoutVariant&) = default;
};

struct Violation {
  enum class Kind { OutOfBounds, Overlap };
  Kind kind;
  std::size_t first = 0;
  std::size_t second = 0;  // only meaningful for Overlap
  std::string message;
};

inline constexpr double kOverlapToleranceM2 = 1e-4;  // 1 cm^2

/// Out-of-bounds means the furniture footprint does not intersect the scene
/// bounds with positive area.
std::vector<Violation> validate_layout(const Layout& l, bool allow_overlap);

/// Checks the scene invariants (positive bounds, openings on walls, all
/// elements inside bounds). Returns human-readable problems.
std::vector<std::string> validate_scene(const RoomScene& s);

/// Index of the customized instance of `category_id` targeted by a size
/// request. With several candidates the one with the largest default
/// plan-view area wins (first on ties). nullopt when there is none.
std::optional<std::size_t> find_target_instance(const Layout& l, int category_id,
                                                bool* ambiguous = nullptr);

}  // namespace cslayout
