// Copyright (C) 2026 The cslayout Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cslayout/layout.hpp"

namespace cslayout {

/// Malformed or inconsistent corpus data. The message carries a
/// `file:line:` prefix when the problem is tied to a record.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CatalogEntry {
  CategoryCode code;
  Size3 default_size;
  SizeRange size_range;

  friend bool operator==(const CatalogEntry&, const CatalogEntry&) = default;
};

/// Immutable category table with ids 0..C-1.
class Catalog {
 public:
  Catalog() = default;
  /// Throws DataError unless ids are exactly 0..C-1 (any order) with unique names.
  explicit Catalog(std::vector<CatalogEntry> entries);

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::vector<CatalogEntry>& entries() const { return entries_; }
  const CatalogEntry& at(int id) const;
  bool contains(int id) const { return id >= 0 && static_cast<std::size_t>(id) < entries_.size(); }
  std::optional<int> find(std::string_view name) const;
  std::vector<int> customized_ids() const;

  /// Furniture of category `id` at its default size.
  FurnitureInstance make_instance(int id, Point2 center, Orientation facing) const;

  friend bool operator==(const Catalog&, const Catalog&) = default;

 private:
  std::vector<CatalogEntry> entries_;
};

/// The catalog the fixture generator draws from.
const Catalog& standard_catalog();

struct Sample {
  std::string id;
  Layout layout;
  std::vector<LayoutVariant> variants;

  friend bool operator==(const Sample&, const Sample&) = default;
};

struct Corpus {
  std::vector<Sample> samples;
  Catalog catalog;
  std::map<RoomType, std::size_t> per_type_counts;

  friend bool operator==(const Corpus&, const Corpus&) = default;
};

/// Per-type sample counts of the published designer corpus.
inline constexpr std::array<std::pair<RoomType, std::size_t>, kRoomTypeCount>
    kPublishedRoomTypeCounts = {{{RoomType::Balcony, 2'000},
                                 {RoomType::Bedroom, 22'000},
                                 {RoomType::Kitchen, 185'000},
                                 {RoomType::Bathroom, 400'000},
                                 {RoomType::LivingDining, 80'000},
                                 {RoomType::Study, 1'700},
                                 {RoomType::Tatami, 20'000}}};

std::map<RoomType, std::size_t> count_room_types(const std::vector<Sample>& samples);

/// Checks every Corpus invariant; returns problems found (empty when valid).
std::vector<std::string> validate_corpus(const Corpus& c);

/// Reads `<dir>/manifest.json` and the sample records it lists.
Corpus load_corpus(const std::filesystem::path& dir);

/// Writes manifest.json plus one record per sample under `samples/`.
void save_corpus(const Corpus& c, const std::filesystem::path& dir);

/// Sample record text for one sample (the on-disk per-sample format).
std::string format_sample_record(const Sample& s);
/// Parses a record; `source` is used for diagnostics only.
Sample parse_sample_record(const std::string& text, const Catalog& catalog,
                           const std::string& source = "<memory>");

struct SplitSpec {
  double train_fraction = 0.9;
  std::uint64_t seed = 0;
};

struct CorpusSplit {
  Corpus train;
  Corpus test;
};

/// Stratified per room type and deterministic in `spec.seed`. Throws
/// DataError when a present room type has fewer than two samples.
CorpusSplit split(const Corpus& c, const SplitSpec& spec);

/// `n` procedurally generated rooms with all five size-code variants each.
Corpus make_fixture_corpus(std::size_t n, std::uint64_t seed);

/// Manifest form of a catalog: [{id, name, customized, default_size_mm, size_range_mm}].
nlohmann::json catalog_to_json(const Catalog& c);
Catalog catalog_from_json(const nlohmann::json& arr);

/// Meters stored on disk as integer millimeters.
std::int64_t to_mm(double meters);
double from_mm(std::int64_t mm);

}  // namespace cslayout
