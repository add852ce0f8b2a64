// Copyright (C) 2026 The cslayout Authors
// SPDX-License-Identifier: Apache-2.0
//

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <unistd.h>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "cslayout/dataset.hpp"
#include "cslayout/hash.hpp"

namespace cslayout {
namespace {

namespace fs = std::filesystem;

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("cslayout_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

TEST(Catalog, RejectsBadIds) {
  auto e = standard_catalog().entries();
  e[1].code.id = 0;
  EXPECT_THROW(Catalog{e}, DataError);
  auto n = standard_catalog().entries();
  n[1].code.name = n[0].code.name;
  EXPECT_THROW(Catalog{n}, DataError);
}

TEST(Catalog, JsonRoundTrip) {
  const Catalog& c = standard_catalog();
  EXPECT_EQ(catalog_from_json(catalog_to_json(c)), c);
  EXPECT_FALSE(c.customized_ids().empty());
  ASSERT_TRUE(c.find("bed"));
  EXPECT_EQ(c.at(*c.find("bed")).code.name, "bed");
}

TEST(Millimeters, RoundTrip) {
  for (std::int64_t mm : {0, 1, 2, 999, 1500, 123456}) EXPECT_EQ(to_mm(from_mm(mm)), mm);
}

TEST(Fixtures, SatisfyCorpusInvariants) {
  const Corpus c = make_fixture_corpus(40, 3);
  EXPECT_EQ(validate_corpus(c), std::vector<std::string>{});
  for (const auto& s : c.samples) {
    EXPECT_EQ(s.variants.size(), static_cast<std::size_t>(kSizeCodeCount)) << s.id;
    for (const auto& v : s.variants) {
      const auto i = find_target_instance(s.layout, v.target_category.id);
      ASSERT_TRUE(i) << s.id;
      // Records store millimeters, so the stored result is the exact growth snapped to 1 mm.
      const FurnitureInstance want = apply_size_code(s.layout.furniture[*i], v.size_code);
      const FurnitureInstance& got = v.result.furniture[*i];
      EXPECT_NEAR(got.position.x, want.position.x, 1e-9) << s.id;
      EXPECT_NEAR(got.position.y, want.position.y, 1e-9) << s.id;
      EXPECT_NEAR(got.size.length, want.size.length, 1e-9) << s.id;
      EXPECT_NEAR(got.size.width, want.size.width, 1e-9) << s.id;
      EXPECT_EQ(got.orientation, want.orientation) << s.id;
    }
  }
}

TEST(Fixtures, CoverEveryRoomType) {
  const Corpus c = make_fixture_corpus(14, 0);
  for (auto t : kAllRoomTypes) EXPECT_EQ(c.per_type_counts.at(t), 2u);
}

TEST(Fixtures, DeterministicInSeed) {
  EXPECT_EQ(make_fixture_corpus(6, 9), make_fixture_corpus(6, 9));
  EXPECT_NE(make_fixture_corpus(6, 9), make_fixture_corpus(6, 10));
}

TEST(Records, RoundTripExactly) {
  const Corpus c = make_fixture_corpus(20, 1);
  for (const auto& s : c.samples) {
    const std::string text = format_sample_record(s);
    const Sample back = parse_sample_record(text, c.catalog);
    EXPECT_EQ(back, s) << s.id;
    EXPECT_EQ(format_sample_record(back), text);
  }
}

std::string line_replaced(const std::string& text, const std::string& prefix, const std::string& with) {
  std::istringstream in(text);
  std::string out, line;
  bool done = false;
  while (std::getline(in, line)) {
    if (!done && line.rfind(prefix, 0) == 0) {
      line = with;
      done = true;
    }
    out += line + "\n";
  }
  return out;
}

TEST(Records, MalformedInputNamesTheLine) {
  const Corpus c = make_fixture_corpus(1, 0);
  const std::string good = format_sample_record(c.samples[0]);
  const auto expect_line = [&](const std::string& text, const std::string& fragment) {
    try {
      parse_sample_record(text, c.catalog, "r.rec");
      ADD_FAILURE() << "accepted: " << fragment;
    } catch (const DataError& e) {
      EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
      EXPECT_EQ(std::string(e.what()).rfind("r.rec:", 0), 0u) << e.what();
    }
  };
  expect_line(line_replaced(good, "scene", "scene garage"), "unknown room type");
  expect_line(line_replaced(good, "cslayout-sample", "cslayout-sample 2"), "unsupported record version");
  expect_line(line_replaced(good, "bounds", "bounds 0 0 x 10"), "expected an integer");
  expect_line(line_replaced(good, "furniture", "furniture cat=99 x=1 y=1"), "unknown category");
  expect_line(line_replaced(good, "variant", "variant cat=0 code=HeightUp x=1 y=1"), "unknown size code");
  expect_line(line_replaced(good, "end", "fin"), "unknown record tag");
  expect_line(good.substr(0, good.rfind("end")), "missing its 'end'");
}

TEST(Corpus, SaveLoadRoundTrip) {
  const fs::path dir = temp_dir("corpus");
  const Corpus c = make_fixture_corpus(9, 4);
  save_corpus(c, dir);
  EXPECT_EQ(load_corpus(dir), c);
  fs::remove_all(dir);
}

TEST(Corpus, MissingManifestIsADataError) {
  const fs::path dir = temp_dir("empty");
  EXPECT_THROW(load_corpus(dir), DataError);
  fs::remove_all(dir);
}

TEST(Corpus, DuplicateIdsAreRejected) {
  const fs::path dir = temp_dir("dup");
  Corpus c = make_fixture_corpus(2, 4);
  c.samples[1].id = c.samples[0].id;
  c.per_type_counts = count_room_types(c.samples);
  save_corpus(c, dir);
  EXPECT_THROW(load_corpus(dir), DataError);
  fs::remove_all(dir);
}

TEST(Corpus, CorruptManifestIsADataError) {
  const fs::path dir = temp_dir("corrupt");
  save_corpus(make_fixture_corpus(2, 0), dir);
  std::ofstream(dir / "manifest.json") << "{\"format\": 3";
  EXPECT_THROW(load_corpus(dir), DataError);
  fs::remove_all(dir);
}

TEST(Split, StratifiedDisjointAndDeterministic) {
  const Corpus c = make_fixture_corpus(70, 2);
  const auto a = split(c, {0.8, 5});
  const auto b = split(c, {0.8, 5});
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test, b.test);
  EXPECT_EQ(a.train.samples.size() + a.test.samples.size(), c.samples.size());
  for (auto t : kAllRoomTypes) {
    EXPECT_EQ(a.train.per_type_counts.at(t), 8u);
    EXPECT_EQ(a.test.per_type_counts.at(t), 2u);
  }
  std::set<std::string> ids;
  for (const auto& s : a.train.samples) ids.insert(s.id);
  for (const auto& s : a.test.samples) EXPECT_FALSE(ids.count(s.id)) << s.id;
  EXPECT_NE(split(c, {0.8, 6}).test, a.test);
}

TEST(Split, SingletonTypeIsADataError) {
  EXPECT_THROW(split(make_fixture_corpus(7, 0), {0.5, 0}), DataError);
  EXPECT_THROW(split(make_fixture_corpus(14, 0), {1.0, 0}), DomainError);
}

TEST(PublishedCounts, MatchTheDesignerCorpus) {
  std::size_t total = 0;
  for (const auto& [t, n] : kPublishedRoomTypeCounts) total += n;
  EXPECT_EQ(total, 710'700u);
}

}  // namespace
}  // namespace cslayout
