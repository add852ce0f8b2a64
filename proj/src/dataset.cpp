// Copyright (C) 2026 The cslayout Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "cslayout/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cslayout/random.hpp"

namespace cslayout {

namespace fs = std::filesystem;
using nlohmann::json;

std::int64_t to_mm(double meters) { return std::llround(meters * 1000.0); }
double from_mm(std::int64_t mm) { return static_cast<double>(mm) / 1000.0; }

// ---------------------------------------------------------------------------
// Catalog

Catalog::Catalog(std::vector<CatalogEntry> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const CatalogEntry& a, const CatalogEntry& b) { return a.code.id < b.code.id; });
  std::set<std::string> names;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].code.id != static_cast<int>(i)) {
      throw DataError("catalog ids must be exactly 0..C-1; missing or duplicate id near " +
                      std::to_string(i));
    }
    if (!names.insert(entries[i].code.name).second) {
      throw DataError("duplicate catalog name '" + entries[i].code.name + "'");
    }
    const auto& e = entries[i];
    const auto& r = e.size_range;
    if (!(r.length_min > 0 && r.width_min > 0 && r.height_min > 0 && r.length_min <= r.length_max &&
          r.width_min <= r.width_max && r.height_min <= r.height_max)) {
      throw DataError("catalog entry '" + e.code.name + "' has an invalid size range");
    }
    if (!r.contains(e.default_size)) {
      throw DataError("catalog entry '" + e.code.name + "' default size lies outside its range");
    }
  }
  entries_ = std::move(entries);
}

const CatalogEntry& Catalog::at(int id) const {
  if (!contains(id)) throw DomainError("unknown category id " + std::to_string(id));
  return entries_[static_cast<std::size_t>(id)];
}

std::optional<int> Catalog::find(std::string_view name) const {
  for (const auto& e : entries_) {
    if (e.code.name == name) return e.code.id;
  }
  return std::nullopt;
}

std::vector<int> Catalog::customized_ids() const {
  std::vector<int> ids;
  for (const auto& e : entries_) {
    if (e.code.customized) ids.push_back(e.code.id);
  }
  return ids;
}

FurnitureInstance Catalog::make_instance(int id, Point2 center, Orientation facing) const {
  const auto& e = at(id);
  FurnitureInstance f;
  f.category = e.code;
  f.position = center;
  f.size = e.default_size;
  f.orientation = facing;
  f.default_size = e.default_size;
  f.size_range = e.size_range;
  f.customized = e.code.customized;
  return f;
}

const Catalog& standard_catalog() {
  struct Row {
    const char* name;
    bool customized;
    int length, width, height;  // mm
  };
  static const Row rows[] = {
      {"bed", true, 2000, 1500, 500},
      {"wardrobe", true, 600, 1200, 2200},
      {"nightstand", false, 450, 450, 550},
      {"desk", true, 600, 1200, 750},
      {"chair", false, 500, 500, 900},
      {"bookshelf", true, 350, 900, 1800},
      {"tatami_platform", true, 1800, 1800, 400},
      {"sofa", false, 900, 2000, 850},
      {"tv_cabinet", true, 450, 1600, 500},
      {"sideboard", true, 450, 1200, 850},
      {"kitchen_counter", true, 600, 1800, 850},
      {"fridge", false, 700, 700, 1800},
      {"tall_cabinet", true, 600, 600, 2100},
      {"vanity", true, 500, 900, 850},
      {"toilet", false, 700, 400, 800},
      {"shower", false, 900, 900, 2000},
      {"storage_cabinet", true, 450, 1000, 1200},
      {"washing_machine", false, 600, 600, 850},
      {"dining_table", false, 800, 1400, 750},
  };
  static const Catalog catalog = [] {
    std::vector<CatalogEntry> entries;
    int id = 0;
    for (const auto& r : rows) {
      CatalogEntry e;
      e.code = {id++, r.name, r.customized};
      e.default_size = {from_mm(r.length), from_mm(r.width), from_mm(r.height)};
      if (r.customized) {
        e.size_range = {from_mm(r.length / 2), from_mm(r.length * 2), from_mm(r.width / 2),
                        from_mm(r.width * 2),  from_mm(r.height / 2), from_mm(r.height * 2)};
      } else {
        e.size_range = {e.default_size.length, e.default_size.length, e.default_size.width,
                        e.default_size.width,  e.default_size.height, e.default_size.height};
      }
      entries.push_back(e);
    }
    return Catalog(std::move(entries));
  }();
  return catalog;
}

// ---------------------------------------------------------------------------
// Validation

std::map<RoomType, std::size_t> count_room_types(const std::vector<Sample>& samples) {
  std::map<RoomType, std::size_t> counts;
  for (const auto& s : samples) ++counts[s.layout.scene.room_type];
  return counts;
}

namespace {

constexpr double kMmTol = 5e-4;

void validate_instance(const FurnitureInstance& f, const Catalog& catalog, const std::string& where,
                       std::vector<std::string>& out) {
  if (!catalog.contains(f.category.id)) {
    out.push_back(where + ": unknown category id " + std::to_string(f.category.id));
    return;
  }
  if (!(catalog.at(f.category.id).code == f.category) || f.customized != f.category.customized) {
    out.push_back(where + ": category fields disagree with the catalog");
  }
  const auto& s = f.size;
  if (!(s.length > 0 && s.width > 0 && s.height > 0)) out.push_back(where + ": non-positive size");
  if (!f.size_range.contains(f.size, kMmTol)) out.push_back(where + ": size outside size range");
  if (!f.size_range.contains(f.default_size, kMmTol)) {
    out.push_back(where + ": default size outside size range");
  }
  if (!f.customized && !(f.size == f.default_size)) {
    out.push_back(where + ": finished furniture must keep its default size");
  }
  if (!std::isfinite(f.position.x) || !std::isfinite(f.position.y)) {
    out.push_back(where + ": non-finite position");
  }
}

}  // namespace

std::vector<std::string> validate_corpus(const Corpus& c) {
  std::vector<std::string> out;
  for (const auto& s : c.samples) {
    const std::string where = "sample " + s.id;
    for (const auto& p : validate_scene(s.layout.scene)) out.push_back(where + ": " + p);
    for (std::size_t i = 0; i < s.layout.furniture.size(); ++i) {
      validate_instance(s.layout.furniture[i], c.catalog, where + " furniture " + std::to_string(i),
                        out);
    }
    for (const auto& v : validate_layout(s.layout, true)) out.push_back(where + ": " + v.message);
    for (std::size_t j = 0; j < s.variants.size(); ++j) {
      const auto& v = s.variants[j];
      const std::string vw = where + " variant " + std::to_string(j);
      const auto target = find_target_instance(s.layout, v.target_category.id);
      if (!target) {
        out.push_back(vw + ": target category " + std::to_string(v.target_category.id) +
                      " is not a customized instance of the base layout");
        continue;
      }
      if (!(v.result.scene == s.layout.scene) ||
          v.result.furniture.size() != s.layout.furniture.size()) {
        out.push_back(vw + ": result must keep the base scene and furniture list");
        continue;
      }
      for (std::size_t i = 0; i < s.layout.furniture.size(); ++i) {
        if (i == *target) {
          validate_instance(v.result.furniture[i], c.catalog, vw + " result", out);
        } else if (!(v.result.furniture[i] == s.layout.furniture[i])) {
          out.push_back(vw + ": result changes a non-targeted instance");
        }
      }
    }
  }
  if (count_room_types(c.samples) != c.per_type_counts) {
    out.push_back("per-type counts disagree with the sample list");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sample records

namespace {

std::string mm(double meters) { return std::to_string(to_mm(meters)); }

void write_furniture_fields(std::ostream& os, const FurnitureInstance& f) {
  os << " x=" << mm(f.position.x) << " y=" << mm(f.position.y) << " l=" << mm(f.size.length)
     << " w=" << mm(f.size.width) << " h=" << mm(f.size.height)
     << " facing=" << to_string(f.orientation) << " dl=" << mm(f.default_size.length)
     << " dw=" << mm(f.default_size.width) << " dh=" << mm(f.default_size.height)
     << " lmin=" << mm(f.size_range.length_min) << " lmax=" << mm(f.size_range.length_max)
     << " wmin=" << mm(f.size_range.width_min) << " wmax=" << mm(f.size_range.width_max)
     << " hmin=" << mm(f.size_range.height_min) << " hmax=" << mm(f.size_range.height_max);
}

void write_box(std::ostream& os, const char* tag, const AABB& b) {
  os << tag << ' ' << mm(b.x_min) << ' ' << mm(b.y_min) << ' ' << mm(b.x_max) << ' '
     << mm(b.y_max) << '\n';
}

class RecordParser {
 public:
  RecordParser(const std::string& text, const Catalog& catalog, std::string source)
      : in_(text), catalog_(catalog), source_(std::move(source)) {}

  Sample parse() {
    Sample s;
    bool have_header = false, have_scene = false, have_bounds = false, ended = false;
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      tokens_ = split(line);
      if (tokens_.empty() || tokens_[0][0] == '#') continue;
      if (ended) fail("content after 'end'");
      const std::string& tag = tokens_[0];
      if (!have_header) {
        if (tag != "cslayout-sample") fail("expected 'cslayout-sample <version>' header");
        expect_count(2);
        if (integer(1) != 1) fail("unsupported record version " + tokens_[1]);
        have_header = true;
      } else if (tag == "id") {
        expect_count(2);
        s.id = tokens_[1];
      } else if (tag == "scene") {
        expect_count(2);
        auto t = parse_room_type(tokens_[1]);
        if (!t) fail("unknown room type '" + tokens_[1] + "'");
        s.layout.scene.room_type = *t;
        have_scene = true;
      } else if (tag == "bounds") {
        s.layout.scene.bounds = box();
        have_bounds = true;
      } else if (tag == "wall") {
        expect_count(6);
        s.layout.scene.walls.push_back({{from_mm(integer(1)), from_mm(integer(2))},
                                        {from_mm(integer(3)), from_mm(integer(4))},
                                        from_mm(integer(5))});
      } else if (tag == "door") {
        s.layout.scene.doors.push_back(box());
      } else if (tag == "window") {
        s.layout.scene.windows.push_back(box());
      } else if (tag == "furniture") {
        if (!pending_variants_.empty()) fail("furniture entries must precede variants");
        s.layout.furniture.push_back(furniture(nullptr));
      } else if (tag == "variant") {
        SizeCode code = SizeCode::Default;
        FurnitureInstance f = furniture(&code);
        pending_variants_.push_back({code, f, line_no_});
      } else if (tag == "end") {
        ended = true;
      } else {
        fail("unknown record tag '" + tag + "'");
      }
    }
    if (!have_header) fail("empty record");
    if (!have_scene || !have_bounds) fail("record lacks a scene/bounds block");
    if (!ended) fail("record is missing its 'end' line");
    if (s.id.empty()) fail("record lacks an id");

    for (const auto& pv : pending_variants_) {
      line_no_ = pv.line;
      const auto target = find_target_instance(s.layout, pv.result.category.id);
      if (!target) {
        fail("variant references category " + std::to_string(pv.result.category.id) +
             " with no customized instance in the layout");
      }
      LayoutVariant v;
      v.target_category = pv.result.category;
      v.size_code = pv.code;
      v.result = s.layout;
      v.result.furniture[*target] = pv.result;
      s.variants.push_back(std::move(v));
    }
    return s;
  }

 private:
  struct PendingVariant {
    SizeCode code;
    FurnitureInstance result;
    int line;
  };

  [[noreturn]] void fail(const std::string& msg) const {
    throw DataError(source_ + ":" + std::to_string(line_no_) + ": " + msg);
  }

  static std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream ss(line);
    std::string t;
    while (ss >> t) out.push_back(t);
    return out;
  }

  void expect_count(std::size_t n) const {
    if (tokens_.size() != n) {
      fail("'" + tokens_[0] + "' expects " + std::to_string(n - 1) + " fields, got " +
           std::to_string(tokens_.size() - 1));
    }
  }

  std::int64_t parse_int(const std::string& t) const {
    std::int64_t v = 0;
    const auto* end = t.data() + t.size();
    auto [p, ec] = std::from_chars(t.data(), end, v);
    if (ec != std::errc() || p != end) fail("expected an integer, got '" + t + "'");
    return v;
  }

  std::int64_t integer(std::size_t i) const { return parse_int(tokens_[i]); }

  AABB box() const {
    expect_count(5);
    AABB b{from_mm(integer(1)), from_mm(integer(2)), from_mm(integer(3)), from_mm(integer(4))};
    if (b.x_min > b.x_max || b.y_min > b.y_max) fail("box has min > max");
    return b;
  }

  // `code` non-null means a variant line (which carries code=<name>).
  FurnitureInstance furniture(SizeCode* code) {
    std::map<std::string, std::string> kv;
    for (std::size_t i = 1; i < tokens_.size(); ++i) {
      const auto eq = tokens_[i].find('=');
      if (eq == std::string::npos || eq == 0) fail("expected key=value, got '" + tokens_[i] + "'");
      if (!kv.emplace(tokens_[i].substr(0, eq), tokens_[i].substr(eq + 1)).second) {
        fail("duplicate key '" + tokens_[i].substr(0, eq) + "'");
      }
    }
    const auto take = [&](const char* key) -> std::optional<std::string> {
      auto it = kv.find(key);
      if (it == kv.end()) return std::nullopt;
      std::string v = it->second;
      kv.erase(it);
      return v;
    };
    const auto need_mm = [&](const char* key) {
      auto v = take(key);
      if (!v) fail(std::string("missing field '") + key + "'");
      return from_mm(parse_int(*v));
    };
    const auto opt_mm = [&](const char* key, double fallback) {
      auto v = take(key);
      return v ? from_mm(parse_int(*v)) : fallback;
    };

    auto cat = take("cat");
    if (!cat) fail("missing field 'cat'");
    const auto id = parse_int(*cat);
    if (!catalog_.contains(static_cast<int>(id))) {
      fail("unknown category id " + std::to_string(id));
    }
    const auto& entry = catalog_.at(static_cast<int>(id));
    if (code) {
      auto c = take("code");
      if (!c) fail("variant lacks 'code'");
      auto parsed = parse_size_code(*c);
      if (!parsed) fail("unknown size code '" + *c + "'");
      *code = *parsed;
    }

    FurnitureInstance f;
    f.category = entry.code;
    f.customized = entry.code.customized;
    f.position = {need_mm("x"), need_mm("y")};
    f.size = {need_mm("l"), need_mm("w"), need_mm("h")};
    f.orientation = Orientation::North;
    if (auto facing = take("facing")) {
      auto o = parse_orientation(*facing);
      if (!o) fail("unknown facing '" + *facing + "'");
      f.orientation = *o;
    }
    f.default_size = {opt_mm("dl", entry.default_size.length), opt_mm("dw", entry.default_size.width),
                      opt_mm("dh", entry.default_size.height)};
    const auto& r = entry.size_range;
    f.size_range = {opt_mm("lmin", r.length_min), opt_mm("lmax", r.length_max),
                    opt_mm("wmin", r.width_min),  opt_mm("wmax", r.width_max),
                    opt_mm("hmin", r.height_min), opt_mm("hmax", r.height_max)};
    if (!kv.empty()) fail("unknown field '" + kv.begin()->first + "'");
    std::vector<std::string> problems;
    validate_instance(f, catalog_, "furniture", problems);
    if (!problems.empty()) fail(problems.front());
    return f;
  }

  std::istringstream in_;
  const Catalog& catalog_;
  std::string source_;
  int line_no_ = 0;
  std::vector<std::string> tokens_;
  std::vector<PendingVariant> pending_variants_;
};

}  // namespace

std::string format_sample_record(const Sample& s) {
  std::ostringstream os;
  os << "cslayout-sample 1\n";
  os << "id " << s.id << '\n';
  const auto& sc = s.layout.scene;
  os << "scene " << to_string(sc.room_type) << '\n';
  write_box(os, "bounds", sc.bounds);
  for (const auto& w : sc.walls) {
    os << "wall " << mm(w.a.x) << ' ' << mm(w.a.y) << ' ' << mm(w.b.x) << ' ' << mm(w.b.y) << ' '
       << mm(w.thickness) << '\n';
  }
  for (const auto& d : sc.doors) write_box(os, "door", d);
  for (const auto& w : sc.windows) write_box(os, "window", w);
  for (const auto& f : s.layout.furniture) {
    os << "furniture cat=" << f.category.id;
    write_furniture_fields(os, f);
    os << '\n';
  }
  for (const auto& v : s.variants) {
    const auto target = find_target_instance(s.layout, v.target_category.id);
    if (!target) {
      throw DomainError("sample " + s.id + ": variant targets a category absent from the layout");
    }
    os << "variant cat=" << v.target_category.id << " code=" << to_string(v.size_code);
    write_furniture_fields(os, v.result.furniture.at(*target));
    os << '\n';
  }
  os << "end\n";
  return os.str();
}

Sample parse_sample_record(const std::string& text, const Catalog& catalog,
                           const std::string& source) {
  return RecordParser(text, catalog, source).parse();
}

// ---------------------------------------------------------------------------
// Corpus files

json catalog_to_json(const Catalog& c) {
  json arr = json::array();
  for (const auto& e : c.entries()) {
    const auto& d = e.default_size;
    const auto& r = e.size_range;
    arr.push_back({{"id", e.code.id},
                   {"name", e.code.name},
                   {"customized", e.code.customized},
                   {"default_size_mm", {to_mm(d.length), to_mm(d.width), to_mm(d.height)}},
                   {"size_range_mm",
                    {to_mm(r.length_min), to_mm(r.length_max), to_mm(r.width_min),
                     to_mm(r.width_max), to_mm(r.height_min), to_mm(r.height_max)}}});
  }
  return arr;
}

Catalog catalog_from_json(const json& arr) {
  std::vector<CatalogEntry> entries;
  for (const auto& j : arr) {
    CatalogEntry e;
    e.code.id = j.at("id").get<int>();
    e.code.name = j.at("name").get<std::string>();
    e.code.customized = j.at("customized").get<bool>();
    const auto d = j.at("default_size_mm").get<std::vector<std::int64_t>>();
    const auto r = j.at("size_range_mm").get<std::vector<std::int64_t>>();
    if (d.size() != 3 || r.size() != 6) throw DataError("catalog size arrays have wrong length");
    e.default_size = {from_mm(d[0]), from_mm(d[1]), from_mm(d[2])};
    e.size_range = {from_mm(r[0]), from_mm(r[1]), from_mm(r[2]),
                    from_mm(r[3]), from_mm(r[4]), from_mm(r[5])};
    entries.push_back(std::move(e));
  }
  return Catalog(std::move(entries));
}

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError(p.string() + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

Corpus load_corpus(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  if (!fs::exists(manifest_path)) throw DataError(dir.string() + ": missing manifest");
  json manifest;
  try {
    manifest = json::parse(read_file(manifest_path));
  } catch (const json::parse_error& e) {
    throw DataError(manifest_path.string() + ": " + e.what());
  }

  Corpus c;
  std::map<RoomType, std::size_t> expected;
  std::vector<std::string> files;
  try {
    if (manifest.value("format", "") != "cslayout-corpus") {
      throw DataError("manifest format tag is not 'cslayout-corpus'");
    }
    if (manifest.at("version").get<int>() != 1) throw DataError("unsupported manifest version");
    c.catalog = catalog_from_json(manifest.at("catalog"));
    for (const auto& [name, n] : manifest.at("room_type_counts").items()) {
      auto t = parse_room_type(name);
      if (!t) throw DataError("unknown room type '" + name + "' in counts");
      if (n.get<std::size_t>() > 0) expected[*t] = n.get<std::size_t>();
    }
    files = manifest.at("files").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw DataError(manifest_path.string() + ": schema violation: " + e.what());
  } catch (const DataError& e) {
    throw DataError(manifest_path.string() + ": " + e.what());
  }

  std::set<std::string> ids;
  for (const auto& rel : files) {
    const fs::path p = dir / rel;
    Sample s = parse_sample_record(read_file(p), c.catalog, p.string());
    if (!ids.insert(s.id).second) throw DataError(p.string() + ": duplicate sample id " + s.id);
    c.samples.push_back(std::move(s));
  }
  c.per_type_counts = count_room_types(c.samples);
  if (c.per_type_counts != expected) {
    throw DataError(manifest_path.string() + ": room_type_counts disagree with the listed samples");
  }
  if (auto problems = validate_corpus(c); !problems.empty()) {
    throw DataError(dir.string() + ": " + problems.front());
  }
  return c;
}

void save_corpus(const Corpus& c, const fs::path& dir) {
  fs::create_directories(dir / "samples");
  json manifest;
  manifest["format"] = "cslayout-corpus";
  manifest["version"] = 1;
  manifest["catalog"] = catalog_to_json(c.catalog);
  json counts = json::object();
  for (const auto& [t, n] : c.per_type_counts) counts[std::string(to_string(t))] = n;
  manifest["room_type_counts"] = counts;
  json files = json::array();
  for (std::size_t i = 0; i < c.samples.size(); ++i) {
    std::ostringstream name;
    name << "samples/" << std::setw(6) << std::setfill('0') << i << ".rec";
    files.push_back(name.str());
    std::ofstream out(dir / name.str(), std::ios::binary);
    out << format_sample_record(c.samples[i]);
    if (!out) throw DataError((dir / name.str()).string() + ": write failed");
  }
  manifest["files"] = files;
  std::ofstream out(dir / "manifest.json", std::ios::binary);
  out << manifest.dump(2) << '\n';
  if (!out) throw DataError((dir / "manifest.json").string() + ": write failed");
}

// ---------------------------------------------------------------------------
// Split

CorpusSplit split(const Corpus& c, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw DomainError("train_fraction must lie strictly between 0 and 1");
  }
  std::map<RoomType, std::vector<std::size_t>> by_type;
  for (std::size_t i = 0; i < c.samples.size(); ++i) {
    by_type[c.samples[i].layout.scene.room_type].push_back(i);
  }
  std::vector<std::size_t> train_idx, test_idx;
  for (auto& [type, idx] : by_type) {
    const std::size_t n = idx.size();
    if (n < 2) {
      throw DataError("room type '" + std::string(to_string(type)) +
                      "' has fewer than 2 samples; cannot split");
    }
    Rng rng(mix_seed(spec.seed, static_cast<std::uint64_t>(type)));
    rng.shuffle(idx);
    auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(n) * spec.train_fraction));
    n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
    train_idx.insert(train_idx.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    test_idx.insert(test_idx.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());

  const auto gather = [&](const std::vector<std::size_t>& idx) {
    Corpus out;
    out.catalog = c.catalog;
    out.samples.reserve(idx.size());
    for (auto i : idx) out.samples.push_back(c.samples[i]);
    out.per_type_counts = count_room_types(out.samples);
    return out;
  };
  return {gather(train_idx), gather(test_idx)};
}

}  // namespace cslayout
