// Copyright (C) 2026 The cslayout Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "cslayout/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <optional>

#include <nlohmann/json.hpp>

#include "cslayout/nn/ops.hpp"

namespace cslayout {

using nlohmann::json;
namespace ops = cslayout::nn;
using nn::Tensor;

static_assert(std::endian::native == std::endian::little, "checkpoints are little-endian");

RenderConfig ModelConfig::render_config() const {
  RenderConfig rc;
  rc.height = resolution;
  rc.width = resolution;
  rc.softness = softness;
  return rc;
}

std::vector<double> scene_features(const RoomScene& scene) {
  std::vector<double> f(kSceneFeatureCount, 0.0);
  f[static_cast<std::size_t>(scene.room_type)] = 1.0;
  f[kRoomTypeCount] = scene.bounds.width() / kSceneFeatureScale;
  f[kRoomTypeCount + 1] = scene.bounds.height() / kSceneFeatureScale;
  const AABB& b = scene.bounds;
  const auto opening = [&](const std::vector<AABB>& boxes, std::size_t at) {
    if (boxes.empty()) return;
    const AABB& o = boxes.front();
    const double u = (0.5 * (o.x_min + o.x_max) - b.x_min) / b.width();
    const double v = (0.5 * (o.y_min + o.y_max) - b.y_min) / b.height();
    f[at] = u;
    f[at + 1] = v;
    // Ties resolve to the earlier edge.
    const double dist[4] = {v, 1.0 - u, 1.0 - v, u};
    f[at + 2 + static_cast<std::size_t>(std::min_element(dist, dist + 4) - dist)] = 1.0;
  };
  opening(scene.doors, kRoomTypeCount + 2);
  opening(scene.windows, kRoomTypeCount + 2 + kOpeningFeatureCount);
  return f;
}

std::vector<double> to_chw(const RenderedImage& img) {
  const std::size_t hw = static_cast<std::size_t>(img.height) * img.width;
  std::vector<double> out(3 * hw);
  for (std::size_t p = 0; p < hw; ++p) {
    for (std::size_t c = 0; c < 3; ++c) out[c * hw + p] = img.pixels[p * 3 + c];
  }
  return out;
}

Tensor one_hot(std::span<const std::size_t> labels, std::size_t n) {
  std::vector<double> v(labels.size() * n, 0.0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= n) throw std::invalid_argument("one_hot: label out of range");
    v[i * n + labels[i]] = 1.0;
  }
  return Tensor::constant({labels.size(), n}, std::move(v));
}

Tensor soft_render(const Tensor& flat, std::size_t k, std::size_t c,
                   const std::vector<const RenderedImage*>& backgrounds, const std::vector<AABB>& bounds,
                   const RenderConfig& cfg) {
  const std::size_t b = backgrounds.size();
  const std::size_t w = k * SlotGrid::stride(c);
  if (flat.shape() != nn::Shape{b, w} || bounds.size() != b || b == 0) {
    throw std::invalid_argument("soft_render: expected flat [B, K*stride] with one background per row");
  }
  const std::size_t hw = static_cast<std::size_t>(cfg.height) * cfg.width;
  std::vector<double> out(b * 3 * hw);
  for (std::size_t i = 0; i < b; ++i) {
    SoftRasterInput in{flat.value().subspan(i * w, w), k, c, backgrounds[i], bounds[i]};
    const RenderedImage img = soft_rasterize(in, cfg);
    const auto chw = to_chw(img);
    std::copy(chw.begin(), chw.end(), out.begin() + static_cast<std::ptrdiff_t>(i * 3 * hw));
  }
  const auto shape = nn::Shape{b, 3, static_cast<std::size_t>(cfg.height), static_cast<std::size_t>(cfg.width)};
  return Tensor::make(shape, std::move(out), {flat}, [k, c, w, hw, backgrounds, bounds, cfg](nn::Node& self) {
    auto& g = self.parents[0]->grad_buffer();
    const auto& v = self.parents[0]->value;
    std::vector<double> hwc(3 * hw);
    for (std::size_t i = 0; i < backgrounds.size(); ++i) {
      const double* gi = self.grad.data() + i * 3 * hw;
      for (std::size_t p = 0; p < hw; ++p) {
        for (std::size_t ch = 0; ch < 3; ++ch) hwc[p * 3 + ch] = gi[ch * hw + p];
      }
      SoftRasterInput in{std::span<const double>(v).subspan(i * w, w), k, c, backgrounds[i], bounds[i]};
      soft_rasterize_backward(in, cfg, hwc, std::span<double>(g).subspan(i * w, w));
    }
  });
}

Model::Model(ModelConfig cfg, Catalog catalog) : cfg_(std::move(cfg)), catalog_(std::move(catalog)) {
  if (catalog_.empty()) throw std::invalid_argument("Model: empty catalog");
  cfg_.num_categories = catalog_.size();
  if (cfg_.num_categories > Palette::kMaxCategories) {
    throw std::invalid_argument("Model: catalog exceeds the palette's category colors");
  }
  if (cfg_.num_slots == 0) throw std::invalid_argument("Model: num_slots must be positive");
  const std::size_t down = std::size_t{1} << cfg_.g1_channels.size();
  if (cfg_.resolution <= 0 || cfg_.g1_channels.empty() || cfg_.d1_channels.size() != cfg_.g1_channels.size() ||
      static_cast<std::size_t>(cfg_.resolution) % down != 0 ||
      static_cast<std::size_t>(cfg_.resolution) / down == 0) {
    throw std::invalid_argument("Model: resolution must be a positive multiple of 2^(conv layers)");
  }
  if (!(cfg_.softness > 0.0)) throw std::invalid_argument("Model: softness must be positive");
  build();
}

void Model::build() {
  Rng rng(mix_seed(cfg_.seed, 0x6d6f64656cULL));
  const std::size_t c = cfg_.num_categories;
  const std::size_t side = static_cast<std::size_t>(cfg_.resolution) >> cfg_.g1_channels.size();

  std::size_t in = 3;
  for (std::size_t i = 0; i < cfg_.g1_channels.size(); ++i) {
    g1_convs_.emplace_back(params_, "g1.conv" + std::to_string(i), in, cfg_.g1_channels[i], 4, 2, 1, rng);
    in = cfg_.g1_channels[i];
  }
  g1_head_ = nn::Mlp(params_, "g1.head", in * side * side + kSceneFeatureCount,
                     {cfg_.g1_hidden, cfg_.g1_hidden}, slot_width(), rng, 0.1);

  d1_param_begin_ = params_.items().size();
  in = 3;
  for (std::size_t i = 0; i < cfg_.d1_channels.size(); ++i) {
    d1_convs_.emplace_back(params_, "d1.conv" + std::to_string(i), in, cfg_.d1_channels[i], 4, 2, 1, rng);
    in = cfg_.d1_channels[i];
  }
  d1_out_ = nn::Linear(params_, "d1.out", in * side * side, 1, rng, 0.1);
  d1_param_end_ = params_.items().size();

  trans1_ = nn::Mlp(params_, "trans1", slot_width() + c, cfg_.mlp_hidden, 5 + c, rng, 0.1);
  trans2_ = nn::Mlp(params_, "trans2", 5 + c, cfg_.mlp_hidden, 3, rng, 0.1);
  g2_ = nn::Mlp(params_, "g2", 3 + kSizeCodeCount, cfg_.mlp_hidden, 3, rng, 0.1);
}

std::vector<Tensor> Model::discriminator_params() const {
  std::vector<Tensor> out;
  for (std::size_t i = d1_param_begin_; i < d1_param_end_; ++i) out.push_back(params_.items()[i].second);
  return out;
}

std::vector<Tensor> Model::generator_params() const {
  std::vector<Tensor> out;
  for (std::size_t i = 0; i < params_.items().size(); ++i) {
    if (i < d1_param_begin_ || i >= d1_param_end_) out.push_back(params_.items()[i].second);
  }
  return out;
}

void Model::check_image(const Tensor& images, const char* who) const {
  const auto r = static_cast<std::size_t>(cfg_.resolution);
  const auto& s = images.shape();
  if (s.size() != 4 || s[1] != 3 || s[2] != r || s[3] != r) {
    throw std::invalid_argument(std::string(who) + ": expected images [B,3," + std::to_string(r) + "," +
                                std::to_string(r) + "], got " + nn::to_string(s));
  }
}

Tensor Model::g1(const Tensor& images, const Tensor& scene) const {
  check_image(images, "g1");
  const std::size_t b = images.dim(0);
  if (scene.shape() != nn::Shape{b, kSceneFeatureCount}) {
    throw std::invalid_argument("g1: scene features must be [B," + std::to_string(kSceneFeatureCount) + "]");
  }
  Tensor h = images;
  for (const auto& conv : g1_convs_) h = ops::leaky_relu(conv(h));
  h = ops::reshape(h, {b, h.size() / b});
  Tensor raw = g1_head_(ops::concat_cols({h, scene}));
  const std::size_t c = cfg_.num_categories, s = slot_stride(), k = cfg_.num_slots;
  Tensor x = ops::reshape(raw, {b * k, s});
  Tensor y = ops::concat_cols({ops::slice_cols(x, 0, 1 + c), ops::sigmoid(ops::slice_cols(x, 1 + c, 4)),
                               ops::slice_cols(x, 5 + c, kOrientationCount)});
  return ops::reshape(y, {b, k * s});
}

Tensor Model::d1(const Tensor& images) const {
  check_image(images, "d1");
  const std::size_t b = images.dim(0);
  Tensor h = images;
  for (const auto& conv : d1_convs_) h = ops::leaky_relu(conv(h), 0.2);
  return d1_out_(ops::reshape(h, {b, h.size() / b}));
}

Tensor Model::layout_features(const Tensor& flat) const {
  const std::size_t c = cfg_.num_categories, s = slot_stride(), k = cfg_.num_slots;
  if (flat.shape().size() != 2 || flat.dim(1) != k * s) {
    throw std::invalid_argument("layout_features: expected flat slots [R, K*stride]");
  }
  const std::size_t rows = flat.dim(0);
  Tensor x = ops::reshape(flat, {rows * k, s});
  Tensor y = ops::concat_cols({ops::sigmoid(ops::slice_cols(x, 0, 1)),
                               ops::softmax_rows(ops::slice_cols(x, 1, c)), ops::slice_cols(x, 1 + c, 4),
                               ops::softmax_rows(ops::slice_cols(x, 5 + c, kOrientationCount))});
  return ops::reshape(y, {rows, k * s});
}

Tensor Model::trans1(const Tensor& flat, const Tensor& label1) const {
  if (label1.shape().size() != 2 || label1.dim(1) != cfg_.num_categories || label1.dim(0) != flat.dim(0)) {
    throw std::invalid_argument("trans1: label_1 must be one-hot [R, C]");
  }
  return trans1_(ops::concat_cols({layout_features(flat), label1}));
}

Tensor Model::tp1_size(const Tensor& raw) { return ops::exp(ops::slice_cols(raw, 0, 3)); }
Tensor Model::tp1_location(const Tensor& raw) { return ops::sigmoid(ops::slice_cols(raw, 3, 2)); }
Tensor Model::tp1_category_logits(const Tensor& raw) const {
  return ops::slice_cols(raw, 5, cfg_.num_categories);
}

Tensor Model::trans2(const Tensor& raw) const {
  if (raw.shape().size() != 2 || raw.dim(1) != 5 + cfg_.num_categories) {
    throw std::invalid_argument("trans2: expected trans1 output [R, 5 + C]");
  }
  Tensor log_size = ops::slice_cols(raw, 0, 3);
  Tensor in = ops::concat_cols({log_size, tp1_location(raw), ops::softmax_rows(tp1_category_logits(raw))});
  return ops::add(log_size, trans2_(in));
}

Tensor Model::g2(const Tensor& log_ls1, const Tensor& label2) const {
  if (log_ls1.shape().size() != 2 || log_ls1.dim(1) != 3 || label2.shape() != nn::Shape{log_ls1.dim(0), kSizeCodeCount}) {
    throw std::invalid_argument("g2: expected log ls1 [R,3] and one-hot label_2 [R,5]");
  }
  return ops::add(log_ls1, g2_(ops::concat_cols({log_ls1, label2})));
}

RenderedImage Model::scene_image(const RoomScene& scene) const {
  return rasterize_scene(scene, cfg_.render_config());
}

SlotGrid Model::g1_forward(const RoomScene& scene) const { return g1_forward(scene_image(scene), scene); }

SlotGrid Model::g1_forward(const RenderedImage& image, const RoomScene& scene) const {
  if (image.height != cfg_.resolution || image.width != cfg_.resolution) {
    throw std::invalid_argument("g1_forward: image shape does not match the model resolution");
  }
  nn::NoGradGuard ng;
  const auto r = static_cast<std::size_t>(cfg_.resolution);
  Tensor img = Tensor::constant({1, 3, r, r}, to_chw(image));
  Tensor sc = Tensor::constant({1, kSceneFeatureCount}, scene_features(scene));
  Tensor flat = g1(img, sc);
  return SlotGrid::from_flat(flat.value(), cfg_.num_slots, cfg_.num_categories);
}

double Model::d1_forward(const RenderedImage& image) const {
  if (image.height != cfg_.resolution || image.width != cfg_.resolution) {
    throw std::invalid_argument("d1_forward: image shape does not match the model resolution");
  }
  nn::NoGradGuard ng;
  const auto r = static_cast<std::size_t>(cfg_.resolution);
  return sigmoid(d1(Tensor::constant({1, 3, r, r}, to_chw(image))).item());
}

LocalFurniture Model::trans1_forward(const SlotGrid& slots, const CategoryCode& label_1) const {
  if (!catalog_.contains(label_1.id) || !catalog_.at(label_1.id).code.customized) {
    throw DomainError("trans1: '" + label_1.name + "' is not a customized category of the catalog");
  }
  if (slots.slots.size() != cfg_.num_slots || slots.num_categories != cfg_.num_categories) {
    throw std::invalid_argument("trans1: slot grid shape does not match the model");
  }
  nn::NoGradGuard ng;
  const std::size_t label = static_cast<std::size_t>(label_1.id);
  Tensor raw = trans1(Tensor::constant({1, slot_width()}, slots.flatten()),
                      one_hot(std::span(&label, 1), cfg_.num_categories));
  LocalFurniture tp;
  const Tensor size_t1 = tp1_size(raw), loc_t1 = tp1_location(raw);
  const auto sz = size_t1.value();
  const auto loc = loc_t1.value();
  tp.size = {sz[0], sz[1], sz[2]};
  tp.location = {loc[0], loc[1]};
  const Tensor probs = ops::softmax_rows(tp1_category_logits(raw));
  tp.category.assign(probs.value().begin(), probs.value().end());
  return tp;
}

DimensionalSize Model::trans2_forward(const LocalFurniture& tp1) const {
  if (tp1.category.size() != cfg_.num_categories) {
    throw std::invalid_argument("trans2: category distribution has the wrong length");
  }
  if (!(tp1.size.length > 0 && tp1.size.width > 0 && tp1.size.height > 0)) {
    throw std::invalid_argument("trans2: tp1 size must be positive");
  }
  nn::NoGradGuard ng;
  constexpr double tiny = 1e-12;
  const auto logit = [&](double p) {
    p = std::clamp(p, tiny, 1.0 - tiny);
    return std::log(p / (1.0 - p));
  };
  std::vector<double> raw = {std::log(tp1.size.length), std::log(tp1.size.width), std::log(tp1.size.height),
                             logit(tp1.location.x), logit(tp1.location.y)};
  for (double p : tp1.category) raw.push_back(std::log(std::max(p, 1e-300)));
  const std::size_t width = raw.size();
  Tensor out = ops::exp(trans2(Tensor::constant({1, width}, std::move(raw))));
  return {{out.value()[0], out.value()[1], out.value()[2]}};
}

DimensionalSize Model::g2_forward(const DimensionalSize& ls1, SizeCode label_2) const {
  if (!(ls1.size.length > 0 && ls1.size.width > 0 && ls1.size.height > 0)) {
    throw std::invalid_argument("g2: ls1 must be positive");
  }
  nn::NoGradGuard ng;
  const std::size_t code = static_cast<std::size_t>(label_2);
  Tensor in = Tensor::constant({1, 3}, {std::log(ls1.size.length), std::log(ls1.size.width), std::log(ls1.size.height)});
  Tensor out = ops::exp(g2(in, one_hot(std::span(&code, 1), kSizeCodeCount)));
  return {{out.value()[0], out.value()[1], out.value()[2]}};
}

// ---------------------------------------------------------------------------
// Checkpoints: magic, u32 version, u64 header length, JSON header, u64 value
// count, then every parameter's values as little-endian doubles in header order.

namespace {

json config_to_json(const ModelConfig& c) {
  return {{"num_slots", c.num_slots},         {"num_categories", c.num_categories},
          {"resolution", c.resolution},       {"softness", c.softness},
          {"g1_channels", c.g1_channels},     {"g1_hidden", c.g1_hidden},
          {"d1_channels", c.d1_channels},     {"mlp_hidden", c.mlp_hidden},
          {"seed", c.seed}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  c.num_slots = j.at("num_slots").get<std::size_t>();
  c.num_categories = j.at("num_categories").get<std::size_t>();
  c.resolution = j.at("resolution").get<int>();
  c.softness = j.at("softness").get<double>();
  c.g1_channels = j.at("g1_channels").get<std::vector<std::size_t>>();
  c.g1_hidden = j.at("g1_hidden").get<std::size_t>();
  c.d1_channels = j.at("d1_channels").get<std::vector<std::size_t>>();
  c.mlp_hidden = j.at("mlp_hidden").get<std::vector<std::size_t>>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

template <typename T>
void write_pod(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T read_pod(std::istream& is, const std::string& path) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) throw CheckpointError(path + ": truncated checkpoint");
  return v;
}

}  // namespace

void Model::save(const std::filesystem::path& path) const {
  json header;
  header["format"] = "cslayout-checkpoint";
  header["version"] = kVersion;
  header["config"] = config_to_json(cfg_);
  header["catalog"] = catalog_to_json(catalog_);
  header["palette_hash"] = cfg_.render_config().palette.hash();
  header["seed"] = cfg_.seed;
  json shapes = json::array();
  for (const auto& [name, t] : params_.items()) shapes.push_back({{"name", name}, {"shape", t.shape()}});
  header["params"] = shapes;
  const std::string text = header.dump();

  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw CheckpointError(path.string() + ": cannot open for writing");
  os.write(kMagic, sizeof kMagic);
  write_pod<std::uint32_t>(os, kVersion);
  write_pod<std::uint64_t>(os, text.size());
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  write_pod<std::uint64_t>(os, params_.total_size());
  for (const auto& [_, t] : params_.items()) {
    os.write(reinterpret_cast<const char*>(t.value().data()), static_cast<std::streamsize>(t.size() * sizeof(double)));
  }
  if (!os) throw CheckpointError(path.string() + ": write failed");
}

Model Model::load(const std::filesystem::path& path) {
  const std::string p = path.string();
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CheckpointError(p + ": cannot open checkpoint");
  char magic[sizeof kMagic];
  if (!is.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0) {
    throw CheckpointError(p + ": not a cslayout checkpoint");
  }
  const auto version = read_pod<std::uint32_t>(is, p);
  if (version != kVersion) {
    throw CheckpointError(p + ": unsupported checkpoint version " + std::to_string(version));
  }
  const auto header_len = read_pod<std::uint64_t>(is, p);
  if (header_len > (std::uint64_t{1} << 30)) throw CheckpointError(p + ": header too large");
  std::string text(header_len, '\0');
  if (!is.read(text.data(), static_cast<std::streamsize>(header_len))) throw CheckpointError(p + ": truncated header");

  json header;
  ModelConfig cfg;
  Catalog catalog;
  try {
    header = json::parse(text);
    cfg = config_from_json(header.at("config"));
    catalog = catalog_from_json(header.at("catalog"));
    if (header.at("palette_hash").get<std::string>() != Palette::standard().hash()) {
      throw CheckpointError(p + ": palette hash does not match this build");
    }
  } catch (const json::exception& e) {
    throw CheckpointError(p + ": bad header: " + e.what());
  } catch (const DataError& e) {
    throw CheckpointError(p + ": bad catalog: " + e.what());
  }
  std::optional<Model> built;
  try {
    built.emplace(cfg, catalog);
  } catch (const std::invalid_argument& e) {
    throw CheckpointError(p + ": bad config: " + e.what());
  }
  Model m = std::move(*built);
  const auto& items = m.params_.items();
  try {
    const auto& shapes = header.at("params");
    if (!shapes.is_array() || shapes.size() != items.size()) {
      throw CheckpointError(p + ": parameter list does not match the architecture");
    }
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (shapes[i].at("name").get<std::string>() != items[i].first ||
          shapes[i].at("shape").get<nn::Shape>() != items[i].second.shape()) {
        throw CheckpointError(p + ": shape manifest mismatch at " + items[i].first);
      }
    }
  } catch (const json::exception& e) {
    throw CheckpointError(p + ": bad parameter manifest: " + e.what());
  }
  const auto count = read_pod<std::uint64_t>(is, p);
  if (count != m.params_.total_size()) throw CheckpointError(p + ": value count mismatch");
  for (const auto& [_, t] : items) {
    Tensor tt = t;
    auto v = tt.mutable_value();
    if (!is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)))) {
      throw CheckpointError(p + ": truncated parameter data");
    }
  }
  if (is.peek() != std::char_traits<char>::eof()) throw CheckpointError(p + ": trailing bytes");
  return m;
}

}  // namespace cslayout
