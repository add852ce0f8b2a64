// Copyright (C) 2026 The cslayout Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "cslayout/raster.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "cslayout/hash.hpp"

namespace cslayout {

// ---------------------------------------------------------------------------
// Palette

namespace {

constexpr Rgb8 hex(std::uint32_t v) {
  return {static_cast<std::uint8_t>(v >> 16), static_cast<std::uint8_t>((v >> 8) & 0xff),
          static_cast<std::uint8_t>(v & 0xff)};
}

// Kelly's colors of maximum contrast followed by saturated primaries.
constexpr std::array<std::uint32_t, Palette::kMaxCategories> kCategoryColors = {
    0xF3C300, 0x875692, 0xF38400, 0xA1CAF1, 0xBE0032, 0xC2B280, 0x848482, 0x008856,
    0xE68FAC, 0x0067A5, 0xF99379, 0x604E97, 0xF6A600, 0xB3446C, 0xDCD300, 0x882D17,
    0x8DB600, 0x654522, 0xE25822, 0x2B3D26, 0xFF00FF, 0x00FF00, 0x0000FF, 0xFF0000,
    0x00FFFF, 0x800000, 0x008080, 0x000080, 0x808000, 0x3CB44B, 0x911EB4, 0xF032E6};

}  // namespace

Palette Palette::standard() {
  static const Palette p = [] {
    Palette q;
    q.background_ = hex(0xFFFFFF);
    q.wall_ = hex(0x000000);
    q.door_ = hex(0x00A0B0);
    q.window_ = hex(0x7FDBFF);
    for (std::size_t i = 0; i < kCategoryColors.size(); ++i) {
      q.categories_.push_back(hex(kCategoryColors[i]));
      q.inverse_.emplace(q.categories_.back(), static_cast<int>(i));
    }
    return q;
  }();
  return p;
}

std::optional<int> Palette::category_of(Rgb8 c) const {
  auto it = inverse_.find(c);
  if (it == inverse_.end()) return std::nullopt;
  return it->second;
}

std::string Palette::to_json() const {
  using nlohmann::json;
  const auto arr = [](Rgb8 c) { return json::array({c.r, c.g, c.b}); };
  json j;
  j["background"] = arr(background_);
  j["wall"] = arr(wall_);
  j["door"] = arr(door_);
  j["window"] = arr(window_);
  json cats = json::array();
  for (auto c : categories_) cats.push_back(arr(c));
  j["categories"] = cats;
  return j.dump();
}

std::string Palette::hash() const { return sha256_hex(to_json()); }

// ---------------------------------------------------------------------------
// Images and mapping

RenderedImage::RenderedImage(int h, int w, Rgb8 fill)
    : height(h), width(w), pixels(static_cast<std::size_t>(h) * w * 3) {
  for (std::size_t i = 0; i < pixels.size(); i += 3) {
    pixels[i] = fill.r / 255.0;
    pixels[i + 1] = fill.g / 255.0;
    pixels[i + 2] = fill.b / 255.0;
  }
}

Rgb8 RenderedImage::rgb8(int row, int col) const {
  const auto q = [](double v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
  };
  return {q(at(row, col, 0)), q(at(row, col, 1)), q(at(row, col, 2))};
}

PixelMapping::PixelMapping(const AABB& b, int h, int w) : bounds(b), height(h), width(w) {
  if (!(b.width() > 0.0 && b.height() > 0.0)) throw DomainError("render: degenerate scene bounds");
  if (h <= 0 || w <= 0) throw DomainError("render: image size must be positive");
  scale = std::min(w / b.width(), h / b.height());
  offset_x = 0.5 * (w - b.width() * scale);
  offset_y = 0.5 * (h - b.height() * scale);
}

namespace {

// Fills pixels whose centers lie in [x_min, x_max) x [y_min, y_max).
void fill_box(RenderedImage& img, const PixelMapping& m, const AABB& box, Rgb8 color) {
  const int c0 = std::max(0, static_cast<int>(std::floor(m.col_of(box.x_min))) - 1);
  const int c1 = std::min(img.width - 1, static_cast<int>(std::ceil(m.col_of(box.x_max))) + 1);
  const int r0 = std::max(0, static_cast<int>(std::floor(m.row_of(box.y_max))) - 1);
  const int r1 = std::min(img.height - 1, static_cast<int>(std::ceil(m.row_of(box.y_min))) + 1);
  const double cr = color.r / 255.0, cg = color.g / 255.0, cb = color.b / 255.0;
  for (int r = r0; r <= r1; ++r) {
    const double y = m.y_of_row(r);
    if (y < box.y_min || y >= box.y_max) continue;
    for (int c = c0; c <= c1; ++c) {
      const double x = m.x_of_col(c);
      if (x < box.x_min || x >= box.x_max) continue;
      img.at(r, c, 0) = cr;
      img.at(r, c, 1) = cg;
      img.at(r, c, 2) = cb;
    }
  }
}

}  // namespace

RenderedImage rasterize_scene(const RoomScene& scene, const RenderConfig& cfg) {
  const PixelMapping m(scene.bounds, cfg.height, cfg.width);
  RenderedImage img(cfg.height, cfg.width, cfg.palette.background());
  for (const auto& w : scene.walls) fill_box(img, m, w.box(), cfg.palette.wall());
  for (const auto& d : scene.doors) fill_box(img, m, d, cfg.palette.door());
  for (const auto& w : scene.windows) fill_box(img, m, w, cfg.palette.window());
  return img;
}

RenderedImage rasterize_layout(const Layout& layout, const RenderConfig& cfg) {
  RenderedImage img = rasterize_scene(layout.scene, cfg);
  const PixelMapping m(layout.scene.bounds, cfg.height, cfg.width);
  for (const auto& f : layout.furniture) {
    fill_box(img, m, aabb(f), cfg.palette.category(f.category.id));
  }
  return img;
}

std::map<int, std::vector<std::uint8_t>> decode_category_masks(const RenderedImage& img,
                                                               const Palette& palette) {
  std::map<int, std::vector<std::uint8_t>> masks;
  const std::size_t n = static_cast<std::size_t>(img.height) * img.width;
  for (int r = 0; r < img.height; ++r) {
    for (int c = 0; c < img.width; ++c) {
      if (auto id = palette.category_of(img.rgb8(r, c))) {
        auto& mask = masks[*id];
        if (mask.empty()) mask.assign(n, 0);
        mask[static_cast<std::size_t>(r) * img.width + c] = 1;
      }
    }
  }
  return masks;
}

// ---------------------------------------------------------------------------
// Soft rasterization
//
// Slot k paints alpha_k = p_k * mx_k(col) * my_k(row) of its expected
// category color over the running image, in slot order. The box mask is
// separable: mx = s(X - left) * s(right - X) with s a sigmoid of width
// softness, and likewise for rows.

namespace {

struct SlotRaster {
  double presence = 0.0;  // sigmoid(logit)
  std::array<double, 3> color{};
  std::vector<double> probs;  // category softmax
  std::vector<double> mx, my;
  std::vector<double> dmx_dc, dmx_de, dmy_dc, dmy_de;
};

void axis_mask(double center, double extent, double soft, const std::vector<double>& coords,
               std::vector<double>& m, std::vector<double>* dm_dc, std::vector<double>* dm_de) {
  const double lo = center - 0.5 * extent;
  const double hi = center + 0.5 * extent;
  m.resize(coords.size());
  if (dm_dc) dm_dc->resize(coords.size());
  if (dm_de) dm_de->resize(coords.size());
  for (std::size_t i = 0; i < coords.size(); ++i) {
    const double za = (coords[i] - lo) / soft;
    const double zb = (hi - coords[i]) / soft;
    const double s1 = sigmoid(za), s2 = sigmoid(zb);
    m[i] = s1 * s2;
    if (dm_dc) {
      const double t1 = sigmoid(-za), t2 = sigmoid(-zb);  // 1 - s1, 1 - s2
      (*dm_dc)[i] = m[i] * (t2 - t1) / soft;
      (*dm_de)[i] = m[i] * (t1 + t2) / (2.0 * soft);
    }
  }
}

struct SoftContext {
  int h, w;
  std::vector<double> xs, ys;  // normalized pixel-center coordinates
  double sx, sy;
  std::vector<std::array<double, 3>> palette;
};

SoftContext make_context(const SoftRasterInput& in, const RenderConfig& cfg) {
  if (!in.background) throw std::invalid_argument("soft_rasterize: missing background");
  if (in.background->height != cfg.height || in.background->width != cfg.width) {
    throw std::invalid_argument("soft_rasterize: background shape mismatch");
  }
  if (in.flat.size() != in.num_slots * SlotGrid::stride(in.num_categories)) {
    throw std::invalid_argument("soft_rasterize: slot buffer size mismatch");
  }
  if (in.num_categories > cfg.palette.num_categories()) {
    throw std::invalid_argument("soft_rasterize: palette has too few category colors");
  }
  const PixelMapping m(in.bounds, cfg.height, cfg.width);
  SoftContext ctx;
  ctx.h = cfg.height;
  ctx.w = cfg.width;
  ctx.xs.resize(static_cast<std::size_t>(cfg.width));
  ctx.ys.resize(static_cast<std::size_t>(cfg.height));
  for (int c = 0; c < cfg.width; ++c) ctx.xs[c] = (m.x_of_col(c) - in.bounds.x_min) / in.bounds.width();
  for (int r = 0; r < cfg.height; ++r) ctx.ys[r] = (m.y_of_row(r) - in.bounds.y_min) / in.bounds.height();
  ctx.sx = cfg.softness / in.bounds.width();
  ctx.sy = cfg.softness / in.bounds.height();
  for (std::size_t j = 0; j < in.num_categories; ++j) {
    const Rgb8 c = cfg.palette.category(static_cast<int>(j));
    ctx.palette.push_back({c.r / 255.0, c.g / 255.0, c.b / 255.0});
  }
  return ctx;
}

SlotRaster prepare_slot(const SoftRasterInput& in, const SoftContext& ctx, std::size_t k,
                        bool with_grad) {
  const std::size_t stride = SlotGrid::stride(in.num_categories);
  const auto o = SlotGrid::offsets(in.num_categories);
  const double* row = in.flat.data() + k * stride;
  SlotRaster s;
  s.presence = sigmoid(row[o.presence]);
  s.probs.resize(in.num_categories);
  double mx = -INFINITY;
  for (std::size_t j = 0; j < in.num_categories; ++j) mx = std::max(mx, row[o.category + j]);
  double z = 0.0;
  for (std::size_t j = 0; j < in.num_categories; ++j) {
    s.probs[j] = std::exp(row[o.category + j] - mx);
    z += s.probs[j];
  }
  for (std::size_t j = 0; j < in.num_categories; ++j) {
    s.probs[j] /= z;
    for (int ch = 0; ch < 3; ++ch) s.color[ch] += s.probs[j] * ctx.palette[j][ch];
  }
  axis_mask(row[o.cx], row[o.ex], ctx.sx, ctx.xs, s.mx, with_grad ? &s.dmx_dc : nullptr,
            with_grad ? &s.dmx_de : nullptr);
  axis_mask(row[o.cy], row[o.ey], ctx.sy, ctx.ys, s.my, with_grad ? &s.dmy_dc : nullptr,
            with_grad ? &s.dmy_de : nullptr);
  return s;
}

void composite(std::vector<double>& img, const SlotRaster& s, int h, int w) {
  for (int r = 0; r < h; ++r) {
    const double pr = s.presence * s.my[r];
    if (pr == 0.0) continue;
    double* px = img.data() + static_cast<std::size_t>(r) * w * 3;
    for (int c = 0; c < w; ++c, px += 3) {
      const double a = pr * s.mx[c];
      if (a == 0.0) continue;
      px[0] += a * (s.color[0] - px[0]);
      px[1] += a * (s.color[1] - px[1]);
      px[2] += a * (s.color[2] - px[2]);
    }
  }
}

}  // namespace

RenderedImage soft_rasterize(const SoftRasterInput& in, const RenderConfig& cfg) {
  const SoftContext ctx = make_context(in, cfg);
  RenderedImage out = *in.background;
  for (std::size_t k = 0; k < in.num_slots; ++k) {
    composite(out.pixels, prepare_slot(in, ctx, k, false), ctx.h, ctx.w);
  }
  return out;
}

RenderedImage soft_rasterize(const SlotGrid& slots, const RoomScene& scene, const RenderConfig& cfg) {
  const RenderedImage bg = rasterize_scene(scene, cfg);
  const std::vector<double> flat = slots.flatten();
  SoftRasterInput in{flat, slots.slots.size(), slots.num_categories, &bg, scene.bounds};
  return soft_rasterize(in, cfg);
}

void soft_rasterize_backward(const SoftRasterInput& in, const RenderConfig& cfg,
                             std::span<const double> grad_out, std::span<double> grad_flat) {
  const SoftContext ctx = make_context(in, cfg);
  const std::size_t npx = static_cast<std::size_t>(ctx.h) * ctx.w * 3;
  if (grad_out.size() != npx || grad_flat.size() != in.flat.size()) {
    throw std::invalid_argument("soft_rasterize_backward: buffer size mismatch");
  }
  std::vector<SlotRaster> slots;
  slots.reserve(in.num_slots);
  // states[k] is the image before slot k is composited.
  std::vector<std::vector<double>> states(in.num_slots);
  std::vector<double> cur = in.background->pixels;
  for (std::size_t k = 0; k < in.num_slots; ++k) {
    slots.push_back(prepare_slot(in, ctx, k, true));
    states[k] = cur;
    composite(cur, slots.back(), ctx.h, ctx.w);
  }

  const std::size_t stride = SlotGrid::stride(in.num_categories);
  const auto o = SlotGrid::offsets(in.num_categories);
  std::vector<double> g(grad_out.begin(), grad_out.end());
  std::vector<double> gx(static_cast<std::size_t>(ctx.w)), gy(static_cast<std::size_t>(ctx.h));
  for (std::size_t kk = in.num_slots; kk-- > 0;) {
    const SlotRaster& s = slots[kk];
    const std::vector<double>& prev = states[kk];
    std::fill(gx.begin(), gx.end(), 0.0);
    std::fill(gy.begin(), gy.end(), 0.0);
    double dp = 0.0;
    std::array<double, 3> dcol{};
    for (int r = 0; r < ctx.h; ++r) {
      for (int c = 0; c < ctx.w; ++c) {
        const double m = s.mx[c] * s.my[r];
        const double a = s.presence * m;
        const std::size_t i = (static_cast<std::size_t>(r) * ctx.w + c) * 3;
        double da = 0.0;
        for (int ch = 0; ch < 3; ++ch) {
          da += g[i + ch] * (s.color[ch] - prev[i + ch]);
          dcol[ch] += a * g[i + ch];
          g[i + ch] *= (1.0 - a);
        }
        dp += da * m;
        const double dm = da * s.presence;
        gx[c] += dm * s.my[r];
        gy[r] += dm * s.mx[c];
      }
    }
    double* grad = grad_flat.data() + kk * stride;
    grad[o.presence] += dp * s.presence * (1.0 - s.presence);
    for (int c = 0; c < ctx.w; ++c) {
      grad[o.cx] += gx[c] * s.dmx_dc[c];
      grad[o.ex] += gx[c] * s.dmx_de[c];
    }
    for (int r = 0; r < ctx.h; ++r) {
      grad[o.cy] += gy[r] * s.dmy_dc[r];
      grad[o.ey] += gy[r] * s.dmy_de[r];
    }
    std::vector<double> dq(in.num_categories);
    double qdq = 0.0;
    for (std::size_t j = 0; j < in.num_categories; ++j) {
      dq[j] = dcol[0] * ctx.palette[j][0] + dcol[1] * ctx.palette[j][1] + dcol[2] * ctx.palette[j][2];
      qdq += s.probs[j] * dq[j];
    }
    for (std::size_t j = 0; j < in.num_categories; ++j) {
      grad[o.category + j] += s.probs[j] * (dq[j] - qdq);
    }
  }
}

}  // namespace cslayout
