// Copyright (C) 2026 The cslayout Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "cslayout/service.hpp"

#include <sys/socket.h>

#include <cstdlib>
#include <stdexcept>

#include <httplib.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "cslayout/hash.hpp"
#include "cslayout/infer.hpp"
#include "cslayout/json_io.hpp"

namespace cslayout {

using nlohmann::json;

namespace {

constexpr const char* kScenesPrefix = "/api/v1/scenes/";
constexpr const char* kThumbnailSuffix = "/thumbnail";

ServiceResponse json_response(int status, const json& j) { return {status, "application/json", j.dump()}; }

ServiceResponse error(int status, const std::string& code, const std::string& message) {
  return json_response(status, {{"code", code}, {"message", message}});
}

ServiceResponse not_loaded() { return error(503, "model_not_loaded", "no checkpoint is loaded"); }

// Thrown while parsing a layout request; becomes a 4xx response.
struct RequestError {
  int status;
  std::string code;
  std::string message;
};

[[noreturn]] void reject(const std::string& message) { throw RequestError{400, "invalid_request", message}; }

int category_of(const json& j, const Catalog& catalog, const std::string& path) {
  if (j.is_number_integer()) {
    const int id = j.get<int>();
    if (!catalog.contains(id)) reject(path + ": unknown category id " + std::to_string(id));
    return id;
  }
  if (j.is_string()) {
    const auto id = catalog.find(j.get<std::string>());
    if (!id) reject(path + ": unknown category '" + j.get<std::string>() + "'");
    return *id;
  }
  reject(path + ": expected a category id or name");
}

json size_json(const Size3& s) { return {s.length, s.width, s.height}; }

json rgb_json(Rgb8 c) { return {c.r, c.g, c.b}; }

}  // namespace

ServiceConfig ServiceConfig::from_env() {
  ServiceConfig cfg;
  if (const char* v = std::getenv("MODEL_PATH"); v && *v) cfg.model_path = v;
  if (const char* v = std::getenv("FIXTURES_PATH"); v && *v) cfg.fixtures_path = v;
  if (const char* v = std::getenv("LOG_LEVEL"); v && *v) cfg.log_level = v;
  if (const char* v = std::getenv("PORT"); v && *v) {
    std::size_t used = 0;
    int port = -1;
    try {
      port = std::stoi(v, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != std::char_traits<char>::length(v) || port < 0 || port > 65535) {
      throw std::invalid_argument(std::string("PORT: not a port number: ") + v);
    }
    cfg.port = port;
  }
  return cfg;
}

Service::Service(ServiceConfig cfg) : cfg_(std::move(cfg)), started_(std::chrono::steady_clock::now()) {}

Service::~Service() = default;

void Service::load_model(const std::filesystem::path& path) {
  auto model = std::make_unique<Model>(Model::load(path));
  checkpoint_hash_ = sha256_file_hex(path);
  model_ = std::move(model);
  spdlog::info("loaded checkpoint {} ({})", path.string(), checkpoint_hash_);
}

void Service::load_fixtures(const std::filesystem::path& dir) {
  scenes_.clear();
  if (!std::filesystem::exists(dir / "manifest.json")) {
    spdlog::warn("no fixture manifest under {}; scene list is empty", dir.string());
    return;
  }
  const Corpus c = load_corpus(dir);
  for (const auto& s : c.samples) scenes_.emplace(s.id, s.layout.scene);
  spdlog::info("loaded {} fixture scenes from {}", scenes_.size(), dir.string());
}

ServiceResponse Service::handle(const std::string& method, const std::string& target,
                                const std::string& body) const {
  if (target == "/healthz") return method == "GET" ? healthz() : error(405, "method_not_allowed", method);
  if (target == "/api/v1/catalog") {
    return method == "GET" ? catalog() : error(405, "method_not_allowed", method);
  }
  if (target == "/api/v1/scenes") return method == "GET" ? scenes() : error(405, "method_not_allowed", method);
  if (target == "/api/v1/layout") {
    return method == "POST" ? layout(body) : error(405, "method_not_allowed", method);
  }
  const std::string prefix = kScenesPrefix, suffix = kThumbnailSuffix;
  if (target.size() > prefix.size() + suffix.size() && target.starts_with(prefix) && target.ends_with(suffix)) {
    const std::string id = target.substr(prefix.size(), target.size() - prefix.size() - suffix.size());
    if (id.find('/') == std::string::npos) {
      return method == "GET" ? thumbnail(id) : error(405, "method_not_allowed", method);
    }
  }
  return error(404, "not_found", "no route for " + target);
}

ServiceResponse Service::healthz() const {
  const double uptime = std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();
  json j = {{"status", model_ ? "ok" : "loading"},
            {"model_loaded", model_ != nullptr},
            {"checkpoint_hash", model_ ? json(checkpoint_hash_) : json(nullptr)},
            {"uptime_s", uptime}};
  return json_response(model_ ? 200 : 503, j);
}

ServiceResponse Service::catalog() const {
  if (!model_) return not_loaded();
  const Palette& palette = model_->config().render_config().palette;
  json cats = json::array();
  for (const auto& e : model_->catalog().entries()) {
    const auto& r = e.size_range;
    cats.push_back({{"id", e.code.id},
                    {"name", e.code.name},
                    {"customized", e.code.customized},
                    {"default_size", size_json(e.default_size)},
                    {"size_range", {r.length_min, r.length_max, r.width_min, r.width_max, r.height_min, r.height_max}},
                    {"color", rgb_json(palette.category(e.code.id))}});
  }
  json size_codes = json::array();
  for (SizeCode c : kAllSizeCodes) size_codes.push_back(std::string(to_string(c)));
  return json_response(200, {{"categories", cats},
                             {"size_codes", size_codes},
                             {"palette", to_json(palette)},
                             {"palette_hash", palette.hash()}});
}

ServiceResponse Service::scenes() const {
  json arr = json::array();
  for (const auto& [id, scene] : scenes_) {
    arr.push_back({{"id", id},
                   {"room_type", std::string(to_string(scene.room_type))},
                   {"bounds", {scene.bounds.x_min, scene.bounds.y_min, scene.bounds.x_max, scene.bounds.y_max}},
                   {"thumbnail", std::string(kScenesPrefix) + id + kThumbnailSuffix}});
  }
  return json_response(200, {{"scenes", arr}});
}

ServiceResponse Service::thumbnail(const std::string& scene_id) const {
  const auto it = scenes_.find(scene_id);
  if (it == scenes_.end()) return error(404, "not_found", "unknown scene id '" + scene_id + "'");
  RenderConfig rc = cfg_.render;
  rc.height = rc.width = cfg_.thumbnail_size;
  const auto png = encode_png(rasterize_scene(it->second, rc));
  return {200, "image/png", std::string(png.begin(), png.end())};
}

ServiceResponse Service::layout(const std::string& body) const {
  if (!model_) return not_loaded();
  const auto t0 = std::chrono::steady_clock::now();
  const Catalog& catalog = model_->catalog();
  RoomScene scene;
  std::vector<SizeRequest> requests;
  bool render = false;
  try {
    json req;
    try {
      req = json::parse(body);
    } catch (const json::parse_error& e) {
      reject(std::string("body is not JSON: ") + e.what());
    }
    if (!req.is_object()) reject("body must be an object");
    const bool by_id = req.contains("scene_id"), inline_scene = req.contains("scene");
    if (by_id == inline_scene) reject("exactly one of scene_id and scene is required");
    if (by_id) {
      if (!req["scene_id"].is_string()) reject("scene_id: expected a string");
      const auto id = req["scene_id"].get<std::string>();
      const auto it = scenes_.find(id);
      if (it == scenes_.end()) throw RequestError{404, "not_found", "unknown scene id '" + id + "'"};
      scene = it->second;
    } else {
      try {
        scene = scene_from_json(req["scene"]);
      } catch (const DataError& e) {
        reject(e.what());
      }
    }
    if (const auto it = req.find("requests"); it != req.end()) {
      if (!it->is_array()) reject("requests: expected an array");
      for (std::size_t i = 0; i < it->size(); ++i) {
        const std::string p = "requests[" + std::to_string(i) + "]";
        const json& r = (*it)[i];
        if (!r.is_object() || !r.contains("category") || !r.contains("size_code")) {
          reject(p + ": expected {category, size_code}");
        }
        const int id = category_of(r["category"], catalog, p + ".category");
        if (!catalog.at(id).code.customized) reject(p + ".category: " + catalog.at(id).code.name + " is not customized");
        const auto code = r["size_code"].is_string() ? parse_size_code(r["size_code"].get<std::string>()) : std::nullopt;
        if (!code) {
          throw RequestError{400, "invalid_size_code", p + ".size_code: expected one of Default, WidthLeft, "
                                                           "WidthRight, LengthUp, LengthDown"};
        }
        requests.push_back({id, *code});
      }
    }
    if (const auto it = req.find("render"); it != req.end()) {
      if (!it->is_boolean()) reject("render: expected a boolean");
      render = it->get<bool>();
    }
  } catch (const RequestError& e) {
    return error(e.status, e.code, e.message);
  }

  InferResult result;
  try {
    result = infer(*model_, scene, requests);
  } catch (const DomainError& e) {
    return error(400, "invalid_request", e.what());
  }
  json violations = json::array();
  for (const auto& v : validate_layout(result.layout, /*allow_overlap=*/false)) violations.push_back(to_json(v));
  json outcomes = json::array();
  for (const auto& o : result.outcomes) {
    outcomes.push_back({{"category_id", o.request.category_id},
                        {"size_code", std::string(to_string(o.request.code))},
                        {"applied", o.applied},
                        {"message", o.message}});
  }
  json image = nullptr;
  if (render) {
    const auto png = encode_png(rasterize_layout(result.layout, cfg_.render));
    image = base64_encode(png);
  }
  const double latency = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return json_response(200, {{"layout", to_json(result.layout)},
                             {"violations", violations},
                             {"outcomes", outcomes},
                             {"image", image},
                             {"model_version", checkpoint_hash_},
                             {"latency_ms", latency}});
}

bool Service::bind(const std::string& host, int port) {
  server_ = std::make_unique<httplib::Server>();
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  auto route = [this](const httplib::Request& req, httplib::Response& res) {
    const auto t0 = std::chrono::steady_clock::now();
    ServiceResponse r;
    try {
      r = handle(req.method, req.path, req.body);
    } catch (const std::exception& e) {
      spdlog::error("{} {}: {}", req.method, req.path, e.what());
      r = error(500, "internal", e.what());
    }
    res.status = r.status;
    res.set_content(r.body, r.content_type);
    spdlog::info("{} {} {} {:.1f}ms", req.method, req.path, r.status,
                 std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
  };
  const std::string any = R"(/.*)";
  server_->Get(any, route);
  server_->Post(any, route);
  server_->Put(any, route);
  server_->Delete(any, route);
  // Port 0 asks the kernel for a free port.
  const int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) {
    server_.reset();
    return false;
  }
  bound_port_ = bound;
  return true;
}

bool Service::listen() {
  if (!server_) throw std::logic_error("Service::listen before bind");
  spdlog::info("listening on {}:{}", cfg_.host, bound_port_);
  return server_->listen_after_bind();
}

void Service::stop() {
  if (server_) server_->stop();
}

}  // namespace cslayout
