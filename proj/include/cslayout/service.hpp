// Copyright (C) 2026 The cslayout Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "cslayout/dataset.hpp"
#include "cslayout/model.hpp"
#include "cslayout/raster.hpp"

namespace httplib {
class Server;
}

namespace cslayout {

struct ServiceConfig {
  std::filesystem::path model_path;     // MODEL_PATH; empty serves 503
  std::filesystem::path fixtures_path;  // FIXTURES_PATH; empty lists no scenes
  std::string host = "127.0.0.1";
  int port = 8080;                      // PORT
  std::string log_level = "info";       // LOG_LEVEL: trace..critical, off
  int thumbnail_size = 128;
  RenderConfig render;                  // images returned by POST /api/v1/layout

  /// Defaults overridden by the environment variables above. Throws
  /// std::invalid_argument for a malformed PORT.
  static ServiceConfig from_env();
};

/// A transport-independent response; the HTTP layer copies it verbatim.
struct ServiceResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

/// The inference service. Request handling is const and reads only state set
/// before serving starts, so concurrent requests share the model without
/// locking.
class Service {
 public:
  explicit Service(ServiceConfig cfg);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Throws CheckpointError on unreadable or inconsistent checkpoints.
  void load_model(const std::filesystem::path& path);
  /// A missing directory or manifest leaves the scene list empty; a corrupt
  /// corpus throws DataError.
  void load_fixtures(const std::filesystem::path& dir);

  bool model_loaded() const { return model_ != nullptr; }
  const std::string& checkpoint_hash() const { return checkpoint_hash_; }
  const ServiceConfig& config() const { return cfg_; }

  /// Routes one request. `target` is the path without query string.
  ServiceResponse handle(const std::string& method, const std::string& target,
                         const std::string& body) const;

  ServiceResponse healthz() const;
  ServiceResponse catalog() const;
  ServiceResponse scenes() const;
  ServiceResponse thumbnail(const std::string& scene_id) const;
  ServiceResponse layout(const std::string& body) const;

  /// Binds without SO_REUSEPORT so an occupied port is an error. Returns
  /// false when binding fails.
  bool bind(const std::string& host, int port);
  /// Port actually bound (useful after bind(host, 0)).
  int bound_port() const { return bound_port_; }
  /// Blocks until stop(). Returns false if the server failed.
  bool listen();
  void stop();

 private:
  ServiceConfig cfg_;
  std::unique_ptr<Model> model_;
  std::string checkpoint_hash_;
  std::map<std::string, RoomScene> scenes_;  // ordered by id
  std::chrono::steady_clock::time_point started_;
  std::unique_ptr<httplib::Server> server_;
  int bound_port_ = -1;
};

}  // namespace cslayout
