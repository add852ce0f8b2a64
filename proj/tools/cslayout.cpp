// Copyright (C) 2026 The cslayout Authors
// SPDX-License-Identifier: Apache-2.0
//
// Operator entry point: train, eval, render, serve, fixtures.
// Exit codes: 0 success, 1 usage, 2 data error, 3 runtime failure.

#include <pthread.h>
#include <signal.h>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <regex>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "cslayout/dataset.hpp"
#include "cslayout/json_io.hpp"
#include "cslayout/metrics.hpp"
#include "cslayout/raster.hpp"
#include "cslayout/service.hpp"
#include "cslayout/train.hpp"

namespace {

using namespace cslayout;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitRuntime = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CorpusSource {
  std::string dir;
  std::size_t fixture = 0;
  std::uint64_t fixture_seed = 0;

  void add_options(CLI::App* cmd) {
    cmd->add_option("--corpus", dir, "Corpus directory (manifest.json + records)");
    cmd->add_option("--fixture", fixture, "Use N generated fixture rooms instead of --corpus");
    cmd->add_option("--fixture-seed", fixture_seed, "Seed of the fixture generator");
  }

  Corpus load() const {
    if (dir.empty() == (fixture == 0)) throw UsageError("exactly one of --corpus and --fixture is required");
    if (fixture > 0) return make_fixture_corpus(fixture, fixture_seed);
    if (!std::filesystem::is_directory(dir)) throw DataError(dir + ": corpus directory not found");
    return load_corpus(dir);
  }
};

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error(p.string() + ": cannot write");
  out << text;
  if (!out) throw std::runtime_error(p.string() + ": write failed");
}

struct TrainArgs {
  CorpusSource source;
  std::string out, loss_csv;
  TrainConfig cfg;
  std::size_t log_every = 100;
};

int run_train(const TrainArgs& a) {
  const Corpus corpus = a.source.load();
  spdlog::info("training on {} samples for {} steps (seed {})", corpus.samples.size(), a.cfg.steps, a.cfg.seed);
  const auto result = train(corpus, a.cfg, [&](const LossRecord& r) {
    if (a.log_every > 0 && (r.step % a.log_every == 0 || r.step + 1 == a.cfg.steps)) {
      spdlog::info("step {:5d}  L_D {:.4f}  L_G {:.4f}  L_trans1 {:.4f}  L_trans2 {:.4f}  L_size {:.4f}", r.step,
                   r.L_D, r.L_G, r.L_trans1, r.L_trans2, r.L_size);
    }
  });
  result.model.save(a.out);
  const std::string csv_path = a.loss_csv.empty() ? a.out + ".loss.csv" : a.loss_csv;
  std::ofstream csv(csv_path, std::ios::binary);
  if (!csv) throw std::runtime_error(csv_path + ": cannot write");
  write_loss_csv(csv, result.history);
  spdlog::info("wrote {} and {}", a.out, csv_path);
  return 0;
}

struct EvalArgs {
  CorpusSource source;
  std::string ckpt, out;
  bool oracle = false;
  bool random = false;
  std::uint64_t random_seed = 0;
  std::size_t batch_size = 100;
};

int run_eval(const EvalArgs& a) {
  if (a.oracle + a.random + !a.ckpt.empty() != 1) {
    throw UsageError("exactly one of --ckpt, --oracle and --random is required");
  }
  const Corpus corpus = a.source.load();
  EvalConfig cfg;
  cfg.batch_size = a.batch_size;
  EvalReport report;
  if (a.oracle) {
    report = evaluate(OraclePredictor(), corpus, cfg);
  } else if (a.random) {
    report = evaluate(RandomPlacementPredictor(corpus.catalog, a.random_seed), corpus, cfg);
  } else {
    if (!std::filesystem::exists(a.ckpt)) throw CheckpointError(a.ckpt + ": checkpoint not found");
    const Model model = Model::load(a.ckpt);
    report = evaluate(ModelPredictor(model), corpus, cfg);
  }
  std::cout << report.to_table();
  if (!a.out.empty()) write_text(a.out, report.to_json().dump(2) + "\n");
  return 0;
}

struct RenderArgs {
  std::string scene, layout, out;
  std::string size = "256x256";
};

std::pair<int, int> parse_size(const std::string& s) {
  static const std::regex re(R"(([1-9][0-9]{0,4})x([1-9][0-9]{0,4}))");
  std::smatch m;
  if (!std::regex_match(s, m, re)) throw UsageError("--size: expected HxW, e.g. 256x256, got '" + s + "'");
  return {std::stoi(m[1]), std::stoi(m[2])};
}

int run_render(const RenderArgs& a) {
  RenderConfig rc;
  std::tie(rc.height, rc.width) = parse_size(a.size);
  const Catalog& catalog = standard_catalog();
  const RoomScene scene = read_layout_file(a.scene, catalog).scene;
  RenderedImage img;
  if (a.layout.empty()) {
    img = rasterize_scene(scene, rc);
  } else {
    Layout l = read_layout_file(a.layout, catalog);
    l.scene = scene;
    img = rasterize_layout(l, rc);
  }
  const auto png = encode_png(img);
  write_text(a.out, std::string(png.begin(), png.end()));
  return 0;
}

struct ServeArgs {
  std::string ckpt, fixtures, host;
  int port = -1;  // -1: PORT or 8080
};

int run_serve(const ServeArgs& a) {
  // Block the shutdown signals before any thread starts so only the waiter
  // below receives them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGTERM);
  sigaddset(&signals, SIGINT);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  ServiceConfig cfg = ServiceConfig::from_env();
  if (!a.ckpt.empty()) cfg.model_path = a.ckpt;
  if (!a.fixtures.empty()) cfg.fixtures_path = a.fixtures;
  if (!a.host.empty()) cfg.host = a.host;
  if (a.port >= 0) cfg.port = a.port;
  if (cfg.model_path.empty()) throw UsageError("--ckpt or MODEL_PATH is required");

  Service service(cfg);
  if (!std::filesystem::exists(cfg.model_path)) {
    throw CheckpointError(cfg.model_path.string() + ": checkpoint not found");
  }
  service.load_model(cfg.model_path);
  if (!cfg.fixtures_path.empty()) service.load_fixtures(cfg.fixtures_path);
  if (!service.bind(cfg.host, cfg.port)) {
    throw std::runtime_error("cannot bind " + cfg.host + ":" + std::to_string(cfg.port));
  }
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    spdlog::info("received signal {}; shutting down", sig);
    service.stop();
  });
  const bool ok = service.listen();
  // Release the waiter if the server stopped on its own.
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  return ok ? 0 : kExitRuntime;
}

struct FixturesArgs {
  std::size_t n = 32;
  std::uint64_t seed = 0;
  std::string out;
};

int run_fixtures(const FixturesArgs& a) {
  save_corpus(make_fixture_corpus(a.n, a.seed), a.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cslayout: custom-size furniture layout toolkit"};
  app.require_subcommand(1);
  std::string log_level;
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error, critical or off (default LOG_LEVEL or info)");

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train a model and write a checkpoint plus loss CSV");
  train_args.source.add_options(train_cmd);
  train_cmd->add_option("--out", train_args.out, "Checkpoint path")->required();
  train_cmd->add_option("--loss-csv", train_args.loss_csv, "Loss history CSV (default <out>.loss.csv)");
  train_cmd->add_option("--steps", train_args.cfg.steps, "Training steps")->capture_default_str();
  train_cmd->add_option("--seed", train_args.cfg.seed, "Seed of initialization and batching")->capture_default_str();
  train_cmd->add_option("--lambda-adv", train_args.cfg.lambda_adv, "Adversarial loss weight")->capture_default_str();
  train_cmd->add_option("--alpha", train_args.cfg.alpha, "Weight of the transfer and size losses")
      ->capture_default_str();
  train_cmd->add_option("--lr", train_args.cfg.lr, "Adam learning rate")->capture_default_str()->check(
      CLI::NonNegativeNumber);
  train_cmd->add_option("--batch", train_args.cfg.batch_size, "Batch size")->capture_default_str()->check(
      CLI::PositiveNumber);
  train_cmd->add_option("--resolution", train_args.cfg.model.resolution, "Model-side raster size")
      ->capture_default_str();
  train_cmd->add_option("--log-every", train_args.log_every, "Log every N steps (0 disables)")
      ->capture_default_str();

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint or a reference predictor");
  eval_args.source.add_options(eval_cmd);
  eval_cmd->add_option("--ckpt", eval_args.ckpt, "Checkpoint to evaluate");
  eval_cmd->add_option("--out", eval_args.out, "Report JSON path");
  eval_cmd->add_flag("--oracle", eval_args.oracle, "Score the ground truth against itself");
  eval_cmd->add_flag("--random", eval_args.random, "Score the random-placement baseline");
  eval_cmd->add_option("--random-seed", eval_args.random_seed, "Seed of the random baseline");
  eval_cmd->add_option("--batch-size", eval_args.batch_size, "Samples per statistics batch")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  RenderArgs render_args;
  auto* render_cmd = app.add_subcommand("render", "Rasterize a scene or layout to PNG");
  render_cmd->add_option("--scene", render_args.scene, "Scene (or layout / sample record) file")->required();
  render_cmd->add_option("--layout", render_args.layout, "Layout whose furniture is drawn over the scene");
  render_cmd->add_option("--out", render_args.out, "PNG path")->required();
  render_cmd->add_option("--size", render_args.size, "Image size HxW")->capture_default_str();

  ServeArgs serve_args;
  auto* serve_cmd = app.add_subcommand("serve", "Serve a checkpoint over HTTP until SIGTERM");
  serve_cmd->add_option("--ckpt", serve_args.ckpt, "Checkpoint (default MODEL_PATH)");
  serve_cmd->add_option("--port", serve_args.port, "Port (default PORT or 8080)")->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--host", serve_args.host, "Listen address (default 127.0.0.1)");
  serve_cmd->add_option("--fixtures", serve_args.fixtures, "Fixture corpus directory (default FIXTURES_PATH)");

  FixturesArgs fixtures_args;
  auto* fixtures_cmd = app.add_subcommand("fixtures", "Write a generated fixture corpus");
  fixtures_cmd->add_option("--n", fixtures_args.n, "Rooms")->capture_default_str()->check(CLI::PositiveNumber);
  fixtures_cmd->add_option("--seed", fixtures_args.seed, "Generator seed")->capture_default_str();
  fixtures_cmd->add_option("--out", fixtures_args.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (log_level.empty()) {
      const char* env = std::getenv("LOG_LEVEL");
      log_level = env && *env ? env : "info";
    }
    const auto level = spdlog::level::from_str(log_level);
    if (level == spdlog::level::off && log_level != "off") throw UsageError("--log-level: unknown level '" + log_level + "'");
    // stdout carries command output (eval tables); logs go to stderr.
    spdlog::set_default_logger(spdlog::stderr_color_mt("cslayout"));
    spdlog::set_level(level);
    spdlog::set_pattern("%Y-%m-%dT%H:%M:%S.%e %^%l%$ %v");

    if (*train_cmd) return run_train(train_args);
    if (*eval_cmd) return run_eval(eval_args);
    if (*render_cmd) return run_render(render_args);
    if (*serve_cmd) return run_serve(serve_args);
    if (*fixtures_cmd) return run_fixtures(fixtures_args);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kExitUsage;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kExitData;
  } catch (const CheckpointError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kExitData;
  } catch (const DomainError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitUsage;
}
