// onmf: learn dictionaries of joint time-series evolution patterns and
// forecast with them.
//
//   onmf learn       --config run.json [--seed N] [--strict-causal] [--output DIR]
//   onmf predict     --config run.json [--checkpoint model.json] [--trials N] ...
//   onmf reconstruct --config run.json --checkpoint model.json
//
// Exit codes: 0 success, 1 usage/config error, 2 runtime failure.
// ONMF_LOG_LEVEL selects error|warn|info|debug (default info).

#include "onmf/commands.hpp"
#include "onmf/errors.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

namespace {

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("onmf");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("ONMF_LOG_LEVEL")) {
    const std::string level = env;
    if (level == "error")
      spdlog::set_level(spdlog::level::err);
    else if (level == "warn")
      spdlog::set_level(spdlog::level::warn);
    else if (level == "info")
      spdlog::set_level(spdlog::level::info);
    else if (level == "debug")
      spdlog::set_level(spdlog::level::debug);
    else
      spdlog::warn("ignoring unknown ONMF_LOG_LEVEL '{}'", level);
  }
}

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<onmf::Index> trials;
  bool strict_causal = false;
  std::optional<std::string> output;
  std::optional<std::string> checkpoint;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "JSON run configuration")->required();
  cmd->add_option("--seed", o.seed, "Base RNG seed (overrides learner.seed)");
  cmd->add_option("--trials", o.trials, "Ensemble size (overrides scheme.trials)");
  cmd->add_flag("--strict-causal", o.strict_causal, "Minibatch stage sees only the first k days");
  cmd->add_option("--output", o.output, "Output directory (overrides output_dir)");
}

onmf::RunConfig load(const Overrides& o) {
  onmf::RunConfig cfg = onmf::load_run_config(o.config);
  if (o.seed) cfg.scheme.learner.seed = *o.seed;
  if (o.trials) cfg.scheme.trials = *o.trials;
  if (o.strict_causal) cfg.scheme.strict_causal = true;
  if (o.output) cfg.output_dir = *o.output;
  onmf::validate_run_config(cfg);
  return cfg;
}

std::filesystem::path existing(const std::string& path) {
  if (!std::filesystem::is_regular_file(path)) throw onmf::ConfigError("--checkpoint", "file not found: " + path);
  return path;
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();

  CLI::App app{"Online NMF dictionary learning and forecasting for nonnegative time series"};
  app.require_subcommand(1);
  Overrides o;
  auto* learn = app.add_subcommand("learn", "Learn a dictionary and write model.json + importance.csv");
  add_common(learn, o);
  auto* predict = app.add_subcommand("predict", "Run the ensemble forecast and write predictions.csv");
  add_common(predict, o);
  predict->add_option("--checkpoint", o.checkpoint, "Start from a learned model instead of minibatch learning");
  auto* recon = app.add_subcommand("reconstruct", "Reconstruct the panel from a learned model");
  add_common(recon, o);
  recon->add_option("--checkpoint", o.checkpoint, "Learned model")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const onmf::RunConfig cfg = load(o);
    if (learn->parsed()) {
      onmf::cmd_learn(cfg);
    } else if (predict->parsed()) {
      std::optional<std::filesystem::path> checkpoint;
      if (o.checkpoint) checkpoint = existing(*o.checkpoint);
      onmf::cmd_predict(cfg, checkpoint);
    } else {
      onmf::cmd_reconstruct(cfg, existing(*o.checkpoint));
    }
  } catch (const onmf::ConfigError& e) {
    spdlog::error("config: {}", e.what());
    return 1;
  } catch (const onmf::ParseError& e) {
    spdlog::error("input: {}", e.what());
    return 1;
  } catch (const onmf::WindowTooLongError& e) {
    spdlog::error("{}", e.what());
    return 1;
  } catch (const onmf::DimensionError& e) {
    spdlog::error("dimension mismatch: {}", e.what());
    return 1;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 2;
  }
  return 0;
}
