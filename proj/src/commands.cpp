#include "onmf/commands.hpp"

#include "onmf/errors.hpp"

#include <spdlog/spdlog.h>

#include <cmath>
#include <cstdio>
#include <fstream>

namespace onmf {

namespace fs = std::filesystem;

std::string format_value(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

PreparedPanel prepare_panel(const RunConfig& cfg) {
  std::vector<LabeledSeries> series;
  for (const auto& name : cfg.case_types) {
    const CaseType type = parse_case_type(name);
    const RawCaseTable table = load_case_csv(cfg.inputs.at(type), type);
    for (auto& s : to_daily_new(table)) {
      s.case_type = name;
      series.push_back(std::move(s));
    }
  }
  PreparedPanel out;
  out.daily = assemble_panel(series, cfg.countries, cfg.case_types);
  out.smoothed = smooth_moving_average(out.daily, cfg.transform.smoothing_window, cfg.transform.alignment);
  out.transformed = log_transform(out.smoothed, cfg.transform.log_offset);
  spdlog::info("panel: {} series x {} days starting {}", out.daily.rows(), out.daily.cols(),
               format_iso_date(out.daily.t0()));
  return out;
}

namespace {

std::ofstream open_output(const fs::path& dir, const char* name) {
  fs::create_directories(dir);
  std::ofstream out(dir / name, std::ios::binary);
  if (!out) throw Error("cannot write " + (dir / name).string());
  return out;
}

std::string row_prefix(const TimeSeriesPanel& panel, Date date, Index row) {
  const auto& label = panel.labels()[static_cast<std::size_t>(row)];
  return format_iso_date(date) + "," + csv_escape(label.entity) + "," + csv_escape(label.case_type) + ",";
}

void check_model_fits(const Checkpoint& checkpoint, const TimeSeriesPanel& panel, const RunConfig& cfg) {
  const auto& dict = checkpoint.model.dictionary;
  if (dict.window() > panel.cols())
    throw WindowTooLongError(static_cast<std::size_t>(dict.window()), static_cast<std::size_t>(panel.cols()));
  if (dict.entities() != panel.rows())
    throw DimensionError("checkpoint has d=" + std::to_string(dict.entities()) + " but the panel has " +
                         std::to_string(panel.rows()) + " series");
  if (dict.window() != cfg.scheme.learner.window || dict.rank() != cfg.scheme.learner.atoms)
    throw DimensionError("checkpoint has k=" + std::to_string(dict.window()) + ", r=" +
                         std::to_string(dict.rank()) + " but the config asks for k=" +
                         std::to_string(cfg.scheme.learner.window) + ", r=" +
                         std::to_string(cfg.scheme.learner.atoms));
  if (!checkpoint.labels.empty() && checkpoint.labels != panel.labels())
    throw DimensionError("checkpoint row labels differ from the configured panel");
}

}  // namespace

LearnOutput cmd_learn(const RunConfig& cfg) {
  const PreparedPanel data = prepare_panel(cfg);
  const TimeSeriesPanel& panel = data.transformed;

  SchemeConfig resolved;
  LearnedModel model = initial_model(panel, cfg.scheme, cfg.scheme.learner.seed, &resolved);
  model = online_pass(std::move(model), panel, resolved, [](Index t, const StepResult& step) {
    spdlog::info("t={:3d}  coding objective {:.6g}  surrogate {:.6g}", t, step.coding_status.objective,
                 step.dictionary_update.status.objective);
  });
  if (cfg.sort_atoms) model = permute_atoms(model, importance_order(model.dictionary));

  LearnOutput out;
  out.checkpoint.model = std::move(model);
  out.checkpoint.labels = panel.labels();
  out.checkpoint.config = run_config_to_json(cfg);
  out.importance = importance_metric(out.checkpoint.model.dictionary);

  out.checkpoint_path = cfg.output_dir / kCheckpointFile;
  fs::create_directories(cfg.output_dir);
  save_checkpoint(out.checkpoint, out.checkpoint_path);

  out.importance_path = cfg.output_dir / kImportanceFile;
  auto csv = open_output(cfg.output_dir, kImportanceFile);
  csv << "atom_index,importance\n";
  for (Index j = 0; j < out.importance.weights.size(); ++j)
    csv << j << ',' << format_value(out.importance.weights(j)) << '\n';
  spdlog::info("wrote {} and {}", out.checkpoint_path.string(), out.importance_path.string());
  return out;
}

PredictOutput cmd_predict(const RunConfig& cfg, const std::optional<fs::path>& checkpoint) {
  const PreparedPanel data = prepare_panel(cfg);
  const TimeSeriesPanel& panel = data.transformed;

  PredictionEnsemble ensemble;
  if (checkpoint) {
    const Checkpoint loaded = load_checkpoint(*checkpoint);
    check_model_fits(loaded, panel, cfg);
    cfg.scheme.validate();
    TrialResult trial = run_online_and_extrapolate(loaded.model, panel, cfg.scheme);
    ensemble.first_target = cfg.scheme.learner.window;
    ensemble.seeds.push_back(cfg.scheme.learner.seed);
    ensemble.one_step_trials.push_back(std::move(trial.one_step));
    ensemble.extrapolation_trials.push_back(std::move(trial.extrapolation));
    ensemble.summarize();
  } else {
    ensemble = run_scheme(panel, cfg.scheme).ensemble;
  }

  const double offset = cfg.transform.log_offset;
  PredictOutput out;
  out.ensemble = ensemble.map_values([offset](double y) { return inverse_log_value(y, offset); });

  out.path = cfg.output_dir / kPredictionFile;
  auto csv = open_output(cfg.output_dir, kPredictionFile);
  csv << "date,entity,case_type,kind,value\n";
  const Date t0 = panel.t0();
  const Index d = panel.rows();
  for (Index t = 0; t < panel.cols(); ++t)
    for (Index i = 0; i < d; ++i)
      csv << row_prefix(panel, t0 + std::chrono::days{t}, i) << "observed," << format_value(data.smoothed.values()(i, t))
          << '\n';
  const auto& e = out.ensemble;
  for (Index c = 0; c < e.one_step.cols(); ++c)
    for (Index i = 0; i < d; ++i)
      csv << row_prefix(panel, t0 + std::chrono::days{e.first_target + c}, i) << "one_step,"
          << format_value(e.one_step(i, c)) << '\n';
  for (Index c = 0; c < e.mean.cols(); ++c)
    for (Index i = 0; i < d; ++i)
      csv << row_prefix(panel, t0 + std::chrono::days{panel.cols() + c}, i) << "extrapolated_mean,"
          << format_value(e.mean(i, c)) << '\n';
  for (Index c = 0; c < e.std.cols(); ++c)
    for (Index i = 0; i < d; ++i)
      csv << row_prefix(panel, t0 + std::chrono::days{panel.cols() + c}, i) << "extrapolated_std,"
          << format_value(e.std(i, c)) << '\n';
  spdlog::info("wrote {} ({} trials, {} failed)", out.path.string(), e.seeds.size(), e.failures.size());
  return out;
}

ReconstructOutput cmd_reconstruct(const RunConfig& cfg, const fs::path& checkpoint) {
  const PreparedPanel data = prepare_panel(cfg);
  const TimeSeriesPanel& panel = data.transformed;
  const Checkpoint loaded = load_checkpoint(checkpoint);
  check_model_fits(loaded, panel, cfg);

  ReconstructOutput out;
  out.reconstruction =
      reconstruct(loaded.model.dictionary, panel, cfg.scheme.learner.lambda, cfg.scheme.learner.coding);
  out.relative_errors.resize(panel.rows());
  for (Index i = 0; i < panel.rows(); ++i) {
    const double norm = panel.values().row(i).norm();
    const double err = (out.reconstruction.row(i) - panel.values().row(i)).norm();
    out.relative_errors(i) = norm > 0.0 ? err / norm : err;
  }

  const Matrix original = inverse_log_transform(out.reconstruction, cfg.transform.log_offset);
  out.path = cfg.output_dir / kReconstructionFile;
  {
    auto csv = open_output(cfg.output_dir, kReconstructionFile);
    csv << "date,entity,case_type,value\n";
    for (Index t = 0; t < panel.cols(); ++t)
      for (Index i = 0; i < panel.rows(); ++i)
        csv << row_prefix(panel, panel.t0() + std::chrono::days{t}, i) << format_value(original(i, t)) << '\n';
  }
  out.summary_path = cfg.output_dir / kReconstructionSummaryFile;
  auto summary = open_output(cfg.output_dir, kReconstructionSummaryFile);
  summary << "entity,case_type,relative_error\n";
  for (Index i = 0; i < panel.rows(); ++i) {
    const auto& label = panel.labels()[static_cast<std::size_t>(i)];
    summary << csv_escape(label.entity) << ',' << csv_escape(label.case_type) << ','
            << format_value(out.relative_errors(i)) << '\n';
  }
  spdlog::info("max relative reconstruction error {:.4g}", out.relative_errors.maxCoeff());
  return out;
}

}  // namespace onmf
