#include "onmf/predictor.hpp"

#include "onmf/errors.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>
#include <utility>

namespace onmf {

void SchemeConfig::validate() const {
  try {
    learner.validate();
  } catch (const ConfigError& e) {
    throw ConfigError("learner." + e.field(), e.message());
  }
  if (!(online_beta > 0.0) || !std::isfinite(online_beta)) throw ConfigError("online_beta", "must be finite and > 0");
  if (!(online_lambda_prime >= 0.0) || !std::isfinite(online_lambda_prime))
    throw ConfigError("online_lambda_prime", "must be finite and >= 0");
  if (!(extrapolation_lambda_prime >= 0.0) || !std::isfinite(extrapolation_lambda_prime))
    throw ConfigError("extrapolation_lambda_prime", "must be finite and >= 0");
  if (horizon < 0) throw ConfigError("horizon", "must be >= 0");
  if (trials < 1) throw ConfigError("trials", "must be >= 1");
  try {
    prediction.validate();
  } catch (const ConfigError& e) {
    throw ConfigError("prediction." + e.field(), e.message());
  }
}

std::pair<Matrix, Matrix> pointwise_mean_std(const std::vector<Matrix>& samples) {
  if (samples.empty()) return {};
  const auto n = static_cast<double>(samples.size());
  // scaled by the pointwise max so huge but finite trials cannot overflow
  Matrix scale = Matrix::Zero(samples.front().rows(), samples.front().cols());
  for (const auto& s : samples) scale = scale.cwiseMax(s.cwiseAbs());
  const Matrix safe = (scale.array() > 0.0).select(scale, 1.0);
  Matrix mean = Matrix::Zero(scale.rows(), scale.cols());
  for (const auto& s : samples) mean += s.cwiseQuotient(safe);
  mean /= n;
  Matrix var = Matrix::Zero(mean.rows(), mean.cols());
  for (const auto& s : samples) var += (s.cwiseQuotient(safe) - mean).cwiseAbs2();
  var /= n;
  return {mean.cwiseProduct(safe), var.cwiseSqrt().cwiseProduct(safe)};
}

void PredictionEnsemble::summarize() {
  std::tie(one_step, one_step_std) = pointwise_mean_std(one_step_trials);
  std::tie(mean, std) = pointwise_mean_std(extrapolation_trials);
}

PredictionEnsemble PredictionEnsemble::map_values(const std::function<double(double)>& fn) const {
  PredictionEnsemble out = *this;
  out.seeds.clear();
  out.one_step_trials.clear();
  out.extrapolation_trials.clear();
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    Matrix one = one_step_trials[i].unaryExpr(fn);
    Matrix ext = extrapolation_trials[i].unaryExpr(fn);
    if (!one.allFinite() || !ext.allFinite()) {
      spdlog::warn("trial with seed {} dropped: non-finite value after mapping", seeds[i]);
      out.failures.emplace_back(seeds[i], "non-finite value after mapping");
      continue;
    }
    out.seeds.push_back(seeds[i]);
    out.one_step_trials.push_back(std::move(one));
    out.extrapolation_trials.push_back(std::move(ext));
  }
  if (out.seeds.empty() && !seeds.empty())
    throw Error("all " + std::to_string(seeds.size()) + " trials non-finite after mapping");
  out.summarize();
  return out;
}

Vector partial_fit_predict(const DictionaryTensor& dictionary, const Matrix& context,
                           double lambda_prime, const SolverOptions& opts) {
  const Index d = dictionary.entities();
  const Index k = dictionary.window();
  const Index r = dictionary.rank();
  if (k < 2) throw DimensionError("partial_fit_predict: atoms need at least 2 lags");
  if (context.rows() != d || context.cols() != k - 1)
    throw DimensionError("partial_fit_predict: context must be " + std::to_string(d) + "x" +
                         std::to_string(k - 1));
  if ((context.array() < 0.0).any()) throw DomainError("partial_fit_predict: negative context");

  const Matrix& W = dictionary.atoms.unfolded();
  Matrix observed(d * (k - 1), 1);
  Matrix truncated(d * (k - 1), r);
  for (Index i = 0; i < d; ++i) {
    observed.block(i * (k - 1), 0, k - 1, 1) = context.row(i).transpose();
    truncated.middleRows(i * (k - 1), k - 1) = W.middleRows(i * k, k - 1);
  }
  if (truncated.isZero(0.0)) {
    spdlog::warn("partial_fit_predict: truncated dictionary is all zero; predicting 0");
    return Vector::Zero(d);
  }

  const LassoResult coded = nonneg_lasso(observed, truncated, lambda_prime, opts);
  const Vector fitted = W * coded.codes.col(0);
  Vector next(d);
  for (Index i = 0; i < d; ++i) next(i) = fitted(i * k + k - 1);
  return next;
}

Matrix recursive_extrapolate(const DictionaryTensor& dictionary, const Matrix& tail, Index horizon,
                             double lambda_prime, const SolverOptions& opts) {
  if (horizon < 0) throw DomainError("recursive_extrapolate: negative horizon");
  const Index d = dictionary.entities();
  Matrix out(d, horizon);
  Matrix context = tail;
  for (Index s = 0; s < horizon; ++s) {
    const Vector next = partial_fit_predict(dictionary, context, lambda_prime, opts);
    if (!next.allFinite())
      throw Error("recursive_extrapolate: non-finite prediction at step " + std::to_string(s));
    out.col(s) = next;
    const Index lags = context.cols();
    if (lags > 1) context.leftCols(lags - 1) = context.rightCols(lags - 1).eval();
    context.col(lags - 1) = next;
  }
  return out;
}

Matrix reconstruct(const DictionaryTensor& dictionary, const TimeSeriesPanel& panel, double lambda,
                   const SolverOptions& opts) {
  const Index d = panel.rows();
  const Index k = dictionary.window();
  const Index T = panel.cols();
  if (dictionary.entities() != d)
    throw DimensionError("reconstruct: dictionary has " + std::to_string(dictionary.entities()) +
                         " entities, panel has " + std::to_string(d));
  const Matrix windows = hankel_embed(panel.values(), k).unfolded();
  const LassoResult coded = nonneg_lasso(windows, dictionary.atoms.unfolded(), lambda, opts);
  const Matrix fitted = dictionary.atoms.unfolded() * coded.codes;

  Matrix sum = Matrix::Zero(d, T);
  Vector cover = Vector::Zero(T);
  for (Index b = 0; b < fitted.cols(); ++b) {
    for (Index a = 0; a < k; ++a) {
      cover(b + a) += 1.0;
      for (Index i = 0; i < d; ++i) sum(i, b + a) += fitted(i * k + a, b);
    }
  }
  for (Index t = 0; t < T; ++t) sum.col(t) /= cover(t);
  return sum;
}

LearnedModel initial_model(const TimeSeriesPanel& panel, const SchemeConfig& cfg, std::uint64_t seed,
                           SchemeConfig* resolved) {
  SchemeConfig trial = cfg;
  trial.learner.seed = seed;
  LearnedModel init;
  if (cfg.strict_causal) {
    if (panel.cols() < cfg.learner.window)
      throw WindowTooLongError(static_cast<std::size_t>(cfg.learner.window),
                               static_cast<std::size_t>(panel.cols()));
    const TimeSeriesPanel prefix = panel.with_values(panel.values().leftCols(cfg.learner.window));
    trial.learner.elementwise_cap = resolve_cap(cfg.learner, prefix);
    init = minibatch_learn(prefix, trial.learner);
  } else {
    trial.learner.elementwise_cap = resolve_cap(cfg.learner, panel);
    init = minibatch_learn(panel, trial.learner);
  }
  if (resolved) *resolved = std::move(trial);
  return init;
}

LearnedModel online_pass(LearnedModel initial, const TimeSeriesPanel& panel, const SchemeConfig& cfg,
                         const StepObserver& observer) {
  const Index T = panel.cols();
  const Index k = cfg.learner.window;
  if (T < k) throw WindowTooLongError(static_cast<std::size_t>(k), static_cast<std::size_t>(T));

  LearnerConfig online = cfg.learner;
  online.beta = cfg.online_beta;
  online.elementwise_cap = resolve_cap(cfg.learner, panel);

  LearnedModel model = std::move(initial);
  model.state.beta = cfg.online_beta;
  // Weights follow the time index: (t + 1)^-beta at column t.
  model.state.step = k - 1;
  for (Index t = k - 1; t < T; ++t) {
    StepResult step = online_step(std::move(model.dictionary), std::move(model.state), panel, t, online);
    if (observer) observer(t, step);
    model.dictionary = std::move(step.dictionary);
    model.state = std::move(step.state);
  }
  return model;
}

TrialResult run_online_and_extrapolate(LearnedModel initial, const TimeSeriesPanel& panel,
                                       const SchemeConfig& cfg) {
  const Index k = cfg.learner.window;
  TrialResult out;
  out.one_step.resize(panel.rows(), std::max<Index>(panel.cols() - k + 1, 0));
  out.model = online_pass(std::move(initial), panel, cfg, [&](Index t, const StepResult& step) {
    const Matrix context = panel.values().middleCols(t - k + 2, k - 1);
    out.one_step.col(t - k + 1) =
        partial_fit_predict(step.dictionary, context, cfg.online_lambda_prime, cfg.prediction);
  });
  out.extrapolation = recursive_extrapolate(out.model.dictionary, panel.values().rightCols(k - 1),
                                            cfg.horizon, cfg.extrapolation_lambda_prime, cfg.prediction);
  return out;
}

TrialResult run_trial(const TimeSeriesPanel& panel, const SchemeConfig& cfg, std::uint64_t seed) {
  SchemeConfig resolved;
  LearnedModel init = initial_model(panel, cfg, seed, &resolved);
  return run_online_and_extrapolate(std::move(init), panel, resolved);
}

SchemeResult run_scheme(const TimeSeriesPanel& panel, const SchemeConfig& cfg) {
  cfg.validate();
  if (panel.cols() < cfg.learner.window)
    throw WindowTooLongError(static_cast<std::size_t>(cfg.learner.window),
                             static_cast<std::size_t>(panel.cols()));

  const auto n = static_cast<std::size_t>(cfg.trials);
  std::vector<std::optional<TrialResult>> results(n);
  std::vector<std::string> errors(n);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        results[i] = run_trial(panel, cfg, cfg.learner.seed + i);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  unsigned threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(worker);
  }

  SchemeResult out;
  PredictionEnsemble& ens = out.ensemble;
  ens.first_target = cfg.learner.window;
  bool have_model = false;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t seed = cfg.learner.seed + i;
    if (!results[i]) {
      spdlog::warn("trial with seed {} failed: {}", seed, errors[i]);
      ens.failures.emplace_back(seed, errors[i]);
      continue;
    }
    ens.seeds.push_back(seed);
    ens.one_step_trials.push_back(std::move(results[i]->one_step));
    ens.extrapolation_trials.push_back(std::move(results[i]->extrapolation));
    if (!have_model) {
      out.model = std::move(results[i]->model);
      have_model = true;
    }
    results[i].reset();
  }
  if (!have_model)
    throw Error("all " + std::to_string(n) + " trials failed; first error: " + errors.front());
  ens.summarize();
  return out;
}

}  // namespace onmf
