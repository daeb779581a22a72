#include "onmf/learner.hpp"

#include "onmf/errors.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace onmf {

void LearnerConfig::validate() const {
  if (window < 2) throw ConfigError("window", "must be >= 2");
  if (memory < window) throw ConfigError("memory", "must be >= window");
  if (atoms < 1) throw ConfigError("atoms", "must be >= 1");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda", "must be finite and >= 0");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw ConfigError("beta", "must be finite and > 0");
  if (minibatch_iterations < 0) throw ConfigError("minibatch_iterations", "must be >= 0");
  if (elementwise_cap && !(*elementwise_cap > 0.0))
    throw ConfigError("elementwise_cap", "must be > 0");
  auto check = [](const SolverOptions& opts, const std::string& prefix) {
    try {
      opts.validate();
    } catch (const ConfigError& e) {
      throw ConfigError(prefix + "." + e.field(), e.message());
    }
  };
  check(coding, "coding");
  SolverOptions dict = dictionary;
  dict.elementwise_cap = 1.0;  // the cap is validated above
  check(dict, "dictionary");
}

double resolve_cap(const LearnerConfig& cfg, const TimeSeriesPanel& panel) {
  if (cfg.elementwise_cap) return *cfg.elementwise_cap;
  const double peak = panel.values().size() > 0 ? panel.values().cwiseAbs().maxCoeff() : 0.0;
  // An all-zero panel still needs a positive bound.
  return peak > 0.0 ? kDefaultCapFactor * peak : 1.0;
}

double AggregateState::next_weight() const {
  return std::pow(static_cast<double>(step + 1), -beta);
}

StepResult online_step(DictionaryTensor dictionary, AggregateState state,
                       const TimeSeriesPanel& panel, Index t, const LearnerConfig& cfg) {
  const Index d = panel.rows();
  const Index k = cfg.window;
  const Index r = dictionary.rank();
  if (dictionary.entities() != d || dictionary.window() != k)
    throw DimensionError("online_step: dictionary is " + std::to_string(dictionary.entities()) +
                         "x" + std::to_string(dictionary.window()) + ", panel needs " +
                         std::to_string(d) + "x" + std::to_string(k));
  if (state.A.rows() != r || state.A.cols() != r || state.B.rows() != r || state.B.cols() != d * k)
    throw DimensionError("online_step: aggregate state does not match dictionary");
  if (t < k - 1 || t >= panel.cols())
    throw IndexError("online_step: t=" + std::to_string(t) + " outside [" + std::to_string(k - 1) +
                     ", " + std::to_string(panel.cols() - 1) + "]");

  const Index start = std::max<Index>(0, t - cfg.memory + 1);
  const Matrix data = hankel_embed(panel.values().middleCols(start, t - start + 1), k).unfolded();

  LassoResult coded = nonneg_lasso(data, dictionary.atoms.unfolded(), cfg.lambda, cfg.coding);
  if (!coded.status.converged)
    spdlog::debug("sparse coding at t={} stopped after {} sweeps (last decrease {:.3g})", t,
                  coded.status.iterations, coded.status.last_decrease);

  const double w = state.next_weight();
  state.A = (1.0 - w) * state.A + w * (coded.codes * coded.codes.transpose());
  state.B = (1.0 - w) * state.B + w * (coded.codes * data.transpose());
  state.step += 1;

  SolverOptions dict_opts = cfg.dictionary;
  dict_opts.elementwise_cap = resolve_cap(cfg, panel);
  DictionaryUpdateResult updated = dictionary_update(dictionary.atoms, state.A, state.B, dict_opts);
  if (!updated.status.converged)
    spdlog::debug("dictionary update at t={} stopped after {} sweeps", t, updated.status.iterations);

  dictionary.atoms = updated.atoms;
  dictionary.importance += coded.codes.rowwise().sum();

  StepResult out{std::move(dictionary), std::move(state), std::move(coded.codes), coded.status,
                 std::move(updated)};
  return out;
}

double uniform_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Index uniform_index(std::mt19937_64& rng, Index lo, Index hi) {
  if (hi < lo) throw IndexError("uniform_index: empty range");
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  // Reject the low band so every residue is equally likely.
  const std::uint64_t threshold = (0 - span) % span;
  std::uint64_t x = rng();
  while (x < threshold) x = rng();
  return lo + static_cast<Index>(x % span);
}

LearnedModel random_initialization(Index d, Index k, Index r, double cap, std::mt19937_64& rng) {
  LearnedModel model;
  model.dictionary = DictionaryTensor::zeros(d, k, r);
  Matrix& W = model.dictionary.atoms.unfolded();
  for (Index j = 0; j < r; ++j)
    for (Index row = 0; row < d * k; ++row) W(row, j) = std::min(uniform_unit(rng), cap);

  model.state.A.resize(r, r);
  for (Index j = 0; j < r; ++j)
    for (Index i = 0; i <= j; ++i) model.state.A(i, j) = model.state.A(j, i) = uniform_unit(rng);

  model.state.B.resize(r, d * k);
  for (Index col = 0; col < d * k; ++col)
    for (Index j = 0; j < r; ++j) model.state.B(j, col) = uniform_unit(rng);
  model.state.step = 0;
  return model;
}

LearnedModel minibatch_learn(const TimeSeriesPanel& panel, const LearnerConfig& cfg) {
  cfg.validate();
  if (panel.rows() == 0 || panel.cols() == 0) throw Error("minibatch_learn: empty panel");
  const Index T = panel.cols();
  const Index k = cfg.window;
  if (T < k) throw WindowTooLongError(static_cast<std::size_t>(k), static_cast<std::size_t>(T));

  std::mt19937_64 rng(cfg.seed);
  LearnedModel model = random_initialization(panel.rows(), k, cfg.atoms, resolve_cap(cfg, panel), rng);
  model.state.beta = cfg.beta;

  const Index lo = std::max(k - 1, T - cfg.memory);
  for (Index j = 1; j <= cfg.minibatch_iterations; ++j) {
    const Index t = uniform_index(rng, lo, T - 1);
    StepResult step = online_step(std::move(model.dictionary), std::move(model.state), panel, t, cfg);
    model.dictionary = std::move(step.dictionary);
    model.state = std::move(step.state);
  }
  return model;
}

Importance importance_metric(const DictionaryTensor& dictionary) {
  const Index r = dictionary.rank();
  Importance out;
  const double total = dictionary.importance.sum();
  if (r == 0) return out;
  if (!(total > 0.0)) {
    spdlog::warn("importance accumulator is empty; reporting a uniform metric");
    out.weights = Vector::Constant(r, 1.0 / static_cast<double>(r));
    out.uniform_fallback = true;
    return out;
  }
  out.weights = dictionary.importance / total;
  return out;
}

std::vector<Index> importance_order(const DictionaryTensor& dictionary) {
  std::vector<Index> order(static_cast<std::size_t>(dictionary.rank()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return dictionary.importance(a) > dictionary.importance(b);
  });
  return order;
}

namespace {

DictionaryTensor permute(const DictionaryTensor& dictionary, const std::vector<Index>& order) {
  const Index r = dictionary.rank();
  if (static_cast<Index>(order.size()) != r) throw DimensionError("permutation length differs from atom count");
  DictionaryTensor out = DictionaryTensor::zeros(dictionary.entities(), dictionary.window(), r);
  for (Index j = 0; j < r; ++j) {
    const Index from = order[static_cast<std::size_t>(j)];
    out.atoms.unfolded().col(j) = dictionary.atoms.unfolded().col(from);
    out.importance(j) = dictionary.importance(from);
  }
  return out;
}

}  // namespace

DictionaryTensor sort_atoms_by_importance(const DictionaryTensor& dictionary) {
  return permute(dictionary, importance_order(dictionary));
}

LearnedModel permute_atoms(const LearnedModel& model, const std::vector<Index>& order) {
  LearnedModel out;
  out.dictionary = permute(model.dictionary, order);
  out.state = model.state;
  const Index r = model.dictionary.rank();
  for (Index a = 0; a < r; ++a) {
    const Index from_a = order[static_cast<std::size_t>(a)];
    out.state.B.row(a) = model.state.B.row(from_a);
    for (Index b = 0; b < r; ++b) out.state.A(a, b) = model.state.A(from_a, order[static_cast<std::size_t>(b)]);
  }
  return out;
}

}  // namespace onmf
