#include "onmf/config.hpp"

#include "onmf/errors.hpp"

#include <fstream>
#include <initializer_list>
#include <limits>
#include <set>
#include <utility>

namespace onmf {

using nlohmann::json;

SchemeConfig RunConfig::default_scheme() {
  SchemeConfig s;
  s.learner.memory = 100;
  s.learner.window = 6;
  s.learner.atoms = 50;
  s.learner.lambda = 3.0;
  s.learner.beta = 1.0;
  s.learner.minibatch_iterations = 20;
  s.online_beta = 4.0;
  s.online_lambda_prime = 0.0;
  s.extrapolation_lambda_prime = 0.0;
  s.horizon = 30;
  s.trials = 1000;
  return s;
}

namespace {

// Typed access to one JSON object with dotted-path error reporting.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "must be an object");
  }

  void allow_only(std::initializer_list<const char*> keys) const {
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [key, _] : node_.items())
      if (!allowed.count(key)) throw ConfigError(field(key), "unknown key");
  }

  bool has(const char* key) const { return node_.contains(key); }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  Section section(const char* key) const { return Section(node_.at(key), field(key)); }

  template <typename Int>
  void integer(const char* key, Int& out) const {
    if (!has(key)) return;
    const auto& v = node_.at(key);
    if (!v.is_number_integer()) throw ConfigError(field(key), "must be an integer");
    if (v.is_number_unsigned() && v.get<std::uint64_t>() > std::numeric_limits<std::int64_t>::max())
      throw ConfigError(field(key), "out of range");
    const auto value = v.get<std::int64_t>();
    if (!std::in_range<Int>(value)) throw ConfigError(field(key), "out of range");
    out = static_cast<Int>(value);
  }

  void number(const char* key, double& out) const {
    if (!has(key)) return;
    const auto& v = node_.at(key);
    if (!v.is_number()) throw ConfigError(field(key), "must be a number");
    out = v.get<double>();
  }

  void boolean(const char* key, bool& out) const {
    if (!has(key)) return;
    const auto& v = node_.at(key);
    if (!v.is_boolean()) throw ConfigError(field(key), "must be true or false");
    out = v.get<bool>();
  }

  void string(const char* key, std::string& out) const {
    if (!has(key)) return;
    const auto& v = node_.at(key);
    if (!v.is_string()) throw ConfigError(field(key), "must be a string");
    out = v.get<std::string>();
  }

  void string_list(const char* key, std::vector<std::string>& out) const {
    if (!has(key)) return;
    const auto& v = node_.at(key);
    if (!v.is_array()) throw ConfigError(field(key), "must be a list of strings");
    out.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_string()) throw ConfigError(field(key) + "[" + std::to_string(i) + "]", "must be a string");
      out.push_back(v[i].get<std::string>());
    }
  }

  const json& node() const { return node_; }
  const std::string& path() const { return path_; }

 private:
  const json& node_;
  std::string path_;
};

void read_solver(const Section& s, SolverOptions& opts) {
  s.allow_only({"max_iterations", "tolerance"});
  s.integer("max_iterations", opts.max_iterations);
  s.number("tolerance", opts.tolerance);
}

void check_unique(const std::vector<std::string>& items, const std::string& field) {
  if (items.empty()) throw ConfigError(field, "must not be empty");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < items.size(); ++i)
    if (!seen.insert(items[i]).second)
      throw ConfigError(field + "[" + std::to_string(i) + "]", "duplicate entry '" + items[i] + "'");
}

}  // namespace

void validate_run_config(const RunConfig& cfg) {
  check_unique(cfg.countries, "countries");
  check_unique(cfg.case_types, "case_types");
  for (std::size_t i = 0; i < cfg.case_types.size(); ++i) {
    CaseType type{};
    try {
      type = parse_case_type(cfg.case_types[i]);
    } catch (const ConfigError& e) {
      throw ConfigError("case_types[" + std::to_string(i) + "]", e.message());
    }
    if (!cfg.inputs.count(type))
      throw ConfigError("inputs." + to_string(type), "missing input file for case type");
  }
  for (const auto& [type, path] : cfg.inputs)
    if (!std::filesystem::is_regular_file(path))
      throw ConfigError("inputs." + to_string(type), "file not found: " + path.string());

  try {
    cfg.transform.validate();
  } catch (const ConfigError& e) {
    throw ConfigError("transform." + e.field(), e.message());
  }
  try {
    cfg.scheme.validate();
  } catch (const ConfigError& e) {
    const bool learner = e.field().rfind("learner.", 0) == 0;
    throw ConfigError(learner ? e.field() : "scheme." + e.field(), e.message());
  }
  if (cfg.output_dir.empty()) throw ConfigError("output_dir", "must not be empty");
}

RunConfig parse_run_config(const json& doc, const std::filesystem::path& base_dir) {
  RunConfig cfg;
  const Section root(doc, "");
  root.allow_only({"inputs", "countries", "case_types", "transform", "learner", "scheme", "output_dir",
                   "strict_causal", "sort_atoms"});

  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  };

  if (!root.has("inputs")) throw ConfigError("inputs", "required");
  const Section inputs = root.section("inputs");
  inputs.allow_only({"confirmed", "deaths", "recovered"});
  for (const auto& [key, value] : inputs.node().items()) {
    if (!value.is_string()) throw ConfigError(inputs.field(key), "must be a path string");
    cfg.inputs[parse_case_type(key)] = resolve(value.get<std::string>());
  }

  if (!root.has("countries")) throw ConfigError("countries", "required");
  root.string_list("countries", cfg.countries);
  root.string_list("case_types", cfg.case_types);

  if (root.has("transform")) {
    const Section t = root.section("transform");
    t.allow_only({"smoothing_window", "log_offset", "alignment"});
    t.integer("smoothing_window", cfg.transform.smoothing_window);
    t.number("log_offset", cfg.transform.log_offset);
    std::string alignment = "trailing";
    t.string("alignment", alignment);
    if (alignment == "trailing")
      cfg.transform.alignment = SmoothingAlignment::Trailing;
    else if (alignment == "centered")
      cfg.transform.alignment = SmoothingAlignment::Centered;
    else
      throw ConfigError("transform.alignment", "must be 'trailing' or 'centered'");
  }

  LearnerConfig& learner = cfg.scheme.learner;
  if (root.has("learner")) {
    const Section l = root.section("learner");
    l.allow_only({"memory", "window", "atoms", "lambda", "beta", "minibatch_iterations", "seed",
                  "elementwise_cap", "coding", "dictionary"});
    l.integer("memory", learner.memory);
    l.integer("window", learner.window);
    l.integer("atoms", learner.atoms);
    l.number("lambda", learner.lambda);
    l.number("beta", learner.beta);
    l.integer("minibatch_iterations", learner.minibatch_iterations);
    if (l.has("seed")) {
      const auto& v = l.node().at("seed");
      if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0))
        throw ConfigError("learner.seed", "must be a nonnegative integer");
      learner.seed = v.get<std::uint64_t>();
    }
    if (l.has("elementwise_cap") && !l.node().at("elementwise_cap").is_null()) {
      double cap = 0.0;
      l.number("elementwise_cap", cap);
      learner.elementwise_cap = cap;
    }
    if (l.has("coding")) read_solver(l.section("coding"), learner.coding);
    if (l.has("dictionary")) read_solver(l.section("dictionary"), learner.dictionary);
  }

  if (root.has("scheme")) {
    const Section s = root.section("scheme");
    s.allow_only({"online_beta", "online_lambda_prime", "extrapolation_lambda_prime", "horizon", "trials",
                  "threads", "prediction"});
    s.number("online_beta", cfg.scheme.online_beta);
    s.number("online_lambda_prime", cfg.scheme.online_lambda_prime);
    s.number("extrapolation_lambda_prime", cfg.scheme.extrapolation_lambda_prime);
    s.integer("horizon", cfg.scheme.horizon);
    s.integer("trials", cfg.scheme.trials);
    if (s.has("threads")) {
      std::int64_t threads = 0;
      s.integer("threads", threads);
      if (threads < 0) throw ConfigError("scheme.threads", "must be >= 0");
      cfg.scheme.threads = static_cast<unsigned>(threads);
    }
    if (s.has("prediction")) read_solver(s.section("prediction"), cfg.scheme.prediction);
  }

  std::string output = cfg.output_dir.string();
  root.string("output_dir", output);
  cfg.output_dir = resolve(output);
  root.boolean("strict_causal", cfg.scheme.strict_causal);
  root.boolean("sort_atoms", cfg.sort_atoms);

  validate_run_config(cfg);
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("--config", path.string() + ": " + e.what());
  }
  return parse_run_config(doc, path.parent_path());
}

json run_config_to_json(const RunConfig& cfg) {
  const auto& l = cfg.scheme.learner;
  json inputs = json::object();
  for (const auto& [type, path] : cfg.inputs) inputs[to_string(type)] = path.string();
  auto solver = [](const SolverOptions& o) {
    return json{{"max_iterations", o.max_iterations}, {"tolerance", o.tolerance}};
  };
  return json{
      {"inputs", inputs},
      {"countries", cfg.countries},
      {"case_types", cfg.case_types},
      {"transform",
       {{"smoothing_window", cfg.transform.smoothing_window},
        {"log_offset", cfg.transform.log_offset},
        {"alignment", cfg.transform.alignment == SmoothingAlignment::Trailing ? "trailing" : "centered"}}},
      {"learner",
       {{"memory", l.memory},
        {"window", l.window},
        {"atoms", l.atoms},
        {"lambda", l.lambda},
        {"beta", l.beta},
        {"minibatch_iterations", l.minibatch_iterations},
        {"seed", l.seed},
        {"elementwise_cap", l.elementwise_cap ? json(*l.elementwise_cap) : json(nullptr)},
        {"coding", solver(l.coding)},
        {"dictionary", solver(l.dictionary)}}},
      {"scheme",
       {{"online_beta", cfg.scheme.online_beta},
        {"online_lambda_prime", cfg.scheme.online_lambda_prime},
        {"extrapolation_lambda_prime", cfg.scheme.extrapolation_lambda_prime},
        {"horizon", cfg.scheme.horizon},
        {"trials", cfg.scheme.trials},
        {"prediction", solver(cfg.scheme.prediction)}}},
      {"strict_causal", cfg.scheme.strict_causal},
      {"sort_atoms", cfg.sort_atoms},
  };
}

}  // namespace onmf
