#include "onmf/checkpoint.hpp"

#include "onmf/errors.hpp"

#include <fstream>
#include <string>

namespace onmf {

using nlohmann::json;

namespace {

json matrix_block(const Matrix& m) {
  json data = json::array();
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  return json{{"shape", {m.rows(), m.cols()}}, {"order", "row-major"}, {"data", std::move(data)}};
}

Matrix read_matrix(const json& block, Index rows, Index cols, const char* name) {
  const auto& shape = block.at("shape");
  if (shape.size() != 2 || shape[0].get<Index>() != rows || shape[1].get<Index>() != cols)
    throw Error(std::string("checkpoint: ") + name + " has shape " + shape.dump() + ", expected [" +
                std::to_string(rows) + "," + std::to_string(cols) + "]");
  const auto& data = block.at("data");
  if (static_cast<Index>(data.size()) != rows * cols)
    throw Error(std::string("checkpoint: ") + name + " data length mismatch");
  Matrix m(rows, cols);
  std::size_t n = 0;
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = data[n++].get<double>();
  return m;
}

}  // namespace

json checkpoint_to_json(const Checkpoint& checkpoint) {
  const auto& dict = checkpoint.model.dictionary;
  const auto& state = checkpoint.model.state;
  const Index d = dict.entities(), k = dict.window(), r = dict.rank();

  json w = json::array();
  for (Index i = 0; i < d; ++i)
    for (Index a = 0; a < k; ++a)
      for (Index j = 0; j < r; ++j) w.push_back(dict.atoms(i, a, j));

  json labels = json::array();
  for (const auto& label : checkpoint.labels) labels.push_back({label.entity, label.case_type});

  return json{
      {"format", "onmf-checkpoint"},
      {"version", kCheckpointVersion},
      {"d", d},
      {"k", k},
      {"r", r},
      {"beta", state.beta},
      {"step", state.step},
      {"W", {{"shape", {d, k, r}}, {"order", "row-major (entity, lag, atom)"}, {"data", std::move(w)}}},
      {"A", matrix_block(state.A)},
      {"B", matrix_block(state.B)},
      {"importance", std::vector<double>(dict.importance.data(), dict.importance.data() + r)},
      {"row_labels", std::move(labels)},
      {"config", checkpoint.config},
  };
}

Checkpoint checkpoint_from_json(const json& doc) {
  try {
    if (doc.at("format") != "onmf-checkpoint") throw Error("checkpoint: unexpected format tag");
    if (doc.at("version").get<int>() != kCheckpointVersion)
      throw Error("checkpoint: unsupported version " + doc.at("version").dump());
    const auto d = doc.at("d").get<Index>();
    const auto k = doc.at("k").get<Index>();
    const auto r = doc.at("r").get<Index>();
    if (d < 1 || k < 1 || r < 1) throw Error("checkpoint: dimensions must be positive");

    Checkpoint out;
    const auto& w = doc.at("W");
    if (w.at("shape") != json{d, k, r}) throw Error("checkpoint: W shape mismatch");
    const auto& data = w.at("data");
    if (static_cast<Index>(data.size()) != d * k * r) throw Error("checkpoint: W data length mismatch");
    Tensor3 atoms(d, k, r);
    std::size_t n = 0;
    for (Index i = 0; i < d; ++i)
      for (Index a = 0; a < k; ++a)
        for (Index j = 0; j < r; ++j) atoms(i, a, j) = data[n++].get<double>();

    const auto importance = doc.at("importance").get<std::vector<double>>();
    if (static_cast<Index>(importance.size()) != r) throw Error("checkpoint: importance length mismatch");
    out.model.dictionary =
        DictionaryTensor(std::move(atoms), Eigen::Map<const Vector>(importance.data(), r));
    out.model.state.A = read_matrix(doc.at("A"), r, r, "A");
    out.model.state.B = read_matrix(doc.at("B"), r, d * k, "B");
    out.model.state.beta = doc.at("beta").get<double>();
    out.model.state.step = doc.at("step").get<std::int64_t>();

    for (const auto& label : doc.at("row_labels"))
      out.labels.push_back(RowLabel{label.at(0).get<std::string>(), label.at(1).get<std::string>()});
    if (!out.labels.empty() && static_cast<Index>(out.labels.size()) != d)
      throw Error("checkpoint: row_labels length differs from d");
    out.config = doc.value("config", json::object());
    return out;
  } catch (const json::exception& e) {
    throw Error(std::string("checkpoint: malformed document: ") + e.what());
  }
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << checkpoint_to_json(checkpoint).dump(1) << '\n';
  if (!out) throw Error("write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open checkpoint " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error("checkpoint " + path.string() + ": " + e.what());
  }
  return checkpoint_from_json(doc);
}

}  // namespace onmf
