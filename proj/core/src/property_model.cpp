#include "polyforge/property_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <Eigen/Dense>

#include "polyforge/hash.hpp"
#include "polyforge/text.hpp"

namespace polyforge {
namespace {

constexpr int kHeadVersion = 1;

const std::vector<PropertySpec> kRegistry{
    {"PE_I", "Electrical conductivity", "log10(S/cm)", -12.0, -2.0},
    {"Egb", "Bulk bandgap", "eV", 0.5, 10.0},
    {"Eea", "Electron affinity", "eV", 0.0, 5.0},
    {"EPS", "Dielectric constant", "dimensionless", 1.0, 15.0},
    {"OPV", "Power conversion efficiency", "%", 0.0, 15.0},
    {"logP", "Crippen logP", "log10(P)", -10.0, 15.0},
};

//                          heavy rings  O     N     S     X     etherO arom  stars
const std::vector<LandscapeRow> kLandscape{
    {"PE_I", -8.0, {0.0, -0.4, 6.0, 1.5, 2.0, 2.5, 0.6, -0.8, 0.0}},
    {"Egb", 4.0, {0.0, -0.3, 6.0, 1.0, -3.0, 4.0, 0.0, -3.5, 0.0}},
    {"Eea", 0.7, {0.0, 0.1, -0.5, 1.0, 1.5, 3.0, 0.0, 1.5, 0.0}},
    {"EPS", 2.5, {0.0, 0.0, 2.5, 3.0, 1.0, 2.0, 0.05, 0.5, 0.0}},
    {"OPV", 3.8, {0.0, 0.3, 1.0, 0.0, 4.0, 3.0, 0.0, 6.0, 0.0}},
};

bool add_row(Dataset& ds, const std::string& smiles, PropertyVector labels) {
  try {
    PolymerGraph g = parse_psmiles(smiles);
    std::string canonical = canonicalize(g);
    ds.rows.push_back({std::move(canonical), std::move(g), std::move(labels)});
    return true;
  } catch (const Error&) {
    ++ds.skipped;
    return false;
  }
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  return in;
}

std::string_view kind_name(HeadKind k) { return k == HeadKind::kSingle ? "single" : "multi"; }

}  // namespace

std::span<const PropertySpec> property_registry() { return kRegistry; }

const PropertySpec& property_spec(std::string_view id) {
  for (const auto& p : kRegistry) {
    if (p.id == id) return p;
  }
  throw Error(ErrorCode::kUnknownProperty, "unknown property '" + std::string(id) + "'");
}

bool is_registered(std::string_view id) {
  return std::any_of(kRegistry.begin(), kRegistry.end(), [&](const PropertySpec& p) { return p.id == id; });
}

std::vector<std::string> target_property_ids() { return {"PE_I", "Egb", "Eea", "EPS", "OPV"}; }

std::optional<DisplayValue> display_value(std::string_view id, double value) {
  if (id == "PE_I") return DisplayValue{std::pow(10.0, value), "S/cm"};
  return std::nullopt;
}

std::vector<std::string> out_of_range(const PropertyVector& values) {
  std::vector<std::string> out;
  for (const auto& [id, v] : values) {
    const auto& spec = property_spec(id);
    if (v < spec.lo || v > spec.hi) out.push_back(id);
  }
  return out;
}

std::span<const LandscapeRow> landscape_coefficients() { return kLandscape; }

PropertyVector reference_landscape(const DenseDescriptors& d) {
  const auto x = d.values();
  PropertyVector out;
  for (const auto& row : kLandscape) {
    double v = row.intercept;
    for (std::size_t k = 0; k < x.size(); ++k) v += row.weights[k] * x[k];
    out.emplace(std::string(row.id), v);
  }
  return out;
}

PropertyVector reference_landscape(const PolymerGraph& graph) { return reference_landscape(dense_descriptors(graph)); }

// ------------------------------------------------------------- datasets

Dataset load_dataset_csv(const std::string& path) {
  auto in = open_or_throw(path);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kSchemaMismatch, path + ": missing header");
  const auto header = split_csv(line);
  const auto smiles_col = std::find(header.begin(), header.end(), "smiles");
  if (smiles_col == header.end()) throw Error(ErrorCode::kSchemaMismatch, path + ": no smiles column");
  const auto sc = static_cast<std::size_t>(smiles_col - header.begin());
  Dataset ds;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) {
      ++ds.skipped;
      continue;
    }
    PropertyVector labels;
    for (std::size_t k = 0; k < header.size(); ++k) {
      if (k == sc || cells[k].empty() || !is_registered(header[k])) continue;
      try {
        std::size_t used = 0;
        const double v = std::stod(cells[k], &used);
        if (used == cells[k].size() && std::isfinite(v)) labels.emplace(header[k], v);
      } catch (const std::exception&) {
      }
    }
    add_row(ds, cells[sc], std::move(labels));
  }
  return ds;
}

Dataset load_dataset_jsonl(const std::string& path) {
  auto in = open_or_throw(path);
  Dataset ds;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("smiles") || !j["smiles"].is_string()) {
      ++ds.skipped;
      continue;
    }
    PropertyVector labels;
    for (const auto& [key, value] : j.items()) {
      if (is_registered(key) && value.is_number() && std::isfinite(value.get<double>())) {
        labels.emplace(key, value.get<double>());
      }
    }
    add_row(ds, j["smiles"].get<std::string>(), std::move(labels));
  }
  return ds;
}

Dataset load_dataset(const std::string& path) {
  return path.ends_with(".jsonl") ? load_dataset_jsonl(path) : load_dataset_csv(path);
}

std::string dataset_hash(std::span<const LabeledRow> rows) {
  std::vector<std::string> lines;
  lines.reserve(rows.size());
  for (const auto& r : rows) {
    std::string line = r.smiles;
    for (const auto& [id, v] : r.labels) line += "|" + id + "=" + format_double(v);
    lines.push_back(std::move(line));
  }
  std::sort(lines.begin(), lines.end());
  std::string joined;
  for (const auto& l : lines) joined += l + "\n";
  return hex64(fnv1a64(joined));
}

// ---------------------------------------------------------- regression

RegressionHead train_head(std::span<const LabeledRow> data, const std::vector<std::string>& ids,
                          double ridge_lambda, const FeaturizerParams& params) {
  if (ids.empty()) throw Error(ErrorCode::kInvalidArgument, "no property ids requested");
  for (const auto& id : ids) property_spec(id);
  if (!(ridge_lambda > 0)) throw Error(ErrorCode::kInvalidArgument, "ridge_lambda must be positive");
  if (data.size() < 10) {
    throw Error(ErrorCode::kInsufficientData, "need at least 10 rows, got " + std::to_string(data.size()));
  }
  const auto n = static_cast<Eigen::Index>(data.size());
  const auto p = static_cast<Eigen::Index>(params.dim + kDenseFeatureCount);
  const auto m = static_cast<Eigen::Index>(ids.size());

  Eigen::MatrixXd X(n, p);
  Eigen::MatrixXd Y(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = data[static_cast<std::size_t>(i)];
    for (Eigen::Index k = 0; k < m; ++k) {
      const auto it = row.labels.find(ids[static_cast<std::size_t>(k)]);
      if (it == row.labels.end()) {
        throw Error(ErrorCode::kMissingLabel,
                    "row " + std::to_string(i) + " (" + row.smiles + ") lacks " + ids[static_cast<std::size_t>(k)]);
      }
      Y(i, k) = it->second;
    }
    const auto x = featurize(row.graph, params);
    for (Eigen::Index j = 0; j < p; ++j) X(i, j) = x[static_cast<std::size_t>(j)];
  }

  const Eigen::RowVectorXd mu = X.colwise().mean();
  Eigen::RowVectorXd sigma = ((X.rowwise() - mu).array().square().colwise().sum() / static_cast<double>(n)).sqrt();
  Eigen::MatrixXd Z = X.rowwise() - mu;
  // Dense descriptors carry a weaker penalty than hashed fragments:
  // dividing a standardized column by sqrt(s) scales its penalty by s.
  const double dense_boost = 1.0 / std::sqrt(kDensePenaltyScale);
  for (Eigen::Index j = 0; j < p; ++j) {
    if (sigma(j) > 1e-12) {
      if (j >= params.dim) sigma(j) /= dense_boost;
      Z.col(j) /= sigma(j);
    } else {
      Z.col(j).setZero();
      sigma(j) = 0;
    }
  }
  const Eigen::RowVectorXd ybar = Y.colwise().mean();
  const Eigen::MatrixXd Yc = Y.rowwise() - ybar;

  Eigen::MatrixXd Wz;
  if (n <= p) {
    Eigen::MatrixXd K = Z * Z.transpose();
    K.diagonal().array() += ridge_lambda;
    Wz = Z.transpose() * K.ldlt().solve(Yc);
  } else {
    Eigen::MatrixXd G = Z.transpose() * Z;
    G.diagonal().array() += ridge_lambda;
    Wz = G.ldlt().solve(Z.transpose() * Yc);
  }

  RegressionHead head;
  head.kind = ids.size() == 1 ? HeadKind::kSingle : HeadKind::kMulti;
  head.property_ids = ids;
  head.params = params;
  head.ridge_lambda = ridge_lambda;
  head.training_rows = static_cast<int>(n);
  head.training_fingerprint = dataset_hash(data);
  head.weights.assign(static_cast<std::size_t>(m), std::vector<double>(static_cast<std::size_t>(p), 0.0));
  head.bias.assign(static_cast<std::size_t>(m), 0.0);
  for (Eigen::Index k = 0; k < m; ++k) {
    auto& w = head.weights[static_cast<std::size_t>(k)];
    double b = ybar(k);
    for (Eigen::Index j = 0; j < p; ++j) {
      if (sigma(j) == 0) continue;
      w[static_cast<std::size_t>(j)] = Wz(j, k) / sigma(j);
      b -= mu(j) * w[static_cast<std::size_t>(j)];
    }
    head.bias[static_cast<std::size_t>(k)] = b;
  }

  head.training_loss.assign(static_cast<std::size_t>(m), 0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<double> x(static_cast<std::size_t>(p));
    for (Eigen::Index j = 0; j < p; ++j) x[static_cast<std::size_t>(j)] = X(i, j);
    const auto pred = predict_features(x, head);
    for (Eigen::Index k = 0; k < m; ++k) {
      const double r = pred.at(ids[static_cast<std::size_t>(k)]) - Y(i, k);
      head.training_loss[static_cast<std::size_t>(k)] += r * r / static_cast<double>(n);
    }
  }
  return head;
}

RegressionHead constant_head(const PropertyVector& values, const FeaturizerParams& params) {
  RegressionHead head;
  head.kind = values.size() == 1 ? HeadKind::kSingle : HeadKind::kMulti;
  head.params = params;
  for (const auto& [id, v] : values) {
    property_spec(id);
    head.property_ids.push_back(id);
    head.bias.push_back(v);
    head.weights.emplace_back(static_cast<std::size_t>(params.dim + kDenseFeatureCount), 0.0);
    head.training_loss.push_back(0.0);
  }
  return head;
}

PropertyVector predict_features(std::span<const double> features, const RegressionHead& head) {
  PropertyVector out;
  for (std::size_t k = 0; k < head.property_ids.size(); ++k) {
    const auto& w = head.weights[k];
    if (w.size() != features.size()) throw Error(ErrorCode::kInvalidArgument, "feature width does not match head");
    double v = head.bias[k];
    for (std::size_t j = 0; j < w.size(); ++j) v += w[j] * features[j];
    out.emplace(head.property_ids[k], v);
  }
  return out;
}

PropertyVector predict(const PolymerGraph& graph, const RegressionHead& head) {
  return predict_features(featurize(graph, head.params), head);
}

nlohmann::json to_json(const RegressionHead& head) {
  return {{"format", "polyforge.head"},
          {"version", kHeadVersion},
          {"kind", kind_name(head.kind)},
          {"property_ids", head.property_ids},
          {"featurizer", {{"dim", head.params.dim}, {"radius", head.params.radius}}},
          {"ridge_lambda", head.ridge_lambda},
          {"training_fingerprint", head.training_fingerprint},
          {"training_rows", head.training_rows},
          {"training_loss", head.training_loss},
          {"bias", head.bias},
          {"weights", head.weights}};
}

RegressionHead head_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "polyforge.head" || j.value("version", 0) != kHeadVersion) {
    throw Error(ErrorCode::kSchemaMismatch, "not a polyforge.head v1 document");
  }
  RegressionHead h;
  const auto kind = j.at("kind").get<std::string>();
  if (kind != "single" && kind != "multi") throw Error(ErrorCode::kSchemaMismatch, "bad head kind " + kind);
  h.kind = kind == "single" ? HeadKind::kSingle : HeadKind::kMulti;
  h.property_ids = j.at("property_ids").get<std::vector<std::string>>();
  h.params.dim = j.at("featurizer").at("dim").get<int>();
  h.params.radius = j.at("featurizer").at("radius").get<int>();
  h.ridge_lambda = j.at("ridge_lambda").get<double>();
  h.training_fingerprint = j.at("training_fingerprint").get<std::string>();
  h.training_rows = j.at("training_rows").get<int>();
  h.training_loss = j.at("training_loss").get<std::vector<double>>();
  h.bias = j.at("bias").get<std::vector<double>>();
  h.weights = j.at("weights").get<std::vector<std::vector<double>>>();
  const auto m = h.property_ids.size();
  if (m == 0 || h.bias.size() != m || h.weights.size() != m || (h.kind == HeadKind::kSingle && m != 1)) {
    throw Error(ErrorCode::kSchemaMismatch, "head shape does not match its property ids");
  }
  for (const auto& id : h.property_ids) property_spec(id);
  for (const auto& row : h.weights) {
    if (row.size() != static_cast<std::size_t>(h.params.dim + kDenseFeatureCount)) {
      throw Error(ErrorCode::kSchemaMismatch, "weight row width does not match featurizer");
    }
  }
  return h;
}

RegressionHead load_head(const std::string& path) {
  auto in = open_or_throw(path);
  const auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::kSchemaMismatch, path + ": invalid JSON");
  return head_from_json(j);
}

void save_head(const RegressionHead& head, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path);
  out << to_json(head).dump() << "\n";
}

HeadPredictor::HeadPredictor(std::vector<RegressionHead> heads) : heads_(std::move(heads)) {
  if (heads_.empty()) throw Error(ErrorCode::kInvalidArgument, "predictor needs at least one head");
}

std::vector<std::string> HeadPredictor::property_ids() const {
  std::vector<std::string> ids;
  for (const auto& h : heads_) {
    for (const auto& id : h.property_ids) {
      if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
    }
  }
  return ids;
}

PropertyVector HeadPredictor::predict(const PolymerGraph& graph) const {
  PropertyVector out;
  std::vector<double> features;
  FeaturizerParams cached{-1, -1};
  for (const auto& h : heads_) {
    if (!(h.params == cached)) {
      features = featurize(graph, h.params);
      cached = h.params;
    }
    for (auto& [id, v] : predict_features(features, h)) out.emplace(id, v);
  }
  return out;
}

}  // namespace polyforge
