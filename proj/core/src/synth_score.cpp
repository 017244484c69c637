#include "polyforge/synth_score.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>

#include "polyforge/fingerprint.hpp"
#include "polyforge/text.hpp"

namespace polyforge {
namespace {

constexpr int kFormatVersion = 1;

std::uint64_t parse_hex64(const std::string& s) {
  if (s.size() != 16) throw Error(ErrorCode::kInvalidArgument, "fragment key must be 16 hex digits: " + s);
  return std::stoull(s, nullptr, 16);
}

void check_format(const nlohmann::json& j, std::string_view format) {
  if (j.value("format", "") != format || j.value("version", 0) != kFormatVersion) {
    throw Error(ErrorCode::kSchemaMismatch, "expected " + std::string(format) + " version " +
                                                std::to_string(kFormatVersion));
  }
}

std::vector<std::set<int>> ring_bond_sets(const PolymerGraph& g) {
  std::vector<std::set<int>> out;
  for (const auto& ring : g.rings()) {
    std::set<int> bonds;
    for (std::size_t k = 0; k < ring.size(); ++k) {
      bonds.insert(g.find_bond(ring[k], ring[(k + 1) % ring.size()]));
    }
    out.push_back(std::move(bonds));
  }
  return out;
}

}  // namespace

FragmentScoreTable build_fragment_table(std::span<const PolymerGraph> corpus) {
  if (corpus.empty()) throw Error(ErrorCode::kEmptyCorpus, "fragment corpus is empty");
  std::map<std::uint64_t, long long> counts;
  for (const auto& g : corpus) {
    for (const auto& [hash, n] : morgan_environments(strip_stars(g), 2)) counts[hash] += n;
  }
  if (counts.empty()) throw Error(ErrorCode::kEmptyCorpus, "fragment corpus has no atoms");
  std::vector<long long> freqs;
  freqs.reserve(counts.size());
  for (const auto& [hash, n] : counts) freqs.push_back(n);
  std::sort(freqs.begin(), freqs.end());
  const auto ref = static_cast<double>(freqs[static_cast<std::size_t>(0.8 * static_cast<double>(freqs.size() - 1))]);

  FragmentScoreTable t;
  t.corpus_size = static_cast<int>(corpus.size());
  t.reference_frequency = ref;
  double lowest = 0;
  for (const auto& [hash, n] : counts) {
    const double c = std::log10(static_cast<double>(n) / ref);
    t.contributions.emplace(hash, c);
    lowest = std::min(lowest, c);
  }
  t.percentile_floor = lowest - 1.0;
  return t;
}

RingComplexity ring_complexity(const PolymerGraph& graph) {
  RingComplexity rc;
  const auto rings = graph.rings();
  std::set<int> spiro;
  std::set<int> bridgeheads;
  for (std::size_t i = 0; i < rings.size(); ++i) {
    if (rings[i].size() > 8) ++rc.macrocycles;
    for (std::size_t j = i + 1; j < rings.size(); ++j) {
      std::vector<int> a(rings[i].begin(), rings[i].end());
      std::vector<int> b(rings[j].begin(), rings[j].end());
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      std::vector<int> shared;
      std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(shared));
      if (shared.size() == 1) spiro.insert(shared[0]);
    }
  }
  // Rings sharing two or more bonds are bridged; the ends of the shared
  // path are the bridgeheads.
  const auto bond_sets = ring_bond_sets(graph);
  for (std::size_t i = 0; i < bond_sets.size(); ++i) {
    for (std::size_t j = i + 1; j < bond_sets.size(); ++j) {
      std::vector<int> shared;
      std::set_intersection(bond_sets[i].begin(), bond_sets[i].end(), bond_sets[j].begin(), bond_sets[j].end(),
                            std::back_inserter(shared));
      if (shared.size() < 2) continue;
      std::map<int, int> ends;
      for (int e : shared) {
        ++ends[graph.bond(e).a];
        ++ends[graph.bond(e).b];
      }
      for (const auto& [atom, n] : ends) {
        if (n == 1) bridgeheads.insert(atom);
      }
    }
  }
  rc.spiro_atoms = static_cast<int>(spiro.size());
  rc.bridgehead_atoms = static_cast<int>(bridgeheads.size());
  return rc;
}

SaBreakdown sa_breakdown(const PolymerGraph& graph, const FragmentScoreTable& table) {
  require_valid(graph);
  const PolymerGraph g = strip_stars(graph);
  if (g.atom_count() == 0) throw Error(ErrorCode::kInvalidGraph, "graph has no atoms to score");
  SaBreakdown b;
  const auto envs = morgan_environments(g, table.radius);
  int nf = 0;
  for (const auto& [hash, n] : envs) {
    b.fragment_score += table.contribution(hash) * n;
    nf += n;
  }
  b.fragment_score /= nf;

  const double n_atoms = g.atom_count();
  const RingComplexity rc = ring_complexity(g);
  b.size_penalty = std::pow(n_atoms, 1.005) - n_atoms;
  b.spiro_penalty = std::log10(rc.spiro_atoms + 1.0);
  b.bridge_penalty = std::log10(rc.bridgehead_atoms + 1.0);
  b.macrocycle_penalty = rc.macrocycles > 0 ? std::log10(2.0) : 0.0;
  const auto distinct = static_cast<double>(envs.size());
  if (n_atoms > distinct) b.symmetry_correction = 0.5 * std::log(n_atoms / distinct);

  b.raw = b.fragment_score - b.size_penalty - b.spiro_penalty - b.bridge_penalty - b.macrocycle_penalty +
          b.symmetry_correction;
  double s = table.scale.slope * b.raw + table.scale.intercept;
  if (s > 8.0) s = 8.0 + std::log(s - 7.0);
  b.score = std::clamp(s, 1.0, 10.0);
  return b;
}

double sa_score(const PolymerGraph& graph, const FragmentScoreTable& table) {
  return sa_breakdown(graph, table).score;
}

FragmentScoreTable fit_sa_scale(FragmentScoreTable table, std::span<const PolymerGraph> graphs,
                                std::span<const double> reference) {
  if (graphs.size() != reference.size() || graphs.size() < 2) {
    throw Error(ErrorCode::kInsufficientData, "scale fit needs at least two paired scores");
  }
  std::vector<double> raw;
  raw.reserve(graphs.size());
  for (const auto& g : graphs) raw.push_back(sa_breakdown(g, table).raw);
  const double n = static_cast<double>(raw.size());
  const double mx = std::accumulate(raw.begin(), raw.end(), 0.0) / n;
  const double my = std::accumulate(reference.begin(), reference.end(), 0.0) / n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    sxy += (raw[i] - mx) * (reference[i] - my);
    sxx += (raw[i] - mx) * (raw[i] - mx);
  }
  if (sxx == 0) throw Error(ErrorCode::kDegenerateData, "raw SA scores have zero variance");
  table.scale.slope = sxy / sxx;
  table.scale.intercept = my - table.scale.slope * mx;
  return table;
}

ScScoreModel constant_sc_model(double bias, const FeaturizerParams& params) {
  ScScoreModel m;
  m.params = params;
  m.weights.assign(static_cast<std::size_t>(params.dim + kDenseFeatureCount), 0.0);
  m.bias = bias;
  return m;
}

double sc_score_from_features(std::span<const double> features, const ScScoreModel& model) {
  if (features.size() != model.weights.size()) {
    throw Error(ErrorCode::kInvalidArgument, "feature vector does not match SC model width");
  }
  double v = model.bias;
  for (std::size_t i = 0; i < features.size(); ++i) v += model.weights[i] * features[i];
  return std::clamp(v, 1.0, 5.0);
}

double sc_raw(const PolymerGraph& graph, const ScScoreModel& model) {
  const auto x = featurize(graph, model.params);
  if (x.size() != model.weights.size()) {
    throw Error(ErrorCode::kInvalidArgument, "feature vector does not match SC model width");
  }
  return std::inner_product(x.begin(), x.end(), model.weights.begin(), model.bias);
}

double sc_score(const PolymerGraph& graph, const ScScoreModel& model) {
  return std::clamp(sc_raw(graph, model), 1.0, 5.0);
}

std::array<double, kDenseFeatureCount> default_sc_shape() {
  // heavy, rings, O, N, S, halogen, ether O, aromatic, stars
  return {0.04, 0.30, 0.50, 0.80, 0.60, 0.40, -0.05, 0.70, 0.0};
}

ScScoreModel calibrate_sc_model(std::span<const PolymerGraph> graphs, double target_mean,
                                const std::array<double, kDenseFeatureCount>& shape,
                                const FeaturizerParams& params) {
  if (graphs.empty()) throw Error(ErrorCode::kInsufficientData, "no graphs to calibrate on");
  if (target_mean <= 1.0 || target_mean >= 5.0) {
    throw Error(ErrorCode::kInvalidArgument, "target mean must lie strictly inside (1, 5)");
  }
  ScScoreModel m = constant_sc_model(0.0, params);
  std::copy(shape.begin(), shape.end(), m.weights.begin() + params.dim);
  std::vector<double> raw;
  raw.reserve(graphs.size());
  for (const auto& g : graphs) raw.push_back(sc_raw(g, m));
  auto mean_at = [&](double bias) {
    double s = 0;
    for (double r : raw) s += std::clamp(r + bias, 1.0, 5.0);
    return s / static_cast<double>(raw.size());
  };
  // The clamped mean is monotone in the bias.
  double lo = -10.0 - *std::max_element(raw.begin(), raw.end());
  double hi = 10.0 - *std::min_element(raw.begin(), raw.end());
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mean_at(mid) < target_mean ? lo : hi) = mid;
  }
  m.bias = 0.5 * (lo + hi);
  return m;
}

nlohmann::json to_json(const FragmentScoreTable& table) {
  nlohmann::json contributions = nlohmann::json::object();
  for (const auto& [hash, c] : table.contributions) contributions[hex64(hash)] = c;
  return {{"format", "polyforge.sa_fragments"},
          {"version", kFormatVersion},
          {"radius", table.radius},
          {"corpus_size", table.corpus_size},
          {"reference_frequency", table.reference_frequency},
          {"percentile_floor", table.percentile_floor},
          {"scale", {{"slope", table.scale.slope}, {"intercept", table.scale.intercept}}},
          {"contributions", std::move(contributions)}};
}

FragmentScoreTable fragment_table_from_json(const nlohmann::json& j) {
  check_format(j, "polyforge.sa_fragments");
  FragmentScoreTable t;
  t.radius = j.at("radius").get<int>();
  t.corpus_size = j.at("corpus_size").get<int>();
  t.reference_frequency = j.at("reference_frequency").get<double>();
  t.percentile_floor = j.at("percentile_floor").get<double>();
  t.scale.slope = j.at("scale").at("slope").get<double>();
  t.scale.intercept = j.at("scale").at("intercept").get<double>();
  for (const auto& [key, value] : j.at("contributions").items()) {
    const double c = value.get<double>();
    if (!std::isfinite(c)) throw Error(ErrorCode::kSchemaMismatch, "non-finite fragment contribution");
    t.contributions.emplace(parse_hex64(key), c);
  }
  if (t.contributions.empty()) throw Error(ErrorCode::kSchemaMismatch, "fragment table has no contributions");
  return t;
}

nlohmann::json to_json(const ScScoreModel& model) {
  nlohmann::json hashed = nlohmann::json::object();
  for (int i = 0; i < model.params.dim; ++i) {
    const double w = model.weights[static_cast<std::size_t>(i)];
    if (w != 0.0) hashed[std::to_string(i)] = w;
  }
  nlohmann::json dense = nlohmann::json::object();
  for (int k = 0; k < kDenseFeatureCount; ++k) {
    dense[std::string(kDenseFeatureNames[static_cast<std::size_t>(k)])] =
        model.weights[static_cast<std::size_t>(model.params.dim + k)];
  }
  return {{"format", "polyforge.sc_model"}, {"version", kFormatVersion}, {"dim", model.params.dim},
          {"radius", model.params.radius},  {"bias", model.bias},        {"dense_weights", std::move(dense)},
          {"hashed_weights", std::move(hashed)}};
}

ScScoreModel sc_model_from_json(const nlohmann::json& j) {
  check_format(j, "polyforge.sc_model");
  FeaturizerParams p;
  p.dim = j.at("dim").get<int>();
  p.radius = j.at("radius").get<int>();
  ScScoreModel m = constant_sc_model(j.at("bias").get<double>(), p);
  for (const auto& [key, value] : j.at("hashed_weights").items()) {
    const int i = std::stoi(key);
    if (i < 0 || i >= p.dim) throw Error(ErrorCode::kSchemaMismatch, "hashed weight index out of range");
    m.weights[static_cast<std::size_t>(i)] = value.get<double>();
  }
  const auto& dense = j.at("dense_weights");
  for (int k = 0; k < kDenseFeatureCount; ++k) {
    m.weights[static_cast<std::size_t>(p.dim + k)] =
        dense.at(std::string(kDenseFeatureNames[static_cast<std::size_t>(k)])).get<double>();
  }
  return m;
}

}  // namespace polyforge
