#include "polyforge/polymer_db.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include <Eigen/Dense>

#include "polyforge/hash.hpp"
#include "polyforge/text.hpp"

namespace polyforge {
namespace {

bool is_meta_column(std::string_view c) { return c == "smiles" || c == "sa" || c == "sc" || c == "source"; }

std::optional<double> number(const std::string& cell, bool& bad) {
  if (cell.empty()) return std::nullopt;
  try {
    std::size_t used = 0;
    const double v = std::stod(cell, &used);
    if (used == cell.size() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  bad = true;
  return std::nullopt;
}

void summarize(PropertySummary& s, double v) {
  if (s.count == 0) {
    s.min = s.max = v;
  } else {
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
  }
  ++s.count;
  s.mean += v;  // running sum until `finish`
}

void finish(PropertySummary& s) { s.mean /= static_cast<double>(s.count); }

nlohmann::json summary_json(const PropertySummary& s) {
  return {{"count", s.count}, {"mean", s.mean}, {"min", s.min}, {"max", s.max}};
}

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

nlohmann::json to_json(const DbRecord& r) {
  nlohmann::json props = nlohmann::json::object();
  for (const auto& [id, v] : r.properties) props[id] = v;
  nlohmann::json j{{"cru", r.cru}, {"properties", std::move(props)}, {"source", r.source_tag}};
  j["sa"] = r.sa ? nlohmann::json(*r.sa) : nlohmann::json(nullptr);
  j["sc"] = r.sc ? nlohmann::json(*r.sc) : nlohmann::json(nullptr);
  j["out_of_range"] = out_of_range(r.properties);
  return j;
}

CruDatabase CruDatabase::ingest(const std::filesystem::path& path, const IngestScorers& scorers) {
  return ingest(path, path.extension() == ".jsonl" ? DbFormat::kJsonl : DbFormat::kCsv, scorers);
}

CruDatabase CruDatabase::ingest(const std::filesystem::path& path, DbFormat format, const IngestScorers& scorers) {
  return ingest_text(read_file(path), format, scorers);
}

CruDatabase CruDatabase::ingest_text(std::string_view text, DbFormat format, const IngestScorers& scorers) {
  CruDatabase db;
  std::set<std::string> seen;
  auto add = [&](const std::string& smiles, DbRecord rec) {
    PolymerGraph g;
    try {
      g = parse_psmiles(smiles);
      rec.cru = canonicalize(g);
    } catch (const Error&) {
      ++db.skipped_;
      return;
    }
    if (!seen.insert(rec.cru).second) return;
    if (!rec.sa && scorers.sa_table) rec.sa = sa_score(g, *scorers.sa_table);
    if (!rec.sc && scorers.sc_model) rec.sc = sc_score(g, *scorers.sc_model);
    db.records_.push_back(std::move(rec));
  };

  std::istringstream in{std::string(text)};
  std::string line;
  if (format == DbFormat::kCsv) {
    if (!std::getline(in, line) || line.find_first_not_of(" \t\r") == std::string::npos) {
      throw Error(ErrorCode::kAllRowsInvalid, "database file is empty");
    }
    const auto header = split_csv(line);
    if (std::find(header.begin(), header.end(), "smiles") == header.end()) {
      throw Error(ErrorCode::kSchemaMismatch, "CSV header has no smiles column");
    }
    for (const auto& c : header) {
      if (!is_meta_column(c) && !is_registered(c)) {
        throw Error(ErrorCode::kSchemaMismatch, "unknown CSV column '" + c + "'");
      }
    }
    while (std::getline(in, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      const auto cells = split_csv(line);
      if (cells.size() != header.size()) {
        ++db.skipped_;
        continue;
      }
      DbRecord rec;
      std::string smiles;
      bool bad = false;
      for (std::size_t k = 0; k < header.size(); ++k) {
        const auto& c = header[k];
        if (c == "smiles") {
          smiles = cells[k];
        } else if (c == "source") {
          rec.source_tag = cells[k];
        } else if (c == "sa") {
          rec.sa = number(cells[k], bad);
        } else if (c == "sc") {
          rec.sc = number(cells[k], bad);
        } else if (auto v = number(cells[k], bad)) {
          rec.properties.emplace(c, *v);
        }
      }
      if (bad) {
        ++db.skipped_;
        continue;
      }
      add(smiles, std::move(rec));
    }
  } else {
    while (std::getline(in, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      const auto j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.is_object() || !j.contains("smiles") || !j["smiles"].is_string()) {
        ++db.skipped_;
        continue;
      }
      DbRecord rec;
      bool bad = false;
      for (const auto& [key, value] : j.items()) {
        if (key == "smiles") continue;
        if (key == "source") {
          if (!value.is_string()) bad = true;
          else rec.source_tag = value.get<std::string>();
          continue;
        }
        if (!is_meta_column(key) && !is_registered(key)) {
          throw Error(ErrorCode::kSchemaMismatch, "unknown JSONL key '" + key + "'");
        }
        if (value.is_null()) continue;
        if (!value.is_number() || !std::isfinite(value.get<double>())) {
          bad = true;
          continue;
        }
        const double v = value.get<double>();
        if (key == "sa") rec.sa = v;
        else if (key == "sc") rec.sc = v;
        else rec.properties.emplace(key, v);
      }
      if (bad) {
        ++db.skipped_;
        continue;
      }
      add(j["smiles"].get<std::string>(), std::move(rec));
    }
  }
  if (db.records_.empty()) {
    throw Error(ErrorCode::kAllRowsInvalid, "no valid rows (" + std::to_string(db.skipped_) + " skipped)");
  }
  db.finalize();
  return db;
}

CruDatabase CruDatabase::from_records(std::vector<DbRecord> records) {
  CruDatabase db;
  std::set<std::string> seen;
  for (auto& r : records) {
    r.cru = canonical_smiles(r.cru);
    if (seen.insert(r.cru).second) db.records_.push_back(std::move(r));
  }
  db.finalize();
  return db;
}

void CruDatabase::finalize() {
  index_.clear();
  for (std::size_t i = 0; i < records_.size(); ++i) {
    for (const auto& [id, v] : records_[i].properties) index_[id].push_back(i);
  }
  for (auto& [id, rows] : index_) {
    std::sort(rows.begin(), rows.end(), [&, &key = id](std::size_t a, std::size_t b) {
      const double va = records_[a].properties.find(key)->second, vb = records_[b].properties.find(key)->second;
      if (va != vb) return va < vb;
      return records_[a].cru < records_[b].cru;
    });
  }
  std::vector<std::string> lines;
  for (const auto& r : records_) {
    std::string l = r.cru;
    for (const auto& [id, v] : r.properties) l += "|" + id + "=" + format_double(v);
    if (r.sa) l += "|sa=" + format_double(*r.sa);
    if (r.sc) l += "|sc=" + format_double(*r.sc);
    l += "|source=" + r.source_tag;
    lines.push_back(std::move(l));
  }
  std::sort(lines.begin(), lines.end());
  std::string joined;
  for (const auto& l : lines) joined += l + "\n";
  corpus_hash_ = hex64(fnv1a64(joined));
}

std::vector<DbRecord> CruDatabase::query(std::string_view property_id, double lo, double hi, std::size_t limit) const {
  property_spec(property_id);
  if (!(lo <= hi)) throw Error(ErrorCode::kInvalidRange, "query range has lo > hi");
  std::vector<DbRecord> out;
  auto it = index_.find(property_id);
  if (it == index_.end()) return out;
  const auto& rows = it->second;
  auto value = [&](std::size_t i) { return records_[i].properties.find(property_id)->second; };
  auto first = std::lower_bound(rows.begin(), rows.end(), lo, [&](std::size_t i, double x) { return value(i) < x; });
  for (auto r = first; r != rows.end() && value(*r) <= hi; ++r) {
    if (limit && out.size() >= limit) break;
    out.push_back(records_[*r]);
  }
  return out;
}

std::vector<DbRecord> CruDatabase::page(std::size_t offset, std::size_t limit) const {
  std::vector<DbRecord> out;
  for (std::size_t i = offset; i < records_.size() && out.size() < limit; ++i) out.push_back(records_[i]);
  return out;
}

std::string CruDatabase::to_csv() const {
  std::string out = "smiles";
  const auto ids = target_property_ids();
  for (const auto& id : ids) out += "," + id;
  out += ",sa,sc,source\n";
  for (const auto& r : records_) {
    out += r.cru;
    for (const auto& id : ids) {
      auto it = r.properties.find(id);
      out += "," + (it == r.properties.end() ? std::string() : fixed6(it->second));
    }
    out += "," + (r.sa ? fixed6(*r.sa) : std::string()) + "," + (r.sc ? fixed6(*r.sc) : std::string()) + "," +
           r.source_tag + "\n";
  }
  return out;
}

DbStats stats(const CruDatabase& db) {
  if (db.size() == 0) throw Error(ErrorCode::kEmptyDatabase, "database has no records");
  DbStats s;
  s.records = db.size();
  for (const auto& r : db.records()) {
    for (const auto& [id, v] : r.properties) summarize(s.properties[id], v);
    if (r.sa) {
      if (!s.sa) s.sa.emplace();
      summarize(*s.sa, *r.sa);
      const int bin = static_cast<int>(std::floor((*r.sa - kSaHistogramLo) / kSaHistogramWidth));
      ++s.sa_histogram[static_cast<std::size_t>(std::clamp(bin, 0, kSaHistogramBins - 1))];
    }
    if (r.sc) {
      if (!s.sc) s.sc.emplace();
      summarize(*s.sc, *r.sc);
    }
  }
  for (auto& [id, p] : s.properties) finish(p);
  if (s.sa) finish(*s.sa);
  if (s.sc) finish(*s.sc);
  return s;
}

nlohmann::json to_json(const DbStats& s) {
  nlohmann::json props = nlohmann::json::object();
  for (const auto& [id, p] : s.properties) {
    auto j = summary_json(p);
    j["units"] = property_spec(id).units;
    props[id] = std::move(j);
  }
  nlohmann::json edges = nlohmann::json::array();
  for (int i = 0; i <= kSaHistogramBins; ++i) edges.push_back(kSaHistogramLo + kSaHistogramWidth * i);
  return {{"records", s.records},
          {"properties", std::move(props)},
          {"sa", s.sa ? summary_json(*s.sa) : nlohmann::json(nullptr)},
          {"sc", s.sc ? summary_json(*s.sc) : nlohmann::json(nullptr)},
          {"sa_histogram", {{"edges", std::move(edges)}, {"counts", s.sa_histogram}}}};
}

PcaResult pca(const std::vector<std::vector<double>>& rows, int k) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "PCA needs k >= 1");
  if (static_cast<int>(rows.size()) < k + 1) {
    throw Error(ErrorCode::kInsufficientData,
                "PCA with k=" + std::to_string(k) + " needs at least " + std::to_string(k + 1) + " records");
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto p = static_cast<Eigen::Index>(rows.front().size());
  if (k > p) throw Error(ErrorCode::kInvalidArgument, "k exceeds the feature count");
  Eigen::MatrixXd Z(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)].size()) != p) {
      throw Error(ErrorCode::kInvalidArgument, "ragged PCA input");
    }
    for (Eigen::Index j = 0; j < p; ++j) Z(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  const Eigen::RowVectorXd mean = Z.colwise().mean();
  Z.rowwise() -= mean;
  int varying = 0;
  for (Eigen::Index j = 0; j < p; ++j) {
    const double sd = std::sqrt(Z.col(j).squaredNorm() / static_cast<double>(n - 1));
    if (sd > 1e-12) {
      Z.col(j) /= sd;
      ++varying;
    } else {
      Z.col(j).setZero();
    }
  }
  if (varying == 0) throw Error(ErrorCode::kDegenerateData, "every feature is constant");
  const Eigen::MatrixXd cov = (Z.transpose() * Z) / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw Error(ErrorCode::kDegenerateData, "eigendecomposition failed");

  PcaResult out;
  out.k = k;
  const double total = static_cast<double>(varying);  // trace of a correlation matrix
  for (int c = 0; c < k; ++c) {
    const Eigen::Index col = p - 1 - c;
    Eigen::VectorXd v = eig.eigenvectors().col(col);
    Eigen::Index arg = 0;
    for (Eigen::Index j = 1; j < p; ++j) {
      if (std::abs(v(j)) > std::abs(v(arg)) + 1e-12) arg = j;
    }
    if (v(arg) < 0) v = -v;
    out.explained_variance_ratio.push_back(std::max(0.0, eig.eigenvalues()(col)) / total);
    out.components.emplace_back(v.data(), v.data() + p);
  }
  out.coordinates.assign(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(k)));
  for (int c = 0; c < k; ++c) {
    const Eigen::Map<const Eigen::VectorXd> v(out.components[static_cast<std::size_t>(c)].data(), p);
    const Eigen::VectorXd proj = Z * v;
    for (Eigen::Index i = 0; i < n; ++i) out.coordinates[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)] = proj(i);
  }
  return out;
}

PcaResult pca_projection(const CruDatabase& db, int k, const FeaturizerParams& params) {
  if (k != 2 && k != 3) throw Error(ErrorCode::kInvalidArgument, "PCA projection supports k = 2 or 3");
  std::vector<std::vector<double>> rows;
  rows.reserve(db.size());
  for (const auto& r : db.records()) rows.push_back(featurize(parse_psmiles(r.cru), params));
  return pca(rows, k);
}

std::string pca_csv(const CruDatabase& db, const PcaResult& result) {
  std::string out = "cru";
  for (int c = 0; c < result.k; ++c) out += ",pc" + std::to_string(c + 1);
  const auto ids = target_property_ids();
  for (const auto& id : ids) out += "," + id;
  out += "\n";
  for (std::size_t i = 0; i < db.size(); ++i) {
    const auto& r = db.records()[i];
    out += r.cru;
    for (double x : result.coordinates[i]) out += "," + fixed6(x);
    for (const auto& id : ids) {
      auto it = r.properties.find(id);
      out += "," + (it == r.properties.end() ? std::string() : fixed6(it->second));
    }
    out += "\n";
  }
  return out;
}

}  // namespace polyforge
