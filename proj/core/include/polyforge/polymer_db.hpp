#pragma once

// In-memory CRU property database: ingest, range queries, summary
// statistics and PCA projections of the descriptor space.

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "polyforge/features.hpp"
#include "polyforge/property_model.hpp"
#include "polyforge/synth_score.hpp"

namespace polyforge {

struct DbRecord {
  std::string cru;  // canonical
  PropertyVector properties;
  std::optional<double> sa;
  std::optional<double> sc;
  std::string source_tag;
};

nlohmann::json to_json(const DbRecord& record);

enum class DbFormat { kCsv, kJsonl };

/// Optional scorers filling `sa` / `sc` when the file leaves them blank.
struct IngestScorers {
  const FragmentScoreTable* sa_table = nullptr;
  const ScScoreModel* sc_model = nullptr;
};

class CruDatabase {
 public:
  /// Parses CSV (header `smiles,PE_I,Egb,Eea,EPS,OPV,sa,sc,source`; every
  /// column but smiles optional) or JSONL rows with the same keys. Rows with
  /// unparseable SMILES or the wrong cell count are skipped and counted;
  /// duplicates keep the first occurrence. Throws Error(kSchemaMismatch)
  /// for unknown columns or no smiles column and Error(kAllRowsInvalid)
  /// when nothing survives.
  static CruDatabase ingest(const std::filesystem::path& path, DbFormat format, const IngestScorers& scorers = {});
  static CruDatabase ingest(const std::filesystem::path& path, const IngestScorers& scorers = {});
  static CruDatabase ingest_text(std::string_view text, DbFormat format, const IngestScorers& scorers = {});
  /// Builds directly from records (canonicalizes and merges duplicates).
  static CruDatabase from_records(std::vector<DbRecord> records);

  const std::vector<DbRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  int skipped() const { return skipped_; }
  /// FNV-1a over the sorted record lines, as hex.
  const std::string& corpus_hash() const { return corpus_hash_; }

  /// Records with lo <= value <= hi, ascending by value then CRU, at most
  /// `limit` (0 = no limit). Throws Error(kUnknownProperty) or
  /// Error(kInvalidRange) for lo > hi.
  std::vector<DbRecord> query(std::string_view property_id, double lo, double hi, std::size_t limit = 0) const;

  /// Record slice for paging.
  std::vector<DbRecord> page(std::size_t offset, std::size_t limit) const;

  /// CSV in the ingest schema (property columns from the registry targets).
  std::string to_csv() const;

 private:
  void finalize();

  std::vector<DbRecord> records_;
  std::map<std::string, std::vector<std::size_t>, std::less<>> index_;  // sorted by (value, cru)
  int skipped_ = 0;
  std::string corpus_hash_;
};

struct PropertySummary {
  std::size_t count = 0;
  double mean = 0;
  double min = 0;
  double max = 0;
};

constexpr double kSaHistogramLo = 1.0;
constexpr double kSaHistogramHi = 10.0;
constexpr double kSaHistogramWidth = 0.5;
constexpr int kSaHistogramBins = 18;

struct DbStats {
  std::size_t records = 0;
  std::map<std::string, PropertySummary, std::less<>> properties;
  std::optional<PropertySummary> sa;
  std::optional<PropertySummary> sc;
  /// Bin i covers [1 + 0.5 i, 1.5 + 0.5 i); the last bin includes 10.
  std::array<int, kSaHistogramBins> sa_histogram{};
};

/// Throws Error(kEmptyDatabase).
DbStats stats(const CruDatabase& db);
nlohmann::json to_json(const DbStats& stats);

struct PcaResult {
  int k = 0;
  std::vector<std::vector<double>> coordinates;  // one row per sample
  std::vector<double> explained_variance_ratio;  // non-increasing
  std::vector<std::vector<double>> components;   // k unit vectors over the input columns
};

/// PCA of the column-standardized matrix (constant columns are dropped
/// from the standardization and get zero loadings). Each component's
/// largest-magnitude loading is made positive. Throws
/// Error(kInsufficientData) when rows < k + 1 and Error(kDegenerateData)
/// when every column is constant.
PcaResult pca(const std::vector<std::vector<double>>& rows, int k);

/// PCA over the featurized records.
PcaResult pca_projection(const CruDatabase& db, int k, const FeaturizerParams& params = {});

/// `cru,pc1,pc2[,pc3],<target property columns>`.
std::string pca_csv(const CruDatabase& db, const PcaResult& result);

}  // namespace polyforge
