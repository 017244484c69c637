#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "polyforge/psmiles.hpp"

namespace polyforge {

enum class FingerprintKind { kMorgan, kAtomPair };

std::string_view fingerprint_kind_name(FingerprintKind kind);

/// Folded fingerprint: a bit vector plus per-bit feature counts.
struct Fingerprint {
  FingerprintKind kind = FingerprintKind::kMorgan;
  int radius = 0;  // morgan only
  int n_bits = 0;
  std::vector<std::uint64_t> words;
  std::map<std::uint32_t, std::uint32_t> counts;

  bool test(std::uint32_t bit) const { return (words[bit / 64] >> (bit % 64)) & 1U; }
  int popcount() const;
  bool operator==(const Fingerprint&) const = default;
};

constexpr int kDefaultMorganRadius = 2;
constexpr int kDefaultFingerprintBits = 2048;
constexpr int kAtomPairMaxDistance = 30;

/// Circular fingerprint. Initial atom invariants are (Z, degree, total H,
/// charge, ring membership, aromaticity); stars enter as element 0.
Fingerprint morgan_fingerprint(const PolymerGraph& graph, int radius = kDefaultMorganRadius,
                               int n_bits = kDefaultFingerprintBits);

/// Unfolded Morgan environment hashes with multiplicity, for fragment tables.
std::map<std::uint64_t, int> morgan_environments(const PolymerGraph& graph, int radius);

/// Atom-pair fingerprint over (type, type, topological distance) with
/// distances capped at 30.
Fingerprint atom_pair_fingerprint(const PolymerGraph& graph, int n_bits = kDefaultFingerprintBits);

struct AtomPairFeature {
  std::string type_a;
  std::string type_b;
  int distance;
  auto operator<=>(const AtomPairFeature&) const = default;
};

/// Atom-pair feature multiset before hashing.
std::map<AtomPairFeature, int> atom_pair_features(const PolymerGraph& graph);

double tanimoto(const Fingerprint& a, const Fingerprint& b);
double dice(const Fingerprint& a, const Fingerprint& b);

/// Lowercase hex of the bit vector, bit 0 in the lowest nibble of the first
/// character pair's byte (little-endian bytes).
std::string to_hex(const Fingerprint& fp);
nlohmann::json to_json(const Fingerprint& fp);
Fingerprint fingerprint_from_json(const nlohmann::json& j);

}  // namespace polyforge
