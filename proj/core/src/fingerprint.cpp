#include "polyforge/fingerprint.hpp"

#include <algorithm>
#include <bit>
#include <deque>
#include <set>

#include "polyforge/hash.hpp"

namespace polyforge {
namespace {

void check_bits(int n_bits) {
  if (n_bits != 512 && n_bits != 1024 && n_bits != 2048 && n_bits != 4096) {
    throw Error(ErrorCode::kInvalidArgument, "n_bits must be one of 512, 1024, 2048, 4096");
  }
}

Fingerprint empty(FingerprintKind kind, int radius, int n_bits) {
  Fingerprint fp;
  fp.kind = kind;
  fp.radius = radius;
  fp.n_bits = n_bits;
  fp.words.assign(static_cast<std::size_t>(n_bits / 64), 0);
  return fp;
}

void add_feature(Fingerprint& fp, std::uint64_t hash, int count) {
  const auto bit = static_cast<std::uint32_t>(hash % static_cast<std::uint64_t>(fp.n_bits));
  fp.words[bit / 64] |= std::uint64_t{1} << (bit % 64);
  fp.counts[bit] += static_cast<std::uint32_t>(count);
}

std::uint64_t initial_invariant(const PolymerGraph& g, int i) {
  const AtomNode& a = g.atom(i);
  const ElementInfo* info = find_element(a.element);
  std::uint64_t h = splitmix64(static_cast<std::uint64_t>(info ? info->atomic_number : 255));
  h = hash_combine(h, static_cast<std::uint64_t>(g.degree(i)));
  h = hash_combine(h, static_cast<std::uint64_t>(g.total_h(i)));
  h = hash_combine(h, static_cast<std::uint64_t>(static_cast<std::int64_t>(a.formal_charge)));
  h = hash_combine(h, g.atom_in_ring(i) ? 1U : 0U);
  h = hash_combine(h, a.aromatic ? 1U : 0U);
  return h;
}

void check_intersection(const Fingerprint& a, const Fingerprint& b) {
  if (a.kind != b.kind || a.n_bits != b.n_bits || a.words.size() != b.words.size()) {
    throw Error(ErrorCode::kIncompatibleFingerprints,
                "fingerprints differ in kind or width (" + std::string(fingerprint_kind_name(a.kind)) + "/" +
                    std::to_string(a.n_bits) + " vs " + std::string(fingerprint_kind_name(b.kind)) + "/" +
                    std::to_string(b.n_bits) + ")");
  }
}

struct SetSizes {
  int a = 0;
  int b = 0;
  int both = 0;
};

SetSizes sizes(const Fingerprint& a, const Fingerprint& b) {
  check_intersection(a, b);
  SetSizes s;
  for (std::size_t w = 0; w < a.words.size(); ++w) {
    s.a += std::popcount(a.words[w]);
    s.b += std::popcount(b.words[w]);
    s.both += std::popcount(a.words[w] & b.words[w]);
  }
  return s;
}

std::string atom_type(const AtomNode& a) { return a.aromatic ? a.element + "ar" : a.element; }

}  // namespace

std::string_view fingerprint_kind_name(FingerprintKind kind) {
  return kind == FingerprintKind::kMorgan ? "morgan" : "atom_pair";
}

int Fingerprint::popcount() const {
  int n = 0;
  for (auto w : words) n += std::popcount(w);
  return n;
}

std::map<std::uint64_t, int> morgan_environments(const PolymerGraph& graph, int radius) {
  if (radius < 0 || radius > 5) throw Error(ErrorCode::kInvalidArgument, "radius must be in [0, 5]");
  require_valid(graph);
  const int n = graph.atom_count();
  const auto m = static_cast<std::size_t>(graph.bond_count());

  std::map<std::uint64_t, int> out;
  std::vector<std::uint64_t> inv(static_cast<std::size_t>(n));
  // Bond set covered by each atom's current environment.
  std::vector<std::vector<bool>> env(static_cast<std::size_t>(n), std::vector<bool>(m, false));
  std::set<std::vector<bool>> seen{std::vector<bool>(m, false)};
  std::vector<bool> alive(static_cast<std::size_t>(n), true);

  for (int i = 0; i < n; ++i) {
    inv[static_cast<std::size_t>(i)] = initial_invariant(graph, i);
    ++out[inv[static_cast<std::size_t>(i)]];
  }

  for (int layer = 1; layer <= radius; ++layer) {
    struct Candidate {
      std::vector<bool> bonds;
      std::uint64_t hash;
      int atom;
    };
    std::vector<Candidate> round;
    std::vector<std::uint64_t> next(inv);
    for (int i = 0; i < n; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      if (!alive[ui]) continue;
      std::vector<std::pair<int, std::uint64_t>> nbrs;
      std::vector<bool> bonds = env[ui];
      for (const auto& nb : graph.neighbors(i)) {
        nbrs.emplace_back(static_cast<int>(graph.bond(nb.bond).order), inv[static_cast<std::size_t>(nb.atom)]);
        bonds[static_cast<std::size_t>(nb.bond)] = true;
        const auto& inner = env[static_cast<std::size_t>(nb.atom)];
        for (std::size_t e = 0; e < m; ++e) {
          if (inner[e]) bonds[e] = true;
        }
      }
      std::sort(nbrs.begin(), nbrs.end());
      std::uint64_t h = hash_combine(static_cast<std::uint64_t>(layer), inv[ui]);
      for (const auto& [order, v] : nbrs) h = hash_combine(hash_combine(h, static_cast<std::uint64_t>(order)), v);
      next[ui] = h;
      round.push_back({std::move(bonds), h, i});
    }
    // Identical bond sets describe the same substructure: keep one, in an
    // order that does not depend on atom numbering.
    std::stable_sort(round.begin(), round.end(),
                     [](const Candidate& x, const Candidate& y) { return x.hash < y.hash; });
    for (auto& c : round) {
      const auto ui = static_cast<std::size_t>(c.atom);
      env[ui] = c.bonds;
      if (!seen.insert(c.bonds).second) {
        alive[ui] = false;
        continue;
      }
      ++out[c.hash];
    }
    inv = std::move(next);
  }
  return out;
}

Fingerprint morgan_fingerprint(const PolymerGraph& graph, int radius, int n_bits) {
  check_bits(n_bits);
  Fingerprint fp = empty(FingerprintKind::kMorgan, radius, n_bits);
  for (const auto& [hash, count] : morgan_environments(graph, radius)) add_feature(fp, hash, count);
  return fp;
}

std::map<AtomPairFeature, int> atom_pair_features(const PolymerGraph& graph) {
  require_valid(graph);
  const int n = graph.atom_count();
  std::map<AtomPairFeature, int> out;
  std::vector<int> dist(static_cast<std::size_t>(n));
  for (int s = 0; s < n; ++s) {
    std::fill(dist.begin(), dist.end(), -1);
    dist[static_cast<std::size_t>(s)] = 0;
    std::deque<int> queue{s};
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      for (const auto& nb : graph.neighbors(u)) {
        if (dist[static_cast<std::size_t>(nb.atom)] < 0) {
          dist[static_cast<std::size_t>(nb.atom)] = dist[static_cast<std::size_t>(u)] + 1;
          queue.push_back(nb.atom);
        }
      }
    }
    for (int t = s + 1; t < n; ++t) {
      const int d = dist[static_cast<std::size_t>(t)];
      if (d < 0) continue;
      std::string ta = atom_type(graph.atom(s));
      std::string tb = atom_type(graph.atom(t));
      if (tb < ta) std::swap(ta, tb);
      ++out[{std::move(ta), std::move(tb), std::min(d, kAtomPairMaxDistance)}];
    }
  }
  return out;
}

Fingerprint atom_pair_fingerprint(const PolymerGraph& graph, int n_bits) {
  check_bits(n_bits);
  Fingerprint fp = empty(FingerprintKind::kAtomPair, 0, n_bits);
  for (const auto& [f, count] : atom_pair_features(graph)) {
    std::uint64_t h = fnv1a64(f.type_a);
    h = hash_combine(h, fnv1a64(f.type_b));
    h = hash_combine(h, static_cast<std::uint64_t>(f.distance));
    add_feature(fp, h, count);
  }
  return fp;
}

double tanimoto(const Fingerprint& a, const Fingerprint& b) {
  const SetSizes s = sizes(a, b);
  const int uni = s.a + s.b - s.both;
  return uni == 0 ? 1.0 : static_cast<double>(s.both) / uni;
}

double dice(const Fingerprint& a, const Fingerprint& b) {
  const SetSizes s = sizes(a, b);
  return s.a + s.b == 0 ? 1.0 : 2.0 * s.both / (s.a + s.b);
}

std::string to_hex(const Fingerprint& fp) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(fp.words.size() * 16);
  for (auto w : fp.words) {
    for (int byte = 0; byte < 8; ++byte) {
      const auto v = static_cast<unsigned>((w >> (8 * byte)) & 0xffU);
      out += kDigits[v >> 4];
      out += kDigits[v & 0xfU];
    }
  }
  return out;
}

nlohmann::json to_json(const Fingerprint& fp) {
  nlohmann::json counts = nlohmann::json::object();
  for (const auto& [bit, c] : fp.counts) counts[std::to_string(bit)] = c;
  nlohmann::json j{{"kind", fingerprint_kind_name(fp.kind)}, {"n_bits", fp.n_bits}, {"bits", to_hex(fp)},
                   {"counts", std::move(counts)}};
  if (fp.kind == FingerprintKind::kMorgan) j["radius"] = fp.radius;
  return j;
}

Fingerprint fingerprint_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind != "morgan" && kind != "atom_pair") throw Error(ErrorCode::kInvalidArgument, "unknown fingerprint kind " + kind);
  const int n_bits = j.at("n_bits").get<int>();
  check_bits(n_bits);
  Fingerprint fp = empty(kind == "morgan" ? FingerprintKind::kMorgan : FingerprintKind::kAtomPair,
                         j.value("radius", 0), n_bits);
  for (const auto& [key, value] : j.at("counts").items()) {
    const auto bit = static_cast<std::uint32_t>(std::stoul(key));
    if (bit >= static_cast<std::uint32_t>(n_bits)) throw Error(ErrorCode::kInvalidArgument, "bit index out of range");
    fp.words[bit / 64] |= std::uint64_t{1} << (bit % 64);
    fp.counts[bit] = value.get<std::uint32_t>();
  }
  if (to_hex(fp) != j.at("bits").get<std::string>()) {
    throw Error(ErrorCode::kInvalidArgument, "bit string does not match counts");
  }
  return fp;
}

}  // namespace polyforge
