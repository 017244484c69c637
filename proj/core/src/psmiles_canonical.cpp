#include <algorithm>
#include <cctype>
#include <numeric>
#include <tuple>

#include "polyforge/psmiles.hpp"

namespace polyforge {
namespace {

constexpr int kLeafBudget = 4096;

int bond_code(BondOrder order) { return static_cast<int>(order); }

// rank[i] = number of atoms whose key is strictly smaller.
template <typename Key>
int assign_ranks(const std::vector<Key>& keys, std::vector<int>& ranks) {
  const int n = static_cast<int>(keys.size());
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return keys[static_cast<std::size_t>(x)] < keys[static_cast<std::size_t>(y)]; });
  int classes = 0;
  for (int k = 0; k < n; ++k) {
    const int atom = order[static_cast<std::size_t>(k)];
    if (k == 0 || keys[static_cast<std::size_t>(order[static_cast<std::size_t>(k - 1)])] < keys[static_cast<std::size_t>(atom)]) {
      ranks[static_cast<std::size_t>(atom)] = k;
      ++classes;
    } else {
      ranks[static_cast<std::size_t>(atom)] = ranks[static_cast<std::size_t>(order[static_cast<std::size_t>(k - 1)])];
    }
  }
  return classes;
}

class Canonicalizer {
 public:
  explicit Canonicalizer(const PolymerGraph& g) : g_(g), n_(g.atom_count()) {}

  void run() {
    std::vector<std::tuple<int, int, int, int, int, int, int, int, std::string>> keys;
    keys.reserve(static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i) {
      const AtomNode& a = g_.atom(i);
      const ElementInfo* info = find_element(a.element);
      keys.emplace_back(a.is_star() ? 0 : 1, info ? info->atomic_number : 999, a.aromatic ? 1 : 0,
                        a.formal_charge, g_.degree(i), g_.total_h(i), g_.atom_in_ring(i) ? 1 : 0,
                        a.branch_marker ? 1 : 0, a.element);
    }
    std::vector<int> ranks(static_cast<std::size_t>(n_));
    assign_ranks(keys, ranks);
    search(std::move(ranks));
  }

  const std::string& best() const { return best_; }
  const std::vector<int>& best_ranks() const { return best_ranks_; }

 private:
  int refine(std::vector<int>& ranks) const {
    using Key = std::pair<int, std::vector<std::pair<int, int>>>;
    std::vector<int> sorted = ranks;
    std::sort(sorted.begin(), sorted.end());
    int classes = static_cast<int>(std::unique(sorted.begin(), sorted.end()) - sorted.begin());
    std::vector<Key> keys(static_cast<std::size_t>(n_));
    while (true) {
      for (int i = 0; i < n_; ++i) {
        auto& k = keys[static_cast<std::size_t>(i)];
        k.first = ranks[static_cast<std::size_t>(i)];
        k.second.clear();
        for (const auto& nb : g_.neighbors(i)) {
          k.second.emplace_back(ranks[static_cast<std::size_t>(nb.atom)], bond_code(g_.bond(nb.bond).order));
        }
        std::sort(k.second.begin(), k.second.end());
      }
      const int next = assign_ranks(keys, ranks);
      if (next == classes) return classes;
      classes = next;
    }
  }

  bool twins(int a, int b) const {
    auto signature = [&](int x, int skip) {
      std::vector<std::pair<int, int>> s;
      for (const auto& nb : g_.neighbors(x)) {
        if (nb.atom != skip) s.emplace_back(nb.atom, bond_code(g_.bond(nb.bond).order));
      }
      std::sort(s.begin(), s.end());
      return s;
    };
    return signature(a, b) == signature(b, a);
  }

  void search(std::vector<int> ranks) {
    if (leaves_ >= kLeafBudget) return;
    const int classes = refine(ranks);
    if (classes == n_) {
      ++leaves_;
      std::string s = write(ranks);
      if (best_.empty() || s < best_) {
        best_ = std::move(s);
        best_ranks_ = ranks;
      }
      return;
    }
    // First non-singleton cell in rank order.
    std::vector<int> counts(static_cast<std::size_t>(n_), 0);
    for (int r : ranks) ++counts[static_cast<std::size_t>(r)];
    int cell = -1;
    for (int r = 0; r < n_; ++r) {
      if (counts[static_cast<std::size_t>(r)] > 1) {
        cell = r;
        break;
      }
    }
    std::vector<int> members;
    for (int i = 0; i < n_; ++i) {
      if (ranks[static_cast<std::size_t>(i)] == cell) members.push_back(i);
    }
    std::vector<int> reps;
    for (int m : members) {
      if (std::none_of(reps.begin(), reps.end(), [&](int r) { return twins(m, r); })) reps.push_back(m);
    }
    for (int m : reps) {
      if (leaves_ >= kLeafBudget) break;
      std::vector<int> child = ranks;
      for (int x : members) child[static_cast<std::size_t>(x)] = cell + 1;
      child[static_cast<std::size_t>(m)] = cell;
      search(std::move(child));
    }
  }

  std::string atom_text(int i) const {
    const AtomNode& a = g_.atom(i);
    if (a.is_star()) return "*";
    const ElementInfo* info = find_element(a.element);
    std::string sym = a.element;
    if (a.aromatic) {
      std::transform(sym.begin(), sym.end(), sym.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    }
    const bool aromatic_ok = !a.aromatic || a.element == "B" || a.element == "C" || a.element == "N" ||
                             a.element == "O" || a.element == "P" || a.element == "S";
    const int h = g_.total_h(i);
    const bool plain = info != nullptr && info->organic && aromatic_ok && a.formal_charge == 0 &&
                       h == g_.valence_h(i);
    std::string out;
    if (plain) {
      out = sym;
    } else {
      out = "[" + sym;
      if (h > 0) out += h == 1 ? "H" : "H" + std::to_string(h);
      if (a.formal_charge != 0) {
        out += a.formal_charge > 0 ? "+" : "-";
        if (std::abs(a.formal_charge) > 1) out += std::to_string(std::abs(a.formal_charge));
      }
      out += "]";
    }
    if (a.branch_marker) out += "^";
    return out;
  }

  std::string bond_text(int e) const {
    const BondEdge& b = g_.bond(e);
    const bool both_aromatic = g_.atom(b.a).aromatic && g_.atom(b.b).aromatic;
    switch (b.order) {
      case BondOrder::kSingle: return both_aromatic ? "-" : "";
      case BondOrder::kDouble: return "=";
      case BondOrder::kTriple: return "#";
      case BondOrder::kAromatic: return both_aromatic ? "" : ":";
    }
    return "";
  }

  static std::string digit_text(int d) { return d < 10 ? std::to_string(d) : "%" + std::to_string(d); }

  struct Closure {
    int other;
    int bond;
  };

  std::string write(const std::vector<int>& ranks) const {
    std::vector<int> by_rank(static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i) by_rank[static_cast<std::size_t>(ranks[static_cast<std::size_t>(i)])] = i;

    std::vector<std::vector<Neighbor>> sorted_adj(static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i) {
      auto& adj = sorted_adj[static_cast<std::size_t>(i)];
      adj.assign(g_.neighbors(i).begin(), g_.neighbors(i).end());
      std::sort(adj.begin(), adj.end(), [&](const Neighbor& x, const Neighbor& y) {
        return ranks[static_cast<std::size_t>(x.atom)] < ranks[static_cast<std::size_t>(y.atom)];
      });
    }

    std::vector<char> visited(static_cast<std::size_t>(n_), 0);
    std::vector<char> bond_used(static_cast<std::size_t>(g_.bond_count()), 0);
    std::vector<std::vector<Neighbor>> children(static_cast<std::size_t>(n_));
    std::vector<std::vector<Closure>> opens(static_cast<std::size_t>(n_));
    std::vector<std::vector<Closure>> closes(static_cast<std::size_t>(n_));

    auto dfs = [&](auto&& self, int u) -> void {
      visited[static_cast<std::size_t>(u)] = 1;
      for (const auto& nb : sorted_adj[static_cast<std::size_t>(u)]) {
        if (bond_used[static_cast<std::size_t>(nb.bond)]) continue;
        bond_used[static_cast<std::size_t>(nb.bond)] = 1;
        if (!visited[static_cast<std::size_t>(nb.atom)]) {
          children[static_cast<std::size_t>(u)].push_back(nb);
          self(self, nb.atom);
        } else {
          opens[static_cast<std::size_t>(nb.atom)].push_back({u, nb.bond});
          closes[static_cast<std::size_t>(u)].push_back({nb.atom, nb.bond});
        }
      }
    };

    std::vector<int> digit_of(static_cast<std::size_t>(g_.bond_count()), 0);
    std::vector<char> digit_busy(100, 0);

    auto emit = [&](auto&& self, int u, int parent_bond, std::string& out) -> void {
      if (parent_bond >= 0) out += bond_text(parent_bond);
      out += atom_text(u);
      auto by_other = [&](const Closure& x, const Closure& y) {
        return ranks[static_cast<std::size_t>(x.other)] < ranks[static_cast<std::size_t>(y.other)];
      };
      auto& cl = closes[static_cast<std::size_t>(u)];
      std::sort(cl.begin(), cl.end(), by_other);
      for (const auto& c : cl) out += digit_text(digit_of[static_cast<std::size_t>(c.bond)]);
      auto& op = opens[static_cast<std::size_t>(u)];
      std::sort(op.begin(), op.end(), by_other);
      for (const auto& c : op) {
        int d = 1;
        while (d < 100 && digit_busy[static_cast<std::size_t>(d)]) ++d;
        if (d >= 100) throw Error(ErrorCode::kInvalidGraph, "more than 99 simultaneous ring closures");
        digit_busy[static_cast<std::size_t>(d)] = 1;
        digit_of[static_cast<std::size_t>(c.bond)] = d;
        out += bond_text(c.bond) + digit_text(d);
      }
      for (const auto& c : cl) digit_busy[static_cast<std::size_t>(digit_of[static_cast<std::size_t>(c.bond)])] = 0;
      const auto& ch = children[static_cast<std::size_t>(u)];
      for (std::size_t k = 0; k < ch.size(); ++k) {
        if (k + 1 < ch.size()) {
          out += "(";
          self(self, ch[k].atom, ch[k].bond, out);
          out += ")";
        } else {
          self(self, ch[k].atom, ch[k].bond, out);
        }
      }
    };

    std::vector<std::string> parts;
    for (int r = 0; r < n_; ++r) {
      const int root = by_rank[static_cast<std::size_t>(r)];
      if (visited[static_cast<std::size_t>(root)]) continue;
      dfs(dfs, root);
      std::string part;
      emit(emit, root, -1, part);
      parts.push_back(std::move(part));
    }
    std::sort(parts.begin(), parts.end());
    std::string out;
    for (std::size_t k = 0; k < parts.size(); ++k) {
      if (k > 0) out += ".";
      out += parts[k];
    }
    return out;
  }

  const PolymerGraph& g_;
  int n_;
  int leaves_ = 0;
  std::string best_;
  std::vector<int> best_ranks_;
};

}  // namespace

std::vector<int> canonical_ranks(const PolymerGraph& graph) {
  Canonicalizer c(graph);
  c.run();
  return c.best_ranks();
}

std::string canonicalize(const PolymerGraph& graph) {
  require_valid(graph);
  if (graph.atom_count() == 0) throw Error(ErrorCode::kInvalidGraph, "empty graph");
  Canonicalizer c(graph);
  c.run();
  return c.best();
}

std::string canonical_smiles(std::string_view text) { return canonicalize(parse_psmiles(text)); }

}  // namespace polyforge
