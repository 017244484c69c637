#include "polyforge/crippen.hpp"

#include <algorithm>
#include <functional>
#include <map>

namespace polyforge {
namespace {

const std::map<std::string, double, std::less<>> kContrib{
    {"C1", 0.1441},   {"C2", 0.0},      {"C3", -0.2035},  {"C4", -0.2051},  {"C5", -0.2783},
    {"C6", 0.1551},   {"C7", 0.0017},   {"C8", 0.08452},  {"C9", -0.1444},  {"C10", -0.0516},
    {"C11", 0.1193},  {"C12", -0.0967}, {"C13", -0.5443}, {"C14", 0.0},     {"C15", 0.245},
    {"C16", 0.198},   {"C17", 0.0},     {"C18", 0.1581},  {"C19", 0.2955},  {"C20", 0.2713},
    {"C21", 0.136},   {"C22", 0.4619},  {"C23", 0.5437},  {"C24", 0.1893},  {"C25", -0.8186},
    {"C26", 0.264},   {"C27", 0.2148},  {"CS", 0.08129},  {"H1", 0.123},    {"H2", -0.2677},
    {"H3", 0.2142},   {"H4", 0.298},    {"HS", 0.1125},   {"N1", -1.019},   {"N2", -0.7096},
    {"N3", -1.027},   {"N4", -0.5188},  {"N5", 0.08387},  {"N6", 0.1836},   {"N7", -0.3187},
    {"N8", -0.4458},  {"N9", 0.01508},  {"N10", -1.95},   {"N11", -0.3239}, {"N12", -1.119},
    {"N13", -0.3396}, {"N14", 0.2887},  {"NS", -0.4806},  {"O1", 0.1552},   {"O2", -0.2893},
    {"O3", -0.0684},  {"O4", -0.4195},  {"O5", 0.0335},   {"O6", -0.3339},  {"O7", -1.189},
    {"O8", 0.1788},   {"O9", -0.1526},  {"O10", 0.1129},  {"O11", 0.4833},  {"O12", -1.326},
    {"OS", -0.1188},  {"F", 0.4202},    {"Cl", 0.6895},   {"Br", 0.8456},   {"I", 0.8857},
    {"Hal", -2.996},  {"P", 0.8612},    {"S1", 0.6482},   {"S2", -0.0024},  {"S3", 0.6237},
    {"Me1", -0.3808}, {"Me2", -0.0025},
};

// Element defaults used when no rule applies.
std::string element_default(const std::string& e) {
  if (e == "C") return "CS";
  if (e == "N") return "NS";
  if (e == "O") return "OS";
  if (e == "H") return "HS";
  if (e == "S") return "S1";
  return "";
}

using Pred = std::function<bool(int atom, BondOrder order)>;

class Typer {
 public:
  explicit Typer(const PolymerGraph& g) : g_(g) {}

  std::string heavy(int i) const {
    const AtomNode& a = g_.atom(i);
    const std::string& e = a.element;
    if (e == "C") return a.aromatic ? aromatic_carbon(i) : aliphatic_carbon(i);
    if (e == "N") return nitrogen(i);
    if (e == "O") return oxygen(i);
    if (e == "F" || e == "Cl" || e == "Br" || e == "I") {
      if (a.formal_charge == 0) return e;
      if (a.formal_charge < 0 || e == "I") return "Hal";
      return "";
    }
    if (e == "P") return "P";
    if (e == "S") return sulfur(i);
    if (e == "H") return hydrogen_on(first_neighbor(i), i);
    return metal(i);
  }

  /// Type of a hydrogen bonded to `heavy_atom`; `self` is the explicit H
  /// atom or -1 for an implicit one.
  std::string hydrogen_on(int x, int self = -1) const {
    if (x < 0) return "HS";
    const AtomNode& a = g_.atom(x);
    if (a.element == "C" || a.element == "H") return "H1";
    const bool aliph_o = a.element == "O" && !a.aromatic;
    if (aliph_o) {
      if (any_other(x, self, [&](int n) { return (C(n) && X(n) == 4) || c(n); })) return "H2";
      // The hydrogen rules negate by element: aromatic n counts as N here.
      if (any_other(x, self, [&](int n) { return !is(n, "C") && !is(n, "N") && !is(n, "O") && !is(n, "S"); }) ||
          g_.total_h(x) >= 2) {
        return "H2";
      }
    }
    if (a.element != "C" && a.element != "N" && a.element != "O") return "H2";
    if (a.element == "N") return "H3";
    if (aliph_o && any_other(x, self, [&](int n) { return g_.atom(n).element == "N"; })) return "H3";
    if (aliph_o) {
      const bool acid = any_other(x, self, [&](int n) {
        if (!C(n)) return false;
        for (const auto& nb : g_.neighbors(n)) {
          if (nb.atom == x || g_.bond(nb.bond).order != BondOrder::kDouble) continue;
          const auto& e = g_.atom(nb.atom).element;
          if (e == "C" || e == "N" || O(nb.atom) || S(nb.atom)) return true;
        }
        return false;
      });
      if (acid) return "H4";
      if (any_other(x, self, [&](int n) { return O(n) || S(n); })) return "H4";
    }
    return "HS";
  }

 private:
  // SMARTS primitives.
  bool heavy_atom(int n) const { return g_.atom(n).element != "H"; }
  bool A(int n) const { return heavy_atom(n) && !g_.atom(n).aromatic; }
  bool a(int n) const { return g_.atom(n).aromatic; }
  bool is(int n, std::string_view e) const { return g_.atom(n).element == e; }
  bool C(int n) const { return is(n, "C") && !a(n); }
  bool c(int n) const { return is(n, "C") && a(n); }
  bool N(int n) const { return is(n, "N") && !a(n); }
  bool O(int n) const { return is(n, "O") && !a(n); }
  bool S(int n) const { return is(n, "S") && !a(n); }
  bool P(int n) const { return is(n, "P") && !a(n); }
  bool halogen(int n) const { return is(n, "F") || is(n, "Cl") || is(n, "Br") || is(n, "I"); }
  int H(int n) const { return g_.total_h(n); }
  int X(int n) const { return g_.degree(n) + (is(n, "H") ? 0 : g_.total_h(n)); }
  int q(int n) const { return g_.atom(n).formal_charge; }

  static bool plain(BondOrder o) { return o == BondOrder::kSingle || o == BondOrder::kAromatic; }
  static bool dbl(BondOrder o) { return o == BondOrder::kDouble; }

  int first_neighbor(int i) const { return g_.degree(i) ? g_.neighbors(i)[0].atom : -1; }

  template <typename F>
  bool any_other(int x, int self, F&& f) const {
    for (const auto& nb : g_.neighbors(x)) {
      if (nb.atom != self && f(nb.atom)) return true;
    }
    return false;
  }

  // Injective assignment of distinct neighbors of `center` to predicates.
  bool has(int center, std::vector<Pred> preds, int exclude = -1) const {
    std::vector<Neighbor> nbrs;
    for (const auto& nb : g_.neighbors(center)) {
      if (nb.atom != exclude) nbrs.push_back(nb);
    }
    std::vector<char> used(nbrs.size(), 0);
    std::function<bool(std::size_t)> go = [&](std::size_t k) {
      if (k == preds.size()) return true;
      for (std::size_t j = 0; j < nbrs.size(); ++j) {
        if (used[j] || !preds[k](nbrs[j].atom, g_.bond(nbrs[j].bond).order)) continue;
        used[j] = 1;
        if (go(k + 1)) return true;
        used[j] = 0;
      }
      return false;
    };
    return go(0);
  }

  Pred single_to(std::function<bool(int)> f) const {
    return [f](int n, BondOrder o) { return plain(o) && f(n); };
  }
  Pred double_to(std::function<bool(int)> f) const {
    return [f](int n, BondOrder o) { return dbl(o) && f(n); };
  }
  Pred only_single_to(std::function<bool(int)> f) const {
    return [f](int n, BondOrder o) { return o == BondOrder::kSingle && f(n); };
  }
  Pred aromatic_to(std::function<bool(int)> f) const {
    return [f](int n, BondOrder o) { return o == BondOrder::kAromatic && f(n); };
  }

  std::string aliphatic_carbon(int i) const {
    auto isC = [this](int n) { return C(n); };
    auto Aheavy = [this](int n) { return A(n); };
    auto het = [this](int n) { return N(n) || O(n) || P(n) || S(n) || halogen(n); };
    auto arom = [this](int n) { return a(n); };
    auto c_ = [this](int n) { return c(n); };
    const int h = H(i);
    const int x = X(i);
    if (h == 4) return "C1";
    if (h == 3 && has(i, {single_to(isC)})) return "C1";
    if (h == 2 && has(i, {single_to(isC), single_to(isC)})) return "C1";
    if (h == 1 && has(i, {single_to(isC), single_to(isC), single_to(isC)})) return "C2";
    if (has(i, {single_to(isC), single_to(isC), single_to(isC), single_to(isC)})) return "C2";
    if (h == 3 && has(i, {single_to(het)})) return "C3";
    if (h == 2 && x == 4 && has(i, {single_to(het), single_to(Aheavy)})) return "C3";
    if (h == 1 && x == 4 && has(i, {single_to(het), single_to(Aheavy), single_to(Aheavy)})) return "C4";
    if (h == 0 && x == 4 && has(i, {single_to(het), single_to(Aheavy), single_to(Aheavy), single_to(Aheavy)})) {
      return "C4";
    }
    if (has(i, {double_to([this](int n) { return A(n) && !is(n, "C"); })})) return "C5";
    if (h == 2 && has(i, {double_to(isC)})) return "C6";
    if (h == 1 && has(i, {double_to(isC), single_to(Aheavy)})) return "C6";
    if (h == 0 && has(i, {double_to(isC), single_to(Aheavy), single_to(Aheavy)})) return "C6";
    if (has(i, {double_to(isC), double_to(isC)})) return "C6";
    if (x == 2 && has(i, {[this](int n, BondOrder o) { return o == BondOrder::kTriple && A(n); }})) return "C7";
    if (h == 3 && has(i, {single_to(c_)})) return "C8";
    if (h == 3 && has(i, {single_to(arom)})) return "C9";
    if (h == 2 && x == 4 && has(i, {single_to(arom)})) return "C10";
    if (h == 1 && x == 4 && has(i, {single_to(arom)})) return "C11";
    if (h == 0 && x == 4 && has(i, {single_to(arom)})) return "C12";
    if (has(i, {double_to(isC), single_to(arom), single_to(Aheavy)})) return "C26";
    if (has(i, {double_to(isC), single_to(c_), single_to(arom)})) return "C26";
    if (h == 1 && has(i, {double_to(isC), single_to(arom)})) return "C26";
    if (has(i, {double_to(c_)})) return "C26";
    if (x == 4 && has(i, {single_to([this](int n) {
          return A(n) && !is(n, "C") && !is(n, "N") && !is(n, "O") && !is(n, "P") && !is(n, "S") && !halogen(n);
        })})) {
      return "C27";
    }
    return "CS";
  }

  std::string aromatic_carbon(int i) const {
    auto arom = [this](int n) { return a(n); };
    const int h = H(i);
    if (h == 0 && has(i, {only_single_to([this](int n) {
          return A(n) && !is(n, "C") && !is(n, "N") && !is(n, "O") && !is(n, "S") && !halogen(n);
        })})) {
      return "C13";
    }
    if (has(i, {single_to([this](int n) { return is(n, "F"); })})) return "C14";
    if (has(i, {single_to([this](int n) { return is(n, "Cl"); })})) return "C15";
    if (has(i, {single_to([this](int n) { return is(n, "Br"); })})) return "C16";
    if (has(i, {single_to([this](int n) { return is(n, "I"); })})) return "C17";
    if (h == 1) return "C18";
    const Pred ar = aromatic_to(arom);
    if (has(i, {ar, ar, ar})) return "C19";
    if (has(i, {ar, ar, only_single_to(arom)})) return "C20";
    if (has(i, {ar, ar, only_single_to([this](int n) { return C(n); })})) return "C21";
    if (has(i, {ar, ar, only_single_to([this](int n) { return N(n); })})) return "C22";
    if (has(i, {ar, ar, only_single_to([this](int n) { return O(n); })})) return "C23";
    if (has(i, {ar, ar, only_single_to([this](int n) { return S(n); })})) return "C24";
    if (has(i, {ar, ar, double_to([this](int n) { return C(n) || N(n) || O(n); })})) return "C25";
    return "CS";
  }

  std::string nitrogen(int i) const {
    auto Aheavy = [this](int n) { return A(n); };
    auto any = [this](int n) { return heavy_atom(n); };
    auto arom = [this](int n) { return a(n); };
    const int h = H(i);
    const int charge = q(i);
    if (a(i)) return charge == 0 ? "N11" : (charge > 0 ? "N12" : "NS");
    if (charge == 0) {
      if (h == 2 && has(i, {single_to(Aheavy)})) return "N1";
      if (h == 1 && has(i, {single_to(Aheavy), single_to(Aheavy)})) return "N2";
      if (h == 2 && has(i, {single_to(arom)})) return "N3";
      if (h == 1 && has(i, {single_to(any), single_to(arom)})) return "N4";
      if (h == 1 && has(i, {double_to(any)})) return "N5";
      if (has(i, {double_to(any), single_to(any)})) return "N6";
      if (has(i, {single_to(Aheavy), single_to(Aheavy), single_to(Aheavy)})) return "N7";
      if (has(i, {single_to(arom), single_to(any), single_to(Aheavy)})) return "N8";
      if (has(i, {single_to(arom), single_to(arom), single_to(arom)})) return "N8";
      if (has(i, {[this](int n, BondOrder o) { return o == BondOrder::kTriple && A(n); }})) return "N9";
      return "NS";
    }
    if (charge > 0 && h >= 1 && h <= 3) return "N10";
    if (charge > 0 && h == 0) {
      if (has(i, {single_to(Aheavy), single_to(Aheavy), single_to(Aheavy), single_to(Aheavy)})) return "N13";
      if (has(i, {double_to(Aheavy), single_to(Aheavy), single_to(any)})) return "N13";
      if (has(i, {double_to([this](int n) { return is(n, "C"); }), double_to([this](int n) { return is(n, "N"); })})) {
        return "N13";
      }
    }
    if (charge > 0 && has(i, {[this](int n, BondOrder o) { return o == BondOrder::kTriple && A(n); }})) return "N14";
    if (charge < 0) return "N14";
    if (charge > 0 && has(i, {double_to([this](int n) { return N(n) && q(n) < 0; }),
                              double_to([this](int n) { return N(n); })})) {
      return "N14";
    }
    return "NS";
  }

  std::string oxygen(int i) const {
    if (a(i)) return "O1";
    auto Aheavy = [this](int n) { return A(n); };
    auto any = [this](int n) { return heavy_atom(n); };
    auto arom = [this](int n) { return a(n); };
    const int h = H(i);
    const int x = X(i);
    const int charge = q(i);
    if (h == 1 || h == 2) return "O2";
    if (has(i, {single_to(Aheavy), single_to(Aheavy)})) return "O3";
    if (has(i, {single_to(arom), single_to(any)})) return "O4";
    if (has(i, {double_to([this](int n) { return is(n, "N") || is(n, "O"); })})) return "O5";
    if (x == 1 && charge < 0 && has(i, {single_to([this](int n) { return is(n, "N"); })})) return "O5";
    if (x == 1 && charge < 0 && has(i, {single_to([this](int n) { return is(n, "S"); })})) return "O6";
    if (charge == 0 && has(i, {double_to([this](int n) { return is(n, "S") && q(n) == 0; })})) return "O6";
    if (charge == -1) {
      for (const auto& nb : g_.neighbors(i)) {
        if (!plain(g_.bond(nb.bond).order) || !C(nb.atom)) continue;
        if (has(nb.atom, {double_to([this](int n) { return O(n); })}, i)) return "O12";
      }
    }
    if (x == 1 && charge < 0 && has(i, {single_to([this](int n) { return !is(n, "N") && !is(n, "S"); })})) return "O7";
    if (has(i, {double_to([this](int n) { return c(n); })})) return "O8";
    // Carbonyl oxygens: classify by the carbonyl carbon.
    for (const auto& nb : g_.neighbors(i)) {
      if (!dbl(g_.bond(nb.bond).order)) continue;
      const int k = nb.atom;
      if (!C(k)) continue;
      const int hk = H(k);
      auto isC = [this](int n) { return C(n); };
      auto cC = [this](int n) { return C(n) || c(n); };
      auto c_ = [this](int n) { return c(n); };
      auto no_c = [this](int n) { return heavy_atom(n) && !is(n, "C"); };
      if (hk == 1 && has(k, {single_to(isC)}, i)) return "O9";
      if (has(k, {single_to(isC), single_to(Aheavy)}, i)) return "O9";
      if (hk == 1 && has(k, {single_to([this](int n) { return N(n) || O(n); })}, i)) return "O9";
      if (hk == 2) return "O9";
      if (X(k) == 2 && has(k, {double_to([this](int n) { return O(n); })}, i)) return "O9";
      if (hk == 1 && has(k, {single_to(c_)}, i)) return "O10";
      if (has(k, {single_to(cC), single_to(arom)}, i)) return "O10";
      if (has(k, {single_to(c_), single_to(Aheavy)}, i)) return "O10";
      if (has(k, {single_to(no_c), single_to(no_c)}, i)) return "O11";
    }
    return "OS";
  }

  std::string sulfur(int i) const {
    if (a(i)) return "S3";
    const int charge = q(i);
    if (charge != 0) return "S2";
    if (has(i, {double_to([this](int n) { return N(n) || O(n) || P(n) || S(n); })})) return "S2";
    return "S1";
  }

  std::string metal(int i) const {
    const ElementInfo* info = find_element(g_.atom(i).element);
    if (info == nullptr) return "";
    const int z = info->atomic_number;
    const int q0 = q(i);
    if (q0 > 0 && (z == 3 || z == 11 || z == 19 || z == 37 || z == 55)) return "Hal";
    for (int m : {3, 11, 19, 37, 55, 4, 12, 20, 38, 56, 5, 13, 31, 49, 81, 14, 32, 50, 82, 33, 51, 83, 34, 52, 84}) {
      if (z == m) return "Me1";
    }
    if ((z >= 21 && z <= 30) || (z >= 39 && z <= 48) || (z >= 72 && z <= 80)) return "Me2";
    return "";
  }

  const PolymerGraph& g_;
};

}  // namespace

CrippenResult crippen(const PolymerGraph& graph) {
  require_valid(graph);
  const PolymerGraph g = strip_stars(graph);
  const Typer typer(g);
  CrippenResult r;
  for (int i = 0; i < g.atom_count(); ++i) {
    std::string type = typer.heavy(i);
    if (type.empty()) {
      r.untyped_atoms.push_back(i);
      type = element_default(g.atom(i).element);
    }
    r.atom_types.push_back(type);
    if (!type.empty()) r.logp += kContrib.find(type)->second;
    if (g.atom(i).element == "H") continue;
    const int h = g.total_h(i);
    if (h > 0) r.logp += h * kContrib.find(typer.hydrogen_on(i))->second;
  }
  return r;
}

double crippen_logp(const PolymerGraph& graph) { return crippen(graph).logp; }

}  // namespace polyforge
