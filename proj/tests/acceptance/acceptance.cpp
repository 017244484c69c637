// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
// criterion fails. Every oracle here is computed independently of the code
// path it checks.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "polyforge/candidate.hpp"
#include "polyforge/error.hpp"
#include "polyforge/features.hpp"
#include "polyforge/fingerprint.hpp"
#include "polyforge/generator.hpp"
#include "polyforge/optimizer.hpp"
#include "polyforge/polymer_db.hpp"
#include "polyforge/property_model.hpp"
#include "polyforge/psmiles.hpp"
#include "polyforge/synth_score.hpp"
#include "polyforge/text.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace polyforge;

namespace {

const fs::path kData = POLYFORGE_DATA_DIR;
const fs::path kTestData = POLYFORGE_TEST_DATA_DIR;
const fs::path kGolden = POLYFORGE_GOLDEN_DIR;

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Accumulates sub-check failures into one verdict.
class Checks {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok) {
      pass_ = false;
      if (!failures_.empty()) failures_ += "; ";
      failures_ += what;
    }
  }
  void note(const std::string& s) {
    if (!notes_.empty()) notes_ += ", ";
    notes_ += s;
  }
  Outcome verdict() const { return {pass_, pass_ ? notes_ : failures_ + (notes_.empty() ? "" : " | " + notes_)}; }

 private:
  bool pass_ = true;
  std::string failures_;
  std::string notes_;
};

std::string fmt(double v, int precision = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", precision, v);
  return buf;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::vector<std::vector<std::string>> rows;
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

// Fixture CRUs that parse; the fixture deliberately carries a few malformed rows.
struct FixtureCorpus {
  std::vector<std::string> smiles;
  std::vector<PolymerGraph> graphs;
  int malformed = 0;
};

const FixtureCorpus& fixture() {
  static const FixtureCorpus corpus = [] {
    FixtureCorpus c;
    for (const auto& row : read_csv(kData / "fixture_crus.csv")) {
      try {
        c.graphs.push_back(parse_psmiles(row.at(0)));
        c.smiles.push_back(row.at(0));
      } catch (const ParseError&) {
        ++c.malformed;
      }
    }
    return c;
  }();
  return corpus;
}

const FragmentScoreTable& sa_table() {
  static const auto table = fragment_table_from_json(json::parse(read_file(kData / "sa_fragments.json")));
  return table;
}

const ScScoreModel& sc_model() {
  static const auto model = sc_model_from_json(json::parse(read_file(kData / "sc_model.json")));
  return model;
}

// ------------------------------------------------------------------ 1
Outcome similarity_reproduction() {
  Checks c;
  const auto a = parse_psmiles("*OCC=O");
  const auto b = parse_psmiles("NCCCCCC(=O)");
  std::vector<std::string> matches;
  for (int radius : {1, 2, 3}) {
    for (int bits : {1024, 2048}) {
      const auto fa = morgan_fingerprint(a, radius, bits), fb = morgan_fingerprint(b, radius, bits);
      const double t = tanimoto(fa, fb), d = dice(fa, fb);
      if (std::abs(t - 0.34) <= 0.05 && std::abs(d - 0.50) <= 0.05) {
        matches.push_back("r" + std::to_string(radius) + "/" + std::to_string(bits) + " T=" + fmt(t) + " D=" + fmt(d));
      }
    }
  }
  c.expect(!matches.empty(), "no Morgan parameterization gives T=0.34+-0.05 with D=0.50+-0.05");
  if (!matches.empty()) c.note(matches.front() + (matches.size() > 1 ? " (+" + std::to_string(matches.size() - 1) + ")" : ""));

  // Dice = 2T/(1+T): exact in the bit counts, and to rounding in doubles.
  const auto& g = fixture().graphs;
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> pick(0, g.size() - 1);
  int exact = 0;
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto fa = morgan_fingerprint(g[pick(rng)]), fb = morgan_fingerprint(g[pick(rng)]);
    long na = 0, nb = 0, nc = 0;
    for (std::size_t w = 0; w < fa.words.size(); ++w) {
      na += __builtin_popcountll(fa.words[w]);
      nb += __builtin_popcountll(fb.words[w]);
      nc += __builtin_popcountll(fa.words[w] & fb.words[w]);
    }
    const double t = tanimoto(fa, fb), d = dice(fa, fb);
    // T = c/(a+b-c) and D = 2c/(a+b); 2T/(1+T) reduces to 2c/(a+b) exactly.
    const bool counts_ok = t == static_cast<double>(nc) / static_cast<double>(na + nb - nc) &&
                           d == 2.0 * static_cast<double>(nc) / static_cast<double>(na + nb);
    exact += counts_ok;
    worst = std::max(worst, std::abs(d - 2 * t / (1 + t)));
  }
  c.expect(exact == 1000, std::to_string(1000 - exact) + " pairs disagree with the bit-count definitions");
  c.expect(worst <= 1e-15, "dice vs 2T/(1+T) off by " + fmt(worst));
  c.note("identity on 1000 pairs, max fp error " + fmt(worst, 2));
  return c.verdict();
}

// ------------------------------------------------------------------ 2
Outcome sa_fidelity() {
  Checks c;
  double sum = 0;
  int n = 0;
  for (const auto& row : read_csv(kTestData / "sa_panel.csv")) {
    sum += std::abs(sa_score(parse_psmiles(row.at(0)), sa_table()) - std::stod(row.at(1)));
    ++n;
  }
  const double mad = sum / n;
  c.expect(n == 20, "panel has " + std::to_string(n) + " molecules, expected 20");
  c.expect(mad <= 0.3, "MAD " + fmt(mad) + " > 0.3");
  double lo = 10, hi = 0;
  for (const auto& g : fixture().graphs) {
    const double s = sa_score(g, sa_table());
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  c.expect(lo >= 1.0 && hi <= 8.5, "fixture SA range [" + fmt(lo) + ", " + fmt(hi) + "] leaves [1, 8.5]");
  c.note("MAD " + fmt(mad) + " over " + std::to_string(n) + ", fixture SA in [" + fmt(lo) + ", " + fmt(hi) + "]");
  return c.verdict();
}

// ------------------------------------------------------------------ 3
Outcome sc_calibration() {
  Checks c;
  double sum = 0;
  for (const auto& g : fixture().graphs) sum += sc_score(g, sc_model());
  const double mean = sum / static_cast<double>(fixture().graphs.size());
  c.expect(std::abs(mean - 1.93) <= 0.2, "fixture mean SC " + fmt(mean) + " outside 1.93 +- 0.2");

  const auto db = CruDatabase::ingest(kData / "fixture_labeled.csv");
  const auto s = stats(db);
  const auto oracle = json::parse(read_file(kTestData / "fixture_stats.json"));
  c.expect(s.sc && s.sc->mean == oracle["sc"]["mean"].get<double>(), "stats() SC mean differs from the recount");
  c.expect(s.sc && s.sc->min == oracle["sc"]["min"].get<double>() && s.sc->max == oracle["sc"]["max"].get<double>(),
           "stats() SC range differs from the recount");
  c.expect(s.records == oracle["records"].get<std::size_t>(), "record count differs from the recount");
  c.note("mean SC " + fmt(mean) + ", stats() mean " + fmt(s.sc ? s.sc->mean : 0, 10) + " equals recount");
  return c.verdict();
}

// ------------------------------------------------------------------ 4
// Uniform bytes, strings over the SMILES alphabet, or point mutations of
// fixture CRUs (which reach deep parser states).
std::string random_input(std::mt19937_64& rng) {
  static const std::string alphabet = "CcNnOoSsPFIBrl*()[]=#-+.^%@/\\:0123456789H ";
  std::string s;
  const auto mode = rng() % 3;
  if (mode == 2) {
    s = fixture().smiles[rng() % fixture().smiles.size()];
    for (int m = 0, n = 1 + static_cast<int>(rng() % 3); m < n && !s.empty(); ++m) {
      const std::size_t at = rng() % s.size();
      switch (rng() % 3) {
        case 0: s.erase(at, 1); break;
        case 1: s.insert(at, 1, alphabet[rng() % alphabet.size()]); break;
        default: s[at] = alphabet[rng() % alphabet.size()];
      }
    }
    return s;
  }
  const std::size_t len = rng() % 48;
  for (std::size_t i = 0; i < len; ++i) {
    s += mode == 0 ? static_cast<char>(rng() % 256) : alphabet[rng() % alphabet.size()];
  }
  return s;
}

Outcome parser_robustness() {
  Checks c;
  int round_trips = 0;
  for (const auto& g : fixture().graphs) {
    try {
      const auto canon = canonicalize(g);
      const auto again = parse_psmiles(canon);
      if (canonicalize(again) == canon && again.atom_count() == g.atom_count() && again.bond_count() == g.bond_count()) {
        ++round_trips;
      }
    } catch (const Error&) {
    }
  }
  const int total = static_cast<int>(fixture().graphs.size());
  c.expect(round_trips == total, std::to_string(total - round_trips) + " fixture rows fail the round trip");
  c.note(std::to_string(round_trips) + "/" + std::to_string(total) + " round trips (" +
         std::to_string(fixture().malformed) + " malformed rows rejected)");

  // Every permutation of every small graph.
  std::vector<PolymerGraph> small;
  for (const auto& g : fixture().graphs) {
    if (g.atom_count() <= 7) small.push_back(g);
  }
  for (std::string_view s : {"*CC*", "*CC(C)*", "*C(C)(C)*", "*OC(=O)*", "*C1CC1*", "*C1CCC1*", "C1CCCCC1",
                             "c1ccccc1", "C1CC2CC12", "*CC*.*OO*", "*C#CC*", "C[N+](=O)[O-]", "*C(F)(F)*",
                             "OC1CC1O", "*C1=CC=C1*", "CC(C)(C)C", "*[Si](C)(C)O*", "*NC(=O)N*"}) {
    if (parse_psmiles(s).atom_count() <= 7) small.push_back(parse_psmiles(s));
  }
  long perms = 0;
  int variant = 0;
  for (const auto& g : small) {
    const auto ref = canonicalize(g);
    std::vector<int> perm(static_cast<std::size_t>(g.atom_count()));
    std::iota(perm.begin(), perm.end(), 0);
    bool same = true;
    do {
      ++perms;
      same &= canonicalize(permute_atoms(g, perm)) == ref;
    } while (std::next_permutation(perm.begin(), perm.end()));
    variant += !same;
  }
  c.expect(variant == 0, std::to_string(variant) + " small graphs have permutation-dependent canonical forms");
  c.note(std::to_string(small.size()) + " graphs x all orders = " + std::to_string(perms) + " permutations");

  std::mt19937_64 rng(99);
  int parsed = 0, unexpected = 0;
  for (int i = 0; i < 100000; ++i) {
    const auto text = random_input(rng);
    try {
      const auto g = parse_psmiles(text);
      ++parsed;
      if (validate(g, ValidationMode::kMolecule).is_valid) canonicalize(g);
    } catch (const Error&) {
    } catch (...) {
      ++unexpected;
    }
  }
  c.expect(unexpected == 0, std::to_string(unexpected) + " fuzz inputs raised non-domain exceptions");
  c.note("100000 fuzz inputs, " + std::to_string(parsed) + " parsed, 0 crashes");
  return c.verdict();
}

// ------------------------------------------------------------------ 5
struct OracleEntry {
  std::string cru;
  PropertyVector props;
};

// Brute force over gated seeds and every applicable single edit.
std::vector<OracleEntry> brute_force_pool(const TargetSpec& spec, std::span<const Reactant> bag) {
  std::map<std::string, OracleEntry> pool;
  const auto seeds = enumerate_candidates(bag, template_library(), spec.seed_limit, spec.seed);
  auto consider = [&](const PolymerGraph& g) {
    if (sa_score(g, sa_table()) > spec.sa_gate) return;
    const auto cru = canonicalize(g);
    if (!pool.contains(cru)) pool.emplace(cru, OracleEntry{cru, reference_landscape(g)});
  };
  for (const auto& s : seeds) {
    const auto g = parse_psmiles(s.cru);
    if (sa_score(g, sa_table()) > spec.sa_gate) continue;
    consider(g);
    for (const auto& e : candidate_edits(g)) {
      try {
        consider(apply_edit(g, e));
      } catch (const Error&) {
      }
    }
  }
  std::vector<OracleEntry> out;
  for (auto& [cru, entry] : pool) out.push_back(std::move(entry));
  return out;
}

std::pair<std::string, double> brute_force_best(const std::vector<OracleEntry>& pool, const TargetSpec& spec) {
  std::string best;
  double best_obj = INFINITY;
  for (const auto& e : pool) {
    bool feasible = true;
    for (const auto& k : spec.constraints) {
      const double v = e.props.at(k.property_id);
      feasible &= k.kind == BoundKind::kAtMost ? v <= k.bound : v >= k.bound;
    }
    if (!feasible) continue;
    double obj = 0;
    for (const auto& o : spec.objectives) {
      const double d = e.props.at(o.property_id) - *o.target;
      obj += o.weight * d * d;
    }
    if (obj < best_obj || (obj == best_obj && e.cru < best)) {
      best = e.cru;
      best_obj = obj;
    }
  }
  return {best, best_obj};
}

Outcome optimizer_optimality() {
  Checks c;
  const auto bag = load_reactant_bag(kData / "reactant_bag.jsonl");
  LandscapePredictor landscape;
  const Scorer scorer{landscape, sa_table(), &sc_model()};

  TargetSpec single;
  single.objectives = {{"PE_I", -5.3, std::nullopt, 1.0}};
  single.sa_gate = 6.0;
  single.seed_limit = 200;
  single.top_k = 5;
  single.budget = exhaustive_size(single, bag, template_library(), scorer);
  TargetSpec constrained = single;
  constrained.constraints = {{"Egb", BoundKind::kAtMost, 4.0}};

  const auto pool = brute_force_pool(single, bag);
  const auto [oracle_a, obj_a] = brute_force_best(pool, single);
  const auto [oracle_b, obj_b] = brute_force_best(pool, constrained);

  std::vector<std::string> runs;
  for (int threads : {1, 2, 0}) {
    const auto r = optimize(single, bag, template_library(), scorer, threads);
    c.expect(r.exhaustive, "single-target run was not exhaustive");
    runs.push_back(to_json(r).dump());
  }
  c.expect(runs[0] == runs[1] && runs[1] == runs[2], "reruns differ");
  const auto a = json::parse(runs[0]);
  const auto top_a = a["ranked"].empty() ? std::string() : a["ranked"][0]["cru"].get<std::string>();
  c.expect(top_a == oracle_a, "single target: optimize " + top_a + " vs brute force " + oracle_a);

  const auto b = optimize(constrained, bag, template_library(), scorer, 0);
  const auto top_b = b.ranked.empty() ? std::string() : b.ranked[0].cru;
  c.expect(!b.best_effort, "constrained run is best-effort");
  c.expect(top_b == oracle_b, "constrained: optimize " + top_b + " vs brute force " + oracle_b);
  c.expect(top_a != top_b, "constrained and unconstrained winners coincide");
  c.note("pool " + std::to_string(pool.size()) + ", PE_I=-5.3 -> " + top_a + " (obj " + fmt(obj_a, 3) +
         "), +Egb<=4 -> " + top_b + " (obj " + fmt(obj_b, 3) + "), 3 reruns identical");
  return c.verdict();
}

// ------------------------------------------------------------------ 6
Outcome closed_loop_veto() {
  Checks c;
  LandscapePredictor landscape;
  const Scorer scorer{landscape, sa_table(), &sc_model()};
  TargetSpec spec;
  spec.objectives = {{"PE_I", -5.0, std::nullopt, 1.0}};

  // A scripted reasoner: three sound moves, three missteps and one malformed edit.
  struct Step {
    Edit edit;
    bool misstep;
  };
  const std::vector<Step> script{
      {{EditKind::kSwapLinkage, 3, "O"}, false},             // *CCCCCC* -> ether
      {{EditKind::kAddSubstituent, 1, "c1ccccc1"}, true},    // aromatic ring lowers conductivity
      {{EditKind::kSwapLinkage, 1, "O"}, false},             // second ether oxygen
      {{EditKind::kSwapLinkage, 3, "C"}, true},              // undoes an ether oxygen
      {{EditKind::kAddSubstituent, 1, "F"}, true},           // overshoots the target
      {{EditKind::kRemoveSubstituent, 2, ""}, false},        // nothing to remove
      {{EditKind::kAddSubstituent, 1, "C"}, false},          // trims the overshoot
  };
  std::string cru = "*CCCCCC*";
  int worse = 0, accepted = 0, regressions = 0, notes = 0, mismatched = 0, missteps_caught = 0;
  for (const auto& step : script) {
    const auto d = refine_with_edit(parse_psmiles(cru), step.edit, spec, scorer);
    if (d.verdict == polyforge::Verdict::kRejectedWorse) {
      ++worse;
      notes += !d.flag_note.empty();
      missteps_caught += step.misstep;
    }
    if (d.after) {
      // Independent recomputation of both sides.
      const double before = reference_landscape(parse_psmiles(cru)).at("PE_I") + 5.0;
      const double after = reference_landscape(parse_psmiles(d.result_cru)).at("PE_I") + 5.0;
      mismatched += std::abs((after * after - before * before) - d.objective_delta) > 1e-9;
    }
    if (d.verdict == polyforge::Verdict::kAccepted) {
      ++accepted;
      regressions += d.objective_delta >= 0;
      cru = d.result_cru;
    }
  }
  c.expect(worse == 3, std::to_string(worse) + " rejected_worse verdicts, expected 3");
  c.expect(missteps_caught == 3, "rejections do not line up with the scripted missteps");
  c.expect(notes == worse, "rejected_worse without flag_note");
  c.expect(regressions == 0, std::to_string(regressions) + " accepted regressions");
  c.expect(mismatched == 0, std::to_string(mismatched) + " objective deltas differ from recomputation");
  c.note("3 missteps vetoed with notes, " + std::to_string(accepted) + " accepted, final " + cru);
  return c.verdict();
}

// ------------------------------------------------------------------ 7
struct Proc {
  int exit_code;
  std::string out;
};

Proc run_cli(const std::vector<std::string>& args, const std::string& input) {
  static int counter = 0;
  const fs::path base = fs::temp_directory_path() / ("polyforge_accept_" + std::to_string(::getpid()) + "_" +
                                                     std::to_string(counter++));
  std::ofstream(base.string() + ".in", std::ios::binary) << input;
  std::string cmd = std::string("'") + POLYFORGE_CLI + "'";
  for (const auto& a : args) cmd += " '" + a + "'";
  cmd += " <'" + base.string() + ".in' >'" + base.string() + ".out' 2>/dev/null";
  const int status = std::system(cmd.c_str());
  Proc p{WIFEXITED(status) ? WEXITSTATUS(status) : -1, read_file(base.string() + ".out")};
  fs::remove(base.string() + ".in");
  fs::remove(base.string() + ".out");
  return p;
}

Outcome mcp_conformance() {
  Checks c;
  for (const char* name : {"handshake", "tools_list", "confirmed_optimize", "rejected_refine"}) {
    const auto script = read_file(kGolden / (std::string(name) + ".requests.jsonl"));
    const auto expected = read_file(kGolden / (std::string(name) + ".expected.jsonl"));
    const auto first = run_cli({"serve"}, script), second = run_cli({"serve"}, script);
    c.expect(first.exit_code == 0, std::string(name) + ": serve exited " + std::to_string(first.exit_code));
    c.expect(first.out == second.out, std::string(name) + ": runs differ");
    c.expect(first.out == expected, std::string(name) + ": differs from the golden transcript");
  }
  const auto list = run_cli({"serve"}, read_file(kGolden / "tools_list.requests.jsonl")).out;
  const auto last = list.substr(list.rfind('\n', list.size() - 2) + 1);
  c.expect(json::parse(last)["result"]["tools"].size() == 8, "tools/list does not return 8 tools");
  const auto opt = run_cli({"serve"}, read_file(kGolden / "confirmed_optimize.requests.jsonl")).out;
  c.expect(opt.find("\"status\":\"ok\"") != std::string::npos, "confirmed optimize did not run");
  c.expect(opt.find("E_STALE_TOKEN") != std::string::npos, "reused token was not rejected");

  // Interleave requests with junk, notifications and truncated lines.
  std::mt19937_64 rng(5);
  const std::vector<std::string> valid{
      R"({"jsonrpc":"2.0","id":1,"method":"ping"})",
      R"({"jsonrpc":"2.0","id":2,"method":"tools/call","params":{"name":"predict_properties","arguments":{"smiles":"*CC*"}}})",
      R"({"jsonrpc":"2.0","id":3,"method":"tools/call","params":{"name":"refine_structure","arguments":{"cru":"*CC*"}}})",
      R"({"jsonrpc":"2.0","method":"notifications/initialized"})",
      R"([{"jsonrpc":"2.0","id":4,"method":"ping"},{"jsonrpc":"2.0","id":5,"method":"nope"}])",
  };
  std::string input;
  for (int i = 0; i < 1000; ++i) {
    const auto& v = valid[rng() % valid.size()];
    switch (rng() % 3) {
      case 0: input += v; break;
      case 1: input += v.substr(0, rng() % v.size()); break;
      default:
        for (int k = 0, n = static_cast<int>(rng() % 30); k < n; ++k) {
          const char ch = static_cast<char>(rng() % 256);
          input += ch == '\n' ? ' ' : ch;
        }
    }
    input += '\n';
  }
  const auto fuzz = run_cli({"serve", "--log-level", "debug"}, input);
  int lines = 0, bad = 0;
  std::istringstream in(fuzz.out);
  for (std::string line; std::getline(in, line); ++lines) {
    const auto m = json::parse(line, nullptr, false);
    const auto ok = [](const json& x) { return x.is_object() && x.value("jsonrpc", "") == "2.0"; };
    bad += !(ok(m) || (m.is_array() && !m.empty() && std::all_of(m.begin(), m.end(), ok)));
  }
  c.expect(fuzz.exit_code == 0, "serve exited non-zero under fuzz");
  c.expect(bad == 0, std::to_string(bad) + " non-protocol lines on stdout");
  c.expect(fuzz.out.empty() || fuzz.out.back() == '\n', "stdout does not end at a message boundary");
  c.note("4 transcripts byte-identical, " + std::to_string(lines) + " fuzz replies all JSON-RPC");
  return c.verdict();
}

// ------------------------------------------------------------------ 8
Outcome predictor_sanity() {
  Checks c;
  auto data = load_dataset((kData / "fixture_labeled.csv").string());
  std::mt19937_64 rng(7);
  std::shuffle(data.rows.begin(), data.rows.end(), rng);
  const std::size_t cut = data.rows.size() * 4 / 5;
  const std::span<const LabeledRow> train(data.rows.data(), cut);
  const std::span<const LabeledRow> test(data.rows.data() + cut, data.rows.size() - cut);
  std::string r2s;
  for (const auto& id : target_property_ids()) {
    const auto head = train_head(train, {id});
    double mean = 0;
    for (const auto& r : test) mean += r.labels.at(id) / static_cast<double>(test.size());
    double ss_res = 0, ss_tot = 0;
    for (const auto& r : test) {
      const double y = r.labels.at(id), p = predict(r.graph, head).at(id);
      ss_res += (y - p) * (y - p);
      ss_tot += (y - mean) * (y - mean);
    }
    const double r2 = 1 - ss_res / ss_tot;
    c.expect(r2 >= 0.95, id + " held-out R2 " + fmt(r2));
    r2s += (r2s.empty() ? "" : " ") + id + "=" + fmt(r2, 5);
  }
  std::vector<LabeledRow> constant(train.begin(), train.end());
  for (auto& r : constant) r.labels = {{"EPS", 3.25}};
  const auto head = train_head(constant, {"EPS"});
  double worst = 0;
  for (const auto& r : test) worst = std::max(worst, std::abs(predict(r.graph, head).at("EPS") - 3.25));
  c.expect(worst <= 1e-9, "constant labels recovered only to " + fmt(worst));
  c.note("held-out R2 " + r2s + "; constant recovered to " + fmt(worst, 2));
  return c.verdict();
}

// ------------------------------------------------------------------ 9
Outcome generator_validity() {
  Checks c;
  const auto bag = load_reactant_bag(kData / "reactant_bag.jsonl");
  const auto all = enumerate_candidates(bag, template_library(), 1000000, 42);
  int invalid = 0;
  for (const auto& r : all) {
    const auto rep = validate_text(r.cru, ValidationMode::kCru);
    invalid += !(rep.is_valid && rep.star_count == 2);
  }
  c.expect(invalid == 0, std::to_string(invalid) + " of " + std::to_string(all.size()) + " CRUs fail validation");

  const std::vector<Reactant> small{make_reactant("OCCO"), make_reactant("OCCCO"), make_reactant("OCC(C)O"),
                                    make_reactant("OC(=O)CCCCC(=O)O"), make_reactant("OC(=O)c1ccc(cc1)C(=O)O")};
  const std::vector<ReactionTemplate> polyester{find_template("polyester")};
  const auto six = enumerate_candidates(small, polyester, 1000, 1);
  std::set<std::string> unique;
  for (const auto& r : six) unique.insert(r.cru);
  c.expect(six.size() == 6 && unique.size() == 6, "3 diols x 2 diacids gave " + std::to_string(unique.size()));
  c.note(std::to_string(all.size()) + " bag CRUs valid with 2 stars, 3x2 polyester grid = " +
         std::to_string(unique.size()));
  return c.verdict();
}

// ----------------------------------------------------------------- 10
// Cyclic Jacobi eigenvalues, sorted descending.
std::vector<double> jacobi_eigenvalues(std::vector<std::vector<double>> a) {
  const std::size_t n = a.size();
  for (int sweep = 0; sweep < 60; ++sweep) {
    double off = 0, diag = 0;
    for (std::size_t i = 0; i < n; ++i) {
      diag += a[i][i] * a[i][i];
      for (std::size_t j = i + 1; j < n; ++j) off += a[i][j] * a[i][j];
    }
    if (off <= 1e-26 * diag) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1));
        const double cs = 1 / std::sqrt(t * t + 1), sn = t * cs;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = cs * akp - sn * akq;
          a[k][q] = sn * akp + cs * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = cs * apk - sn * aqk;
          a[q][k] = sn * apk + cs * aqk;
        }
      }
    }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a[i][i];
  std::sort(ev.rbegin(), ev.rend());
  return ev;
}

Outcome pca_correctness() {
  Checks c;
  const auto db = CruDatabase::ingest(kData / "fixture_labeled.csv");
  const auto res = pca_projection(db, 3);

  // Standardize independently and diagonalize the n x n Gram matrix, which
  // shares its non-zero spectrum with the p x p correlation matrix.
  std::vector<std::vector<double>> x;
  for (const auto& r : db.records()) x.push_back(featurize(parse_psmiles(r.cru)));
  const std::size_t n = x.size(), p = x.front().size();
  int varying = 0;
  for (std::size_t j = 0; j < p; ++j) {
    double mean = 0, var = 0;
    for (const auto& row : x) mean += row[j] / static_cast<double>(n);
    for (const auto& row : x) var += (row[j] - mean) * (row[j] - mean) / static_cast<double>(n - 1);
    const double sd = std::sqrt(var);
    for (auto& row : x) row[j] = sd > 1e-12 ? (row[j] - mean) / sd : 0.0;
    varying += sd > 1e-12;
  }
  std::vector<std::vector<double>> gram(n, std::vector<double>(n, 0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = i; k < n; ++k) {
      double dot = 0;
      for (std::size_t j = 0; j < p; ++j) dot += x[i][j] * x[k][j];
      gram[i][k] = gram[k][i] = dot / static_cast<double>(n - 1);
    }
  }
  const auto ev = jacobi_eigenvalues(std::move(gram));
  double total = 0;
  for (double e : ev) total += e;
  double worst = 0;
  for (int k = 0; k < 3; ++k) worst = std::max(worst, std::abs(res.explained_variance_ratio[k] - ev[k] / total));
  c.expect(std::abs(total - varying) < 1e-6 * varying, "Gram trace " + fmt(total) + " vs varying columns " +
                                                           std::to_string(varying));
  c.expect(worst <= 1e-8, "explained-variance ratios off by " + fmt(worst));

  const auto again = pca_projection(db, 3);
  c.expect(again.components == res.components && again.coordinates == res.coordinates, "rerun differs");
  for (const auto& v : res.components) {
    const auto big = std::max_element(v.begin(), v.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
    c.expect(*big > 0, "largest loading is negative");
  }
  c.note("ratios " + fmt(res.explained_variance_ratio[0]) + "/" + fmt(res.explained_variance_ratio[1]) + "/" +
         fmt(res.explained_variance_ratio[2]) + ", max deviation " + fmt(worst, 2));
  return c.verdict();
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
    double limit_s;  // 0 = no runtime bound
  };
  const std::vector<Criterion> criteria{
      {"similarity reproduction", similarity_reproduction, 5},
      {"SA score fidelity", sa_fidelity, 10},
      {"SC calibration", sc_calibration, 0},
      {"parser robustness", parser_robustness, 60},
      {"optimizer oracle optimality", optimizer_optimality, 120},
      {"closed-loop veto", closed_loop_veto, 0},
      {"MCP conformance", mcp_conformance, 10},
      {"predictor sanity", predictor_sanity, 0},
      {"generator validity", generator_validity, 0},
      {"PCA correctness", pca_correctness, 0},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& cr = criteria[i];
    const auto t0 = std::chrono::steady_clock::now();
    Outcome v;
    try {
      v = cr.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (cr.limit_s > 0 && secs >= cr.limit_s) {
      v.pass = false;
      v.detail += " | runtime " + fmt(secs, 3) + " s exceeds " + fmt(cr.limit_s) + " s";
    }
    failed += !v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << " [" << i + 1 << "] " << cr.name << ": " << v.detail << " ("
              << fmt(secs, 3) << " s)" << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
