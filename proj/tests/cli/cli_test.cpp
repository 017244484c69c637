#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "polyforge/mcp.hpp"
#include "polyforge/toolbox.hpp"

namespace polyforge {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return out + "'";
}

// Runs the CLI with `args`, optionally feeding `input` on stdin.
RunResult run(const std::vector<std::string>& args, const std::string& input = {}) {
  static int counter = 0;
  const fs::path dir = fs::path(testing::TempDir()) / ("polyforge_cli_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const auto base = dir / std::to_string(counter++);
  const auto in_path = base.string() + ".in", out_path = base.string() + ".out", err_path = base.string() + ".err";
  std::ofstream(in_path, std::ios::binary) << input;
  std::string cmd = quote(POLYFORGE_CLI);
  for (const auto& a : args) cmd += " " + quote(a);
  cmd += " <" + quote(in_path) + " >" + quote(out_path) + " 2>" + quote(err_path);
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out_path);
  r.err = slurp(err_path);
  return r;
}

json run_json(const std::vector<std::string>& args) {
  const auto r = run(args);
  EXPECT_EQ(r.exit_code, 0) << r.err;
  return json::parse(r.out);
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

const Toolbox& toolbox() {
  static const Toolbox tb = Toolbox::load(ToolboxPaths::from_environment());
  return tb;
}

const fs::path kGolden = POLYFORGE_GOLDEN_DIR;

class GoldenTranscript : public testing::TestWithParam<std::string> {};

TEST_P(GoldenTranscript, ByteIdenticalAcrossRuns) {
  const auto script = slurp(kGolden / (GetParam() + ".requests.jsonl"));
  const auto expected = slurp(kGolden / (GetParam() + ".expected.jsonl"));
  const auto first = run({"serve"}, script);
  const auto second = run({"serve"}, script);
  EXPECT_EQ(first.exit_code, 0);
  EXPECT_EQ(first.out, second.out);
  EXPECT_EQ(first.out, expected);
}

INSTANTIATE_TEST_SUITE_P(Serve, GoldenTranscript,
                         testing::Values("handshake", "tools_list", "confirmed_optimize", "rejected_refine"));

TEST(Serve, GoldenContent) {
  const auto list = lines(slurp(kGolden / "tools_list.expected.jsonl"));
  ASSERT_EQ(list.size(), 2u);
  EXPECT_EQ(json::parse(list[1])["result"]["tools"].size(), 8u);

  const auto opt = lines(slurp(kGolden / "confirmed_optimize.expected.jsonl"));
  ASSERT_EQ(opt.size(), 4u);
  EXPECT_EQ(json::parse(opt[1])["result"]["structuredContent"]["status"], "confirmation_required");
  EXPECT_EQ(json::parse(opt[2])["result"]["structuredContent"]["status"], "ok");
  EXPECT_EQ(json::parse(opt[3])["result"]["structuredContent"]["error"]["code"], "E_STALE_TOKEN");

  const auto refine = lines(slurp(kGolden / "rejected_refine.expected.jsonl"));
  ASSERT_EQ(refine.size(), 3u);
  const auto decision = json::parse(refine[2])["result"]["structuredContent"]["result"];
  EXPECT_EQ(decision["verdict"], "rejected_worse");
  EXPECT_FALSE(decision["flag_note"].get<std::string>().empty());
}

// Builds an interleaving of valid requests, notifications, client
// responses, junk bytes and truncated JSON.
std::string fuzzed_session(std::uint64_t seed, int n, int* expected_replies) {
  std::mt19937_64 rng(seed);
  const std::vector<std::string> valid{
      R"({"jsonrpc":"2.0","id":%ID%,"method":"ping"})",
      R"({"jsonrpc":"2.0","id":%ID%,"method":"tools/list"})",
      R"({"jsonrpc":"2.0","id":%ID%,"method":"tools/call","params":{"name":"validate_polymer","arguments":{"smiles":"*CC(C)*"}}})",
      R"({"jsonrpc":"2.0","id":%ID%,"method":"tools/call","params":{"name":"predict_properties","arguments":{"smiles":"C1CC"}}})",
      R"({"jsonrpc":"2.0","id":%ID%,"method":"tools/call","params":{"name":"generate_polymers","arguments":{"limit":2}}})",
      R"({"jsonrpc":"2.0","id":%ID%,"method":"tools/call","params":{"name":"nope"}})",
      R"({"jsonrpc":"2.0","id":%ID%,"method":"resources/read","params":{"uri":"polyforge://db/records?page=2"}})",
      R"({"jsonrpc":"2.0","id":%ID%,"method":"prompts/get","params":{"name":"refine_candidate"}})",
      R"({"jsonrpc":"2.0","id":%ID%,"method":"bogus"})",
  };
  const std::vector<std::string> silent{R"({"jsonrpc":"2.0","method":"notifications/initialized"})",
                                        R"({"jsonrpc":"2.0","method":"notifications/cancelled","params":{}})",
                                        R"({"jsonrpc":"2.0","id":99,"result":{}})", "", "   "};
  std::string out;
  *expected_replies = 0;
  for (int i = 0; i < n; ++i) {
    switch (rng() % 4) {
      case 0:
      case 1: {
        auto line = valid[rng() % valid.size()];
        line.replace(line.find("%ID%"), 4, std::to_string(i));
        out += line;
        break;
      }
      case 2:
        out += silent[rng() % silent.size()];
        --*expected_replies;
        break;
      default: {
        // Junk: random printable or binary bytes, or a truncated request.
        if (rng() % 2) {
          const auto& v = valid[rng() % valid.size()];
          out += v.substr(0, 1 + rng() % (v.size() - 1));
        } else {
          const int len = 1 + static_cast<int>(rng() % 40);
          for (int k = 0; k < len; ++k) {
            char c = static_cast<char>(rng() % 256);
            if (c == '\n') c = '#';
            out += c;
          }
        }
      }
    }
    out += (rng() % 3 == 0) ? "\r\n" : "\n";
    ++*expected_replies;
  }
  return out;
}

TEST(Serve, StreamDisciplineUnderFuzzedInput) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    int expected = 0;
    const auto input = fuzzed_session(seed, 300, &expected);
    const auto r = run({"serve", "--log-level", "debug"}, input);
    EXPECT_EQ(r.exit_code, 0);
    ASSERT_FALSE(r.out.empty());
    EXPECT_EQ(r.out.back(), '\n');
    int replies = 0;
    for (const auto& line : lines(r.out)) {
      const auto msg = json::parse(line, nullptr, false);
      ASSERT_FALSE(msg.is_discarded()) << "non-protocol line: " << line;
      ASSERT_TRUE(msg.is_object()) << line;
      EXPECT_EQ(msg["jsonrpc"], "2.0");
      EXPECT_NE(msg.contains("result"), msg.contains("error")) << line;
      ++replies;
    }
    // Junk lines that happen to be whitespace-only are silent, so allow a shortfall
    // only for those.
    EXPECT_LE(replies, expected);
    EXPECT_GE(replies, expected - 5);
    EXPECT_FALSE(r.err.empty());  // debug logging went to stderr
  }
}

TEST(Serve, NoConfirmRunsImmediately) {
  const std::string req =
      R"({"jsonrpc":"2.0","id":1,"method":"tools/call","params":{"name":"generate_polymers","arguments":{"limit":2}}})"
      "\n";
  const auto r = run({"serve", "--no-confirm"}, req);
  const auto msg = json::parse(lines(r.out).at(0));
  EXPECT_EQ(msg["result"]["structuredContent"]["status"], "ok");
  EXPECT_EQ(msg["result"]["structuredContent"]["result"], toolbox().call("generate_polymers", {{"limit", 2}}));
}

TEST(Serve, ProtocolVersionFlag) {
  const std::string req = R"({"jsonrpc":"2.0","id":1,"method":"initialize","params":{"protocolVersion":"2099-01-01"}})"
                          "\n";
  const auto r = run({"serve", "--protocol-version", "2099-01-01"}, req);
  EXPECT_EQ(json::parse(lines(r.out).at(0))["result"]["protocolVersion"], "2099-01-01");
}

// Each MCP tool has a CLI twin returning the same payload.
TEST(CliTwins, MatchToolPayloads) {
  EXPECT_EQ(run_json({"validate", "*CC(C)*"}), toolbox().call("validate_polymer", {{"smiles", "*CC(C)*"}}));
  EXPECT_EQ(run_json({"validate", "CCO", "--mode", "molecule"}),
            toolbox().call("validate_polymer", {{"smiles", "CCO"}, {"mode", "molecule"}}));
  EXPECT_EQ(run_json({"predict", "*CC*"}), toolbox().call("predict_properties", {{"smiles", "*CC*"}}));
  EXPECT_EQ(run_json({"predict", "*OCC(=O)*", "--head", "multi"}),
            toolbox().call("predict_properties", {{"smiles", "*OCC(=O)*"}, {"head", "multi"}}));
  EXPECT_EQ(run_json({"score", "*c1ccc(O*)cc1"}), toolbox().call("score_synthesizability", {{"smiles", "*c1ccc(O*)cc1"}}));
  EXPECT_EQ(run_json({"similarity", "*OCC=O", "NCCCCCC(=O)", "--radius", "1", "--n-bits", "1024"}),
            toolbox().call("compute_similarity", {{"a", "*OCC=O"}, {"b", "NCCCCCC(=O)"}, {"radius", 1}, {"n_bits", 1024}}));
  EXPECT_EQ(run_json({"generate", "--limit", "4", "--seed", "7", "--template", "polyester"}),
            toolbox().call("generate_polymers", {{"limit", 4}, {"seed", 7}, {"sa_gate", 10.0}, {"templates", {"polyester"}}}));
  EXPECT_EQ(run_json({"optimize", "--property", "PE_I", "--target", "-5.3", "--budget", "50", "--seed-limit", "20",
                      "--top-k", "3"}),
            toolbox().call("optimize_single_property",
                           {{"property", "PE_I"}, {"target", -5.3}, {"budget", 50}, {"seed_limit", 20}, {"top_k", 3}}));
  const json multi{{"objectives", {{{"property", "PE_I"}, {"target", -5.3}}}},
                   {"constraints", {{{"property", "Egb"}, {"bound", "<="}, {"value", 4.0}}}},
                   {"budget", 40},
                   {"seed_limit", 20}};
  EXPECT_EQ(run_json({"optimize", "--spec", multi.dump()}), toolbox().call("optimize_multi_property", multi));
  const json edit{{"kind", "add_substituent"}, {"site", 1}, {"fragment", "F"}};
  const json spec{{"objectives", {{{"property", "PE_I"}, {"target", -5.0}}}}};
  EXPECT_EQ(run_json({"refine", "--cru", "*CCO*", "--edit", edit.dump(), "--spec", spec.dump()}),
            toolbox().call("refine_structure", {{"cru", "*CCO*"}, {"edit", edit}, {"objectives", spec["objectives"]}}));
}

TEST(Cli, SimilarityExampleFields) {
  const auto j = run_json({"similarity", "*OCC=O", "NCCCCCC(=O)"});
  EXPECT_TRUE(j["tanimoto"].is_number());
  EXPECT_TRUE(j["dice"].is_number());
}

TEST(Cli, OptimizeIsByteIdenticalAcrossRuns) {
  const fs::path spec = fs::path(testing::TempDir()) / "polyforge_opt_spec.json";
  std::ofstream(spec) << R"({"objectives":[{"property":"PE_I","target":-5.3}],"budget":300,"seed_limit":40})";
  const std::vector<std::string> args{"optimize", "--spec", spec.string(), "--seed", "42"};
  const auto a = run(args);
  const auto b = run(args);
  EXPECT_EQ(a.exit_code, 0) << a.err;
  EXPECT_FALSE(a.out.empty());
  EXPECT_EQ(a.out, b.out);
}

TEST(Cli, HelpForEverySubcommand) {
  const std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>> cases{
      {{}, {"--format", "--models", "--db", "validate", "serve"}},
      {{"validate"}, {"--mode"}},
      {{"predict"}, {"--head"}},
      {{"similarity"}, {"--fingerprint", "--radius", "--n-bits"}},
      {{"score"}, {}},
      {{"generate"}, {"--bag", "--limit", "--seed", "--template", "--sa-gate", "--head"}},
      {{"optimize"},
       {"--spec", "--property", "--target", "--range", "--constraint", "--seed", "--budget", "--top-k", "--seed-limit",
        "--sa-gate", "--head"}},
      {{"refine"}, {"--cru", "--edit", "--spec", "--head"}},
      {{"db"}, {"stats", "query", "pca"}},
      {{"db", "stats"}, {}},
      {{"db", "query"}, {"--property", "--min", "--max", "--limit"}},
      {{"db", "pca"}, {"--k"}},
      {{"train"}, {"--data", "--props", "--lambda", "--out"}},
      {{"serve"}, {"--no-confirm", "--protocol-version", "--log-level"}},
  };
  for (const auto& [sub, flags] : cases) {
    auto args = sub;
    args.push_back("--help");
    const auto r = run(args);
    EXPECT_EQ(r.exit_code, 0) << args.front();
    for (const auto& f : flags) EXPECT_NE(r.out.find(f), std::string::npos) << f << " missing from help of " << args.front();
  }
}

TEST(Cli, ExitCodes) {
  const auto invalid = run({"validate", "C1CC"});
  EXPECT_EQ(invalid.exit_code, 1);
  EXPECT_EQ(json::parse(invalid.out)["is_valid"], false);

  const auto domain = run({"predict", "C1CC"});
  EXPECT_EQ(domain.exit_code, 1);
  EXPECT_EQ(json::parse(domain.out)["error"]["code"], "E_UNCLOSED_RING");
  EXPECT_FALSE(domain.err.empty());

  const auto usage = run({"similarity", "*CC*", "*CCO*", "--radius", "two"});
  EXPECT_EQ(usage.exit_code, 2);
  EXPECT_NE(usage.err.find("--radius"), std::string::npos) << usage.err;

  const auto unknown_flag = run({"generate", "--colour", "red"});
  EXPECT_EQ(unknown_flag.exit_code, 2);
  EXPECT_NE(unknown_flag.err.find("--colour"), std::string::npos) << unknown_flag.err;

  EXPECT_EQ(run({}).exit_code, 2);
  EXPECT_EQ(run({"validate", "*CC*", "--format", "xml"}).exit_code, 2);
}

TEST(Cli, MachineFormats) {
  const auto csv = run({"db", "query", "--property", "PE_I", "--min", "-6", "--max", "-5", "--limit", "3", "--format", "csv"});
  EXPECT_EQ(csv.exit_code, 0);
  const auto rows = lines(csv.out);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].rfind("rank,cru,", 0), 0u);

  const auto pca = run({"db", "pca", "--k", "3", "--format", "csv"});
  EXPECT_EQ(pca.exit_code, 0);
  EXPECT_EQ(lines(pca.out).at(0).rfind("cru,pc1,pc2,pc3", 0), 0u);
  EXPECT_EQ(lines(pca.out).size(), toolbox().database().size() + 1);

  const auto table = run({"predict", "*CC*", "--format", "table"});
  EXPECT_NE(table.out.find("log10(S/cm)"), std::string::npos);
}

TEST(Cli, TrainWritesLoadableHead) {
  const fs::path out = fs::path(testing::TempDir()) / "polyforge_trained.head.json";
  const auto j = run_json({"train", "--data", std::string(POLYFORGE_DATA_DIR) + "/fixture_labeled.csv", "--props",
                           "PE_I,Egb", "--out", out.string()});
  EXPECT_EQ(j["kind"], "multi");
  EXPECT_EQ(j["property_ids"], json({"PE_I", "Egb"}));
  const auto head = load_head(out.string());
  EXPECT_EQ(head.property_ids, (std::vector<std::string>{"PE_I", "Egb"}));
}

}  // namespace
}  // namespace polyforge
