// Regenerates the bundled data files from the fixture and the reference
// corpus: SA fragment table, SC model, labeled fixture database and the
// landscape-trained property heads. Output is byte-deterministic.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "polyforge/property_model.hpp"
#include "polyforge/synth_score.hpp"
#include "polyforge/text.hpp"

using namespace polyforge;
namespace fs = std::filesystem;

namespace {

constexpr double kScTargetMean = 1.93;
constexpr int kFixtureRows = 497;

// Deliberately broken rows, spliced into the labeled fixture so that
// ingest has known defects to skip.
const std::vector<std::pair<std::size_t, std::string>> kMalformed = {
    {100, "*CC(*"}, {250, "*C1CC*"}, {400, "*CQ*"}};

struct FixtureRow {
  std::string smiles;
  std::string source;
  double sa_reference;
};

std::vector<FixtureRow> read_fixture(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  std::getline(in, line);
  std::vector<FixtureRow> rows;
  while (std::getline(in, line)) {
    const auto cells = split_csv(line);
    if (cells.size() != 3) throw Error(ErrorCode::kSchemaMismatch, "bad fixture line: " + line);
    rows.push_back({cells[0], cells[1], std::stod(cells[2])});
  }
  return rows;
}

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regenerate bundled polyforge data files"};
  std::string data_dir = POLYFORGE_DEFAULT_DATA_DIR;
  std::string out_data, out_models;
  app.add_option("--data", data_dir, "Directory holding fixture_crus.csv and reference_molecules.smi");
  app.add_option("--out-data", out_data, "Output directory for data files (default: --data)");
  app.add_option("--out-models", out_models, "Output directory for property heads")->required();
  CLI11_PARSE(app, argc, argv);
  if (out_data.empty()) out_data = data_dir;

  try {
    fs::create_directories(out_data);
    fs::create_directories(out_models);
    const auto fixture = read_fixture(fs::path(data_dir) / "fixture_crus.csv");

    std::vector<PolymerGraph> fixture_graphs;
    std::vector<double> reference;
    for (const auto& r : fixture) {
      fixture_graphs.push_back(parse_psmiles(r.smiles));
      reference.push_back(r.sa_reference);
    }
    std::vector<PolymerGraph> corpus = fixture_graphs;
    int unparsed = 0;
    {
      std::istringstream in(read_file(fs::path(data_dir) / "reference_molecules.smi"));
      std::string line;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        try {
          corpus.push_back(parse_psmiles(line));
        } catch (const Error&) {
          ++unparsed;
        }
      }
    }
    const auto table = fit_sa_scale(build_fragment_table(corpus), fixture_graphs, reference);
    write_file(fs::path(out_data) / "sa_fragments.json", to_json(table).dump(1) + "\n");
    std::cerr << "sa_fragments.json: " << table.contributions.size() << " fragments from " << corpus.size()
              << " structures (" << unparsed << " reference lines skipped)\n";

    const std::vector<PolymerGraph> labeled_graphs(fixture_graphs.begin(), fixture_graphs.begin() + kFixtureRows);
    const auto sc_model = calibrate_sc_model(labeled_graphs, kScTargetMean);
    write_file(fs::path(out_data) / "sc_model.json", to_json(sc_model).dump(1) + "\n");

    std::string csv = "smiles,PE_I,Egb,Eea,EPS,OPV,sa,sc,source\n";
    std::vector<LabeledRow> training;
    std::size_t malformed = 0;
    for (int i = 0; i < kFixtureRows; ++i) {
      while (malformed < kMalformed.size() && kMalformed[malformed].first == static_cast<std::size_t>(i)) {
        csv += kMalformed[malformed].second + ",,,,,,,,malformed\n";
        ++malformed;
      }
      const auto& g = labeled_graphs[static_cast<std::size_t>(i)];
      const auto props = reference_landscape(g);
      std::string line = fixture[static_cast<std::size_t>(i)].smiles;
      PropertyVector rounded;
      for (const auto& id : target_property_ids()) {
        const std::string cell = fixed(props.at(id));
        line += "," + cell;
        rounded.emplace(id, std::stod(cell));
      }
      line += "," + fixed(sa_score(g, table)) + "," + fixed(sc_score(g, sc_model)) + "," +
              fixture[static_cast<std::size_t>(i)].source + "\n";
      csv += line;
      training.push_back({canonicalize(g), g, std::move(rounded)});
    }
    write_file(fs::path(out_data) / "fixture_labeled.csv", csv);

    for (const auto& id : target_property_ids()) {
      auto head = train_head(training, {id});
      save_head(head, (fs::path(out_models) / (id + ".head.json")).string());
    }
    const auto multi = train_head(training, target_property_ids());
    save_head(multi, (fs::path(out_models) / "multi.head.json").string());
    std::cerr << "wrote " << kFixtureRows << " labeled rows and " << target_property_ids().size() + 1
              << " heads\n";
  } catch (const Error& e) {
    std::cerr << "datagen: " << e.code_name() << ": " << e.what() << "\n";
    return 1;
  }
  return 0;
}
