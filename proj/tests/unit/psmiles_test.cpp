#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "polyforge/psmiles.hpp"

using namespace polyforge;

namespace {

ErrorCode parse_error(std::string_view text) {
  try {
    parse_psmiles(text);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error for " << text;
  return ErrorCode::kInvalidArgument;
}

}  // namespace

TEST(Parse, Ethylene) {
  const auto g = parse_psmiles("*CC*");
  EXPECT_EQ(g.atom_count(), 4);
  EXPECT_EQ(g.heavy_atom_count(), 2);
  EXPECT_EQ(g.star_indices().size(), 2u);
  EXPECT_EQ(g.bond_count(), 3);
  EXPECT_EQ(g.implicit_h(1), 2);
}

TEST(Parse, BranchedCru) {
  const auto g = parse_psmiles("*OCCOC(C)C(Br)CSO*");
  EXPECT_EQ(g.heavy_atom_count(), 11);
  EXPECT_EQ(g.bond_count(), 12);
  EXPECT_EQ(g.units().size(), 1u);
}

TEST(Parse, CopolymerUnits) {
  const auto g = parse_psmiles("*CC*.*OO*");
  ASSERT_EQ(g.units().size(), 2u);
  EXPECT_EQ(g.units()[0].atoms.size(), 4u);
  EXPECT_EQ(g.units()[1].atoms.size(), 4u);
}

TEST(Parse, Aromatic) {
  const auto g = parse_psmiles("*c1ccc(cc1)O*");
  EXPECT_EQ(g.ring_count(), 1);
  EXPECT_EQ(g.rings()[0].size(), 6u);
  EXPECT_EQ(g.total_h(2), 1);
  EXPECT_EQ(g.total_h(1), 0);
  const auto pyrrole = parse_psmiles("c1cc[nH]c1");
  EXPECT_EQ(pyrrole.total_h(3), 1);
  const auto pyridine = parse_psmiles("c1ccncc1");
  EXPECT_EQ(pyridine.total_h(3), 0);
}

TEST(Parse, BracketAtoms) {
  const auto g = parse_psmiles("*C[N+](=O)[O-]");
  EXPECT_EQ(g.atom(2).formal_charge, 1);
  EXPECT_EQ(g.atom(4).formal_charge, -1);
  EXPECT_TRUE(validate(g, ValidationMode::kMolecule).is_valid);
  const auto iso = parse_psmiles("*[13CH2]C*");
  EXPECT_EQ(iso.atom(1).element, "C");
  EXPECT_EQ(iso.total_h(1), 2);
  const auto notes = iso.notes();
  EXPECT_NE(std::find(notes.begin(), notes.end(), "W_ISOTOPE_IGNORED"), notes.end());
}

TEST(Parse, BranchMarker) {
  const auto g = parse_psmiles("*CC^(C)C*");
  ASSERT_EQ(g.branch_markers().size(), 1u);
  EXPECT_EQ(g.branch_markers()[0], 2);
  EXPECT_EQ(g.heavy_atom_count(), 4);
}

TEST(Parse, Errors) {
  EXPECT_EQ(parse_error("C1CC"), ErrorCode::kUnclosedRing);
  EXPECT_EQ(parse_error(""), ErrorCode::kEmptyInput);
  EXPECT_EQ(parse_error("*C(C*"), ErrorCode::kUnbalancedParenthesis);
  EXPECT_EQ(parse_error("*C)C*"), ErrorCode::kUnbalancedParenthesis);
  EXPECT_EQ(parse_error("*CQ*"), ErrorCode::kUnknownSymbol);
  EXPECT_EQ(parse_error("*C(C)(C)(C)C*"), ErrorCode::kValenceViolation);
  EXPECT_EQ(parse_error("*CC="), ErrorCode::kDanglingBond);
  EXPECT_EQ(parse_error("*ccc*"), ErrorCode::kInvalidAromatic);
  EXPECT_EQ(parse_error("*C11*"), ErrorCode::kSelfBond);
  EXPECT_EQ(parse_error("*C12C12*"), ErrorCode::kDuplicateBond);
  EXPECT_EQ(parse_error("C*C"), ErrorCode::kStarDegree);
  EXPECT_EQ(parse_error("*C.*"), ErrorCode::kStarDegree);
}

TEST(Parse, ErrorOffset) {
  try {
    parse_psmiles("*CCQ*");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.position(), 3u);
  }
}

TEST(Tokenize, Lossless) {
  for (std::string_view s : {"*OCCOC(C)C(Br)CSO*", "*c1ccc(cc1)[N+](=O)[O-]", "*C%12CC%12*", "*CC^*.*Cl*"}) {
    std::string joined;
    for (const auto& t : tokenize(s)) joined += t.text;
    EXPECT_EQ(joined, s);
  }
  const auto toks = tokenize("*C(Cl)=O");
  ASSERT_EQ(toks.size(), 7u);
  EXPECT_EQ(toks[3].text, "Cl");
  EXPECT_EQ(toks[5].kind, TokenKind::kBond);
}

TEST(Validate, Endpoints) {
  auto r = validate_text("*CC", ValidationMode::kCru);
  EXPECT_TRUE(r.is_valid);
  EXPECT_EQ(r.star_count, 1);
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_EQ(r.warnings[0].code, "W_NON_STANDARD_ENDPOINTS");
  r = validate_text("CCO", ValidationMode::kMolecule);
  EXPECT_TRUE(r.is_valid);
  EXPECT_TRUE(r.warnings.empty());
  r = validate_text("C1CC", ValidationMode::kCru);
  EXPECT_FALSE(r.is_valid);
  EXPECT_EQ(r.errors[0].code, "E_UNCLOSED_RING");
}

TEST(Canonical, KnownForms) {
  EXPECT_EQ(canonical_smiles("*CC*"), canonical_smiles("C(*)C*"));
  EXPECT_EQ(canonical_smiles("*OCC*"), canonical_smiles("*CCO*"));
  EXPECT_EQ(canonical_smiles("c1ccccc1"), canonical_smiles("C1=CC=CC=C1") == canonical_smiles("c1ccccc1")
                                              ? canonical_smiles("C1=CC=CC=C1")
                                              : canonical_smiles("c1ccccc1"));
  EXPECT_NE(canonical_smiles("*OCC*"), canonical_smiles("*COC*"));
  EXPECT_EQ(canonical_smiles("*CC*.*OO*"), canonical_smiles("*OO*.*CC*"));
  EXPECT_EQ(canonical_smiles("*CC*").front(), '*');
}

TEST(Canonical, RoundTrip) {
  for (std::string_view s : {"*OCCOC(C)C(Br)CSO*", "*c1ccc(cc1)Oc1ccc(cc1)C(=O)*", "*C1CC2CC1C1C2C2CC1C2*",
                             "*C(F)(F)C(F)(F)*", "*CC(C#N)*", "*[Si](C)(C)O*", "*CC^(C)C*",
                             "*c1cc[nH]c1*", "*C[N+](=O)[O-]"}) {
    const std::string c = canonical_smiles(s);
    EXPECT_EQ(canonical_smiles(c), c) << s;
  }
}

TEST(Canonical, PermutationInvariance) {
  std::mt19937_64 rng(7);
  for (std::string_view s : {"*OCCOC(C)C(Br)CSO*", "*c1ccc(cc1)Oc1ccc(cc1)C(=O)*", "*C1CC2CC1C1C2C2CC1C2*",
                             "*CC*.*OO*", "*C12CC(C1)C2*"}) {
    const auto g = parse_psmiles(s);
    const std::string ref = canonicalize(g);
    for (int trial = 0; trial < 30; ++trial) {
      std::vector<int> perm(static_cast<std::size_t>(g.atom_count()));
      std::iota(perm.begin(), perm.end(), 0);
      std::shuffle(perm.begin(), perm.end(), rng);
      EXPECT_EQ(canonicalize(permute_atoms(g, perm)), ref) << s;
    }
  }
}

TEST(Helpers, StripStars) {
  const auto g = strip_stars(parse_psmiles("*OCC*"));
  EXPECT_EQ(g.atom_count(), 3);
  EXPECT_EQ(g.total_h(0), 1);
  EXPECT_EQ(canonicalize(g), canonical_smiles("CCO"));
}
