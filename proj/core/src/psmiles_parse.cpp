#include <cctype>
#include <map>

#include "polyforge/psmiles.hpp"

namespace polyforge {
namespace {

bool is_bracket_char(char c) {
  const auto u = static_cast<unsigned char>(c);
  return std::isalnum(u) != 0 || c == '+' || c == '-' || c == '@' || c == ':' || c == '*';
}

struct BracketAtom {
  AtomNode atom;
  bool stereo = false;
  bool isotope = false;
};

// Parses the interior of `[...]`. `offset` is the position of '['.
BracketAtom parse_bracket(std::string_view body, std::size_t offset) {
  BracketAtom out;
  std::size_t i = 0;
  auto fail = [&](const std::string& what) -> BracketAtom {
    throw ParseError(ErrorCode::kUnknownSymbol, what, offset + 1 + i);
  };
  auto digit = [&](std::size_t k) { return k < body.size() && std::isdigit(static_cast<unsigned char>(body[k])) != 0; };

  while (digit(i)) {
    out.isotope = true;
    ++i;
  }
  if (i >= body.size()) return fail("empty bracket atom");

  const char c = body[i];
  if (c == '*') {
    out.atom.element = "*";
    ++i;
  } else if (std::isupper(static_cast<unsigned char>(c)) != 0) {
    std::string two;
    if (i + 1 < body.size() && std::islower(static_cast<unsigned char>(body[i + 1])) != 0) {
      two = std::string{c, body[i + 1]};
    }
    if (!two.empty() && find_element(two) != nullptr) {
      out.atom.element = two;
      i += 2;
    } else if (find_element(std::string(1, c)) != nullptr) {
      out.atom.element = std::string(1, c);
      ++i;
    } else {
      return fail("unknown element in bracket atom");
    }
  } else if (std::islower(static_cast<unsigned char>(c)) != 0) {
    const std::string_view rest = body.substr(i);
    if (rest.starts_with("se")) {
      out.atom.element = "Se";
      i += 2;
    } else if (rest.starts_with("as")) {
      out.atom.element = "As";
      i += 2;
    } else if (c == 'b' || c == 'c' || c == 'n' || c == 'o' || c == 'p' || c == 's') {
      out.atom.element = std::string(1, static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
      ++i;
    } else {
      return fail("unknown aromatic symbol in bracket atom");
    }
    out.atom.aromatic = true;
  } else {
    return fail("bracket atom must start with an element symbol");
  }

  if (i < body.size() && body[i] == '@') {
    out.stereo = true;
    ++i;
    if (i < body.size() && body[i] == '@') ++i;
  }

  int h = 0;
  if (i < body.size() && body[i] == 'H') {
    ++i;
    h = 1;
    if (digit(i)) {
      h = body[i] - '0';
      ++i;
    }
  }
  out.atom.explicit_h = h;

  if (i < body.size() && (body[i] == '+' || body[i] == '-')) {
    const int sign = body[i] == '+' ? 1 : -1;
    const char sym = body[i];
    ++i;
    int magnitude = 1;
    if (digit(i)) {
      magnitude = body[i] - '0';
      ++i;
    } else {
      while (i < body.size() && body[i] == sym) {
        ++magnitude;
        ++i;
      }
    }
    out.atom.formal_charge = sign * magnitude;
  }

  if (i < body.size() && body[i] == ':') {
    ++i;
    if (!digit(i)) return fail("atom class requires digits");
    while (digit(i)) ++i;
  }
  if (i != body.size()) return fail("unexpected character in bracket atom");
  return out;
}

AtomNode organic_atom(const std::string& text) {
  AtomNode atom;
  if (text == "*") {
    atom.element = "*";
  } else if (std::islower(static_cast<unsigned char>(text[0])) != 0) {
    atom.element = std::string(1, static_cast<char>(std::toupper(static_cast<unsigned char>(text[0]))));
    atom.aromatic = true;
  } else {
    atom.element = text;
  }
  return atom;
}

BondOrder bond_from_symbol(char c) {
  switch (c) {
    case '=': return BondOrder::kDouble;
    case '#': return BondOrder::kTriple;
    case ':': return BondOrder::kAromatic;
    default: return BondOrder::kSingle;
  }
}

struct RingOpen {
  int atom;
  std::optional<BondOrder> order;
  std::size_t offset;
};

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  const std::size_t n = text.size();
  auto push = [&](TokenKind kind, std::size_t len) {
    tokens.push_back({kind, std::string(text.substr(i, len)), i});
    i += len;
  };
  while (i < n) {
    const char c = text[i];
    const char next = i + 1 < n ? text[i + 1] : '\0';
    switch (c) {
      case '[': {
        std::size_t j = i + 1;
        while (j < n && text[j] != ']') {
          if (!is_bracket_char(text[j])) {
            throw ParseError(ErrorCode::kUnknownSymbol, "illegal character inside bracket atom", j);
          }
          ++j;
        }
        if (j >= n) throw ParseError(ErrorCode::kUnknownSymbol, "unterminated bracket atom", i);
        push(TokenKind::kBracketAtom, j - i + 1);
        break;
      }
      case 'C': push(TokenKind::kAtom, next == 'l' ? 2 : 1); break;
      case 'B': push(TokenKind::kAtom, next == 'r' ? 2 : 1); break;
      case 'S': push(TokenKind::kAtom, next == 'i' ? 2 : 1); break;
      case 'N': case 'O': case 'P': case 'F': case 'I':
      case 'b': case 'c': case 'n': case 'o': case 'p': case 's':
      case '*':
        push(TokenKind::kAtom, 1);
        break;
      case '(': push(TokenKind::kBranchOpen, 1); break;
      case ')': push(TokenKind::kBranchClose, 1); break;
      case '.': push(TokenKind::kDot, 1); break;
      case '^': push(TokenKind::kBranchMarker, 1); break;
      case '-': case '=': case '#': case ':': case '/': case '\\':
        push(TokenKind::kBond, 1);
        break;
      case '%':
        if (i + 2 < n && std::isdigit(static_cast<unsigned char>(text[i + 1])) != 0 &&
            std::isdigit(static_cast<unsigned char>(text[i + 2])) != 0) {
          push(TokenKind::kRingDigit, 3);
        } else {
          throw ParseError(ErrorCode::kUnknownSymbol, "'%' must be followed by two digits", i);
        }
        break;
      default:
        if (std::isdigit(static_cast<unsigned char>(c)) != 0) {
          push(TokenKind::kRingDigit, 1);
        } else {
          throw ParseError(ErrorCode::kUnknownSymbol, "unknown symbol", i);
        }
    }
  }
  return tokens;
}

PolymerGraph parse_psmiles(std::string_view text) {
  if (text.empty()) throw ParseError(ErrorCode::kEmptyInput, "empty p-SMILES", 0);
  const auto tokens = tokenize(text);

  GraphBuilder builder;
  builder.set_source_text(std::string(text));
  std::vector<ConnectedUnit> units(1);
  std::vector<int> branch_stack;
  std::map<int, RingOpen> open_rings;
  int prev = -1;
  std::optional<BondOrder> pending;
  std::size_t pending_offset = 0;
  bool mark_next = false;
  bool stereo_note = false;
  bool isotope_note = false;

  auto connect = [&](int a, int b, std::optional<BondOrder> order, std::size_t offset) {
    BondOrder o = BondOrder::kSingle;
    if (order) {
      o = *order;
    } else if (builder.atom(a).aromatic && builder.atom(b).aromatic) {
      o = BondOrder::kAromatic;
    }
    try {
      builder.add_bond(a, b, o);
    } catch (const Error& e) {
      throw ParseError(e.code(), e.what(), offset);
    }
  };

  for (const auto& tok : tokens) {
    switch (tok.kind) {
      case TokenKind::kAtom:
      case TokenKind::kBracketAtom: {
        AtomNode atom;
        if (tok.kind == TokenKind::kAtom) {
          atom = organic_atom(tok.text);
        } else {
          auto parsed = parse_bracket(std::string_view(tok.text).substr(1, tok.text.size() - 2), tok.offset);
          atom = std::move(parsed.atom);
          stereo_note = stereo_note || parsed.stereo;
          isotope_note = isotope_note || parsed.isotope;
        }
        if (mark_next) {
          atom.branch_marker = true;
          mark_next = false;
        }
        const int idx = builder.add_atom(std::move(atom));
        units.back().atoms.push_back(idx);
        if (prev >= 0) connect(prev, idx, pending, tok.offset);
        pending.reset();
        prev = idx;
        break;
      }
      case TokenKind::kBond:
        if (prev < 0 || pending) throw ParseError(ErrorCode::kDanglingBond, "bond symbol without a preceding atom", tok.offset);
        if (tok.text[0] == '/' || tok.text[0] == '\\') stereo_note = true;
        pending = bond_from_symbol(tok.text[0]);
        pending_offset = tok.offset;
        break;
      case TokenKind::kRingDigit: {
        if (prev < 0) throw ParseError(ErrorCode::kDanglingBond, "ring closure without a preceding atom", tok.offset);
        const int digit = tok.text.size() == 1 ? tok.text[0] - '0' : std::stoi(tok.text.substr(1));
        auto it = open_rings.find(digit);
        if (it == open_rings.end()) {
          open_rings.emplace(digit, RingOpen{prev, pending, tok.offset});
        } else {
          std::optional<BondOrder> order = it->second.order;
          if (pending) {
            if (order && *order != *pending) {
              throw ParseError(ErrorCode::kUnknownSymbol, "conflicting ring closure bond orders", tok.offset);
            }
            order = pending;
          }
          connect(it->second.atom, prev, order, tok.offset);
          open_rings.erase(it);
        }
        pending.reset();
        break;
      }
      case TokenKind::kBranchOpen:
        if (prev < 0 || pending) throw ParseError(ErrorCode::kUnbalancedParenthesis, "branch without a preceding atom", tok.offset);
        branch_stack.push_back(prev);
        break;
      case TokenKind::kBranchClose:
        if (branch_stack.empty()) throw ParseError(ErrorCode::kUnbalancedParenthesis, "unmatched ')'", tok.offset);
        if (pending) throw ParseError(ErrorCode::kDanglingBond, "bond symbol before ')'", pending_offset);
        prev = branch_stack.back();
        branch_stack.pop_back();
        break;
      case TokenKind::kDot:
        if (!branch_stack.empty()) throw ParseError(ErrorCode::kUnbalancedParenthesis, "'.' inside an open branch", tok.offset);
        if (pending) throw ParseError(ErrorCode::kDanglingBond, "bond symbol before '.'", pending_offset);
        if (units.back().atoms.empty()) throw ParseError(ErrorCode::kEmptyInput, "empty copolymer unit", tok.offset);
        units.emplace_back();
        prev = -1;
        break;
      case TokenKind::kBranchMarker:
        if (prev >= 0) {
          builder.atom(prev).branch_marker = true;
        } else {
          mark_next = true;
        }
        break;
    }
  }

  if (!branch_stack.empty()) throw ParseError(ErrorCode::kUnbalancedParenthesis, "unclosed '('", text.size());
  if (pending) throw ParseError(ErrorCode::kDanglingBond, "trailing bond symbol", pending_offset);
  if (!open_rings.empty()) {
    const auto& open = open_rings.begin()->second;
    throw ParseError(ErrorCode::kUnclosedRing, "ring bond " + std::to_string(open_rings.begin()->first) + " is never closed", open.offset);
  }
  if (units.back().atoms.empty()) throw ParseError(ErrorCode::kEmptyInput, "empty copolymer unit", text.size());
  if (mark_next) throw ParseError(ErrorCode::kDanglingBond, "branch marker without an atom", text.size());

  builder.set_units(std::move(units));
  if (stereo_note) builder.add_note("W_STEREO_IGNORED");
  if (isotope_note) builder.add_note("W_ISOTOPE_IGNORED");
  PolymerGraph graph = builder.build();

  const auto report = validate(graph, ValidationMode::kCru);
  if (!report.errors.empty()) {
    const auto& first = report.errors.front();
    ErrorCode code = ErrorCode::kInvalidGraph;
    if (first.code == code_name(ErrorCode::kValenceViolation)) code = ErrorCode::kValenceViolation;
    else if (first.code == code_name(ErrorCode::kInvalidAromatic)) code = ErrorCode::kInvalidAromatic;
    else if (first.code == code_name(ErrorCode::kStarDegree)) code = ErrorCode::kStarDegree;
    std::size_t offset = 0;
    if (first.atom) {
      int seen = 0;
      for (const auto& tok : tokens) {
        if (tok.kind == TokenKind::kAtom || tok.kind == TokenKind::kBracketAtom) {
          if (seen++ == *first.atom) {
            offset = tok.offset;
            break;
          }
        }
      }
    }
    throw ParseError(code, first.message, offset);
  }
  return graph;
}

}  // namespace polyforge
