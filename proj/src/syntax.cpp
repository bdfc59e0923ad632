// Text grammar for terms and formulas.

#include <cctype>
#include <set>
#include <vector>

#include "bvm/error.hpp"
#include "bvm/logic.hpp"

namespace bvm {

namespace {

enum class Tok {
  kIdent,
  kParam,
  kLParen,
  kRParen,
  kComma,
  kDot,
  kAnd,
  kOr,
  kArrow,
  kBang,
  kEq,
  kNeq,
  kLess,
  kEnd,
};

struct Token {
  Tok kind;
  std::string text;
  std::size_t offset;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
}

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    if (ident_start(c)) {
      while (i < text.size() && ident_char(text[i])) ++i;
      out.push_back({Tok::kIdent, std::string(text.substr(start, i - start)), start});
      continue;
    }
    if (c == '#') {
      ++i;
      while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
      if (i == start + 1) throw ParseError(start, "expected digits after '#'");
      if (i - start > 6) throw ParseError(start, "parameter index too large");
      out.push_back({Tok::kParam, std::string(text.substr(start + 1, i - start - 1)), start});
      continue;
    }
    auto two = text.substr(i, 2);
    if (two == "->") {
      out.push_back({Tok::kArrow, "->", start});
      i += 2;
      continue;
    }
    if (two == "!=") {
      out.push_back({Tok::kNeq, "!=", start});
      i += 2;
      continue;
    }
    Tok kind;
    switch (c) {
      case '(': kind = Tok::kLParen; break;
      case ')': kind = Tok::kRParen; break;
      case ',': kind = Tok::kComma; break;
      case '.': kind = Tok::kDot; break;
      case '&': kind = Tok::kAnd; break;
      case '|': kind = Tok::kOr; break;
      case '!': kind = Tok::kBang; break;
      case '=': kind = Tok::kEq; break;
      case '<': kind = Tok::kLess; break;
      default:
        throw ParseError(start, std::string("unexpected character '") + c + "'");
    }
    out.push_back({kind, std::string(1, c), start});
    ++i;
  }
  out.push_back({Tok::kEnd, "", text.size()});
  return out;
}

bool is_keyword(const std::string& s) {
  return s == "exists" || s == "forall" || s == "true" || s == "false";
}

class Parser {
 public:
  Parser(std::string_view text, const Signature* sig) : tokens_(tokenize(text)), sig_(sig) {}

  Formula parse_all() {
    Formula f = implication();
    expect_end();
    return f;
  }

  Term parse_term_all() {
    Term t = term();
    expect_end();
    return t;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  const Token& next() { return tokens_[pos_++]; }
  bool at(Tok k) const { return peek().kind == k; }

  [[noreturn]] void fail(const std::string& what) const {
    const Token& t = peek();
    throw ParseError(t.offset, what + (t.kind == Tok::kEnd ? " at end of input"
                                                             : ", found '" + t.text + "'"));
  }

  void expect(Tok k, const char* what) {
    if (!at(k)) fail(std::string("expected ") + what);
    ++pos_;
  }

  void expect_end() {
    if (!at(Tok::kEnd)) fail("expected end of input");
  }

  Formula implication() {
    Formula lhs = disjunction();
    if (at(Tok::kArrow)) {
      ++pos_;
      return Formula::implication(lhs, implication());
    }
    return lhs;
  }

  Formula disjunction() {
    Formula lhs = conjunction();
    while (at(Tok::kOr)) {
      ++pos_;
      lhs = Formula::disjunction(lhs, conjunction());
    }
    return lhs;
  }

  Formula conjunction() {
    Formula lhs = unary();
    while (at(Tok::kAnd)) {
      ++pos_;
      lhs = Formula::conjunction(lhs, unary());
    }
    return lhs;
  }

  Formula unary() {
    if (at(Tok::kBang)) {
      ++pos_;
      return Formula::negation(unary());
    }
    if (at(Tok::kIdent) && (peek().text == "exists" || peek().text == "forall")) {
      return quantifier();
    }
    if (at(Tok::kLParen)) {
      ++pos_;
      Formula inner = implication();
      expect(Tok::kRParen, "')'");
      return inner;
    }
    if (at(Tok::kIdent) && peek().text == "true") {
      ++pos_;
      return Formula::truth();
    }
    if (at(Tok::kIdent) && peek().text == "false") {
      ++pos_;
      return Formula::falsity();
    }
    return atom();
  }

  Formula quantifier() {
    const bool universal = next().text == "forall";
    std::vector<std::string> vars;
    while (true) {
      if (!at(Tok::kIdent) || is_keyword(peek().text)) fail("expected a variable");
      vars.push_back(next().text);
      if (at(Tok::kComma)) {
        ++pos_;
        continue;
      }
      break;
    }
    expect(Tok::kDot, "'.' or ','");
    for (const auto& v : vars) bound_.push_back(v);
    Formula body = implication();
    bound_.resize(bound_.size() - vars.size());
    for (auto it = vars.rbegin(); it != vars.rend(); ++it) {
      body = universal ? Formula::forall(*it, body) : Formula::exists(*it, body);
    }
    return body;
  }

  Formula atom() {
    if (!at(Tok::kIdent) && !at(Tok::kParam)) fail("expected a formula");
    const std::size_t start = pos_;
    // R(t1,...) not followed by a comparison is a relation atom.
    if (at(Tok::kIdent) && tokens_[pos_ + 1].kind == Tok::kLParen && !is_keyword(peek().text)) {
      const Token name = next();
      std::vector<Term> args = arguments();
      if (!at(Tok::kEq) && !at(Tok::kNeq) && !at(Tok::kLess)) {
        if (sig_ != nullptr) {
          auto idx = sig_->relation_index(name.text);
          if (!idx) throw Error(ErrorKind::kUnknownSymbol, "unknown relation '" + name.text + "'");
          if (sig_->relations()[static_cast<std::size_t>(*idx)].arity != static_cast<int>(args.size())) {
            throw ParseError(name.offset, "wrong arity for relation '" + name.text + "'");
          }
        }
        return Formula::relation(name.text, std::move(args));
      }
      pos_ = start;
    }
    Term lhs = term();
    if (at(Tok::kEq)) {
      ++pos_;
      return Formula::equals(lhs, term());
    }
    if (at(Tok::kNeq)) {
      ++pos_;
      return Formula::negation(Formula::equals(lhs, term()));
    }
    if (at(Tok::kLess)) {
      const Token op = next();
      if (sig_ != nullptr && !sig_->relation_index("<")) {
        throw Error(ErrorKind::kUnknownSymbol, "unknown relation '<'");
      }
      (void)op;
      return Formula::relation("<", {lhs, term()});
    }
    fail("expected '=', '!=' or '<'");
  }

  std::vector<Term> arguments() {
    expect(Tok::kLParen, "'('");
    std::vector<Term> args;
    args.push_back(term());
    while (at(Tok::kComma)) {
      ++pos_;
      args.push_back(term());
    }
    expect(Tok::kRParen, "')' or ','");
    return args;
  }

  bool is_bound(const std::string& name) const {
    for (const auto& b : bound_) {
      if (b == name) return true;
    }
    return false;
  }

  Term term() {
    if (at(Tok::kParam)) {
      return Term::parameter(std::stoi(next().text));
    }
    if (!at(Tok::kIdent) || is_keyword(peek().text)) fail("expected a term");
    const Token name = next();
    if (at(Tok::kLParen)) {
      std::vector<Term> args = arguments();
      if (sig_ != nullptr) {
        auto idx = sig_->function_index(name.text);
        if (!idx) throw Error(ErrorKind::kUnknownSymbol, "unknown function '" + name.text + "'");
        if (sig_->functions()[static_cast<std::size_t>(*idx)].arity != static_cast<int>(args.size())) {
          throw ParseError(name.offset, "wrong arity for function '" + name.text + "'");
        }
      }
      return Term::function(name.text, std::move(args));
    }
    if (is_bound(name.text)) return Term::variable(name.text);
    if (sig_ != nullptr) {
      return sig_->constant_index(name.text) ? Term::constant(name.text) : Term::variable(name.text);
    }
    const char c = name.text.front();
    return (c >= 'u' && c <= 'z') ? Term::variable(name.text) : Term::constant(name.text);
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  const Signature* sig_;
  std::vector<std::string> bound_;
};

// Binding strength used by the printer; higher binds tighter.
int precedence(const Formula& f) {
  switch (f.kind()) {
    case Formula::Kind::kExists:
    case Formula::Kind::kForall: return 0;
    case Formula::Kind::kImplies: return 1;
    case Formula::Kind::kOr: return 2;
    case Formula::Kind::kAnd: return 3;
    case Formula::Kind::kNot: return 4;
    default: return 5;
  }
}

void print_term(const Term& t, std::string& out) {
  switch (t.kind()) {
    case Term::Kind::kVariable:
    case Term::Kind::kConstant:
      out += t.name();
      break;
    case Term::Kind::kParameter:
      out += '#';
      out += std::to_string(t.parameter_index());
      break;
    case Term::Kind::kFunction:
      out += t.name();
      out += '(';
      for (std::size_t i = 0; i < t.args().size(); ++i) {
        if (i) out += ',';
        print_term(t.args()[i], out);
      }
      out += ')';
      break;
  }
}

void print_formula(const Formula& f, int min_prec, std::string& out);

void print_child(const Formula& f, int min_prec, std::string& out) {
  if (precedence(f) < min_prec) {
    out += '(';
    print_formula(f, 0, out);
    out += ')';
  } else {
    print_formula(f, min_prec, out);
  }
}

void print_formula(const Formula& f, int min_prec, std::string& out) {
  (void)min_prec;
  switch (f.kind()) {
    case Formula::Kind::kTrue: out += "true"; break;
    case Formula::Kind::kFalse: out += "false"; break;
    case Formula::Kind::kEquals:
      print_term(f.terms()[0], out);
      out += " = ";
      print_term(f.terms()[1], out);
      break;
    case Formula::Kind::kRelation:
      if (f.name() == "<" && f.terms().size() == 2) {
        print_term(f.terms()[0], out);
        out += " < ";
        print_term(f.terms()[1], out);
        break;
      }
      out += f.name();
      out += '(';
      for (std::size_t i = 0; i < f.terms().size(); ++i) {
        if (i) out += ',';
        print_term(f.terms()[i], out);
      }
      out += ')';
      break;
    case Formula::Kind::kNot: {
      out += '!';
      const Formula& c = f.child(0);
      const bool infix_atom = c.kind() == Formula::Kind::kEquals ||
                              (c.kind() == Formula::Kind::kRelation && c.name() == "<");
      if (infix_atom || precedence(c) < 4) {
        out += '(';
        print_formula(c, 0, out);
        out += ')';
      } else {
        print_formula(c, 4, out);
      }
      break;
    }
    case Formula::Kind::kAnd:
      print_child(f.child(0), 3, out);
      out += " & ";
      print_child(f.child(1), 4, out);
      break;
    case Formula::Kind::kOr:
      print_child(f.child(0), 2, out);
      out += " | ";
      print_child(f.child(1), 3, out);
      break;
    case Formula::Kind::kImplies:
      print_child(f.child(0), 2, out);
      out += " -> ";
      print_child(f.child(1), 1, out);
      break;
    case Formula::Kind::kExists:
    case Formula::Kind::kForall:
      out += f.kind() == Formula::Kind::kExists ? "exists " : "forall ";
      out += f.name();
      out += ". ";
      print_formula(f.child(0), 0, out);
      break;
  }
}

}  // namespace

Formula parse_formula(std::string_view text, const Signature* signature) {
  return Parser(text, signature).parse_all();
}

Term parse_term(std::string_view text, const Signature* signature) {
  return Parser(text, signature).parse_term_all();
}

std::string to_string(const Term& term) {
  std::string out;
  print_term(term, out);
  return out;
}

std::string to_string(const Formula& formula) {
  std::string out;
  print_formula(formula, 0, out);
  return out;
}

}  // namespace bvm
