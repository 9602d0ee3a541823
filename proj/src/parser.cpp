#include "fuzz/parser.hpp"

#include <cctype>
#include <charconv>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace fuzz {

std::string_view diag_kind_name(DiagKind kind) {
  switch (kind) {
    case DiagKind::Lex:
      return "lex error";
    case DiagKind::Syntax:
      return "syntax error";
    case DiagKind::Type:
      return "type error";
    case DiagKind::Sensitivity:
      return "sensitivity error";
    case DiagKind::Unbound:
      return "unbound";
  }
  return "error";
}

std::string Diagnostic::render(std::string_view file) const {
  std::ostringstream out;
  out << file << ':' << span.line << ':' << span.col << ": "
      << diag_kind_name(kind) << ": " << message;
  return out.str();
}

const TypePtr* Program::freevar_type(std::string_view name) const {
  for (const auto& [var, type] : freevars) {
    if (var == name) return &type;
  }
  return nullptr;
}

std::string format_real(double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

namespace {

enum class Tok {
  Ident,
  Decimal,
  KwType,
  KwVar,
  KwFun,
  KwFix,
  KwLet,
  KwIn,
  KwCase,
  KwOf,
  KwInl,
  KwInr,
  KwFst,
  KwSnd,
  KwFold,
  KwUnfold,
  KwReal,
  KwUnit,
  KwInf,
  Eq,
  Arrow,      // =>
  Colon,
  Lolli,      // -o
  Star,
  Amp,
  Plus,
  Bang,
  LBracket,
  RBracket,
  LParen,
  RParen,
  Comma,
  Lt,
  Gt,
  Pipe,
  End,
};

struct Token {
  Tok kind;
  Span span;
  std::string text;   // identifier name
  double number = 0;  // decimal payload
};

struct LexError {
  Span span;
  std::string message;
};

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  // Tokenizes the whole input; returns false and fills `error` on failure.
  bool run(std::vector<Token>& out, LexError& error) {
    while (true) {
      skip_trivia();
      Span span{line_, col_};
      if (pos_ >= text_.size()) {
        out.push_back({Tok::End, span, {}, 0});
        return true;
      }
      char c = text_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        out.push_back(lex_word(span));
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(c))) {
        Token tok;
        if (!lex_decimal(span, false, tok, error)) return false;
        out.push_back(tok);
        continue;
      }
      if (c == '-') {
        if (pos_ + 1 < text_.size() && text_[pos_ + 1] == 'o' &&
            !is_ident_char(pos_ + 2)) {
          advance(2);
          out.push_back({Tok::Lolli, span, {}, 0});
          continue;
        }
        if (pos_ + 1 < text_.size() &&
            std::isdigit(static_cast<unsigned char>(text_[pos_ + 1]))) {
          advance(1);
          Token tok;
          if (!lex_decimal(span, true, tok, error)) return false;
          out.push_back(tok);
          continue;
        }
        error = {span, "stray '-'"};
        return false;
      }
      Tok kind;
      switch (c) {
        case '=':
          if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '>') {
            advance(2);
            out.push_back({Tok::Arrow, span, {}, 0});
            continue;
          }
          kind = Tok::Eq;
          break;
        case ':': kind = Tok::Colon; break;
        case '*': kind = Tok::Star; break;
        case '&': kind = Tok::Amp; break;
        case '+': kind = Tok::Plus; break;
        case '!': kind = Tok::Bang; break;
        case '[': kind = Tok::LBracket; break;
        case ']': kind = Tok::RBracket; break;
        case '(': kind = Tok::LParen; break;
        case ')': kind = Tok::RParen; break;
        case ',': kind = Tok::Comma; break;
        case '<': kind = Tok::Lt; break;
        case '>': kind = Tok::Gt; break;
        case '|': kind = Tok::Pipe; break;
        default:
          error = {span, std::string("unexpected character '") + c + "'"};
          return false;
      }
      advance(1);
      out.push_back({kind, span, {}, 0});
    }
  }

 private:
  bool is_ident_char(std::size_t at) const {
    if (at >= text_.size()) return false;
    char c = text_[at];
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' ||
           c == '\'';
  }

  void advance(std::size_t n) {
    for (std::size_t i = 0; i < n && pos_ < text_.size(); ++i) {
      if (text_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
      ++pos_;
    }
  }

  void skip_trivia() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance(1);
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance(1);
      } else {
        break;
      }
    }
  }

  Token lex_word(Span span) {
    std::size_t start = pos_;
    while (is_ident_char(pos_)) advance(1);
    std::string word(text_.substr(start, pos_ - start));
    static const std::unordered_map<std::string_view, Tok> kKeywords = {
        {"type", Tok::KwType},     {"var", Tok::KwVar},
        {"fun", Tok::KwFun},       {"fix", Tok::KwFix},
        {"let", Tok::KwLet},       {"in", Tok::KwIn},
        {"case", Tok::KwCase},     {"of", Tok::KwOf},
        {"inl", Tok::KwInl},       {"inr", Tok::KwInr},
        {"fst", Tok::KwFst},       {"snd", Tok::KwSnd},
        {"fold", Tok::KwFold},     {"unfold", Tok::KwUnfold},
        {"real", Tok::KwReal},     {"unit", Tok::KwUnit},
        {"inf", Tok::KwInf},
    };
    auto it = kKeywords.find(word);
    if (it != kKeywords.end()) return {it->second, span, {}, 0};
    return {Tok::Ident, span, std::move(word), 0};
  }

  // `negative` means the '-' sign was already consumed.
  bool lex_decimal(Span span, bool negative, Token& out, LexError& error) {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      advance(1);
    }
    if (pos_ < text_.size() && text_[pos_] == '.') {
      if (pos_ + 1 >= text_.size() ||
          !std::isdigit(static_cast<unsigned char>(text_[pos_ + 1]))) {
        error = {span, "malformed decimal: digit expected after '.'"};
        return false;
      }
      advance(1);
      while (pos_ < text_.size() &&
             std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        advance(1);
      }
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t mark = pos_;
      advance(1);
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) {
        advance(1);
      }
      if (pos_ < text_.size() &&
          std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        while (pos_ < text_.size() &&
               std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
          advance(1);
        }
      } else {
        // Not an exponent after all (e.g. an identifier follows); back off.
        pos_ = mark;
      }
    }
    std::string_view digits = text_.substr(start, pos_ - start);
    double v = 0;
    auto [ptr, ec] = std::from_chars(digits.data(),
                                     digits.data() + digits.size(), v);
    if (ec != std::errc() || ptr != digits.data() + digits.size()) {
      error = {span, "malformed decimal literal"};
      return false;
    }
    out = {Tok::Decimal, span, {}, negative ? -v : v};
    return true;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

// Thrown internally and converted to the single diagnostic of ParseResult.
struct ParseError {
  Diagnostic diag;
};

[[noreturn]] void fail(Span span, DiagKind kind, std::string message) {
  throw ParseError{{span, kind, std::move(message)}};
}

constexpr int kMaxNestingDepth = 500;

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  Program parse() {
    Program program;
    while (at(Tok::KwType)) {
      Span span = peek().span;
      next();
      std::string name = expect_ident("type name");
      expect(Tok::Eq, "'='");
      TypePtr type = parse_type();
      if (!program.typedefs.define(name, std::move(type))) {
        fail(span, DiagKind::Syntax, "duplicate type definition '" + name + "'");
      }
    }
    std::unordered_set<std::string> declared;
    while (at(Tok::KwVar)) {
      Span span = peek().span;
      next();
      std::string name = expect_ident("variable name");
      expect(Tok::Colon, "':'");
      TypePtr type = parse_type();
      if (!declared.insert(name).second) {
        fail(span, DiagKind::Syntax,
             "duplicate variable declaration '" + name + "'");
      }
      program.freevars.emplace_back(std::move(name), std::move(type));
    }
    program.main = parse_expr();
    if (!at(Tok::End)) {
      fail(peek().span, DiagKind::Syntax,
           "unexpected input after main expression");
    }
    // Identifier references may be forward; resolve once the full definition
    // environment is known.
    for (const auto& [name, span] : pending_idents_) {
      if (!program.typedefs.contains(name)) {
        fail(span, DiagKind::Unbound, "unbound type identifier '" + name + "'");
      }
    }
    return program;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    std::size_t i = pos_ + ahead;
    return i < tokens_.size() ? tokens_[i] : tokens_.back();
  }
  bool at(Tok kind) const { return peek().kind == kind; }
  const Token& next() { return tokens_[pos_++]; }
  bool accept(Tok kind) {
    if (!at(kind)) return false;
    ++pos_;
    return true;
  }
  const Token& expect(Tok kind, std::string_view what) {
    if (!at(kind)) {
      fail(peek().span, DiagKind::Syntax,
           "expected " + std::string(what));
    }
    return next();
  }
  std::string expect_ident(std::string_view what) {
    if (!at(Tok::Ident)) {
      fail(peek().span, DiagKind::Syntax, "expected " + std::string(what));
    }
    return next().text;
  }

  // Recursive descent tracks its depth so absurdly nested input fails with
  // a diagnostic instead of exhausting the stack.
  class DepthGuard {
   public:
    explicit DepthGuard(Parser& parser) : parser_(parser) {
      if (++parser_.depth_ > kMaxNestingDepth) {
        fail(parser_.peek().span, DiagKind::Syntax, "input nested too deeply");
      }
    }
    ~DepthGuard() { --parser_.depth_; }
    DepthGuard(const DepthGuard&) = delete;
    DepthGuard& operator=(const DepthGuard&) = delete;

   private:
    Parser& parser_;
  };

  ExtReal parse_sens() {
    if (accept(Tok::KwInf)) return ExtReal::infinity();
    if (!at(Tok::Decimal)) {
      fail(peek().span, DiagKind::Syntax, "expected sensitivity (decimal or 'inf')");
    }
    const Token& tok = next();
    if (tok.number < 0) {
      fail(tok.span, DiagKind::Syntax, "sensitivity must be nonnegative");
    }
    return ExtReal(tok.number);
  }

  // type := sum | sum "-o" type; products bind tighter than sums, and a
  // chain may not mix * with & without parentheses.
  TypePtr parse_type() {
    TypePtr left = parse_sum_type();
    if (accept(Tok::Lolli)) {
      return type_lolli(std::move(left), parse_type());
    }
    return left;
  }

  TypePtr parse_sum_type() {
    TypePtr acc = parse_prod_type();
    while (accept(Tok::Plus)) {
      acc = type_sum(std::move(acc), parse_prod_type());
    }
    return acc;
  }

  TypePtr parse_prod_type() {
    TypePtr acc = parse_atype();
    if (peek().kind != Tok::Star && peek().kind != Tok::Amp) return acc;
    Tok op = peek().kind;
    while (accept(op)) {
      TypePtr rhs = parse_atype();
      acc = op == Tok::Star ? type_tensor(std::move(acc), std::move(rhs))
                            : type_with(std::move(acc), std::move(rhs));
    }
    if (peek().kind == Tok::Star || peek().kind == Tok::Amp) {
      fail(peek().span, DiagKind::Syntax,
           "mixed * and & need parentheses");
    }
    return acc;
  }

  TypePtr parse_atype() {
    DepthGuard guard(*this);
    const Token& tok = peek();
    switch (tok.kind) {
      case Tok::KwReal:
        next();
        return type_real();
      case Tok::KwUnit:
        next();
        return type_unit();
      case Tok::Ident: {
        next();
        pending_idents_.emplace_back(tok.text, tok.span);
        return type_ident(tok.text);
      }
      case Tok::LParen: {
        next();
        TypePtr inner = parse_type();
        expect(Tok::RParen, "')'");
        return inner;
      }
      case Tok::Bang: {
        next();
        expect(Tok::LBracket, "'['");
        ExtReal index = parse_sens();
        expect(Tok::RBracket, "']'");
        return type_bang(index, parse_atype());
      }
      default:
        fail(tok.span, DiagKind::Syntax, "expected a type");
    }
  }

  static bool is_prefix_form(Tok t) {
    return t == Tok::KwFun || t == Tok::KwFix || t == Tok::KwLet ||
           t == Tok::KwCase;
  }

  static bool starts_atom(Tok t) {
    switch (t) {
      case Tok::Ident:
      case Tok::Decimal:
      case Tok::LParen:
      case Tok::Lt:
      case Tok::KwFst:
      case Tok::KwSnd:
      case Tok::Bang:
      case Tok::KwInl:
      case Tok::KwInr:
      case Tok::KwFold:
      case Tok::KwUnfold:
        return true;
      default:
        return false;
    }
  }

  TermPtr parse_expr() {
    DepthGuard guard(*this);
    if (is_prefix_form(peek().kind)) return parse_prefix();
    TermPtr lhs = parse_app_chain();
    while (at(Tok::Plus)) {
      Span span = next().span;
      TermPtr rhs =
          is_prefix_form(peek().kind) ? parse_prefix() : parse_app_chain();
      lhs = make_term(PlusE{std::move(lhs), std::move(rhs)}, span);
    }
    return lhs;
  }

  TermPtr parse_prefix() {
    const Token& tok = peek();
    switch (tok.kind) {
      case Tok::KwFun: {
        Span span = next().span;
        expect(Tok::LParen, "'('");
        std::string param = expect_ident("parameter name");
        expect(Tok::Colon, "':'");
        TypePtr annot = parse_type();
        expect(Tok::RParen, "')'");
        expect(Tok::Arrow, "'=>'");
        TermPtr body = parse_expr();
        return make_term(LamE{std::move(param), std::move(annot),
                              std::move(body)},
                         span);
      }
      case Tok::KwFix: {
        Span span = next().span;
        expect(Tok::LBracket, "'['");
        ExtReal index = parse_sens();
        expect(Tok::RBracket, "']'");
        std::string self = expect_ident("recursive name");
        expect(Tok::LParen, "'('");
        std::string param = expect_ident("parameter name");
        if (param == self) {
          fail(span, DiagKind::Syntax,
               "fix parameter shadows the recursive name '" + self + "'");
        }
        expect(Tok::Colon, "':'");
        TypePtr annot_in = parse_type();
        expect(Tok::RParen, "')'");
        expect(Tok::Colon, "':'");
        TypePtr annot_out = parse_type();
        expect(Tok::Arrow, "'=>'");
        TermPtr body = parse_expr();
        return make_term(FixE{index, std::move(self), std::move(param),
                              std::move(annot_in), std::move(annot_out),
                              std::move(body)},
                         span);
      }
      case Tok::KwLet: {
        Span span = next().span;
        if (accept(Tok::Bang)) {
          std::string name = expect_ident("binder name");
          expect(Tok::Eq, "'='");
          TermPtr boxed = parse_expr();
          expect(Tok::KwIn, "'in'");
          TermPtr body = parse_expr();
          return make_term(LetBoxE{std::move(name), std::move(boxed),
                                   std::move(body)},
                           span);
        }
        expect(Tok::LParen, "'('");
        std::string first = expect_ident("binder name");
        expect(Tok::Comma, "','");
        std::string second = expect_ident("binder name");
        if (first == second) {
          fail(span, DiagKind::Syntax, "duplicate binder '" + first + "'");
        }
        expect(Tok::RParen, "')'");
        expect(Tok::Eq, "'='");
        TermPtr pair = parse_expr();
        expect(Tok::KwIn, "'in'");
        TermPtr body = parse_expr();
        return make_term(LetPairE{std::move(first), std::move(second),
                                  std::move(pair), std::move(body)},
                         span);
      }
      case Tok::KwCase: {
        Span span = next().span;
        TermPtr scrutinee = parse_expr();
        expect(Tok::KwOf, "'of'");
        expect(Tok::KwInl, "'inl'");
        std::string left_name = expect_ident("binder name");
        expect(Tok::Arrow, "'=>'");
        TermPtr left_body = parse_expr();
        expect(Tok::Pipe, "'|'");
        expect(Tok::KwInr, "'inr'");
        std::string right_name = expect_ident("binder name");
        expect(Tok::Arrow, "'=>'");
        TermPtr right_body = parse_expr();
        return make_term(CaseE{std::move(scrutinee), std::move(left_name),
                               std::move(left_body), std::move(right_name),
                               std::move(right_body)},
                         span);
      }
      default:
        fail(tok.span, DiagKind::Syntax, "expected an expression");
    }
  }

  TermPtr parse_app_chain() {
    TermPtr head = parse_atom();
    while (starts_atom(peek().kind)) {
      Span span = head->span;
      TermPtr arg = parse_atom();
      head = make_term(AppE{std::move(head), std::move(arg)}, span);
    }
    return head;
  }

  TermPtr parse_atom() {
    DepthGuard guard(*this);
    const Token& tok = peek();
    switch (tok.kind) {
      case Tok::Ident:
        next();
        return make_term(VarE{tok.text}, tok.span);
      case Tok::Decimal:
        next();
        return make_term(ConstE{tok.number}, tok.span);
      case Tok::LParen: {
        Span span = next().span;
        if (accept(Tok::RParen)) return make_term(UnitE{}, span);
        TermPtr first = parse_expr();
        if (accept(Tok::Comma)) {
          TermPtr second = parse_expr();
          expect(Tok::RParen, "')'");
          return make_term(TensorPairE{std::move(first), std::move(second)},
                           span);
        }
        expect(Tok::RParen, "')'");
        return first;
      }
      case Tok::Lt: {
        Span span = next().span;
        TermPtr first = parse_expr();
        expect(Tok::Comma, "','");
        TermPtr second = parse_expr();
        expect(Tok::Gt, "'>'");
        return make_term(WithPairE{std::move(first), std::move(second)}, span);
      }
      case Tok::KwFst:
      case Tok::KwSnd: {
        Span span = next().span;
        int index = tok.kind == Tok::KwFst ? 1 : 2;
        return make_term(ProjE{index, parse_atom()}, span);
      }
      case Tok::Bang: {
        Span span = next().span;
        expect(Tok::LBracket, "'['");
        ExtReal index = parse_sens();
        expect(Tok::RBracket, "']'");
        return make_term(BoxE{index, parse_atom()}, span);
      }
      case Tok::KwInl:
      case Tok::KwInr: {
        Span span = next().span;
        expect(Tok::LBracket, "'['");
        TypePtr other = parse_type();
        expect(Tok::RBracket, "']'");
        return make_term(InjE{tok.kind == Tok::KwInl, std::move(other),
                              parse_atom()},
                         span);
      }
      case Tok::KwFold: {
        Span span = next().span;
        expect(Tok::LBracket, "'['");
        const Token& name = peek();
        std::string ident = expect_ident("type identifier");
        pending_idents_.emplace_back(ident, name.span);
        expect(Tok::RBracket, "']'");
        return make_term(FoldE{std::move(ident), parse_atom()}, span);
      }
      case Tok::KwUnfold: {
        Span span = next().span;
        return make_term(UnfoldE{parse_atom()}, span);
      }
      default:
        fail(tok.span, DiagKind::Syntax, "expected an expression");
    }
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  int depth_ = 0;
  std::vector<std::pair<std::string, Span>> pending_idents_;
};

}  // namespace

ParseResult parse_program(std::string_view text) {
  std::vector<Token> tokens;
  LexError lex_error;
  if (!Lexer(text).run(tokens, lex_error)) {
    return {std::nullopt,
            {{lex_error.span, DiagKind::Lex, lex_error.message}}};
  }
  try {
    Parser parser(std::move(tokens));
    return {parser.parse(), {}};
  } catch (const ParseError& e) {
    return {std::nullopt, {e.diag}};
  }
}

// ---------------------------------------------------------------------------
// Pretty printer

namespace {

// Type levels: 0 = any, 1 = sum operand, 2 = product operand, 3 = atom.
int type_level(const TypeExpr& t) {
  switch (t.kind) {
    case TypeKind::Lolli:
      return 0;
    case TypeKind::Sum:
      return 1;
    case TypeKind::Tensor:
    case TypeKind::With:
      return 2;
    default:
      return 3;
  }
}

void print_type(std::ostream& out, const TypeExpr& t, int required) {
  if (type_level(t) < required) {
    out << '(';
    print_type(out, t, 0);
    out << ')';
    return;
  }
  switch (t.kind) {
    case TypeKind::Real:
      out << "real";
      break;
    case TypeKind::Unit:
      out << "unit";
      break;
    case TypeKind::Ident:
      out << t.name;
      break;
    case TypeKind::Lolli:
      print_type(out, *t.left, 1);
      out << " -o ";
      print_type(out, *t.right, 0);
      break;
    case TypeKind::Sum:
      print_type(out, *t.left, 1);
      out << " + ";
      print_type(out, *t.right, 2);
      break;
    case TypeKind::Tensor:
    case TypeKind::With: {
      const char* op = t.kind == TypeKind::Tensor ? " * " : " & ";
      // Same-operator chains associate left; the other product operator is
      // parenthesized.
      if (t.left->kind == t.kind) {
        print_type(out, *t.left, 2);
      } else {
        print_type(out, *t.left, 3);
      }
      out << op;
      print_type(out, *t.right, 3);
      break;
    }
    case TypeKind::Bang:
      out << "![" << t.index.to_string() << "] ";
      print_type(out, *t.left, 3);
      break;
  }
}

// Term levels: 0 = any, 1 = plus operand, 2 = application head, 3 = atom.
int term_level(const Term& t) {
  return std::visit(
      [](const auto& node) {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, LamE> || std::is_same_v<T, FixE> ||
                      std::is_same_v<T, LetPairE> ||
                      std::is_same_v<T, LetBoxE> || std::is_same_v<T, CaseE>) {
          return 0;
        } else if constexpr (std::is_same_v<T, PlusE>) {
          return 1;
        } else if constexpr (std::is_same_v<T, AppE>) {
          return 2;
        } else {
          return 3;
        }
      },
      t.node);
}

// True if printing `t` unparenthesized leaves a trailing case arm open, so a
// following '|' would attach to the wrong case.
bool swallows_pipe(const Term& t) {
  return std::visit(
      [](const auto& node) {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, CaseE>) {
          return true;
        } else if constexpr (std::is_same_v<T, LamE> ||
                             std::is_same_v<T, FixE>) {
          return swallows_pipe(*node.body);
        } else if constexpr (std::is_same_v<T, LetPairE> ||
                             std::is_same_v<T, LetBoxE>) {
          return swallows_pipe(*node.body);
        } else {
          return false;
        }
      },
      t.node);
}

void print_term(std::ostream& out, const Term& t, int required);

void print_paren(std::ostream& out, const Term& t) {
  out << '(';
  print_term(out, t, 0);
  out << ')';
}

void print_term(std::ostream& out, const Term& t, int required) {
  if (term_level(t) < required) {
    print_paren(out, t);
    return;
  }
  std::visit(
      [&](const auto& node) {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, VarE>) {
          out << node.name;
        } else if constexpr (std::is_same_v<T, ConstE>) {
          out << format_real(node.value);
        } else if constexpr (std::is_same_v<T, UnitE>) {
          out << "()";
        } else if constexpr (std::is_same_v<T, PlusE>) {
          print_term(out, *node.lhs, 1);
          out << " + ";
          print_term(out, *node.rhs, 2);
        } else if constexpr (std::is_same_v<T, LamE>) {
          out << "fun (" << node.param << " : ";
          print_type(out, *node.annot, 0);
          out << ") => ";
          print_term(out, *node.body, 0);
        } else if constexpr (std::is_same_v<T, FixE>) {
          out << "fix[" << node.index.to_string() << "] " << node.self_name
              << " (" << node.param << " : ";
          print_type(out, *node.annot_in, 0);
          out << ") : ";
          print_type(out, *node.annot_out, 0);
          out << " => ";
          print_term(out, *node.body, 0);
        } else if constexpr (std::is_same_v<T, AppE>) {
          print_term(out, *node.fn, 2);
          out << ' ';
          print_term(out, *node.arg, 3);
        } else if constexpr (std::is_same_v<T, TensorPairE>) {
          out << '(';
          print_term(out, *node.first, 0);
          out << ", ";
          print_term(out, *node.second, 0);
          out << ')';
        } else if constexpr (std::is_same_v<T, WithPairE>) {
          out << '<';
          print_term(out, *node.first, 0);
          out << ", ";
          print_term(out, *node.second, 0);
          out << '>';
        } else if constexpr (std::is_same_v<T, LetPairE>) {
          out << "let (" << node.first_name << ", " << node.second_name
              << ") = ";
          print_term(out, *node.pair, 0);
          out << " in ";
          print_term(out, *node.body, 0);
        } else if constexpr (std::is_same_v<T, ProjE>) {
          out << (node.index == 1 ? "fst " : "snd ");
          print_term(out, *node.pair, 3);
        } else if constexpr (std::is_same_v<T, BoxE>) {
          out << "![" << node.index.to_string() << "] ";
          print_term(out, *node.body, 3);
        } else if constexpr (std::is_same_v<T, LetBoxE>) {
          out << "let !" << node.name << " = ";
          print_term(out, *node.boxed, 0);
          out << " in ";
          print_term(out, *node.body, 0);
        } else if constexpr (std::is_same_v<T, InjE>) {
          out << (node.left ? "inl[" : "inr[");
          print_type(out, *node.other, 0);
          out << "] ";
          print_term(out, *node.body, 3);
        } else if constexpr (std::is_same_v<T, CaseE>) {
          out << "case ";
          print_term(out, *node.scrutinee, 0);
          out << " of inl " << node.left_name << " => ";
          if (swallows_pipe(*node.left_body)) {
            print_paren(out, *node.left_body);
          } else {
            print_term(out, *node.left_body, 0);
          }
          out << " | inr " << node.right_name << " => ";
          print_term(out, *node.right_body, 0);
        } else if constexpr (std::is_same_v<T, FoldE>) {
          out << "fold[" << node.ident << "] ";
          print_term(out, *node.body, 3);
        } else if constexpr (std::is_same_v<T, UnfoldE>) {
          out << "unfold ";
          print_term(out, *node.body, 3);
        }
      },
      t.node);
}

}  // namespace

std::string pretty_type(const TypeExpr& type) {
  std::ostringstream out;
  print_type(out, type, 0);
  return out.str();
}

std::string pretty_type(const TypePtr& type) { return pretty_type(*type); }

std::string pretty_term(const Term& term) {
  std::ostringstream out;
  print_term(out, term, 0);
  return out.str();
}

std::string pretty(const Program& program) {
  std::ostringstream out;
  for (const auto& [name, type] : program.typedefs.entries()) {
    out << "type " << name << " = ";
    print_type(out, *type, 0);
    out << '\n';
  }
  for (const auto& [name, type] : program.freevars) {
    out << "var " << name << " : ";
    print_type(out, *type, 0);
    out << '\n';
  }
  print_term(out, *program.main, 0);
  out << '\n';
  return out.str();
}

bool program_equal(const Program& a, const Program& b) {
  const auto& da = a.typedefs.entries();
  const auto& db = b.typedefs.entries();
  if (da.size() != db.size()) return false;
  for (std::size_t i = 0; i < da.size(); ++i) {
    if (da[i].first != db[i].first || !type_equal(da[i].second, db[i].second))
      return false;
  }
  if (a.freevars.size() != b.freevars.size()) return false;
  for (std::size_t i = 0; i < a.freevars.size(); ++i) {
    if (a.freevars[i].first != b.freevars[i].first ||
        !type_equal(a.freevars[i].second, b.freevars[i].second))
      return false;
  }
  return term_equal(a.main, b.main);
}

// ---------------------------------------------------------------------------
// Value literals

namespace {

class ValueReader {
 public:
  explicit ValueReader(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  ValuePtr read() {
    ValuePtr v = read_value();
    if (peek().kind != Tok::End) {
      fail(peek().span, DiagKind::Syntax, "trailing input after value");
    }
    return v;
  }

 private:
  const Token& peek() const {
    return pos_ < tokens_.size() ? tokens_[pos_] : tokens_.back();
  }
  const Token& next() { return tokens_[pos_++]; }

  ValuePtr read_value() {
    const Token& tok = peek();
    switch (tok.kind) {
      case Tok::Decimal:
        next();
        return make_value(RealV{tok.number});
      case Tok::LParen: {
        next();
        if (peek().kind == Tok::RParen) {
          next();
          return make_value(UnitV{});
        }
        ValuePtr first = read_value();
        if (peek().kind != Tok::Comma) {
          fail(peek().span, DiagKind::Syntax, "expected ','");
        }
        next();
        ValuePtr second = read_value();
        if (peek().kind != Tok::RParen) {
          fail(peek().span, DiagKind::Syntax, "expected ')'");
        }
        next();
        return make_value(TensorV{std::move(first), std::move(second)});
      }
      case Tok::Lt: {
        next();
        ValuePtr first = read_value();
        if (peek().kind != Tok::Comma) {
          fail(peek().span, DiagKind::Syntax, "expected ','");
        }
        next();
        ValuePtr second = read_value();
        if (peek().kind != Tok::Gt) {
          fail(peek().span, DiagKind::Syntax, "expected '>'");
        }
        next();
        return make_value(WithV{std::move(first), std::move(second)});
      }
      case Tok::Bang:
        next();
        return make_value(BoxV{read_value()});
      case Tok::KwInl:
        next();
        return make_value(InjV{true, read_value()});
      case Tok::KwInr:
        next();
        return make_value(InjV{false, read_value()});
      case Tok::KwFold:
        next();
        return make_value(FoldV{read_value()});
      default:
        fail(tok.span, DiagKind::Syntax, "expected a value literal");
    }
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

}  // namespace

ValuePtr parse_value_literal(std::string_view text, std::string* error) {
  std::vector<Token> tokens;
  LexError lex_error;
  if (!Lexer(text).run(tokens, lex_error)) {
    if (error != nullptr) *error = lex_error.message;
    return nullptr;
  }
  try {
    return ValueReader(std::move(tokens)).read();
  } catch (const ParseError& e) {
    if (error != nullptr) *error = e.diag.message;
    return nullptr;
  }
}

std::string value_to_string(const ValuePtr& value) {
  return std::visit(
      [](const auto& node) -> std::string {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, RealV>) {
          return format_real(node.value);
        } else if constexpr (std::is_same_v<T, UnitV>) {
          return "()";
        } else if constexpr (std::is_same_v<T, TensorV>) {
          return "(" + value_to_string(node.first) + ", " +
                 value_to_string(node.second) + ")";
        } else if constexpr (std::is_same_v<T, WithV>) {
          return "<" + value_to_string(node.first) + ", " +
                 value_to_string(node.second) + ">";
        } else if constexpr (std::is_same_v<T, BoxV>) {
          return "!" + value_to_string(node.body);
        } else if constexpr (std::is_same_v<T, InjV>) {
          return (node.left ? "inl " : "inr ") + value_to_string(node.body);
        } else if constexpr (std::is_same_v<T, FoldV>) {
          return "fold " + value_to_string(node.body);
        } else {
          return "<closure>";
        }
      },
      value->node);
}

}  // namespace fuzz
