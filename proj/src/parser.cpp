#include "stsl/parser.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <utility>

#include "stsl/blocks.hpp"

namespace stsl {
namespace {

bool is_ident_start(char c) { return c >= 'a' && c <= 'z'; }
bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9') || c == '_' || c == '-'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_blank();
      if (pos_ >= src_.size()) break;
      out.push_back(next());
    }
    out.push_back(end_token());
    return out;
  }

 private:
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_blank() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else {
        break;
      }
    }
  }

  Token end_token() const {
    // Point at the last character so the position stays inside the input.
    int line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < src_.size(); ++i) {
      if (src_[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    return {TokenKind::end, "", line, col};
  }

  Token next() {
    const int line = line_, col = col_;
    const std::size_t start = pos_;
    const char c = src_[pos_];
    auto single = [&](TokenKind kind) {
      advance();
      return Token{kind, std::string(1, c), line, col};
    };
    switch (c) {
      case '+': return single(TokenKind::plus);
      case '(': return single(TokenKind::lparen);
      case ')': return single(TokenKind::rparen);
      case ',': return single(TokenKind::comma);
      case '=': return single(TokenKind::equals);
      case '?': return single(TokenKind::question);
      default: break;
    }
    if (is_ident_start(c)) {
      while (pos_ < src_.size() && is_ident_char(src_[pos_])) advance();
      return {TokenKind::identifier, std::string(src_.substr(start, pos_ - start)), line, col};
    }
    if (c == '-' || c == '.' || is_digit(c)) return number(line, col);
    throw ParseError(std::string("unexpected character '") + c + "'", line, col);
  }

  Token number(int line, int col) {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < src_.size() && is_digit(src_[pos_])) {
        advance();
        ++n;
      }
      return n;
    };
    if (src_[pos_] == '-') advance();
    std::size_t mantissa = digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      advance();
      mantissa += digits();
    }
    if (mantissa == 0) throw ParseError("malformed number", line, col);
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      advance();
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) advance();
      if (digits() == 0) throw ParseError("malformed number exponent", line, col);
    }
    std::string lexeme(src_.substr(start, pos_ - start));
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(lexeme.data(), lexeme.data() + lexeme.size(), value);
    if (ec != std::errc{} || ptr != lexeme.data() + lexeme.size() || !std::isfinite(value)) {
      throw ParseError("number out of range '" + lexeme + "'", line, col);
    }
    return {TokenKind::number, std::move(lexeme), line, col};
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  ModelExpr top() {
    ModelExpr m = model("", "");
    expect(TokenKind::end, {TokenKind::plus, TokenKind::end});
    return m;
  }

  const std::map<std::string, std::pair<int, int>>& positions() const { return positions_; }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)];
  }

  const Token& take() {
    const Token& t = tokens_[pos_];
    if (pos_ + 1 < tokens_.size()) ++pos_;
    return t;
  }

  [[noreturn]] void fail(const Token& at, std::vector<TokenKind> expected) const {
    std::string msg = "expected ";
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (i > 0) msg += i + 1 == expected.size() ? " or " : ", ";
      msg += to_string(expected[i]);
    }
    msg += at.kind == TokenKind::end ? " before end of input" : ", found '" + at.lexeme + "'";
    throw ParseError(msg, at.line, at.col, std::move(expected));
  }

  const Token& expect(TokenKind kind, std::vector<TokenKind> expected = {}) {
    if (peek().kind != kind) fail(peek(), expected.empty() ? std::vector{kind} : std::move(expected));
    return take();
  }

  ModelExpr model(const std::string& parent, std::string_view slot) {
    ModelExpr m;
    m.terms.push_back(term(term_path(parent, slot, 0)));
    while (peek().kind == TokenKind::plus) {
      take();
      m.terms.push_back(term(term_path(parent, slot, m.terms.size())));
    }
    return m;
  }

  BlockExpr term(const std::string& path) {
    const Token& name = expect(TokenKind::identifier);
    positions_.emplace(path, std::pair{name.line, name.col});
    if (name.lexeme == "cp") {
      expect(TokenKind::lparen);
      ModelExpr left = model(path, "left");
      expect(TokenKind::comma, {TokenKind::plus, TokenKind::comma});
      ModelExpr right = model(path, "right");
      expect(TokenKind::rparen, {TokenKind::plus, TokenKind::rparen});
      return changepoint(std::move(left), std::move(right));
    }
    const auto kind = block_kind_from_name(name.lexeme);
    if (!kind) throw ParseError("unknown block kind '" + name.lexeme + "'", name.line, name.col);
    expect(TokenKind::lparen);
    ParamMap params;
    if (peek().kind != TokenKind::rparen) {
      while (true) {
        const Token& arg = expect(TokenKind::identifier, {TokenKind::identifier, TokenKind::rparen});
        expect(TokenKind::equals);
        if (params.contains(arg.lexeme)) {
          throw ParseError("duplicate parameter '" + arg.lexeme + "'", arg.line, arg.col);
        }
        const std::string arg_name = arg.lexeme;
        params.emplace(arg_name, value(path, arg_name));
        if (peek().kind != TokenKind::comma) break;
        take();
      }
    }
    expect(TokenKind::rparen, {TokenKind::comma, TokenKind::rparen});
    return block(*kind, std::move(params));
  }

  ParamValue value(const std::string& path, const std::string& slot) {
    const Token& t = peek();
    switch (t.kind) {
      case TokenKind::number: {
        take();
        double v = 0.0;
        std::from_chars(t.lexeme.data(), t.lexeme.data() + t.lexeme.size(), v);
        return Literal{v};
      }
      case TokenKind::question:
        take();
        return PriorDraw{};
      case TokenKind::identifier:
        if (peek(1).kind == TokenKind::lparen) return submodel(model(path, slot));
        return NamedFunction{take().lexeme};
      default:
        fail(t, {TokenKind::number, TokenKind::question, TokenKind::identifier});
    }
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  std::map<std::string, std::pair<int, int>> positions_;
};

}  // namespace

std::string_view to_string(TokenKind kind) {
  switch (kind) {
    case TokenKind::identifier: return "identifier";
    case TokenKind::number: return "number";
    case TokenKind::plus: return "'+'";
    case TokenKind::lparen: return "'('";
    case TokenKind::rparen: return "')'";
    case TokenKind::comma: return "','";
    case TokenKind::equals: return "'='";
    case TokenKind::question: return "'?'";
    case TokenKind::end: return "end of input";
  }
  return "?";
}

ParseError::ParseError(std::string message, int line, int col, std::vector<TokenKind> expected)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(col) + ": " + message),
      message_(std::move(message)),
      line_(line),
      col_(col),
      expected_(std::move(expected)),
      diagnostics_{{line, col, message_}} {}

ParseError::ParseError(std::vector<Diagnostic> diagnostics)
    : ParseError(diagnostics.at(0).message, diagnostics.at(0).line, diagnostics.at(0).col) {
  diagnostics_ = std::move(diagnostics);
}

std::vector<Token> tokenize(std::string_view src) { return Lexer(src).run(); }

ModelExpr parse(std::string_view src) { return parse(src, FunctionRegistry::builtin()); }

ModelExpr parse(std::string_view src, const FunctionRegistry& registry) {
  Parser parser(tokenize(src));
  ModelExpr m = parser.top();
  const auto violations = validate(m, registry);
  if (violations.empty()) return m;
  std::vector<Diagnostic> diagnostics;
  for (const Violation& v : violations) {
    auto [line, col] = std::pair{1, 1};
    if (const auto it = parser.positions().find(v.path); it != parser.positions().end()) {
      std::tie(line, col) = it->second;
    }
    diagnostics.push_back({line, col, v.message});
  }
  throw ParseError(std::move(diagnostics));
}

}  // namespace stsl
