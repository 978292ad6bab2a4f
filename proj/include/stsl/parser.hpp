#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "stsl/ast.hpp"

namespace stsl {

enum class TokenKind { identifier, number, plus, lparen, rparen, comma, equals, question, end };

std::string_view to_string(TokenKind kind);

struct Token {
  TokenKind kind = TokenKind::end;
  std::string lexeme;
  int line = 1;
  int col = 1;
  friend bool operator==(const Token&, const Token&) = default;
};

struct Diagnostic {
  int line = 1;
  int col = 1;
  std::string message;
};

/// Syntax, lexical or validation failure with a 1-based source position.
/// Validation failures carry one diagnostic per violation; the first one
/// determines line/col and what().
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string message, int line, int col, std::vector<TokenKind> expected = {});
  ParseError(std::vector<Diagnostic> diagnostics);

  int line() const { return line_; }
  int col() const { return col_; }
  const std::string& message() const { return message_; }
  const std::vector<TokenKind>& expected() const { return expected_; }
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

 private:
  std::string message_;
  int line_;
  int col_;
  std::vector<TokenKind> expected_;
  std::vector<Diagnostic> diagnostics_;
};

/// Splits DSL text into tokens, skipping whitespace and '#' comments. The
/// result always ends with an `end` token.
std::vector<Token> tokenize(std::string_view src);

/// Parses and validates one model expression.
ModelExpr parse(std::string_view src);
ModelExpr parse(std::string_view src, const FunctionRegistry& registry);

}  // namespace stsl
