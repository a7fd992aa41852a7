#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "rtlmend/source.hpp"

namespace rtlmend {

enum class TokenKind { kIdent, kKeyword, kNumber, kPunct, kEof };

struct Token {
  TokenKind kind = TokenKind::kEof;
  std::string_view text;
  Span span;
  std::uint32_t col = 1;

  bool is(std::string_view s) const {
    return (kind == TokenKind::kPunct || kind == TokenKind::kKeyword) && text == s;
  }
};

/// Keywords of the accepted subset.
bool is_keyword(std::string_view word);
/// Verilog keywords outside the subset; reported as unsupported constructs.
bool is_unsupported_keyword(std::string_view word);

struct LexResult {
  std::vector<Token> tokens;  // always terminated by kEof
  std::vector<Diagnostic> diagnostics;
};

/// Tokenizes `src`. Token views point into `src.text()`.
LexResult lex(const SourceFile& src);

/// True when the text tokenizes without lexical errors.
bool relexes(std::string_view text);

}  // namespace rtlmend
