#include "rtlmend/lexer.hpp"

#include <array>
#include <cctype>
#include <cstring>

namespace rtlmend {
namespace {

constexpr std::array<std::string_view, 20> kKeywords = {
    "module", "endmodule", "input",   "output", "wire",  "reg", "integer",
    "assign", "always",    "posedge", "negedge", "or",   "begin", "end",
    "if",     "else",      "case",    "endcase", "default", "for",
};

constexpr std::array<std::string_view, 26> kUnsupported = {
    "generate", "endgenerate", "genvar",   "task",    "endtask", "function", "endfunction",
    "initial",  "parameter",   "localparam", "inout", "signed",  "casez",    "casex",
    "while",    "repeat",      "forever",  "wait",    "fork",    "join",     "tri",
    "supply0",  "supply1",     "real",     "time",    "defparam",
};

// Longest first so that greedy matching works.
constexpr std::array<std::string_view, 33> kPuncts = {
    "<<<", ">>>", "===", "!==", "<=", ">=", "==", "!=", "&&", "||", "<<",
    ">>",  "~&",  "~|",  "~^",  "(",  ")",  "[",  "]",  "{",  "}",  ";",
    ",",   ".",   ":",   "@",   "#",  "=",  "+",  "-",  "*",  "/",  "%",
};
constexpr std::string_view kSingle = "<>!~&|^?";

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

}  // namespace

bool is_keyword(std::string_view word) {
  for (auto k : kKeywords)
    if (k == word) return true;
  return false;
}

bool is_unsupported_keyword(std::string_view word) {
  for (auto k : kUnsupported)
    if (k == word) return true;
  return false;
}

LexResult lex(const SourceFile& src) {
  LexResult out;
  const std::string& t = src.text();
  std::uint32_t i = 0;
  const auto n = static_cast<std::uint32_t>(t.size());

  auto make = [&](TokenKind kind, std::uint32_t b, std::uint32_t e) {
    Token tok;
    tok.kind = kind;
    tok.text = std::string_view(t).substr(b, e - b);
    LineCol lc = src.locate(b);
    tok.span = {b, e, lc.line, src.locate(e > b ? e - 1 : b).line};
    tok.col = lc.col;
    out.tokens.push_back(tok);
  };
  auto error = [&](std::uint32_t at, std::string code, std::string msg) {
    LineCol lc = src.locate(at);
    out.diagnostics.push_back({Severity::kError, lc.line, lc.col, std::move(code), std::move(msg)});
  };

  while (i < n) {
    char c = t[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '/' && i + 1 < n && t[i + 1] == '/') {
      while (i < n && t[i] != '\n') ++i;
      continue;
    }
    if (c == '/' && i + 1 < n && t[i + 1] == '*') {
      std::uint32_t start = i;
      i += 2;
      while (i + 1 < n && !(t[i] == '*' && t[i + 1] == '/')) ++i;
      if (i + 1 >= n) {
        error(start, "unterminated-comment", "unterminated block comment");
        i = n;
      } else {
        i += 2;
      }
      continue;
    }
    if (c == '`') {
      std::uint32_t b = i++;
      while (i < n && ident_char(t[i])) ++i;
      error(b, "unsupported",
            "compiler directive '" + t.substr(b, i - b) + "' is not supported");
      while (i < n && t[i] != '\n') ++i;
      continue;
    }
    if (c == '"') {
      std::uint32_t b = i++;
      while (i < n && t[i] != '"' && t[i] != '\n') ++i;
      if (i < n && t[i] == '"') ++i;
      error(b, "unsupported", "string literals are not supported");
      continue;
    }
    if (ident_start(c) || c == '\\') {
      std::uint32_t b = i++;
      while (i < n && ident_char(t[i])) ++i;
      std::string_view word = std::string_view(t).substr(b, i - b);
      make(is_keyword(word) ? TokenKind::kKeyword : TokenKind::kIdent, b, i);
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '\'') {
      // size? ' base digits  |  decimal
      std::uint32_t b = i;
      while (i < n && (std::isdigit(static_cast<unsigned char>(t[i])) || t[i] == '_')) ++i;
      std::uint32_t save = i;
      while (i < n && (t[i] == ' ' || t[i] == '\t')) ++i;
      if (i < n && t[i] == '\'') {
        ++i;
        if (i < n && (t[i] == 's' || t[i] == 'S')) ++i;
        if (i < n && std::strchr("bBoOdDhH", t[i]) != nullptr && t[i] != '\0') {
          ++i;
          while (i < n && (t[i] == ' ' || t[i] == '\t')) ++i;
          std::uint32_t digits = i;
          while (i < n && (std::isxdigit(static_cast<unsigned char>(t[i])) || t[i] == '_' ||
                           t[i] == 'x' || t[i] == 'X' || t[i] == 'z' || t[i] == 'Z' ||
                           t[i] == '?'))
            ++i;
          if (digits == i) error(b, "malformed-literal", "based literal has no digits");
        } else {
          error(b, "malformed-literal", "missing radix after apostrophe");
        }
      } else {
        i = save;
      }
      make(TokenKind::kNumber, b, i);
      continue;
    }
    bool matched = false;
    for (auto p : kPuncts) {
      if (t.compare(i, p.size(), p) == 0) {
        make(TokenKind::kPunct, i, i + static_cast<std::uint32_t>(p.size()));
        i += static_cast<std::uint32_t>(p.size());
        matched = true;
        break;
      }
    }
    if (matched) continue;
    if (kSingle.find(c) != std::string_view::npos) {
      make(TokenKind::kPunct, i, i + 1);
      ++i;
      continue;
    }
    error(i, "bad-char", std::string("unexpected character '") + c + "'");
    ++i;
  }
  Token eof;
  eof.kind = TokenKind::kEof;
  LineCol lc = src.locate(n);
  eof.span = {n, n, lc.line, lc.line};
  eof.col = lc.col;
  out.tokens.push_back(eof);
  return out;
}

bool relexes(std::string_view text) {
  SourceFile f("<patched>", std::string(text));
  return lex(f).diagnostics.empty();
}

}  // namespace rtlmend
