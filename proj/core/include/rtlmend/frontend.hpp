#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rtlmend/ast.hpp"
#include "rtlmend/source.hpp"

namespace rtlmend {

struct ParseResult {
  std::optional<Design> design;  // set iff diagnostics has no errors
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return design.has_value(); }
};

/// Parses and checks one source file against the supported Verilog subset.
ParseResult parse(std::shared_ptr<const SourceFile> src);
ParseResult parse(const SourceFile& src);
ParseResult parse_text(std::string text, std::string path = "<memory>");

/// Deterministic pretty-printer. parse(print(d)) is structurally equal to d.
std::string print(const Design& design);
std::string print(const ModuleDecl& module);
std::string print(const Expr& expr);
std::string print(const Stmt& stmt, int indent = 0);

/// Parses a literal token ("8'hFF", "3", "'b1x"); nullopt when malformed.
std::optional<Literal> parse_literal(std::string_view text, std::string* error = nullptr);

}  // namespace rtlmend
