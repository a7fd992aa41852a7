#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace rtlmend {

/// Byte range [begin, end) in a source buffer plus the 1-based lines it covers.
struct Span {
  std::uint32_t begin = 0;
  std::uint32_t end = 0;
  std::uint32_t line = 0;
  std::uint32_t end_line = 0;

  bool valid() const { return line != 0; }
  static Span cover(const Span& a, const Span& b);
};

struct LineCol {
  std::uint32_t line = 1;
  std::uint32_t col = 1;
};

/// A source buffer with a line index for offset -> (line, column) lookup.
class SourceFile {
 public:
  SourceFile() = default;
  SourceFile(std::string path, std::string text);

  static SourceFile load(const std::string& path);

  const std::string& path() const { return path_; }
  const std::string& text() const { return text_; }

  LineCol locate(std::uint32_t offset) const;
  std::uint32_t line_count() const { return static_cast<std::uint32_t>(line_starts_.size()); }
  std::uint32_t line_start(std::uint32_t line) const;
  /// Text of a 1-based line without its terminating newline.
  std::string_view line_text(std::uint32_t line) const;

 private:
  std::string path_;
  std::string text_;
  std::vector<std::uint32_t> line_starts_;
};

enum class Severity { kError, kWarning, kNote };

const char* to_string(Severity s);

/// Diagnostic shared by the frontend, elaboration and lint.
struct Diagnostic {
  Severity severity = Severity::kError;
  std::uint32_t line = 0;
  std::uint32_t col = 0;
  std::string code;
  std::string message;

  bool operator==(const Diagnostic&) const = default;
};

/// One JSON object per line: {"severity","line","col","code","message"}.
std::string to_json_line(const Diagnostic& d);
/// "path:line:col: severity: message [code]"
std::string to_human(const Diagnostic& d, std::string_view path);

bool has_errors(const std::vector<Diagnostic>& diags);

}  // namespace rtlmend
