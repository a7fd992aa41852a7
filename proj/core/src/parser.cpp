#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <stdexcept>

#include "rtlmend/frontend.hpp"
#include "rtlmend/lexer.hpp"

namespace rtlmend {

std::optional<Literal> parse_literal(std::string_view text, std::string* error) {
  auto fail = [&](const char* msg) -> std::optional<Literal> {
    if (error) *error = msg;
    return std::nullopt;
  };
  Literal lit;
  lit.text = std::string(text);
  std::string s;
  for (char c : text)
    if (c != '_' && c != ' ' && c != '\t') s.push_back(c);
  auto tick = s.find('\'');
  if (tick == std::string::npos) {
    if (s.empty() || s.size() > 19) return fail("decimal literal out of range");
    lit.bits = std::stoull(s);
    lit.width = 32;
    lit.sized = false;
    if (lit.bits > 0xFFFFFFFFull) return fail("unsized literal exceeds 32 bits");
    return lit;
  }
  if (tick > 0) {
    std::string w = s.substr(0, tick);
    if (w.size() > 3) return fail("literal width exceeds 64 bits");
    int width = std::stoi(w);
    if (width < 1) return fail("literal width must be at least 1");
    if (width > kMaxWidth) return fail("literal width exceeds 64 bits");
    lit.width = width;
    lit.sized = true;
  } else {
    lit.width = 32;
    lit.sized = false;
  }
  std::size_t p = tick + 1;
  if (p < s.size() && (s[p] == 's' || s[p] == 'S')) return fail("signed literals are not supported");
  if (p >= s.size()) return fail("missing radix");
  char radix = static_cast<char>(std::tolower(static_cast<unsigned char>(s[p])));
  std::string digits = s.substr(p + 1);
  if (digits.empty()) return fail("based literal has no digits");
  std::uint64_t bits = 0, xm = 0;
  int per = radix == 'b' ? 1 : radix == 'o' ? 3 : radix == 'h' ? 4 : 0;
  if (per == 0) {
    if (radix != 'd') return fail("unknown radix");
    if (digits.size() == 1 && (digits[0] == 'x' || digits[0] == 'X' || digits[0] == 'z' ||
                               digits[0] == 'Z' || digits[0] == '?')) {
      xm = ~0ull;
    } else {
      for (char c : digits) {
        if (!std::isdigit(static_cast<unsigned char>(c))) return fail("bad decimal digit");
        std::uint64_t next = bits * 10 + static_cast<std::uint64_t>(c - '0');
        if (next / 10 != bits && bits != 0) return fail("literal value exceeds 64 bits");
        bits = next;
      }
    }
  } else {
    int used = 0;
    for (char c : digits) {
      std::uint64_t d = 0, dx = 0;
      char l = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      if (l == 'x' || l == 'z' || l == '?') {
        dx = (1ull << per) - 1;
      } else if (std::isdigit(static_cast<unsigned char>(l))) {
        d = static_cast<std::uint64_t>(l - '0');
      } else if (l >= 'a' && l <= 'f') {
        d = static_cast<std::uint64_t>(l - 'a' + 10);
      } else {
        return fail("bad digit in literal");
      }
      if (d >= (1ull << per)) return fail("digit out of range for radix");
      used += per;
      if (used - per >= 64 && (d != 0 || dx != 0)) return fail("literal value exceeds 64 bits");
      bits = (per >= 64 ? 0 : bits << per) | d;
      xm = (per >= 64 ? 0 : xm << per) | dx;
    }
  }
  std::uint64_t mask = lit.width >= 64 ? ~0ull : ((1ull << lit.width) - 1);
  lit.bits = bits & mask & ~xm;
  lit.xmask = xm & mask;
  return lit;
}

namespace {

struct ParseError {
  Token at;
  std::string code;
  std::string message;
};

class Parser {
 public:
  Parser(std::shared_ptr<const SourceFile> src, std::vector<Token> tokens,
         std::vector<Diagnostic>& diags)
      : src_(std::move(src)), toks_(std::move(tokens)), diags_(diags) {}

  Design run() {
    Design d;
    d.source = src_;
    while (!at_eof()) {
      if (peek().is("module")) {
        try {
          d.modules.push_back(parse_module());
        } catch (const ParseError& e) {
          report(e);
          while (!at_eof() && !peek().is("module")) advance();
        }
      } else {
        report({peek(), "syntax", "expected 'module', found '" + describe(peek()) + "'"});
        while (!at_eof() && !peek().is("module")) advance();
      }
    }
    return d;
  }

 private:
  // ---- token helpers ------------------------------------------------------
  const Token& peek(std::size_t k = 0) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  bool at_eof() const { return peek().kind == TokenKind::kEof; }
  const Token& advance() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    prev_ = t;
    return t;
  }
  bool accept(std::string_view s) {
    if (peek().is(s)) {
      advance();
      return true;
    }
    return false;
  }
  static std::string describe(const Token& t) {
    if (t.kind == TokenKind::kEof) return "end of file";
    return std::string(t.text);
  }
  [[noreturn]] void fail(std::string code, std::string msg) {
    throw ParseError{peek(), std::move(code), std::move(msg)};
  }
  const Token& expect(std::string_view s) {
    if (!peek().is(s)) {
      if (s == ";" && pos_ > 0) {
        // Report a missing semicolon at the end of the previous token.
        Token at = prev_;
        at.span.begin = at.span.end;
        at.col += static_cast<std::uint32_t>(at.text.size());
        throw ParseError{at, "missing-semicolon",
                         "expected ';' before '" + describe(peek()) + "'"};
      }
      std::string code = "syntax";
      if (s == "end" || s == "endcase" || s == "endmodule") code = "unbalanced-block";
      fail(code, "expected '" + std::string(s) + "', found '" + describe(peek()) + "'");
    }
    return advance();
  }
  const Token& expect_ident(const char* what) {
    if (peek().kind != TokenKind::kIdent) {
      if (peek().kind == TokenKind::kKeyword)
        fail("syntax", std::string("expected ") + what + ", found keyword '" +
                           describe(peek()) + "'");
      fail("syntax", std::string("expected ") + what + ", found '" + describe(peek()) + "'");
    }
    if (is_unsupported_keyword(peek().text))
      fail("unsupported", "'" + std::string(peek().text) + "' is not supported");
    return advance();
  }
  Span span_from(const Token& first) const {
    Span s = first.span;
    s.end = prev_.span.end;
    s.end_line = prev_.span.end_line;
    return s;
  }
  void report(const ParseError& e) {
    diags_.push_back({Severity::kError, e.at.span.line, e.at.col, e.code, e.message});
  }

  // ---- modules ------------------------------------------------------------
  ModuleDecl parse_module() {
    const Token& kw = expect("module");
    ModuleDecl m;
    m.name = std::string(expect_ident("module name").text);
    if (accept("(")) {
      if (peek().is("input") || peek().is("output")) {
        m.ansi = true;
        parse_ansi_ports(m);
      } else if (!peek().is(")")) {
        do {
          const Token& p = expect_ident("port name");
          m.port_order.emplace_back(p.text);
        } while (accept(","));
      }
      expect(")");
    }
    expect(";");
    m.header_span = span_from(kw);
    while (!peek().is("endmodule")) {
      if (at_eof() || peek().is("module")) {
        report({peek(), "unbalanced-block",
                "expected 'endmodule' before '" + describe(peek()) + "'"});
        m.span = span_from(kw);
        return m;
      }
      std::size_t before = pos_;
      try {
        parse_item(m);
      } catch (const ParseError& e) {
        report(e);
        sync_item();
        if (pos_ == before) advance();
      }
    }
    expect("endmodule");
    m.span = span_from(kw);
    return m;
  }

  void sync_item() {
    while (!at_eof()) {
      const Token& t = peek();
      if (t.is(";")) {
        advance();
        return;
      }
      if (t.is("endmodule") || t.is("module") || t.is("always") || t.is("assign") ||
          t.is("input") || t.is("output") || t.is("wire") || t.is("reg") || t.is("integer"))
        return;
      advance();
    }
  }

  void parse_ansi_ports(ModuleDecl& m) {
    Direction dir = Direction::kInput;
    NetKind kind = NetKind::kWire;
    bool kind_explicit = false;
    bool has_range = false;
    int msb = 0, lsb = 0;
    Span kind_span, range_span;
    Token decl_start = peek();
    do {
      if (peek().is("input") || peek().is("output")) {
        decl_start = peek();
        dir = advance().is("input") ? Direction::kInput : Direction::kOutput;
        kind = NetKind::kWire;
        kind_explicit = false;
        kind_span = {prev_.span.end, prev_.span.end, prev_.span.line, prev_.span.line};
        if (peek().is("wire") || peek().is("reg") || peek().is("integer")) {
          kind_span = peek().span;
          kind = kind_of(advance());
          kind_explicit = true;
        }
        has_range = false;
        range_span = {};
        if (peek().is("[")) {
          Token rb = peek();
          parse_range(msb, lsb);
          has_range = true;
          range_span = span_from(rb);
        }
      }
      const Token& name = expect_ident("port name");
      NetDecl n;
      n.name = std::string(name.text);
      n.direction = dir;
      n.kind = kind;
      n.kind_explicit = kind_explicit;
      n.has_range = has_range;
      n.msb = msb;
      n.lsb = lsb;
      n.kind_span = kind_span;
      n.range_span = range_span;
      n.name_span = name.span;
      n.span = span_from(decl_start);
      m.port_order.push_back(n.name);
      add_net(m, std::move(n));
    } while (accept(","));
  }

  static NetKind kind_of(const Token& t) {
    if (t.is("reg")) return NetKind::kReg;
    if (t.is("integer")) return NetKind::kInteger;
    return NetKind::kWire;
  }

  int parse_const_int() {
    const Token& t = peek();
    if (t.kind != TokenKind::kNumber) fail("syntax", "expected constant, found '" + describe(t) + "'");
    std::string err;
    auto lit = parse_literal(t.text, &err);
    if (!lit) fail("malformed-literal", "malformed literal '" + std::string(t.text) + "': " + err);
    if (lit->xmask) fail("malformed-literal", "constant must not contain x/z");
    if (lit->bits > 1u << 20) fail("syntax", "constant index too large");
    advance();
    return static_cast<int>(lit->bits);
  }

  void parse_range(int& msb, int& lsb) {
    expect("[");
    msb = parse_const_int();
    expect(":");
    lsb = parse_const_int();
    expect("]");
  }

  void add_net(ModuleDecl& m, NetDecl n) {
    for (auto& existing : m.nets) {
      if (existing.name != n.name) continue;
      // A port direction declaration may be completed by a separate kind declaration.
      bool merge = (existing.direction != Direction::kInternal) !=
                   (n.direction != Direction::kInternal);
      if (!merge || (existing.kind_explicit && n.kind_explicit)) {
        diags_.push_back({Severity::kError, n.name_span.line, src_->locate(n.name_span.begin).col,
                          "redeclared", "'" + n.name + "' is already declared"});
        return;
      }
      if (n.direction != Direction::kInternal) existing.direction = n.direction;
      if (n.kind_explicit) {
        existing.kind = n.kind;
        existing.kind_explicit = true;
        existing.kind_span = n.kind_span;
      }
      if (n.has_range && !existing.has_range) {
        existing.has_range = true;
        existing.msb = n.msb;
        existing.lsb = n.lsb;
        existing.range_span = n.range_span;
      }
      return;
    }
    m.nets.push_back(std::move(n));
  }

  void parse_declaration(ModuleDecl& m) {
    const Token& first = peek();
    Direction dir = Direction::kInternal;
    if (peek().is("input") || peek().is("output"))
      dir = advance().is("input") ? Direction::kInput : Direction::kOutput;
    NetKind kind = NetKind::kWire;
    bool kind_explicit = false;
    Span kind_span = {prev_.span.end, prev_.span.end, prev_.span.line, prev_.span.line};
    if (dir == Direction::kInternal) kind_span = first.span;
    if (peek().is("wire") || peek().is("reg") || peek().is("integer")) {
      kind_span = peek().span;
      kind = kind_of(advance());
      kind_explicit = true;
    }
    bool has_range = false;
    int msb = 0, lsb = 0;
    Span range_span;
    if (peek().is("[")) {
      Token rb = peek();
      parse_range(msb, lsb);
      has_range = true;
      range_span = span_from(rb);
    }
    std::vector<std::pair<Expr, Expr>> init_assigns;
    do {
      const Token& name = expect_ident("identifier");
      NetDecl n;
      n.name = std::string(name.text);
      n.direction = dir;
      n.kind = kind;
      n.kind_explicit = kind_explicit;
      n.kind_span = kind_span;
      n.has_range = has_range;
      n.msb = msb;
      n.lsb = lsb;
      n.range_span = range_span;
      n.name_span = name.span;
      if (peek().is("[")) {
        advance();
        int a = parse_const_int();
        expect(":");
        int b = parse_const_int();
        expect("]");
        n.is_array = true;
        n.array_lo = std::min(a, b);
        n.array_hi = std::max(a, b);
      }
      if (peek().is("=")) {
        if (kind != NetKind::kWire || dir == Direction::kInput)
          fail("syntax", "declaration initializers are only supported on wires");
        advance();
        Expr rhs = parse_expr();
        init_assigns.emplace_back(Expr::ident(n.name, name.span), std::move(rhs));
      }
      n.span = {first.span.begin, prev_.span.end, first.span.line, prev_.span.end_line};
      add_net(m, std::move(n));
    } while (accept(","));
    expect(";");
    for (auto& [lhs, rhs] : init_assigns) {
      ContinuousAssign a;
      a.span = span_from(first);
      a.lhs = std::move(lhs);
      a.rhs = std::move(rhs);
      m.items.emplace_back(std::move(a));
    }
  }

  void parse_item(ModuleDecl& m) {
    const Token& t = peek();
    if (t.is("input") || t.is("output") || t.is("wire") || t.is("reg") || t.is("integer")) {
      if ((t.is("input") || t.is("output")) && m.ansi)
        fail("syntax", "port declaration in body of a module with an ANSI port list");
      parse_declaration(m);
      return;
    }
    if (t.is("assign")) {
      const Token& kw = advance();
      do {
        ContinuousAssign a;
        a.lhs = parse_lvalue();
        expect("=");
        a.rhs = parse_expr();
        a.span = span_from(kw);
        m.items.emplace_back(std::move(a));
      } while (accept(","));
      expect(";");
      return;
    }
    if (t.is("always")) {
      m.items.emplace_back(parse_always());
      return;
    }
    if (t.kind == TokenKind::kIdent) {
      if (is_unsupported_keyword(t.text)) {
        fail("unsupported", "'" + std::string(t.text) + "' is not supported in this Verilog subset");
      }
      if (peek(1).kind == TokenKind::kIdent && peek(2).is("(")) {
        m.items.emplace_back(parse_instance());
        return;
      }
      if (peek(1).is("#"))
        fail("unsupported", "parameterized instantiation is not supported");
      fail("unknown-keyword", "unknown keyword or construct '" + std::string(t.text) + "'");
    }
    if (t.is("end") || t.is("endcase"))
      fail("unbalanced-block", "unexpected '" + std::string(t.text) + "' outside a block");
    fail("syntax", "unexpected '" + describe(t) + "' in module body");
  }

  AlwaysBlock parse_always() {
    const Token& kw = expect("always");
    AlwaysBlock a;
    if (!peek().is("@")) {
      if (peek().is("#")) fail("unsupported", "delays ('#') are not supported");
      fail("syntax", "expected '@' after 'always'");
    }
    advance();
    if (accept("*")) {
      a.star = true;
      a.sens_span = prev_.span;
    } else {
      const Token& lp = expect("(");
      if (peek().is("*")) {
        advance();
        a.star = true;
      } else {
        do {
          SensItem s;
          const Token& first = peek();
          if (accept("posedge")) {
            s.edge = Edge::kPos;
          } else if (accept("negedge")) {
            s.edge = Edge::kNeg;
          } else {
            fail("unsupported",
                 "level-sensitive event lists are not supported; use @(*) or edge events");
          }
          s.signal = std::string(expect_ident("signal").text);
          s.span = span_from(first);
          a.sens.push_back(std::move(s));
        } while (accept("or") || accept(","));
      }
      expect(")");
      a.sens_span = span_from(lp);
    }
    a.body = parse_stmt();
    a.span = span_from(kw);
    return a;
  }

  Instance parse_instance() {
    const Token& first = peek();
    Instance inst;
    inst.module = std::string(advance().text);
    inst.name = std::string(expect_ident("instance name").text);
    expect("(");
    if (!peek().is(")")) {
      do {
        if (!peek().is("."))
          fail("unsupported", "only named port connections (.port(expr)) are supported");
        const Token& dot = advance();
        PortConnection c;
        c.port = std::string(expect_ident("port name").text);
        expect("(");
        if (!peek().is(")")) c.expr = parse_expr();
        expect(")");
        c.span = span_from(dot);
        inst.connections.push_back(std::move(c));
      } while (accept(","));
    }
    expect(")");
    expect(";");
    inst.span = span_from(first);
    return inst;
  }

  // ---- statements ---------------------------------------------------------
  void sync_stmt() {
    while (!at_eof()) {
      const Token& t = peek();
      if (t.is(";")) {
        advance();
        return;
      }
      if (t.is("end") || t.is("endcase") || t.is("endmodule") || t.is("always") ||
          t.is("assign") || t.is("begin") || t.is("if") || t.is("case") || t.is("for") ||
          t.is("else"))
        return;
      advance();
    }
  }

  Stmt parse_stmt() {
    const Token& t = peek();
    Stmt s;
    if (t.is(";")) {
      advance();
      s.kind = Stmt::Kind::kEmpty;
      s.span = t.span;
      return s;
    }
    if (t.is("begin")) {
      const Token& b = advance();
      s.kind = Stmt::Kind::kBlock;
      if (accept(":")) expect_ident("block label");
      while (!peek().is("end")) {
        if (at_eof() || peek().is("endmodule") || peek().is("always") || peek().is("module") ||
            peek().is("assign"))
          fail("unbalanced-block", "'begin' without matching 'end' before '" +
                                       describe(peek()) + "'");
        std::size_t before = pos_;
        try {
          s.body.push_back(parse_stmt());
        } catch (const ParseError& e) {
          if (e.code == "unbalanced-block") throw;
          report(e);
          sync_stmt();
          if (pos_ == before) advance();
        }
      }
      expect("end");
      s.span = span_from(b);
      return s;
    }
    if (t.is("if")) {
      const Token& kw = advance();
      s.kind = Stmt::Kind::kIf;
      expect("(");
      s.cond = parse_expr();
      expect(")");
      s.head_span = span_from(kw);
      s.body.push_back(parse_stmt());
      if (accept("else")) s.else_body.push_back(parse_stmt());
      s.span = span_from(kw);
      return s;
    }
    if (t.is("case")) {
      const Token& kw = advance();
      s.kind = Stmt::Kind::kCase;
      expect("(");
      s.cond = parse_expr();
      expect(")");
      s.head_span = span_from(kw);
      while (!peek().is("endcase")) {
        if (at_eof() || peek().is("endmodule") || peek().is("end"))
          fail("unbalanced-block", "'case' without matching 'endcase' before '" +
                                       describe(peek()) + "'");
        CaseItem item;
        const Token& first = peek();
        if (accept("default")) {
          item.is_default = true;
          accept(":");
        } else {
          do {
            item.labels.push_back(parse_expr());
          } while (accept(","));
          expect(":");
        }
        item.span = span_from(first);
        item.body.push_back(parse_stmt());
        s.items.push_back(std::move(item));
      }
      expect("endcase");
      s.span = span_from(kw);
      return s;
    }
    if (t.is("for")) {
      const Token& kw = advance();
      s.kind = Stmt::Kind::kFor;
      expect("(");
      s.loop_control.push_back(parse_assignment(false));
      expect(";");
      s.cond = parse_expr();
      expect(";");
      s.loop_control.push_back(parse_assignment(false));
      expect(")");
      s.head_span = span_from(kw);
      s.body.push_back(parse_stmt());
      s.span = span_from(kw);
      return s;
    }
    if (t.kind == TokenKind::kIdent || t.is("{")) {
      if (t.kind == TokenKind::kIdent && is_unsupported_keyword(t.text))
        fail("unsupported", "'" + std::string(t.text) + "' is not supported in this Verilog subset");
      if (t.kind == TokenKind::kIdent && peek(1).kind == TokenKind::kIdent)
        fail("unknown-keyword", "unknown keyword or construct '" + std::string(t.text) + "'");
      Stmt a = parse_assignment(true);
      expect(";");
      a.span = span_from(t);
      return a;
    }
    if (t.is("#")) fail("unsupported", "delays ('#') are not supported");
    if (t.is("assign")) fail("syntax", "continuous assignment inside a procedural block");
    fail("syntax", "expected statement, found '" + describe(t) + "'");
  }

  Stmt parse_assignment(bool allow_nonblocking) {
    const Token& first = peek();
    Stmt s;
    s.lhs = parse_lvalue();
    if (peek().is("=")) {
      s.kind = Stmt::Kind::kBlocking;
    } else if (allow_nonblocking && peek().is("<=")) {
      s.kind = Stmt::Kind::kNonblocking;
    } else {
      fail("syntax", "expected '=' or '<=' in assignment, found '" + describe(peek()) + "'");
    }
    s.op_span = advance().span;
    s.rhs = parse_expr();
    s.span = span_from(first);
    return s;
  }

  // ---- expressions --------------------------------------------------------
  Expr parse_lvalue() {
    const Token& t = peek();
    if (t.is("{")) {
      advance();
      Expr e;
      e.kind = Expr::Kind::kConcat;
      do {
        e.operands.push_back(parse_lvalue());
      } while (accept(","));
      expect("}");
      e.span = span_from(t);
      return e;
    }
    const Token& id = expect_ident("assignment target");
    return parse_select(id);
  }

  Expr parse_select(const Token& id) {
    Expr e = Expr::ident(std::string(id.text), id.span);
    if (!peek().is("[")) return e;
    advance();
    // Constant part-select [msb:lsb] vs index [expr].
    if (peek().kind == TokenKind::kNumber && peek(1).is(":")) {
      e.kind = Expr::Kind::kPartSelect;
      e.msb = parse_const_int();
      expect(":");
      e.lsb = parse_const_int();
    } else {
      e.kind = Expr::Kind::kBitSelect;
      e.operands.push_back(parse_expr());
      if (peek().is(":")) fail("unsupported", "part-select bounds must be constants");
    }
    expect("]");
    if (peek().is("[")) fail("unsupported", "multi-dimensional selects are not supported");
    e.span = span_from(id);
    return e;
  }

  Expr parse_expr() { return parse_ternary(); }

  Expr parse_ternary() {
    const Token& first = peek();
    Expr c = parse_binary(0);
    if (!peek().is("?")) return c;
    Expr e;
    e.kind = Expr::Kind::kTernary;
    e.op_span = advance().span;
    e.operands.push_back(std::move(c));
    e.operands.push_back(parse_ternary());
    expect(":");
    e.operands.push_back(parse_ternary());
    e.span = span_from(first);
    return e;
  }

  static int precedence(const Token& t, BinaryOp& op) {
    if (t.kind != TokenKind::kPunct) return -1;
    static const std::map<std::string_view, std::pair<int, BinaryOp>> table = {
        {"||", {1, BinaryOp::kLogicalOr}}, {"&&", {2, BinaryOp::kLogicalAnd}},
        {"|", {3, BinaryOp::kBitOr}},      {"^", {4, BinaryOp::kBitXor}},
        {"&", {5, BinaryOp::kBitAnd}},     {"==", {6, BinaryOp::kEq}},
        {"!=", {6, BinaryOp::kNe}},        {"<", {7, BinaryOp::kLt}},
        {"<=", {7, BinaryOp::kLe}},        {">", {7, BinaryOp::kGt}},
        {">=", {7, BinaryOp::kGe}},        {"<<", {8, BinaryOp::kShl}},
        {">>", {8, BinaryOp::kShr}},       {"+", {9, BinaryOp::kAdd}},
        {"-", {9, BinaryOp::kSub}},        {"*", {10, BinaryOp::kMul}},
        {"/", {10, BinaryOp::kDiv}},       {"%", {10, BinaryOp::kMod}},
    };
    auto it = table.find(t.text);
    if (it == table.end()) return -1;
    op = it->second.second;
    return it->second.first;
  }

  Expr parse_binary(int min_prec) {
    const Token& first = peek();
    Expr lhs = parse_unary();
    for (;;) {
      const Token& t = peek();
      if (t.is("===") || t.is("!==") || t.is("<<<") || t.is(">>>") || t.is("~^"))
        fail("unsupported", "operator '" + std::string(t.text) + "' is not supported");
      BinaryOp op;
      int prec = precedence(t, op);
      if (prec < 0 || prec <= min_prec) return lhs;
      Expr e;
      e.kind = Expr::Kind::kBinary;
      e.binary = op;
      e.op_span = advance().span;
      e.operands.push_back(std::move(lhs));
      e.operands.push_back(parse_binary(prec));
      e.span = span_from(first);
      lhs = std::move(e);
    }
  }

  Expr parse_unary() {
    const Token& t = peek();
    UnaryOp op;
    bool unary = true;
    if (t.is("~")) op = UnaryOp::kBitNot;
    else if (t.is("!")) op = UnaryOp::kLogicalNot;
    else if (t.is("-")) op = UnaryOp::kNegate;
    else if (t.is("&")) op = UnaryOp::kReduceAnd;
    else if (t.is("|")) op = UnaryOp::kReduceOr;
    else if (t.is("^")) op = UnaryOp::kReduceXor;
    else if (t.is("+")) {
      advance();
      return parse_unary();
    } else
      unary = false;
    if (t.is("~&") || t.is("~|") || t.is("~^"))
      fail("unsupported", "operator '" + std::string(t.text) + "' is not supported");
    if (!unary) return parse_primary();
    Expr e;
    e.kind = Expr::Kind::kUnary;
    e.unary = op;
    e.op_span = advance().span;
    e.operands.push_back(parse_unary());
    e.span = span_from(t);
    return e;
  }

  Expr parse_primary() {
    const Token& t = peek();
    if (t.kind == TokenKind::kNumber) {
      std::string err;
      auto lit = parse_literal(t.text, &err);
      if (!lit) fail("malformed-literal", "malformed literal '" + std::string(t.text) + "': " + err);
      advance();
      Expr e;
      e.kind = Expr::Kind::kLiteral;
      e.literal = std::move(*lit);
      e.span = t.span;
      return e;
    }
    if (t.kind == TokenKind::kIdent) {
      if (is_unsupported_keyword(t.text))
        fail("unsupported", "'" + std::string(t.text) + "' is not supported");
      if (peek(1).is("(")) fail("unsupported", "function calls are not supported");
      const Token& id = advance();
      return parse_select(id);
    }
    if (t.is("(")) {
      advance();
      Expr e = parse_expr();
      expect(")");
      return e;
    }
    if (t.is("{")) {
      advance();
      Expr e;
      // Replication {n{...}}
      if (peek().kind == TokenKind::kNumber && peek(1).is("{")) {
        e.kind = Expr::Kind::kReplicate;
        e.count = parse_const_int();
        if (e.count < 1) fail("syntax", "replication count must be positive");
        expect("{");
        do {
          e.operands.push_back(parse_expr());
        } while (accept(","));
        expect("}");
      } else {
        e.kind = Expr::Kind::kConcat;
        do {
          e.operands.push_back(parse_expr());
        } while (accept(","));
      }
      expect("}");
      e.span = span_from(t);
      return e;
    }
    if (t.kind == TokenKind::kKeyword)
      fail("syntax", "unexpected keyword '" + describe(t) + "' in expression");
    fail("syntax", "expected expression, found '" + describe(t) + "'");
  }

  std::shared_ptr<const SourceFile> src_;
  std::vector<Token> toks_;
  std::vector<Diagnostic>& diags_;
  std::size_t pos_ = 0;
  Token prev_;
};

// ---- per-module semantic checks --------------------------------------------

class ModuleChecker {
 public:
  ModuleChecker(const SourceFile& src, const ModuleDecl& m, std::vector<Diagnostic>& diags)
      : src_(src), m_(m), diags_(diags) {}

  void run() {
    for (const auto& p : m_.port_order) {
      const NetDecl* n = m_.find_net(p);
      if (!n || n->direction == Direction::kInternal)
        error(m_.header_span, "missing-port-decl",
              "port '" + p + "' has no direction declaration");
    }
    std::set<std::string> seen_ports;
    for (const auto& p : m_.port_order) {
      if (!seen_ports.insert(p).second)
        error(m_.header_span, "redeclared", "port '" + p + "' is listed twice");
    }
    for (const auto& n : m_.nets) {
      if (n.direction != Direction::kInternal &&
          std::find(m_.port_order.begin(), m_.port_order.end(), n.name) == m_.port_order.end())
        error(n.name_span, "port-not-in-header",
              "'" + n.name + "' is declared " + to_string(n.direction) +
                  " but is not in the module port list");
      if (n.has_range && n.msb < n.lsb)
        error(n.range_span, "bad-range", "range [" + std::to_string(n.msb) + ":" +
                                             std::to_string(n.lsb) + "] must have msb >= lsb");
      if (n.width() > kMaxWidth)
        error(n.range_span, "too-wide", "'" + n.name + "' is wider than 64 bits");
      if (n.is_array && (n.depth() > kMaxArrayDepth || n.kind != NetKind::kReg))
        error(n.name_span, "bad-array", "arrays must be reg arrays of at most 1024 words");
      if (n.direction == Direction::kInput && n.kind != NetKind::kWire)
        error(n.kind_span, "input-reg", "input '" + n.name + "' cannot be declared reg");
      if (n.is_array && n.direction != Direction::kInternal)
        error(n.name_span, "bad-array", "array ports are not supported");
    }
    int always_index = 0;
    for (const auto& item : m_.items) {
      if (const auto* a = std::get_if<ContinuousAssign>(&item)) {
        check_expr(a->rhs);
        check_lvalue(a->lhs, Driver::kContinuous, -1);
      } else if (const auto* b = std::get_if<AlwaysBlock>(&item)) {
        for (const auto& s : b->sens) {
          const NetDecl* n = lookup(s.signal, s.span);
          if (n && (n->width() != 1 || n->is_array))
            error(s.span, "bad-event", "edge event on multi-bit signal '" + s.signal + "'");
        }
        check_stmt(b->body, always_index, false);
        ++always_index;
      } else {
        const auto& inst = std::get<Instance>(item);
        if (inst.module == m_.name)
          error(inst.span, "recursive-instance", "module '" + m_.name + "' instantiates itself");
        for (const auto& c : inst.connections)
          if (c.expr) check_expr(*c.expr);
      }
    }
  }

 private:
  enum class Driver { kNone, kContinuous, kProcedural, kInstance };

  void error(const Span& s, std::string code, std::string msg) {
    diags_.push_back({Severity::kError, s.line, s.valid() ? src_.locate(s.begin).col : 1,
                      std::move(code), std::move(msg)});
  }

  const NetDecl* lookup(const std::string& name, const Span& at) {
    const NetDecl* n = m_.find_net(name);
    if (!n) {
      if (reported_undeclared_.insert(name).second)
        error(at, "undeclared", "undeclared identifier '" + name + "'");
    }
    return n;
  }

  void check_select(const Expr& e, const NetDecl& n) {
    if (e.kind == Expr::Kind::kIdent && n.is_array)
      error(e.span, "bad-array", "array '" + n.name + "' must be indexed");
    if (e.kind == Expr::Kind::kPartSelect) {
      if (n.is_array) error(e.span, "bad-array", "part-select of an array word is not supported");
      int lo = n.has_range ? n.lsb : 0, hi = n.has_range ? n.msb : n.width() - 1;
      if (e.msb < e.lsb || e.lsb < lo || e.msb > hi)
        error(e.span, "select-range", "part-select [" + std::to_string(e.msb) + ":" +
                                          std::to_string(e.lsb) + "] is outside '" + n.name +
                                          "'");
    }
    if (e.kind == Expr::Kind::kBitSelect && !n.is_array &&
        e.operands[0].kind == Expr::Kind::kLiteral) {
      int lo = n.has_range ? n.lsb : 0, hi = n.has_range ? n.msb : n.width() - 1;
      auto idx = static_cast<std::int64_t>(e.operands[0].literal.bits);
      if (e.operands[0].literal.xmask == 0 && (idx < lo || idx > hi))
        error(e.span, "select-range",
              "bit-select [" + std::to_string(idx) + "] is outside '" + n.name + "'");
    }
  }

  void check_expr(const Expr& e) {
    walk(e, [&](const Expr& x) {
      if (x.kind == Expr::Kind::kIdent || x.kind == Expr::Kind::kBitSelect ||
          x.kind == Expr::Kind::kPartSelect) {
        if (const NetDecl* n = lookup(x.name, x.span)) check_select(x, *n);
      }
    });
  }

  void check_lvalue(const Expr& lhs, Driver kind, int always_index) {
    switch (lhs.kind) {
      case Expr::Kind::kConcat:
        for (const auto& op : lhs.operands) check_lvalue(op, kind, always_index);
        return;
      case Expr::Kind::kIdent:
      case Expr::Kind::kBitSelect:
      case Expr::Kind::kPartSelect:
        break;
      default:
        error(lhs.span, "bad-lvalue", "expression is not assignable");
        return;
    }
    for (const auto& op : lhs.operands) check_expr(op);
    const NetDecl* n = lookup(lhs.name, lhs.span);
    if (!n) return;
    check_select(lhs, *n);
    if (n->direction == Direction::kInput) {
      error(lhs.span, "assign-input", "assignment to input '" + n->name + "'");
      return;
    }
    if (kind == Driver::kProcedural && n->kind == NetKind::kWire)
      error(lhs.span, "proc-assign-wire", "procedural assignment to wire '" + n->name + "'");
    if (kind == Driver::kContinuous && n->kind != NetKind::kWire)
      error(lhs.span, "cont-assign-reg", "continuous assignment to reg '" + n->name + "'");
    auto& d = drivers_[n->name];
    if (d.first == Driver::kNone) {
      d = {kind, always_index};
    } else if (d.first != kind) {
      error(lhs.span, "multiple-drivers",
            "'" + n->name + "' is driven both continuously and procedurally");
    } else if (kind == Driver::kProcedural && d.second != always_index &&
               n->kind != NetKind::kInteger) {
      error(lhs.span, "multiple-drivers",
            "'" + n->name + "' is assigned from more than one always block");
    }
  }

  static bool is_const(const Expr& e) {
    bool ok = true;
    walk(e, [&](const Expr& x) {
      if (x.kind == Expr::Kind::kIdent || x.kind == Expr::Kind::kBitSelect ||
          x.kind == Expr::Kind::kPartSelect)
        ok = false;
    });
    return ok;
  }

  void check_for(const Stmt& s) {
    const Stmt& init = s.loop_control[0];
    const Stmt& step = s.loop_control[1];
    auto bad = [&](const char* why) {
      error(s.head_span, "nonstatic-loop",
            std::string("for-loop bounds must be compile-time constants: ") + why);
    };
    if (init.lhs.kind != Expr::Kind::kIdent) return bad("loop variable must be a plain identifier");
    const std::string& var = init.lhs.name;
    if (!is_const(init.rhs)) return bad("initial value is not constant");
    const Expr& c = s.cond;
    if (c.kind != Expr::Kind::kBinary || !is_comparison(c.binary) ||
        c.operands[0].kind != Expr::Kind::kIdent || c.operands[0].name != var ||
        !is_const(c.operands[1]))
      return bad("condition must compare the loop variable with a constant");
    if (step.lhs.kind != Expr::Kind::kIdent || step.lhs.name != var ||
        step.rhs.kind != Expr::Kind::kBinary ||
        (step.rhs.binary != BinaryOp::kAdd && step.rhs.binary != BinaryOp::kSub) ||
        step.rhs.operands[0].kind != Expr::Kind::kIdent || step.rhs.operands[0].name != var ||
        !is_const(step.rhs.operands[1]))
      return bad("step must be 'var = var +/- constant'");
    if (const NetDecl* n = m_.find_net(var)) {
      if (n->kind == NetKind::kWire)
        error(init.lhs.span, "proc-assign-wire", "procedural assignment to wire '" + var + "'");
      loop_vars_.insert(var);
    } else {
      lookup(var, init.lhs.span);
    }
  }

  void check_stmt(const Stmt& s, int always_index, bool /*in_loop*/) {
    switch (s.kind) {
      case Stmt::Kind::kBlocking:
      case Stmt::Kind::kNonblocking:
        check_expr(s.rhs);
        check_lvalue(s.lhs, Driver::kProcedural, always_index);
        break;
      case Stmt::Kind::kBlock:
        for (const auto& c : s.body) check_stmt(c, always_index, false);
        break;
      case Stmt::Kind::kIf:
        check_expr(s.cond);
        for (const auto& c : s.body) check_stmt(c, always_index, false);
        for (const auto& c : s.else_body) check_stmt(c, always_index, false);
        break;
      case Stmt::Kind::kCase:
        check_expr(s.cond);
        {
          int defaults = 0;
          for (const auto& it : s.items) {
            if (it.is_default && ++defaults > 1)
              error(it.span, "syntax", "case statement has more than one default");
            for (const auto& l : it.labels) check_expr(l);
            for (const auto& c : it.body) check_stmt(c, always_index, false);
          }
        }
        break;
      case Stmt::Kind::kFor:
        check_expr(s.cond);
        for (const auto& c : s.loop_control) {
          check_expr(c.rhs);
          check_lvalue(c.lhs, Driver::kProcedural, always_index);
        }
        check_for(s);
        for (const auto& c : s.body) check_stmt(c, always_index, true);
        break;
      case Stmt::Kind::kEmpty:
        break;
    }
  }

  const SourceFile& src_;
  const ModuleDecl& m_;
  std::vector<Diagnostic>& diags_;
  std::map<std::string, std::pair<Driver, int>> drivers_;
  std::set<std::string> reported_undeclared_;
  std::set<std::string> loop_vars_;
};

std::string pick_top(const Design& d) {
  std::set<std::string> instantiated;
  for (const auto& m : d.modules)
    for (const auto& item : m.items)
      if (const auto* inst = std::get_if<Instance>(&item)) instantiated.insert(inst->module);
  for (const auto& m : d.modules)
    if (!instantiated.count(m.name)) return m.name;
  return d.modules.empty() ? std::string() : d.modules.front().name;
}

}  // namespace

ParseResult parse(std::shared_ptr<const SourceFile> src) {
  ParseResult result;
  LexResult lexed = lex(*src);
  result.diagnostics = lexed.diagnostics;
  Parser parser(src, std::move(lexed.tokens), result.diagnostics);
  Design d = parser.run();
  if (!has_errors(result.diagnostics)) {
    std::set<std::string> names;
    for (const auto& m : d.modules) {
      if (!names.insert(m.name).second)
        result.diagnostics.push_back({Severity::kError, m.span.line, 1, "duplicate-module",
                                      "module '" + m.name + "' is declared more than once"});
      ModuleChecker(*src, m, result.diagnostics).run();
    }
    if (d.modules.empty())
      result.diagnostics.push_back({Severity::kError, 1, 1, "syntax", "no module found"});
  }
  std::stable_sort(result.diagnostics.begin(), result.diagnostics.end(),
                   [](const Diagnostic& a, const Diagnostic& b) {
                     return std::tie(a.line, a.col) < std::tie(b.line, b.col);
                   });
  if (!has_errors(result.diagnostics)) {
    d.top = pick_top(d);
    result.design = std::move(d);
  }
  return result;
}

ParseResult parse(const SourceFile& src) { return parse(std::make_shared<const SourceFile>(src)); }

ParseResult parse_text(std::string text, std::string path) {
  return parse(std::make_shared<const SourceFile>(std::move(path), std::move(text)));
}

}  // namespace rtlmend
