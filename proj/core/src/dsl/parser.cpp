#include "muit/dsl/parser.hpp"

#include <algorithm>
#include <array>

namespace muit::dsl {

namespace {

constexpr int kMaxDepth = 200;

constexpr std::array<std::string_view, 34> kElementTags = {
    "a",      "button", "checkbox", "div",   "footer", "form",  "h1",     "h2",    "h3",
    "image",  "img",    "input",    "item",  "label",  "li",    "link",   "list",  "nav",
    "ol",     "option", "p",        "radio", "section", "select", "span",  "table", "td",
    "text",   "textarea", "th",     "tr",    "ul",     "video", "audio"};

// Unwinds out of the current top-level declaration after a syntax error.
struct Bail {};

class Parser {
 public:
  Parser(const std::vector<Token>& tokens, std::string name) : toks_(tokens) {
    module_.name = std::move(name);
    if (!toks_.empty()) {
      const auto& last = toks_.back().location;
      eof_.location = {last.offset + last.length, last.line, last.column + last.length, 0};
    }
    eof_.kind = TokenKind::Error;
  }

  ParseResult run() {
    while (!at_end()) {
      std::size_t start = pos_;
      try {
        top_level();
      } catch (const Bail&) {
        if (pos_ == start) ++pos_;
        synchronize();
      }
      depth_ = 0;
    }
    return {std::move(module_), std::move(diags_)};
  }

 private:
  // -- token access --------------------------------------------------------

  bool at_end() const { return pos_ >= toks_.size(); }
  const Token& peek(std::size_t k = 0) const {
    return pos_ + k < toks_.size() ? toks_[pos_ + k] : eof_;
  }
  bool check(TokenKind k, std::size_t ahead = 0) const {
    return pos_ + ahead < toks_.size() && toks_[pos_ + ahead].kind == k;
  }
  bool match(TokenKind k) {
    if (!check(k)) return false;
    ++pos_;
    return true;
  }
  const Token& advance() {
    const Token& t = peek();
    if (!at_end()) ++pos_;
    return t;
  }

  static std::string describe(const Token& t, bool eof) {
    if (eof) return "end of input";
    switch (t.kind) {
      case TokenKind::String: return "string literal";
      case TokenKind::Integer: return "integer '" + t.text + "'";
      case TokenKind::DateTime: return "date '" + t.text + "'";
      case TokenKind::Identifier: return "identifier '" + t.text + "'";
      default: return "'" + t.text + "'";
    }
  }

  [[noreturn]] void fail(DiagCode code, std::string message) {
    // Error tokens were already reported by the lexer.
    if (at_end() || peek().kind != TokenKind::Error) {
      SourceLocation loc = peek().location;
      if (at_end()) loc.length = 0;
      diags_.push_back({Severity::Error, code, std::move(message), loc});
    }
    throw Bail{};
  }

  [[noreturn]] void unexpected(std::string_view wanted) {
    fail(DiagCode::UnexpectedToken,
         "expected " + std::string(wanted) + " but found " + describe(peek(), at_end()));
  }

  const Token& expect(TokenKind k, std::string_view what) {
    if (!check(k)) {
      fail(DiagCode::ExpectedToken,
           "expected " + std::string(what) + " but found " + describe(peek(), at_end()));
    }
    return advance();
  }

  std::string expect_ident(std::string_view what) { return expect(TokenKind::Identifier, what).text; }

  // Identifier or keyword spelling (member names, markup attribute names).
  bool check_word(std::size_t ahead = 0) const {
    if (pos_ + ahead >= toks_.size()) return false;
    TokenKind k = toks_[pos_ + ahead].kind;
    return k == TokenKind::Identifier || is_keyword(k);
  }

  bool is_decl_start(std::size_t at) const {
    if (at >= toks_.size()) return false;
    auto k = toks_[at].kind;
    auto next = at + 1 < toks_.size() ? toks_[at + 1].kind : TokenKind::Error;
    switch (k) {
      case TokenKind::KwEntity:
      case TokenKind::KwScreen:
      case TokenKind::KwWidget:
      case TokenKind::KwTouch:
        return next == TokenKind::Identifier;
      case TokenKind::KwOperation:
        return next == TokenKind::Identifier || next == TokenKind::KwImport;
      case TokenKind::KwAsync:
        return next == TokenKind::KwOperation;
      default:
        return false;
    }
  }

  void synchronize() {
    while (!at_end() && !is_decl_start(pos_)) ++pos_;
  }

  // -- node bookkeeping ----------------------------------------------------

  struct Mark {
    NodeId id;
    SourceLocation start;
  };

  Mark begin() {
    return {++next_id_, peek().location};
  }

  NodeId finish(const Mark& m) {
    SourceLocation loc = m.start;
    if (pos_ > 0) {
      const auto& last = toks_[std::min(pos_, toks_.size()) - 1].location;
      std::uint32_t end = last.offset + last.length;
      loc.length = end > loc.offset ? end - loc.offset : 0;
    }
    module_.source_span_index[m.id] = loc;
    return m.id;
  }

  struct DepthGuard {
    Parser& p;
    explicit DepthGuard(Parser& parser) : p(parser) {
      if (++p.depth_ > kMaxDepth) {
        p.fail(DiagCode::NestingTooDeep,
               "nesting deeper than " + std::to_string(kMaxDepth) + " levels");
      }
    }
    ~DepthGuard() { --p.depth_; }
  };

  // -- declarations --------------------------------------------------------

  void top_level() {
    switch (peek().kind) {
      case TokenKind::KwEntity: entity(); return;
      case TokenKind::KwOperation: operation(false); return;
      case TokenKind::KwAsync:
        advance();
        if (!check(TokenKind::KwOperation)) unexpected("'operation' after 'async'");
        operation(true);
        return;
      case TokenKind::KwScreen: screen(); return;
      case TokenKind::KwWidget: widget(false); return;
      case TokenKind::KwTouch: widget(true); return;
      case TokenKind::KwVar: global_var(); return;
      case TokenKind::Semicolon: advance(); return;
      default:
        unexpected("a declaration (entity, operation, screen, widget, touch or var)");
    }
  }

  TypeRef type_ref() {
    DepthGuard g(*this);
    TypeRef t;
    t.name = expect_ident("a type name");
    if (match(TokenKind::Less)) {
      do {
        t.args.push_back(type_ref());
      } while (match(TokenKind::Comma));
      expect(TokenKind::Greater, "'>'");
    }
    return t;
  }

  Expr default_literal() {
    Mark m = begin();
    Expr e;
    const Token& t = peek();
    LiteralExpr lit;
    switch (t.kind) {
      case TokenKind::String:
      case TokenKind::Identifier:
        lit.kind = LiteralExpr::Kind::String;
        lit.text = t.text;
        break;
      case TokenKind::Integer:
        lit.kind = LiteralExpr::Kind::Int;
        lit.text = t.text;
        lit.int_value = std::stoll(t.text);
        break;
      case TokenKind::DateTime:
        lit.kind = LiteralExpr::Kind::DateTime;
        lit.text = t.text;
        break;
      case TokenKind::KwTrue:
      case TokenKind::KwFalse:
        lit.kind = LiteralExpr::Kind::Boolean;
        lit.text = t.text;
        lit.bool_value = t.kind == TokenKind::KwTrue;
        break;
      case TokenKind::Minus:
        if (check(TokenKind::Integer, 1)) {
          advance();
          Expr inner = default_literal();
          e.node = UnaryExpr{UnaryOp::Negate, std::move(inner)};
          e.id = finish(m);
          return e;
        }
        [[fallthrough]];
      default:
        unexpected("a default value");
    }
    advance();
    e.node = std::move(lit);
    e.id = finish(m);
    return e;
  }

  PropertyDecl property() {
    Mark m = begin();
    PropertyDecl p;
    if (check(TokenKind::Identifier) && check(TokenKind::Colon, 1)) {
      p.name = advance().text;
      advance();
      if (check(TokenKind::Identifier) &&
          (check(TokenKind::Less, 1) || check(TokenKind::Semicolon, 1) ||
           check(TokenKind::At, 1) || check(TokenKind::RBrace, 1))) {
        p.type = type_ref();
      } else {
        defaults(p);
      }
    } else {
      p.type = type_ref();
      p.name = expect_ident("a property name");
      if (match(TokenKind::Colon)) defaults(p);
    }
    while (match(TokenKind::At)) p.annotations.push_back(expect_ident("an annotation name"));
    if (!check(TokenKind::RBrace)) expect(TokenKind::Semicolon, "';' after property");
    p.id = finish(m);
    return p;
  }

  void defaults(PropertyDecl& p) {
    p.defaults.push_back(default_literal());
    bool comma = false;
    bool pipe = false;
    for (;;) {
      if (match(TokenKind::Comma)) {
        comma = true;
      } else if (match(TokenKind::Pipe)) {
        pipe = true;
      } else {
        break;
      }
      if (comma && pipe) fail(DiagCode::UnexpectedToken, "cannot mix ',' and '|' in defaults");
      p.defaults.push_back(default_literal());
    }
    p.enumeration = pipe;
  }

  void entity() {
    Mark m = begin();
    advance();
    EntityDecl e;
    e.name = expect_ident("an entity name");
    expect(TokenKind::LBrace, "'{'");
    while (!check(TokenKind::RBrace)) {
      if (at_end()) expect(TokenKind::RBrace, "'}'");
      if (match(TokenKind::Semicolon)) continue;
      e.properties.push_back(property());
    }
    advance();
    e.id = finish(m);
    module_.entities.push_back(std::move(e));
  }

  bool check_param_name(std::size_t ahead = 0) const {
    return check(TokenKind::Identifier, ahead) || check(TokenKind::KwScreen, ahead);
  }

  std::vector<Param> params() {
    std::vector<Param> out;
    expect(TokenKind::LParen, "'('");
    if (match(TokenKind::RParen)) return out;
    do {
      Mark m = begin();
      Param p;
      if (check(TokenKind::Identifier) && (check_param_name(1) || check(TokenKind::Less, 1))) {
        p.type = type_ref();
      }
      if (!check_param_name()) unexpected("a parameter name");
      p.name = advance().text;
      p.id = finish(m);
      out.push_back(std::move(p));
    } while (match(TokenKind::Comma));
    expect(TokenKind::RParen, "')'");
    return out;
  }

  void operation(bool async) {
    Mark m = begin();
    advance();
    OperationDecl op;
    op.async = async;
    if (check(TokenKind::KwImport)) {
      op.name = advance().text;
    } else {
      op.name = expect_ident("an operation name");
    }
    op.params = params();
    op.body = block();
    op.id = finish(m);
    module_.operations.push_back(std::move(op));
  }

  void screen() {
    Mark m = begin();
    advance();
    ScreenDecl s;
    s.name = expect_ident("a screen name");
    if (check(TokenKind::LParen)) s.params = params();
    if (check(TokenKind::Identifier) && peek().text == "offline") {
      advance();
      s.cached_offline = true;
    }
    expect(TokenKind::LBrace, "'{'");
    s.items = items();
    s.id = finish(m);
    module_.screens.push_back(std::move(s));
  }

  void widget(bool touch) {
    Mark m = begin();
    advance();
    WidgetDecl w;
    w.kind = expect_ident(touch ? "a touch kind" : "a widget kind");
    w.name = expect_ident(touch ? "a touch name" : "a widget name");
    w.params = check(TokenKind::LParen) ? params() : std::vector<Param>{};
    expect(TokenKind::LBrace, "'{'");
    w.body = items();
    w.id = finish(m);
    (touch ? module_.touches : module_.widgets).push_back(std::move(w));
  }

  void global_var() {
    Mark m = begin();
    advance();
    GlobalVar v;
    v.name = expect_ident("a variable name");
    if (match(TokenKind::Assign)) v.init = expression();
    match(TokenKind::Semicolon);
    v.id = finish(m);
    module_.variables.push_back(std::move(v));
  }

  // -- statements ----------------------------------------------------------

  std::vector<Stmt> block() {
    expect(TokenKind::LBrace, "'{'");
    std::vector<Stmt> out;
    while (!check(TokenKind::RBrace)) {
      if (at_end()) expect(TokenKind::RBrace, "'}'");
      if (match(TokenKind::Semicolon)) continue;
      out.push_back(statement());
    }
    advance();
    return out;
  }

  std::vector<Stmt> body_or_single() {
    if (check(TokenKind::LBrace)) return block();
    std::vector<Stmt> out;
    out.push_back(statement());
    return out;
  }

  bool check_foreach() const {
    return check(TokenKind::KwForeach) ||
           (check(TokenKind::KwFor) && check(TokenKind::Identifier, 1) && peek(1).text == "each");
  }

  void consume_foreach() {
    if (match(TokenKind::KwForeach)) return;
    advance();
    advance();
  }

  void end_statement() {
    if (check(TokenKind::RBrace) || check(TokenKind::RParen)) return;
    expect(TokenKind::Semicolon, "';'");
  }

  bool check_else_if() const {
    return check(TokenKind::KwElseif) || (check(TokenKind::KwElse) && check(TokenKind::KwIf, 1));
  }

  void consume_else_if() {
    if (match(TokenKind::KwElseif)) return;
    advance();
    advance();
  }

  VarStmt var_stmt() {
    advance();
    VarStmt v;
    v.name = expect_ident("a variable name");
    if (match(TokenKind::Assign)) v.init = expression();
    end_statement();
    return v;
  }

  Stmt statement() {
    DepthGuard g(*this);
    Mark m = begin();
    Stmt s;
    switch (peek().kind) {
      case TokenKind::KwVar:
        s.node = var_stmt();
        break;
      case TokenKind::KwForeach:
      case TokenKind::KwFor: {
        if (!check_foreach()) unexpected("'each' after 'for'");
        consume_foreach();
        ForeachStmt f;
        expect(TokenKind::LParen, "'('");
        f.var = expect_ident("a loop variable");
        expect(TokenKind::KwIn, "'in'");
        f.iterable = expression();
        expect(TokenKind::RParen, "')'");
        f.body = body_or_single();
        s.node = std::move(f);
        break;
      }
      case TokenKind::KwIf: {
        advance();
        IfStmt st;
        st.branches.push_back(if_branch());
        while (check_else_if()) {
          consume_else_if();
          st.branches.push_back(if_branch());
        }
        if (match(TokenKind::KwElse)) st.else_body = body_or_single();
        s.node = std::move(st);
        break;
      }
      case TokenKind::KwReturn: {
        advance();
        ReturnStmt r;
        if (!check(TokenKind::Semicolon) && !check(TokenKind::RBrace)) r.value = expression();
        end_statement();
        s.node = std::move(r);
        break;
      }
      case TokenKind::KwFunction: {
        advance();
        FunctionStmt f;
        f.name = expect_ident("a function name");
        f.params = params();
        f.body = block();
        s.node = std::move(f);
        break;
      }
      default: {
        Expr e = expression();
        if (match(TokenKind::Assign)) {
          AssignStmt a{std::move(e), expression()};
          s.node = std::move(a);
        } else {
          s.node = ExprStmt{std::move(e)};
        }
        end_statement();
      }
    }
    s.id = finish(m);
    return s;
  }

  IfBranch if_branch() {
    expect(TokenKind::LParen, "'('");
    IfBranch b;
    b.condition = expression();
    expect(TokenKind::RParen, "')'");
    b.body = body_or_single();
    return b;
  }

  // -- expressions ---------------------------------------------------------

  Expr expression() {
    DepthGuard g(*this);
    return binary(0);
  }

  static int precedence(TokenKind k) {
    switch (k) {
      case TokenKind::OrOr: return 1;
      case TokenKind::AndAnd: return 2;
      case TokenKind::EqEq:
      case TokenKind::NotEq:
      case TokenKind::Less:
      case TokenKind::Greater:
      case TokenKind::LessEq:
      case TokenKind::GreaterEq:
      case TokenKind::KwIn: return 3;
      case TokenKind::Plus:
      case TokenKind::Minus: return 4;
      case TokenKind::Star:
      case TokenKind::Percent: return 5;
      default: return 0;
    }
  }

  static BinaryOp binary_op(TokenKind k) {
    switch (k) {
      case TokenKind::OrOr: return BinaryOp::Or;
      case TokenKind::AndAnd: return BinaryOp::And;
      case TokenKind::EqEq: return BinaryOp::Eq;
      case TokenKind::NotEq: return BinaryOp::NotEq;
      case TokenKind::Less: return BinaryOp::Less;
      case TokenKind::Greater: return BinaryOp::Greater;
      case TokenKind::LessEq: return BinaryOp::LessEq;
      case TokenKind::GreaterEq: return BinaryOp::GreaterEq;
      case TokenKind::KwIn: return BinaryOp::In;
      case TokenKind::Plus: return BinaryOp::Add;
      case TokenKind::Minus: return BinaryOp::Sub;
      case TokenKind::Star: return BinaryOp::Mul;
      default: return BinaryOp::Mod;
    }
  }

  // Precedence climbing; all binary operators are left-associative.
  Expr binary(int min_prec) {
    Mark m = begin();
    Expr lhs = unary();
    for (;;) {
      int prec = at_end() ? 0 : precedence(peek().kind);
      if (prec == 0 || prec <= min_prec) break;
      BinaryOp op = binary_op(advance().kind);
      DepthGuard g(*this);
      Expr rhs = binary(prec);
      Expr e;
      e.node = BinaryExpr{op, std::move(lhs), std::move(rhs)};
      e.id = finish(m);
      lhs = std::move(e);
    }
    return lhs;
  }

  Expr unary() {
    DepthGuard g(*this);
    if (check(TokenKind::Bang) || check(TokenKind::Minus)) {
      Mark m = begin();
      UnaryOp op = advance().kind == TokenKind::Bang ? UnaryOp::Not : UnaryOp::Negate;
      Expr operand = unary();
      Expr e;
      e.node = UnaryExpr{op, std::move(operand)};
      e.id = finish(m);
      return e;
    }
    return postfix();
  }

  std::vector<Expr> arguments() {
    std::vector<Expr> args;
    expect(TokenKind::LParen, "'('");
    if (match(TokenKind::RParen)) return args;
    do {
      args.push_back(expression());
    } while (match(TokenKind::Comma));
    expect(TokenKind::RParen, "')'");
    return args;
  }

  Expr postfix() {
    Mark m = begin();
    Expr e = primary();
    for (;;) {
      if (check(TokenKind::Dot)) {
        advance();
        if (!check_word()) unexpected("a member name");
        std::string member = advance().text;
        Expr outer;
        outer.node = MemberExpr{std::move(e), std::move(member)};
        outer.id = finish(m);
        e = std::move(outer);
      } else if (check(TokenKind::LParen)) {
        DepthGuard g(*this);
        std::vector<Expr> args = arguments();
        Expr outer;
        outer.node = CallExpr{std::move(e), std::move(args)};
        outer.id = finish(m);
        e = std::move(outer);
      } else {
        return e;
      }
    }
  }

  Expr primary() {
    Mark m = begin();
    Expr e;
    const Token& t = peek();
    switch (t.kind) {
      case TokenKind::String:
        e.node = LiteralExpr{LiteralExpr::Kind::String, t.text, 0, false};
        advance();
        break;
      case TokenKind::Integer:
        e.node = LiteralExpr{LiteralExpr::Kind::Int, t.text, std::stoll(t.text), false};
        advance();
        break;
      case TokenKind::DateTime:
        e.node = LiteralExpr{LiteralExpr::Kind::DateTime, t.text, 0, false};
        advance();
        break;
      case TokenKind::KwTrue:
      case TokenKind::KwFalse:
        e.node = LiteralExpr{LiteralExpr::Kind::Boolean, t.text, 0, t.kind == TokenKind::KwTrue};
        advance();
        break;
      case TokenKind::Identifier:
      case TokenKind::KwScreen:
        e.node = NameExpr{t.text};
        advance();
        break;
      case TokenKind::LParen: {
        advance();
        Expr inner = expression();
        expect(TokenKind::RParen, "')'");
        return inner;
      }
      case TokenKind::LBrace: {
        DepthGuard g(*this);
        e.node = BlockExpr{block()};
        break;
      }
      case TokenKind::KwNew: {
        advance();
        NewExpr n;
        n.screen = expect_ident("a screen name after 'new'");
        n.args = arguments();
        e.node = std::move(n);
        break;
      }
      default:
        unexpected("an expression");
    }
    e.id = finish(m);
    return e;
  }

  // -- screen items --------------------------------------------------------

  // Parses items up to and including the closing '}'.
  std::vector<ScreenItem> items() {
    std::vector<ScreenItem> out;
    while (!check(TokenKind::RBrace)) {
      if (at_end()) expect(TokenKind::RBrace, "'}'");
      if (match(TokenKind::Semicolon)) continue;
      out.push_back(item());
    }
    advance();
    return out;
  }

  bool check_rule_if() const {
    return check(TokenKind::KwIf) && check(TokenKind::LParen, 1) &&
           (check(TokenKind::KwWhen, 2) || check(TokenKind::KwWhere, 2));
  }

  bool check_element_start() const {
    if (check(TokenKind::Less) && check(TokenKind::Identifier, 1)) return true;
    if (!check(TokenKind::Identifier)) return false;
    if (check(TokenKind::LBrace, 1)) return true;
    return check(TokenKind::LParen, 1) && is_element_tag(peek().text);
  }

  ScreenItem item() {
    DepthGuard g(*this);
    Mark m = begin();
    ScreenItem it;
    switch (peek().kind) {
      case TokenKind::KwHeader: {
        advance();
        expect(TokenKind::LParen, "'('");
        HeaderItem h;
        h.title = expression();
        expect(TokenKind::RParen, "')'");
        if (match(TokenKind::LBrace)) {
          h.body = items();
        } else {
          match(TokenKind::Semicolon);
        }
        it.node = std::move(h);
        break;
      }
      case TokenKind::KwImport: {
        advance();
        expect(TokenKind::LParen, "'('");
        ImportItem imp{expression()};
        expect(TokenKind::RParen, "')'");
        match(TokenKind::Semicolon);
        it.node = std::move(imp);
        break;
      }
      case TokenKind::KwHandler: {
        advance();
        expect(TokenKind::LBrace, "'{'");
        it.node = HandlerItem{items()};
        break;
      }
      case TokenKind::KwWhen:
      case TokenKind::KwWhere: {
        RuleItem r;
        r.rule.branches.push_back({context(), adaptation()});
        rule_tail(r.rule);
        it.node = std::move(r);
        break;
      }
      case TokenKind::KwVar:
        it.node = VarItem{var_stmt()};
        break;
      case TokenKind::KwForeach:
      case TokenKind::KwFor: {
        if (!check_foreach()) unexpected("'each' after 'for'");
        consume_foreach();
        ForeachItem f;
        expect(TokenKind::LParen, "'('");
        f.var = expect_ident("a loop variable");
        expect(TokenKind::KwIn, "'in'");
        f.iterable = expression();
        expect(TokenKind::RParen, "')'");
        f.body = adaptation();
        it.node = std::move(f);
        break;
      }
      default:
        if (check_rule_if()) {
          advance();
          expect(TokenKind::LParen, "'('");
          RuleItem r;
          Context c = context();
          expect(TokenKind::RParen, "')'");
          r.rule.branches.push_back({std::move(c), adaptation()});
          rule_tail(r.rule);
          it.node = std::move(r);
        } else if (check_element_start()) {
          it.node = element();
        } else {
          it.node = StmtItem{statement()};
        }
    }
    it.id = finish(m);
    return it;
  }

  Context context() {
    Context c;
    c.trigger = advance().kind == TokenKind::KwWhere ? ContextTrigger::Where : ContextTrigger::When;
    expect(TokenKind::LParen, "'('");
    c.condition = expression();
    expect(TokenKind::RParen, "')'");
    return c;
  }

  // `(when (c))` or `(where (c))` as used after elseif/else.
  Context wrapped_context() {
    expect(TokenKind::LParen, "'('");
    if (!check(TokenKind::KwWhen) && !check(TokenKind::KwWhere)) unexpected("'when' or 'where'");
    Context c = context();
    expect(TokenKind::RParen, "')'");
    return c;
  }

  void rule_tail(Rule& r) {
    for (;;) {
      if (check_else_if()) {
        consume_else_if();
        Context c = wrapped_context();
        r.branches.push_back({std::move(c), adaptation()});
      } else if (check(TokenKind::KwElse)) {
        advance();
        if (check(TokenKind::LParen)) {
          // `else (when (c)) {...}` behaves as one more conditional branch.
          Context c = wrapped_context();
          r.branches.push_back({std::move(c), adaptation()});
        } else {
          r.otherwise = adaptation();
          return;
        }
      } else {
        return;
      }
    }
  }

  std::vector<ScreenItem> adaptation() {
    if (match(TokenKind::LBrace)) return items();
    std::vector<ScreenItem> out;
    out.push_back(item());
    return out;
  }

  Element element() {
    if (check(TokenKind::Less)) return markup();
    Element el;
    el.tag = advance().text;
    TokenKind close = advance().kind == TokenKind::LBrace ? TokenKind::RBrace : TokenKind::RParen;
    while (!check(close)) {
      if (at_end()) expect(close, close == TokenKind::RBrace ? "'}'" : "')'");
      if (match(TokenKind::Comma) || match(TokenKind::Semicolon)) continue;
      element_entry(el);
    }
    advance();
    return el;
  }

  void element_entry(Element& el) {
    DepthGuard g(*this);
    if (check(TokenKind::Identifier) && check(TokenKind::Assign, 1)) {
      Attribute a;
      a.name = advance().text;
      advance();
      a.value = expression();
      el.attributes.push_back(std::move(a));
      return;
    }
    if (check_element_start() || check_foreach() || check_rule_if()) {
      // Nested elements, repetitions and rules become child items.
      el.children.push_back(item());
      return;
    }
    switch (peek().kind) {
      case TokenKind::KwVar:
      case TokenKind::KwIf:
      case TokenKind::KwFor:
      case TokenKind::KwReturn:
      case TokenKind::KwFunction:
        el.actions.push_back(statement());
        return;
      default:
        break;
    }
    Mark m = begin();
    Expr e = expression();
    if (check(TokenKind::Assign)) {
      advance();
      Stmt s;
      s.node = AssignStmt{std::move(e), expression()};
      end_statement();
      s.id = finish(m);
      el.actions.push_back(std::move(s));
    } else if (check(TokenKind::Semicolon)) {
      advance();
      Stmt s;
      s.node = ExprStmt{std::move(e)};
      s.id = finish(m);
      el.actions.push_back(std::move(s));
    } else {
      el.contents.push_back(std::move(e));
    }
  }

  Element markup() {
    expect(TokenKind::Less, "'<'");
    Element el;
    el.markup = true;
    el.tag = expect_ident("a tag name");
    for (;;) {
      if (match(TokenKind::Comma)) continue;
      if (check(TokenKind::Slash)) {
        advance();
        expect(TokenKind::Greater, "'>'");
        return el;
      }
      if (match(TokenKind::Greater)) break;
      if (!check_word()) unexpected("an attribute, '/>' or '>'");
      Attribute a;
      Mark m = begin();
      a.name = advance().text;
      if (match(TokenKind::Assign)) {
        DepthGuard g(*this);
        a.value = check(TokenKind::LBrace) ? primary() : unary();
      } else {
        a.value.node = LiteralExpr{LiteralExpr::Kind::Boolean, "true", 0, true};
        a.value.id = finish(m);
      }
      el.attributes.push_back(std::move(a));
    }
    // Children up to the matching close tag.
    for (;;) {
      if (at_end()) expect(TokenKind::Less, "'</" + el.tag + ">'");
      if (check(TokenKind::Less) && check(TokenKind::Slash, 1)) {
        advance();
        advance();
        std::string closing = expect_ident("a closing tag name");
        if (closing != el.tag) {
          --pos_;
          fail(DiagCode::UnexpectedToken,
               "closing tag '" + closing + "' does not match '<" + el.tag + ">'");
        }
        expect(TokenKind::Greater, "'>'");
        return el;
      }
      if (match(TokenKind::Semicolon) || match(TokenKind::Comma)) continue;
      if (check(TokenKind::String)) {
        el.contents.push_back(primary());
        continue;
      }
      el.children.push_back(item());
    }
  }

  const std::vector<Token>& toks_;
  std::size_t pos_ = 0;
  Token eof_;
  int depth_ = 0;
  NodeId next_id_ = 0;
  DslModule module_;
  Diagnostics diags_;
};

}  // namespace

bool is_element_tag(std::string_view name) {
  return std::find(kElementTags.begin(), kElementTags.end(), name) != kElementTags.end();
}

ParseResult parse(const std::vector<Token>& tokens, std::string module_name) {
  return Parser(tokens, std::move(module_name)).run();
}

ParseResult parse_source(std::string_view source, std::string module_name) {
  TokenStream ts = tokenize(source);
  ParseResult r = parse(ts.tokens, std::move(module_name));
  Diagnostics merged = std::move(ts.diagnostics);
  merged.insert(merged.end(), r.diagnostics.begin(), r.diagnostics.end());
  std::stable_sort(merged.begin(), merged.end(), [](const Diagnostic& a, const Diagnostic& b) {
    return a.location.offset < b.location.offset;
  });
  r.diagnostics = std::move(merged);
  return r;
}

}  // namespace muit::dsl
