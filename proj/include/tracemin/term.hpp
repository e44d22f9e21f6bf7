#pragma once

// First-order terms: the common currency for trace files, datasets, queries
// and fault patterns. Provides the reader/writer for the concrete text
// syntax (quoted atoms, integers, strings, compounds, list sugar, % comments)
// and standard unification without occurs check.

#include <compare>
#include <charconv>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tracemin {

/// Error raised by all text readers in this library. Positions are 1-based.
class parse_error : public std::runtime_error {
 public:
  parse_error(const std::string& message, int line, int column)
      : std::runtime_error(message + " at line " + std::to_string(line) +
                           ", column " + std::to_string(column)),
        line_(line),
        column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

enum class TermKind { variable, symbol, integer, string, compound };

/// Immutable first-order term: a variable, an atomic constant (symbol,
/// integer or string), or a compound with at least one argument.
/// Zero-argument compounds are represented as symbol constants. Copies share
/// structure and are cheap; terms are safe to share across threads.
///
/// Symbols and compound functors carry a display hint recording whether the
/// source spelled them quoted ('c' vs c). The hint affects printing only;
/// equality, ordering and unification ignore it.
class Term {
 public:
  /// Default-constructs the empty-list constant `[]`.
  Term() : node_(nil_node()) {}

  static Term variable(std::string name) {
    if (name.empty() || !(is_upper_(name[0]) || name[0] == '_'))
      throw std::invalid_argument("variable name must start with an uppercase letter or '_': " + name);
    return Term(std::make_shared<const Node>(Node{TermKind::variable, false, 0, std::move(name), {}}));
  }

  static Term symbol(std::string name, bool quoted = false) {
    return Term(std::make_shared<const Node>(Node{TermKind::symbol, quoted, 0, std::move(name), {}}));
  }

  static Term integer(long long value) {
    return Term(std::make_shared<const Node>(Node{TermKind::integer, false, value, {}, {}}));
  }

  static Term str(std::string value) {
    return Term(std::make_shared<const Node>(Node{TermKind::string, false, 0, std::move(value), {}}));
  }

  static Term compound(std::string functor, std::vector<Term> args, bool quoted = false) {
    if (functor.empty()) throw std::invalid_argument("compound functor must be nonempty");
    if (args.empty()) throw std::invalid_argument("compound arity must be >= 1; use a symbol constant");
    return Term(std::make_shared<const Node>(
        Node{TermKind::compound, quoted, 0, std::move(functor), std::move(args)}));
  }

  /// Builds the cons-cell encoding of a proper list: [a,b] = '.'(a,'.'(b,[])).
  static Term list(std::span<const Term> items) {
    Term tail;  // []
    for (auto it = items.rbegin(); it != items.rend(); ++it)
      tail = compound(".", {*it, tail});
    return tail;
  }

  TermKind kind() const noexcept { return node_->kind; }
  bool is_variable() const noexcept { return kind() == TermKind::variable; }
  bool is_symbol() const noexcept { return kind() == TermKind::symbol; }
  bool is_integer() const noexcept { return kind() == TermKind::integer; }
  bool is_string() const noexcept { return kind() == TermKind::string; }
  bool is_compound() const noexcept { return kind() == TermKind::compound; }
  bool is_constant() const noexcept { return is_symbol() || is_integer() || is_string(); }
  /// A term an atom position may hold: a symbol or a compound.
  bool is_callable() const noexcept { return is_symbol() || is_compound(); }

  /// Variable name, symbol text, or compound functor.
  const std::string& name() const {
    if (is_integer() || is_string()) throw std::logic_error("Term::name on integer/string");
    return node_->text;
  }

  long long int_value() const {
    if (!is_integer()) throw std::logic_error("Term::int_value on non-integer");
    return node_->value;
  }

  const std::string& string_value() const {
    if (!is_string()) throw std::logic_error("Term::string_value on non-string");
    return node_->text;
  }

  const std::vector<Term>& args() const {
    static const std::vector<Term> none;
    return is_compound() ? node_->args : none;
  }

  std::size_t arity() const noexcept { return is_compound() ? node_->args.size() : 0; }

  /// Display hint: the source spelled this symbol/functor with quotes.
  bool display_quoted() const noexcept { return node_->quoted; }

  bool is_ground() const {
    if (is_variable()) return false;
    for (const Term& a : args())
      if (!a.is_ground()) return false;
    return true;
  }

  /// Appends variable names in first-occurrence order, skipping duplicates.
  void collect_variables(std::vector<std::string>& out) const {
    if (is_variable()) {
      for (const auto& n : out)
        if (n == node_->text) return;
      out.push_back(node_->text);
      return;
    }
    for (const Term& a : args()) a.collect_variables(out);
  }

  friend std::strong_ordering operator<=>(const Term& a, const Term& b) {
    if (a.node_ == b.node_) return std::strong_ordering::equal;
    if (auto c = a.kind() <=> b.kind(); c != 0) return c;
    switch (a.kind()) {
      case TermKind::variable:
      case TermKind::symbol:
      case TermKind::string:
        return a.node_->text <=> b.node_->text;
      case TermKind::integer:
        return a.node_->value <=> b.node_->value;
      case TermKind::compound: {
        if (auto c = a.node_->text <=> b.node_->text; c != 0) return c;
        if (auto c = a.node_->args.size() <=> b.node_->args.size(); c != 0) return c;
        for (std::size_t i = 0; i < a.node_->args.size(); ++i)
          if (auto c = a.node_->args[i] <=> b.node_->args[i]; c != 0) return c;
        return std::strong_ordering::equal;
      }
    }
    return std::strong_ordering::equal;
  }

  friend bool operator==(const Term& a, const Term& b) { return (a <=> b) == std::strong_ordering::equal; }

 private:
  struct Node {
    TermKind kind;
    bool quoted;
    long long value;
    std::string text;
    std::vector<Term> args;
  };

  explicit Term(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  static bool is_upper_(char c) { return c >= 'A' && c <= 'Z'; }

  static const std::shared_ptr<const Node>& nil_node() {
    static const std::shared_ptr<const Node> nil =
        std::make_shared<const Node>(Node{TermKind::symbol, false, 0, "[]", {}});
    return nil;
  }

  std::shared_ptr<const Node> node_;
};

namespace detail {

inline bool is_lower(char c) { return c >= 'a' && c <= 'z'; }
inline bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
inline bool is_digit(char c) { return c >= '0' && c <= '9'; }
inline bool is_ident(char c) { return is_lower(c) || is_upper(c) || is_digit(c) || c == '_'; }

// Internal variable-name prefixes. '#' cannot appear in parsed names, so
// generated variables never collide with user variables.
inline constexpr std::string_view anon_prefix = "_#a";

inline bool is_internal_var(std::string_view name) {
  return name.size() >= 2 && name[0] == '_' && name[1] == '#';
}

}  // namespace detail

/// True when a symbol cannot be written bare and must be quoted.
inline bool symbol_needs_quotes(std::string_view text) {
  if (text == "[]") return false;
  if (text.empty() || !detail::is_lower(text[0])) return true;
  for (char c : text)
    if (!detail::is_ident(c)) return true;
  return false;
}

namespace detail {

inline void write_quoted(std::ostream& os, std::string_view text, char quote) {
  os << quote;
  for (char c : text) {
    switch (c) {
      case '\\': os << "\\\\"; break;
      case '\n': os << "\\n"; break;
      case '\t': os << "\\t"; break;
      default:
        if (c == quote) os << '\\';
        os << c;
    }
  }
  os << quote;
}

inline void write_functor(std::ostream& os, const std::string& text, bool quoted_hint) {
  if (quoted_hint || symbol_needs_quotes(text))
    write_quoted(os, text, '\'');
  else
    os << text;
}

}  // namespace detail

inline void write_term(std::ostream& os, const Term& t) {
  switch (t.kind()) {
    case TermKind::variable:
      if (detail::is_internal_var(t.name()))
        os << '_';
      else
        os << t.name();
      return;
    case TermKind::symbol:
      detail::write_functor(os, t.name(), t.display_quoted());
      return;
    case TermKind::integer:
      os << t.int_value();
      return;
    case TermKind::string:
      detail::write_quoted(os, t.string_value(), '"');
      return;
    case TermKind::compound:
      break;
  }
  if (t.name() == "." && t.arity() == 2) {
    // List sugar: [a,b,...] or [a,b|Tail].
    os << '[';
    const Term* cell = &t;
    bool first = true;
    for (;;) {
      if (!first) os << ',';
      write_term(os, cell->args()[0]);
      first = false;
      const Term& tail = cell->args()[1];
      if (tail.is_compound() && tail.name() == "." && tail.arity() == 2) {
        cell = &tail;
        continue;
      }
      if (!(tail.is_symbol() && tail.name() == "[]")) {
        os << '|';
        write_term(os, tail);
      }
      break;
    }
    os << ']';
    return;
  }
  if (t.name() == "," && t.arity() == 2) {
    // Conjunctions print parenthesized so they survive argument positions.
    os << '(';
    const Term* cur = &t;
    for (;;) {
      write_term(os, cur->args()[0]);
      const Term& rest = cur->args()[1];
      os << ',';
      if (rest.is_compound() && rest.name() == "," && rest.arity() == 2) {
        cur = &rest;
        continue;
      }
      write_term(os, rest);
      break;
    }
    os << ')';
    return;
  }
  detail::write_functor(os, t.name(), t.display_quoted());
  os << '(';
  for (std::size_t i = 0; i < t.args().size(); ++i) {
    if (i) os << ',';
    write_term(os, t.args()[i]);
  }
  os << ')';
}

inline std::string print_term(const Term& t) {
  std::ostringstream os;
  write_term(os, t);
  return os.str();
}

inline std::ostream& operator<<(std::ostream& os, const Term& t) {
  write_term(os, t);
  return os;
}

/// Variable bindings, name-keyed. Immutable from the caller's point of view:
/// unify takes a Substitution by value and returns the extension.
class Substitution {
 public:
  bool empty() const noexcept { return bindings_.empty(); }
  std::size_t size() const noexcept { return bindings_.size(); }

  const Term* lookup(const std::string& name) const {
    auto it = bindings_.find(name);
    return it == bindings_.end() ? nullptr : &it->second;
  }

  void bind(std::string name, Term value) {
    auto [it, inserted] = bindings_.emplace(std::move(name), std::move(value));
    if (!inserted) throw std::logic_error("Substitution::bind: variable already bound: " + it->first);
  }

  /// Dereferences variable chains one level at a time until a non-variable
  /// or an unbound variable is reached. Does not descend into compounds.
  Term walk(Term t) const {
    while (t.is_variable()) {
      const Term* bound = lookup(t.name());
      if (!bound) break;
      t = *bound;
    }
    return t;
  }

  /// Fully resolves a term: every bound variable is replaced, recursively.
  /// Idempotent for well-formed (acyclic) substitutions.
  Term apply(const Term& t) const {
    Term w = walk(t);
    if (!w.is_compound()) return w;
    std::vector<Term> args;
    args.reserve(w.args().size());
    for (const Term& a : w.args()) args.push_back(apply(a));
    return Term::compound(w.name(), std::move(args), w.display_quoted());
  }

  auto begin() const { return bindings_.begin(); }
  auto end() const { return bindings_.end(); }

 private:
  std::map<std::string, Term> bindings_;
};

namespace detail {

inline bool unify_into(const Term& a0, const Term& b0, Substitution& s) {
  Term a = s.walk(a0);
  Term b = s.walk(b0);
  if (a.is_variable()) {
    if (b.is_variable() && b.name() == a.name()) return true;
    s.bind(a.name(), b);
    return true;
  }
  if (b.is_variable()) {
    s.bind(b.name(), a);
    return true;
  }
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case TermKind::symbol: return a.name() == b.name();
    case TermKind::integer: return a.int_value() == b.int_value();
    case TermKind::string: return a.string_value() == b.string_value();
    case TermKind::compound: {
      if (a.name() != b.name() || a.arity() != b.arity()) return false;
      for (std::size_t i = 0; i < a.arity(); ++i)
        if (!unify_into(a.args()[i], b.args()[i], s)) return false;
      return true;
    }
    default: return false;
  }
}

}  // namespace detail

/// Most general unifier extending `s`, or nullopt when none exists.
/// No occurs check, matching conventional engine behavior.
inline std::optional<Substitution> unify(const Term& a, const Term& b, Substitution s = {}) {
  if (detail::unify_into(a, b, s)) return s;
  return std::nullopt;
}

/// Structural equality modulo a consistent (bijective) renaming of variables.
inline bool equal_up_to_renaming(const Term& a, const Term& b) {
  struct Walk {
    std::map<std::string, std::string> fwd, rev;
    bool go(const Term& x, const Term& y) {
      if (x.is_variable() != y.is_variable()) return false;
      if (x.is_variable()) {
        auto f = fwd.find(x.name());
        auto r = rev.find(y.name());
        if (f == fwd.end() && r == rev.end()) {
          fwd.emplace(x.name(), y.name());
          rev.emplace(y.name(), x.name());
          return true;
        }
        return f != fwd.end() && r != rev.end() && f->second == y.name() && r->second == x.name();
      }
      if (x.kind() != y.kind()) return false;
      switch (x.kind()) {
        case TermKind::symbol: return x.name() == y.name();
        case TermKind::integer: return x.int_value() == y.int_value();
        case TermKind::string: return x.string_value() == y.string_value();
        case TermKind::compound: {
          if (x.name() != y.name() || x.arity() != y.arity()) return false;
          for (std::size_t i = 0; i < x.arity(); ++i)
            if (!go(x.args()[i], y.args()[i])) return false;
          return true;
        }
        default: return false;
      }
    }
  } w;
  return w.go(a, b);
}

namespace detail {

inline void flatten_conjunction(const Term& t, std::vector<Term>& atoms) {
  if (t.is_compound() && t.name() == "," && t.arity() == 2) {
    flatten_conjunction(t.args()[0], atoms);
    flatten_conjunction(t.args()[1], atoms);
    return;
  }
  if (t.is_symbol() && t.name() == "true") return;
  atoms.push_back(t);
}

}  // namespace detail

/// Flattens a ','/2 tree (any nesting) into its atoms. The symbol `true`
/// is the empty conjunction and is dropped wherever it appears.
inline std::vector<Term> conjunction_atoms(const Term& t) {
  std::vector<Term> atoms;
  detail::flatten_conjunction(t, atoms);
  return atoms;
}

/// Folds atoms back into a right-nested ','/2 chain; empty folds to `true`.
inline Term conjunction_term(std::span<const Term> atoms) {
  if (atoms.empty()) return Term::symbol("true");
  Term t = atoms.back();
  for (std::size_t i = atoms.size() - 1; i-- > 0;)
    t = Term::compound(",", {atoms[i], t});
  return t;
}

namespace detail {

struct Token {
  enum class Kind {
    atom, variable, integer, str,
    lparen, rparen, lbracket, rbracket,
    comma, bar, dot, neck, eof
  };
  Kind kind = Kind::eof;
  std::string text;
  bool quoted = false;
  long long value = 0;
  int line = 1;
  int column = 1;
  int blank_lines_before = 0;
};

inline std::string describe_token(const Token& t) {
  using K = Token::Kind;
  switch (t.kind) {
    case K::atom: return "atom '" + t.text + "'";
    case K::variable: return "variable '" + t.text + "'";
    case K::integer: return "integer " + std::to_string(t.value);
    case K::str: return "string";
    case K::lparen: return "'('";
    case K::rparen: return "')'";
    case K::lbracket: return "'['";
    case K::rbracket: return "']'";
    case K::comma: return "','";
    case K::bar: return "'|'";
    case K::dot: return "'.'";
    case K::neck: return "':-'";
    case K::eof: return "end of input";
  }
  return "?";
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    skip_layout_();
    Token tok;
    tok.line = line_;
    tok.column = col_;
    tok.blank_lines_before = pending_blanks_;
    pending_blanks_ = 0;
    if (at_end_()) return tok;  // eof
    line_had_content_ = true;
    char c = peek_();
    switch (c) {
      case '(': bump_(); tok.kind = Token::Kind::lparen; return tok;
      case ')': bump_(); tok.kind = Token::Kind::rparen; return tok;
      case '[': bump_(); tok.kind = Token::Kind::lbracket; return tok;
      case ']': bump_(); tok.kind = Token::Kind::rbracket; return tok;
      case ',': bump_(); tok.kind = Token::Kind::comma; return tok;
      case '|': bump_(); tok.kind = Token::Kind::bar; return tok;
      case '.': {
        char after = peek_(1);
        if (after == '\0' || after == ' ' || after == '\t' || after == '\r' ||
            after == '\n' || after == '%' || after == '\v' || after == '\f') {
          bump_();
          tok.kind = Token::Kind::dot;
          return tok;
        }
        throw parse_error("'.' must be followed by whitespace or end of input", line_, col_);
      }
      case ':':
        if (peek_(1) == '-') {
          bump_(); bump_();
          tok.kind = Token::Kind::neck;
          return tok;
        }
        throw parse_error("unexpected ':'", line_, col_);
      case '\'':
        tok.kind = Token::Kind::atom;
        tok.quoted = true;
        tok.text = lex_quoted_('\'', "unterminated quoted atom");
        return tok;
      case '"':
        tok.kind = Token::Kind::str;
        tok.text = lex_quoted_('"', "unterminated string");
        return tok;
      default:
        break;
    }
    if (is_digit(c) || (c == '-' && is_digit(peek_(1)))) {
      std::string digits;
      if (c == '-') {
        digits.push_back('-');
        bump_();
      }
      while (!at_end_() && is_digit(peek_())) {
        digits.push_back(peek_());
        bump_();
      }
      long long value = 0;
      auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
      if (ec != std::errc() || p != digits.data() + digits.size())
        throw parse_error("integer literal out of range", tok.line, tok.column);
      tok.kind = Token::Kind::integer;
      tok.value = value;
      return tok;
    }
    if (is_lower(c) || is_upper(c) || c == '_') {
      std::string text;
      while (!at_end_() && is_ident(peek_())) {
        text.push_back(peek_());
        bump_();
      }
      tok.kind = is_lower(c) ? Token::Kind::atom : Token::Kind::variable;
      tok.text = std::move(text);
      return tok;
    }
    throw parse_error(std::string("unexpected character '") + c + "'", line_, col_);
  }

 private:
  bool at_end_() const { return pos_ >= src_.size(); }
  char peek_(std::size_t off = 0) const { return pos_ + off < src_.size() ? src_[pos_ + off] : '\0'; }

  void bump_() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_layout_() {
    for (;;) {
      if (at_end_()) return;
      char c = peek_();
      if (c == '\n') {
        if (!line_had_content_) ++pending_blanks_;
        line_had_content_ = false;
        bump_();
        continue;
      }
      if (c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f') {
        bump_();
        continue;
      }
      if (c == '%') {
        line_had_content_ = true;
        while (!at_end_() && peek_() != '\n') bump_();
        continue;
      }
      return;
    }
  }

  std::string lex_quoted_(char quote, const char* unterminated_msg) {
    int open_line = line_, open_col = col_;
    bump_();  // opening quote
    std::string out;
    for (;;) {
      if (at_end_()) throw parse_error(unterminated_msg, open_line, open_col);
      char c = peek_();
      if (c == quote) {
        // doubled quote is an escaped quote
        if (peek_(1) == quote) {
          out.push_back(quote);
          bump_();
          bump_();
          continue;
        }
        bump_();
        return out;
      }
      if (c == '\\') {
        bump_();
        if (at_end_()) throw parse_error(unterminated_msg, open_line, open_col);
        char e = peek_();
        switch (e) {
          case 'n': out.push_back('\n'); break;
          case 't': out.push_back('\t'); break;
          case '\\': out.push_back('\\'); break;
          case '\'': out.push_back('\''); break;
          case '"': out.push_back('"'); break;
          default:
            throw parse_error(std::string("unknown escape '\\") + e + "'", line_, col_);
        }
        bump_();
        continue;
      }
      out.push_back(c);
      bump_();
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  int pending_blanks_ = 0;
  bool line_had_content_ = false;
};

}  // namespace detail

/// One `term.` or `head :- body.` read from an input file.
struct Sentence {
  Term head;
  std::vector<Term> body;  // empty for facts
  bool is_rule = false;
  int blank_lines_before = 0;
  int line = 1;
};

namespace detail {

class Parser {
 public:
  explicit Parser(std::string_view src) : lex_(src) { cur_ = lex_.next(); }

  Term parse_single_term() {
    Term t = parse_term();
    if (cur_.kind == Token::Kind::dot) advance_();
    if (cur_.kind != Token::Kind::eof) fail_("unexpected trailing input");
    return t;
  }

  std::optional<Sentence> next_sentence() {
    if (cur_.kind == Token::Kind::eof) return std::nullopt;
    anon_counter_ = 0;
    Sentence s;
    s.blank_lines_before = cur_.blank_lines_before;
    s.line = cur_.line;
    s.head = parse_term();
    if (cur_.kind == Token::Kind::neck) {
      advance_();
      s.is_rule = true;
      std::vector<Term> parts;
      parts.push_back(parse_term());
      while (cur_.kind == Token::Kind::comma) {
        advance_();
        parts.push_back(parse_term());
      }
      s.body = conjunction_atoms(conjunction_term(parts));
    }
    if (cur_.kind != Token::Kind::dot) fail_("expected '.' at end of clause");
    advance_();
    return s;
  }

  Term parse_term() {
    using K = Token::Kind;
    switch (cur_.kind) {
      case K::integer: {
        Term t = Term::integer(cur_.value);
        advance_();
        return t;
      }
      case K::str: {
        Term t = Term::str(cur_.text);
        advance_();
        return t;
      }
      case K::variable: {
        Term t = cur_.text == "_"
                     ? Term::variable(std::string(anon_prefix) + std::to_string(++anon_counter_))
                     : Term::variable(cur_.text);
        advance_();
        return t;
      }
      case K::atom: {
        std::string name = cur_.text;
        bool quoted = cur_.quoted;
        advance_();
        if (cur_.kind == K::lparen) {
          advance_();
          std::vector<Term> args = parse_comma_list_();
          expect_(K::rparen, "unbalanced parentheses: expected ')'");
          return Term::compound(std::move(name), std::move(args), quoted);
        }
        return Term::symbol(std::move(name), quoted);
      }
      case K::lparen: {
        advance_();
        std::vector<Term> parts = parse_comma_list_();
        expect_(K::rparen, "unbalanced parentheses: expected ')'");
        if (parts.size() == 1) return parts[0];
        Term t = parts.back();
        for (std::size_t i = parts.size() - 1; i-- > 0;)
          t = Term::compound(",", {parts[i], t});
        return t;
      }
      case K::lbracket: {
        advance_();
        if (cur_.kind == K::rbracket) {
          advance_();
          return Term::symbol("[]");
        }
        std::vector<Term> items = parse_comma_list_();
        Term tail = Term::symbol("[]");
        if (cur_.kind == K::bar) {
          advance_();
          tail = parse_term();
        }
        expect_(K::rbracket, "unbalanced brackets: expected ']'");
        for (auto it = items.rbegin(); it != items.rend(); ++it)
          tail = Term::compound(".", {*it, tail});
        return tail;
      }
      default:
        fail_("expected a term");
    }
  }

  bool at_eof() const { return cur_.kind == Token::Kind::eof; }

 private:
  std::vector<Term> parse_comma_list_() {
    std::vector<Term> items;
    items.push_back(parse_term());
    while (cur_.kind == Token::Kind::comma) {
      advance_();
      items.push_back(parse_term());
    }
    return items;
  }

  void advance_() { cur_ = lex_.next(); }

  void expect_(Token::Kind kind, const char* message) {
    if (cur_.kind != kind) fail_(message);
    advance_();
  }

  [[noreturn]] void fail_(const std::string& message) const {
    throw parse_error(message + ", found " + describe_token(cur_), cur_.line, cur_.column);
  }

  Lexer lex_;
  Token cur_;
  int anon_counter_ = 0;
};

}  // namespace detail

/// Parses exactly one term; an optional trailing '.' is accepted.
inline Term parse_term(std::string_view text) {
  detail::Parser p(text);
  return p.parse_single_term();
}

/// Sequential reader over a file of `fact.` / `head :- body.` sentences.
class SentenceReader {
 public:
  explicit SentenceReader(std::string_view text) : parser_(text) {}
  std::optional<Sentence> next() { return parser_.next_sentence(); }

 private:
  detail::Parser parser_;
};

}  // namespace tracemin
