#include "modlock/sexpr.hpp"

#include <charconv>
#include <stdexcept>

#include "modlock/error.hpp"

namespace modlock {

namespace {

constexpr std::size_t kMaxNesting = 10000;

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }
bool is_delimiter(char c) { return is_space(c) || c == '(' || c == ')' || c == '"' || c == ';'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

// A token that starts like a number must be a number.
bool looks_numeric(std::string_view t) {
  if (t.empty()) return false;
  if (is_digit(t[0])) return true;
  return (t[0] == '+' || t[0] == '-') && t.size() > 1 && is_digit(t[1]);
}

class Reader {
 public:
  explicit Reader(std::string_view text) : text_(text) {}

  SExpr read_document() {
    skip_atmosphere();
    if (at_end()) fail("empty input");
    SExpr e = read(0);
    skip_atmosphere();
    if (!at_end()) fail("trailing input after s-expression");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw SyntaxError(msg, line_, column_); }
  [[noreturn]] void fail_at(const std::string& msg, std::size_t line, std::size_t col) const {
    throw SyntaxError(msg, line, col);
  }

  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }

  void advance() {
    char c = text_[pos_++];
    if (c == '\n') {
      ++line_;
      column_ = 1;
    } else if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) {
      // columns count code points, not UTF-8 continuation bytes
      ++column_;
    }
  }

  void skip_atmosphere() {
    while (!at_end()) {
      char c = peek();
      if (is_space(c)) {
        advance();
      } else if (c == ';') {
        while (!at_end() && peek() != '\n') advance();
      } else {
        break;
      }
    }
  }

  SExpr read(std::size_t depth) {
    if (depth > kMaxNesting) fail("nesting too deep");
    skip_atmosphere();
    if (at_end()) fail("unexpected end of input");
    char c = peek();
    switch (c) {
      case '(': return read_list(depth);
      case ')': fail("unexpected ')'");
      case '"': return read_string();
      case '\'': return read_sugar("quote", 1, depth);
      case '`': return read_sugar("quasiquote", 1, depth);
      case ',':
        if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '@') return read_sugar("unquote-splicing", 2, depth);
        return read_sugar("unquote", 1, depth);
      default: return read_atom();
    }
  }

  SExpr read_sugar(const char* head, int width, std::size_t depth) {
    for (int i = 0; i < width; ++i) advance();
    skip_atmosphere();
    if (at_end() || peek() == ')') fail(std::string("missing datum after ") + head + " prefix");
    return SExpr::list({SExpr::sym(head), read(depth + 1)});
  }

  SExpr read_list(std::size_t depth) {
    std::size_t line = line_, col = column_;
    advance();  // (
    SExpr::List items;
    for (;;) {
      skip_atmosphere();
      if (at_end()) fail_at("unbalanced '(': missing ')'", line, col);
      if (peek() == ')') {
        advance();
        return SExpr::list(std::move(items));
      }
      items.push_back(read(depth + 1));
    }
  }

  SExpr read_string() {
    std::size_t line = line_, col = column_;
    advance();  // "
    std::string out;
    for (;;) {
      if (at_end()) fail_at("unterminated string literal", line, col);
      char c = peek();
      if (c == '"') {
        advance();
        return SExpr::str(std::move(out));
      }
      if (c == '\\') {
        advance();
        if (at_end()) fail_at("unterminated string literal", line, col);
        char e = peek();
        switch (e) {
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case 'r': out += '\r'; break;
          default: fail(std::string("unknown escape \\") + e);
        }
        advance();
        continue;
      }
      out += c;
      advance();
    }
  }

  SExpr read_atom() {
    std::size_t line = line_, col = column_;
    std::size_t start = pos_;
    while (!at_end() && !is_delimiter(peek())) advance();
    std::string_view tok = text_.substr(start, pos_ - start);
    if (looks_numeric(tok)) {
      std::string_view digits = tok;
      if (digits.front() == '+') digits.remove_prefix(1);
      std::int64_t value = 0;
      auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
      if (ec == std::errc::result_out_of_range) fail_at("integer literal out of range: " + std::string(tok), line, col);
      if (ec != std::errc() || ptr != digits.data() + digits.size())
        fail_at("malformed number '" + std::string(tok) + "' (only integers are supported)", line, col);
      return SExpr::num(value);
    }
    if (!is_symbol_text(tok)) fail_at("invalid symbol '" + std::string(tok) + "'", line, col);
    return SExpr::sym(std::string(tok));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
};

void print_into(const SExpr& e, std::string& out) {
  switch (e.kind()) {
    case SExpr::Kind::Sym: out += e.text(); break;
    case SExpr::Kind::Num: out += std::to_string(e.number()); break;
    case SExpr::Kind::Str:
      out += '"';
      for (char c : e.text()) {
        switch (c) {
          case '"': out += "\\\""; break;
          case '\\': out += "\\\\"; break;
          case '\n': out += "\\n"; break;
          case '\t': out += "\\t"; break;
          case '\r': out += "\\r"; break;
          default: out += c;
        }
      }
      out += '"';
      break;
    case SExpr::Kind::List: {
      out += '(';
      bool first = true;
      for (const auto& item : e.items()) {
        if (!first) out += ' ';
        first = false;
        print_into(item, out);
      }
      out += ')';
      break;
    }
  }
}

}  // namespace

bool is_symbol_text(std::string_view text) noexcept {
  if (text.empty()) return false;
  for (char c : text)
    if (is_delimiter(c)) return false;
  char first = text.front();
  if (first == '\'' || first == '`' || first == ',') return false;
  return !looks_numeric(text);
}

SExpr SExpr::sym(std::string text) {
  if (!is_symbol_text(text)) throw std::invalid_argument("not a valid symbol: '" + text + "'");
  SExpr e;
  e.v_ = SymAtom{std::move(text)};
  return e;
}

SExpr SExpr::str(std::string text) {
  SExpr e;
  e.v_ = StrAtom{std::move(text)};
  return e;
}

SExpr SExpr::num(std::int64_t value) {
  SExpr e;
  e.v_ = value;
  return e;
}

SExpr SExpr::list(List items) {
  SExpr e;
  e.v_ = std::move(items);
  return e;
}

bool SExpr::is_sym(std::string_view text) const noexcept {
  auto* s = std::get_if<SymAtom>(&v_);
  return s != nullptr && s->text == text;
}

const std::string& SExpr::text() const {
  if (auto* s = std::get_if<SymAtom>(&v_)) return s->text;
  if (auto* s = std::get_if<StrAtom>(&v_)) return s->text;
  throw std::logic_error("SExpr::text on a non-atom");
}

std::int64_t SExpr::number() const {
  if (auto* n = std::get_if<std::int64_t>(&v_)) return *n;
  throw std::logic_error("SExpr::number on a non-number");
}

const SExpr::List& SExpr::items() const {
  if (auto* l = std::get_if<List>(&v_)) return *l;
  throw std::logic_error("SExpr::items on a non-list");
}

bool SExpr::is_form(std::string_view head) const noexcept {
  auto* l = std::get_if<List>(&v_);
  return l != nullptr && !l->empty() && l->front().is_sym(head);
}

SExpr parse_sexpr(std::string_view text) { return Reader(text).read_document(); }

std::string print_sexpr(const SExpr& e) {
  std::string out;
  print_into(e, out);
  return out;
}

}  // namespace modlock
