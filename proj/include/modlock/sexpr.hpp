#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace modlock {

/// The one data format shared by module files, the compilation cache,
/// reified modules and CLI output. Symbols and string literals are distinct
/// atoms: Sym "x" != Str "x".
class SExpr {
 public:
  enum class Kind { Sym, Str, Num, List };
  using List = std::vector<SExpr>;

  SExpr() : v_(List{}) {}

  /// Throws std::invalid_argument unless is_symbol_text(text).
  static SExpr sym(std::string text);
  static SExpr str(std::string text);
  static SExpr num(std::int64_t value);
  static SExpr list(List items = {});

  Kind kind() const noexcept { return static_cast<Kind>(v_.index()); }
  bool is_sym() const noexcept { return kind() == Kind::Sym; }
  bool is_sym(std::string_view text) const noexcept;
  bool is_str() const noexcept { return kind() == Kind::Str; }
  bool is_num() const noexcept { return kind() == Kind::Num; }
  bool is_list() const noexcept { return kind() == Kind::List; }

  /// Text of a Sym or Str atom.
  const std::string& text() const;
  std::int64_t number() const;
  const List& items() const;

  /// True when this is a list whose first item is the symbol `head`.
  bool is_form(std::string_view head) const noexcept;

  friend bool operator==(const SExpr&, const SExpr&) = default;

 private:
  struct SymAtom {
    std::string text;
    friend bool operator==(const SymAtom&, const SymAtom&) = default;
  };
  struct StrAtom {
    std::string text;
    friend bool operator==(const StrAtom&, const StrAtom&) = default;
  };

  std::variant<SymAtom, StrAtom, std::int64_t, List> v_;
};

/// Nonempty, no whitespace, parentheses, double quotes or semicolons, no
/// leading reader-sugar character, and not readable as a number.
bool is_symbol_text(std::string_view text) noexcept;

/// Reads exactly one s-expression. Expands 'x, `x, ,x and ,@x into
/// quote/quasiquote/unquote/unquote-splicing forms. Throws SyntaxError.
SExpr parse_sexpr(std::string_view text);

/// Canonical single-line form; parse_sexpr(print_sexpr(e)) == e.
std::string print_sexpr(const SExpr& e);

}  // namespace modlock
