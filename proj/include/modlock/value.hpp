#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "modlock/sexpr.hpp"

namespace modlock::lang {

/// Resource limits for one compile-time evaluation (a base module's
/// definitions or one transformation run).
struct EvalLimits {
  std::uint64_t step_budget = 10'000'000;
  std::uint32_t max_depth = 3000;
};

/// Runtime value of the kernel language: closure, string, integer or list.
/// Booleans are the strings "#t" and "#f".
///
/// Strings remember whether they were read from an identifier atom
/// (`symbol()`); the marker only steers the conversion back to SExpr so that
/// reified modules survive the round trip. Equality ignores it.
class Value {
 public:
  using Fn = std::function<Value(std::span<const Value>)>;

  struct Closure {
    std::shared_ptr<const Fn> fn;
    std::optional<std::size_t> arity;  // nullopt: variadic
    std::string name;
  };

  Value() : v_(ListPtr{}) {}

  static Value str(std::string text) { return Value(Str{std::move(text), false}); }
  static Value symbol(std::string text) { return Value(Str{std::move(text), true}); }
  static Value num(std::int64_t n) { return Value(n); }
  static Value list(std::vector<Value> items);
  static Value closure(Fn fn, std::optional<std::size_t> arity, std::string name = {});
  static Value boolean(bool b) { return symbol(b ? "#t" : "#f"); }

  bool is_closure() const noexcept { return v_.index() == 0; }
  bool is_str() const noexcept { return v_.index() == 1; }
  bool is_num() const noexcept { return v_.index() == 2; }
  bool is_list() const noexcept { return v_.index() == 3; }

  const Closure& as_closure() const;
  const std::string& text() const;
  bool symbol() const;
  std::int64_t number() const;
  const std::vector<Value>& items() const;

  /// Every value except the string "#f" counts as true.
  bool truthy() const noexcept { return !(is_str() && std::get<Str>(v_).text == "#f"); }

  /// Applies a closure; throws NotAFunction otherwise.
  Value operator()(std::span<const Value> args) const;

  friend bool operator==(const Value& a, const Value& b);

 private:
  struct Str {
    std::string text;
    bool symbol;
  };
  using ListPtr = std::shared_ptr<const std::vector<Value>>;

  explicit Value(Closure c) : v_(std::move(c)) {}
  explicit Value(Str s) : v_(std::move(s)) {}
  explicit Value(std::int64_t n) : v_(n) {}
  explicit Value(ListPtr l) : v_(std::move(l)) {}

  std::variant<Closure, Str, std::int64_t, ListPtr> v_;
};

/// Quote semantics: Sym/Str -> string, Num -> number, List -> list.
Value sexpr_to_value(const SExpr& e);

/// Inverse of sexpr_to_value on its range. Symbol-marked strings become Sym
/// atoms. Throws Error(TypeError) for closures or invalid symbol text.
SExpr value_to_sexpr(const Value& v);

/// Printed form for diagnostics; closures show as #<closure name>.
std::string show(const Value& v);

}  // namespace modlock::lang
