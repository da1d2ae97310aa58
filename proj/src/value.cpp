#include "modlock/value.hpp"

#include <stdexcept>

#include "modlock/error.hpp"

namespace modlock::lang {

namespace {
const std::vector<Value> kEmpty;
}

Value Value::list(std::vector<Value> items) {
  if (items.empty()) return Value();
  return Value(std::make_shared<const std::vector<Value>>(std::move(items)));
}

Value Value::closure(Fn fn, std::optional<std::size_t> arity, std::string name) {
  return Value(Closure{std::make_shared<const Fn>(std::move(fn)), arity, std::move(name)});
}

const Value::Closure& Value::as_closure() const {
  if (auto* c = std::get_if<Closure>(&v_)) return *c;
  throw Error(ErrorKind::NotAFunction, "not a function: " + show(*this));
}

const std::string& Value::text() const {
  if (auto* s = std::get_if<Str>(&v_)) return s->text;
  throw Error(ErrorKind::TypeError, "expected a string, got " + show(*this));
}

bool Value::symbol() const {
  auto* s = std::get_if<Str>(&v_);
  return s != nullptr && s->symbol;
}

std::int64_t Value::number() const {
  if (auto* n = std::get_if<std::int64_t>(&v_)) return *n;
  throw Error(ErrorKind::TypeError, "expected a number, got " + show(*this));
}

const std::vector<Value>& Value::items() const {
  if (auto* l = std::get_if<ListPtr>(&v_)) return *l ? **l : kEmpty;
  throw Error(ErrorKind::TypeError, "expected a list, got " + show(*this));
}

Value Value::operator()(std::span<const Value> args) const { return (*as_closure().fn)(args); }

bool operator==(const Value& a, const Value& b) {
  if (a.v_.index() != b.v_.index()) return false;
  switch (a.v_.index()) {
    case 0: return std::get<0>(a.v_).fn == std::get<0>(b.v_).fn;
    case 1: return std::get<1>(a.v_).text == std::get<1>(b.v_).text;
    case 2: return std::get<2>(a.v_) == std::get<2>(b.v_);
    default: return a.items() == b.items();
  }
}

Value sexpr_to_value(const SExpr& e) {
  switch (e.kind()) {
    case SExpr::Kind::Sym: return Value::symbol(e.text());
    case SExpr::Kind::Str: return Value::str(e.text());
    case SExpr::Kind::Num: return Value::num(e.number());
    case SExpr::Kind::List: {
      std::vector<Value> items;
      items.reserve(e.items().size());
      for (const auto& item : e.items()) items.push_back(sexpr_to_value(item));
      return Value::list(std::move(items));
    }
  }
  return Value();
}

SExpr value_to_sexpr(const Value& v) {
  if (v.is_closure()) throw Error(ErrorKind::TypeError, "a closure has no s-expression form: " + show(v));
  if (v.is_num()) return SExpr::num(v.number());
  if (v.is_str()) {
    if (!v.symbol()) return SExpr::str(v.text());
    if (!is_symbol_text(v.text())) throw Error(ErrorKind::TypeError, "invalid symbol text '" + v.text() + "'");
    return SExpr::sym(v.text());
  }
  SExpr::List items;
  items.reserve(v.items().size());
  for (const auto& item : v.items()) items.push_back(value_to_sexpr(item));
  return SExpr::list(std::move(items));
}

std::string show(const Value& v) {
  if (v.is_closure()) {
    const auto& c = v.as_closure();
    return "#<closure" + (c.name.empty() ? std::string() : " " + c.name) + ">";
  }
  if (v.is_num()) return std::to_string(v.number());
  if (v.is_str()) {
    if (v.symbol() && is_symbol_text(v.text())) return v.text();
    return print_sexpr(SExpr::str(v.text()));
  }
  std::string out = "(";
  bool first = true;
  for (const auto& item : v.items()) {
    if (!first) out += ' ';
    first = false;
    out += show(item);
  }
  return out + ")";
}

}  // namespace modlock::lang
