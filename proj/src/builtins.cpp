#include <algorithm>
#include <limits>

#include "lang_internal.hpp"
#include "modlock/error.hpp"

namespace modlock::lang {

namespace {

using Args = std::span<const Value>;

[[noreturn]] void type_error(const std::string& fn, const std::string& what, const Value& got) {
  throw Error(ErrorKind::TypeError, fn + ": expected " + what + ", got " + show(got));
}

std::int64_t num_arg(const std::string& fn, const Value& v) {
  if (!v.is_num()) type_error(fn, "a number", v);
  return v.number();
}

const std::vector<Value>& list_arg(const std::string& fn, const Value& v) {
  if (!v.is_list()) type_error(fn, "a list", v);
  return v.items();
}

const std::string& str_arg(const std::string& fn, const Value& v) {
  if (!v.is_str()) type_error(fn, "a string", v);
  return v.text();
}

const Value& fn_arg(const std::string& fn, const Value& v) {
  if (!v.is_closure()) type_error(fn, "a procedure", v);
  return v;
}

[[noreturn]] void overflow(const std::string& fn) { throw Error(ErrorKind::TypeError, fn + ": integer overflow"); }

struct Table {
  std::vector<Env::Binding> bindings;

  void add(std::string name, std::optional<std::size_t> arity, Value::Fn fn) {
    auto checked = [name, arity, fn = std::move(fn)](Args args) -> Value {
      if (arity && args.size() != *arity) {
        throw Error(ErrorKind::ArityMismatch, name + " expects " + std::to_string(*arity) + " argument(s), got " +
                                                  std::to_string(args.size()));
      }
      return fn(args);
    };
    bindings.emplace_back(name, Value::closure(std::move(checked), arity, name));
  }

  void compare(const std::string& name, bool (*cmp)(std::int64_t, std::int64_t)) {
    add(name, std::nullopt, [name, cmp](Args args) {
      if (args.empty()) throw Error(ErrorKind::ArityMismatch, name + " expects at least one argument");
      for (std::size_t k = 0; k + 1 < args.size(); ++k)
        if (!cmp(num_arg(name, args[k]), num_arg(name, args[k + 1]))) return Value::boolean(false);
      if (args.size() == 1) (void)num_arg(name, args[0]);
      return Value::boolean(true);
    });
  }
};

// Reified modules are lists (module (imports (ln imp)...) body).
const std::vector<Value>& reified(const std::string& fn, const Value& m) {
  if (!m.is_list() || m.items().size() != 3 || !m.items()[0].is_str() || m.items()[0].text() != "module" ||
      !m.items()[1].is_list() || m.items()[1].items().empty() || !m.items()[1].items()[0].is_str() ||
      m.items()[1].items()[0].text() != "imports")
    type_error(fn, "a reified module", m);
  return m.items();
}

}  // namespace

std::vector<Env::Binding> make_builtins() {
  Table t;

  t.add("+", std::nullopt, [](Args args) {
    std::int64_t acc = 0;
    for (const auto& a : args)
      if (__builtin_add_overflow(acc, num_arg("+", a), &acc)) overflow("+");
    return Value::num(acc);
  });
  t.add("*", std::nullopt, [](Args args) {
    std::int64_t acc = 1;
    for (const auto& a : args)
      if (__builtin_mul_overflow(acc, num_arg("*", a), &acc)) overflow("*");
    return Value::num(acc);
  });
  t.add("-", std::nullopt, [](Args args) {
    if (args.empty()) throw Error(ErrorKind::ArityMismatch, "- expects at least one argument");
    std::int64_t acc = num_arg("-", args[0]);
    if (args.size() == 1) {
      if (acc == std::numeric_limits<std::int64_t>::min()) overflow("-");
      return Value::num(-acc);
    }
    for (std::size_t k = 1; k < args.size(); ++k)
      if (__builtin_sub_overflow(acc, num_arg("-", args[k]), &acc)) overflow("-");
    return Value::num(acc);
  });
  auto division = [](const std::string& name, bool quotient) {
    return [name, quotient](Args args) {
      std::int64_t a = num_arg(name, args[0]);
      std::int64_t b = num_arg(name, args[1]);
      if (b == 0) throw Error(ErrorKind::TypeError, name + ": division by zero");
      if (a == std::numeric_limits<std::int64_t>::min() && b == -1) {
        if (quotient) overflow(name);
        return Value::num(0);
      }
      return Value::num(quotient ? a / b : a % b);
    };
  };
  t.add("quotient", 2, division("quotient", true));
  t.add("remainder", 2, division("remainder", false));

  t.compare("=", [](std::int64_t a, std::int64_t b) { return a == b; });
  t.compare("<", [](std::int64_t a, std::int64_t b) { return a < b; });
  t.compare(">", [](std::int64_t a, std::int64_t b) { return a > b; });
  t.compare("<=", [](std::int64_t a, std::int64_t b) { return a <= b; });
  t.compare(">=", [](std::int64_t a, std::int64_t b) { return a >= b; });

  t.add("car", 1, [](Args args) {
    const auto& xs = list_arg("car", args[0]);
    if (xs.empty()) type_error("car", "a non-empty list", args[0]);
    return xs.front();
  });
  t.add("cdr", 1, [](Args args) {
    const auto& xs = list_arg("cdr", args[0]);
    if (xs.empty()) type_error("cdr", "a non-empty list", args[0]);
    return Value::list(std::vector<Value>(xs.begin() + 1, xs.end()));
  });
  t.add("cons", 2, [](Args args) {
    const auto& xs = list_arg("cons", args[1]);
    std::vector<Value> out;
    out.reserve(xs.size() + 1);
    out.push_back(args[0]);
    out.insert(out.end(), xs.begin(), xs.end());
    return Value::list(std::move(out));
  });
  t.add("list", std::nullopt, [](Args args) { return Value::list(std::vector<Value>(args.begin(), args.end())); });
  t.add("append", std::nullopt, [](Args args) {
    std::vector<Value> out;
    for (const auto& a : args) {
      const auto& xs = list_arg("append", a);
      out.insert(out.end(), xs.begin(), xs.end());
    }
    return Value::list(std::move(out));
  });
  t.add("null?", 1, [](Args args) { return Value::boolean(args[0].is_list() && args[0].items().empty()); });
  t.add("equal?", 2, [](Args args) { return Value::boolean(args[0] == args[1]); });
  t.add("not", 1, [](Args args) { return Value::boolean(!args[0].truthy()); });
  t.add("length", 1, [](Args args) {
    return Value::num(static_cast<std::int64_t>(list_arg("length", args[0]).size()));
  });
  t.add("list-ref", 2, [](Args args) {
    const auto& xs = list_arg("list-ref", args[0]);
    std::int64_t k = num_arg("list-ref", args[1]);
    if (k < 0 || static_cast<std::size_t>(k) >= xs.size())
      throw Error(ErrorKind::TypeError, "list-ref: index " + std::to_string(k) + " out of range");
    return xs[static_cast<std::size_t>(k)];
  });
  t.add("iota", 1, [](Args args) {
    std::int64_t n = num_arg("iota", args[0]);
    if (n < 0 || n > 1'000'000) throw Error(ErrorKind::TypeError, "iota: count out of range");
    std::vector<Value> out;
    out.reserve(static_cast<std::size_t>(n));
    for (std::int64_t k = 0; k < n; ++k) out.push_back(Value::num(k));
    return Value::list(std::move(out));
  });

  t.add("map", std::nullopt, [](Args args) {
    if (args.size() < 2) throw Error(ErrorKind::ArityMismatch, "map expects a procedure and at least one list");
    const Value& f = fn_arg("map", args[0]);
    std::size_t n = std::numeric_limits<std::size_t>::max();
    for (std::size_t k = 1; k < args.size(); ++k) n = std::min(n, list_arg("map", args[k]).size());
    std::vector<Value> out;
    out.reserve(n);
    std::vector<Value> call(args.size() - 1);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 1; k < args.size(); ++k) call[k - 1] = args[k].items()[i];
      out.push_back(f(call));
    }
    return Value::list(std::move(out));
  });
  t.add("filter", 2, [](Args args) {
    const Value& f = fn_arg("filter", args[0]);
    std::vector<Value> out;
    for (const auto& x : list_arg("filter", args[1])) {
      Value one[] = {x};
      if (f(one).truthy()) out.push_back(x);
    }
    return Value::list(std::move(out));
  });
  t.add("foldl", 3, [](Args args) {
    const Value& f = fn_arg("foldl", args[0]);
    Value acc = args[1];
    for (const auto& x : list_arg("foldl", args[2])) {
      Value two[] = {x, acc};
      acc = f(two);
    }
    return acc;
  });
  t.add("foldr", 3, [](Args args) {
    const Value& f = fn_arg("foldr", args[0]);
    Value acc = args[1];
    const auto& xs = list_arg("foldr", args[2]);
    for (auto it = xs.rbegin(); it != xs.rend(); ++it) {
      Value two[] = {*it, acc};
      acc = f(two);
    }
    return acc;
  });
  t.add("concat-map", 2, [](Args args) {
    const Value& f = fn_arg("concat-map", args[0]);
    std::vector<Value> out;
    for (const auto& x : list_arg("concat-map", args[1])) {
      Value one[] = {x};
      Value part = f(one);
      const auto& ys = list_arg("concat-map", part);
      out.insert(out.end(), ys.begin(), ys.end());
    }
    return Value::list(std::move(out));
  });

  t.add("string-append", std::nullopt, [](Args args) {
    std::string out;
    for (const auto& a : args) out += str_arg("string-append", a);
    return Value::str(std::move(out));
  });
  t.add("string=?", 2, [](Args args) {
    return Value::boolean(str_arg("string=?", args[0]) == str_arg("string=?", args[1]));
  });
  t.add("string?", 1, [](Args args) { return Value::boolean(args[0].is_str()); });
  t.add("number?", 1, [](Args args) { return Value::boolean(args[0].is_num()); });
  t.add("list?", 1, [](Args args) { return Value::boolean(args[0].is_list()); });
  t.add("symbol?", 1, [](Args args) { return Value::boolean(args[0].is_str() && args[0].symbol()); });
  t.add("procedure?", 1, [](Args args) { return Value::boolean(args[0].is_closure()); });
  t.add("string->symbol", 1, [](Args args) {
    const auto& s = str_arg("string->symbol", args[0]);
    if (!is_symbol_text(s)) throw Error(ErrorKind::TypeError, "string->symbol: invalid symbol text \"" + s + "\"");
    return Value::symbol(s);
  });
  t.add("symbol->string", 1, [](Args args) { return Value::str(str_arg("symbol->string", args[0])); });
  t.add("number->string", 1, [](Args args) { return Value::str(std::to_string(num_arg("number->string", args[0]))); });

  t.add("error", std::nullopt, [](Args args) -> Value {
    std::string msg;
    for (std::size_t k = 0; k < args.size(); ++k) {
      if (k > 0) msg += " ";
      msg += args[k].is_str() ? args[k].text() : show(args[k]);
    }
    throw Error(ErrorKind::UserError, msg);
  });

  t.add("get-imports", 1, [](Args args) {
    const auto& m = reified("get-imports", args[0]);
    const auto& imports = m[1].items();
    return Value::list(std::vector<Value>(imports.begin() + 1, imports.end()));
  });
  t.add("get-body", 1, [](Args args) { return reified("get-body", args[0])[2]; });

  t.bindings.emplace_back("#t", Value::boolean(true));
  t.bindings.emplace_back("#f", Value::boolean(false));
  return std::move(t.bindings);
}

}  // namespace modlock::lang
