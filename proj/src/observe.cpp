#include "modlock/observe.hpp"

#include <set>
#include <utility>

#include "modlock/error.hpp"

namespace modlock::observe {

namespace {

using lang::Value;

constexpr int kMaxClosureDepth = 2;
const lang::EvalLimits kProbeLimits{200'000, 2000};

struct Outcome {
  bool ok = false;
  Value value;
  ModuleDef module;
  ErrorKind kind{};
  std::string message;
};

template <typename F>
Outcome run(F&& f) {
  Outcome o;
  try {
    f(o);
    o.ok = true;
  } catch (const Error& e) {
    o.kind = e.kind();
    o.message = e.what();
  }
  return o;
}

class Comparer {
 public:
  Verdict compiled(const CompiledPtr& a, const CompiledPtr& b) {
    if (a == b) return {};
    if (!a || !b) return fail("one side is missing");
    if (!seen_.insert({a.get(), b.get()}).second) return {};
    if (a->type() != b->type())
      return fail(std::string("variant ") + std::string(to_string(a->type())) + " vs " + std::string(to_string(b->type())));
    if (!(a->closure().syntax == b->closure().syntax)) return fail("closure syntax differs");

    const auto& ea = a->closure().env.bindings();
    const auto& eb = b->closure().env.bindings();
    if (ea.size() != eb.size()) return fail("closure env sizes differ");
    for (std::size_t k = 0; k < ea.size(); ++k) {
      if (ea[k].first != eb[k].first) return fail("closure env names differ: " + ea[k].first + " vs " + eb[k].first);
      if (Verdict v = compiled(ea[k].second, eb[k].second); !v) return within("import " + ea[k].first, v);
    }

    switch (a->type()) {
      case ModuleType::Model: return {};
      case ModuleType::Base: return defs(a->defs(), b->defs());
      case ModuleType::Trans: return transformation(a->transformation(), b->transformation());
    }
    return {};
  }

  Verdict value(const Value& a, const Value& b, int depth) {
    if (a.is_closure() != b.is_closure() || a.is_str() != b.is_str() || a.is_num() != b.is_num())
      return fail("values differ: " + lang::show(a) + " vs " + lang::show(b));
    if (a.is_num()) return a.number() == b.number() ? Verdict{} : fail("numbers differ");
    if (a.is_str()) {
      if (a.text() != b.text() || a.symbol() != b.symbol()) return fail("strings differ: " + lang::show(a) + " vs " + lang::show(b));
      return {};
    }
    if (a.is_list()) {
      if (a.items().size() != b.items().size()) return fail("list lengths differ");
      for (std::size_t k = 0; k < a.items().size(); ++k)
        if (Verdict v = value(a.items()[k], b.items()[k], depth); !v) return v;
      return {};
    }
    if (a.as_closure().fn == b.as_closure().fn) return {};
    if (a.as_closure().arity != b.as_closure().arity) return fail("closure arities differ");
    if (depth >= kMaxClosureDepth) return {};
    for (const auto& args : closure_probes()) {
      auto call = [&](const Value& f) {
        return run([&](Outcome& o) { o.value = lang::apply(f, args, kProbeLimits); });
      };
      Outcome x = call(a);
      Outcome y = call(b);
      if (Verdict v = outcome(x, y); !v) return v;
      if (x.ok)
        if (Verdict v = value(x.value, y.value, depth + 1); !v) return within("probe result", v);
    }
    return {};
  }

 private:
  Verdict defs(const BaseDefs& a, const BaseDefs& b) {
    if (a.size() != b.size()) return fail("definition counts differ");
    for (std::size_t k = 0; k < a.size(); ++k) {
      if (a[k].first != b[k].first) return fail("definition names differ: " + a[k].first + " vs " + b[k].first);
      if (Verdict v = value(a[k].second, b[k].second, 0); !v) return within("definition " + a[k].first, v);
    }
    return {};
  }

  Verdict transformation(const Transformation& a, const Transformation& b) {
    if (a.arity != b.arity) return fail("transformation arities differ");
    const auto& probes = module_probes();
    std::vector<std::size_t> arities;
    if (a.arity) arities.push_back(*a.arity);
    else arities = {1, 2};
    for (std::size_t n : arities) {
      for (std::size_t start = 0; start < probes.size(); ++start) {
        std::vector<ModuleDef> inputs;
        for (std::size_t k = 0; k < n; ++k) inputs.push_back(probes[(start + k) % probes.size()]);
        Outcome x = run([&](Outcome& o) { o.module = a.apply(inputs); });
        Outcome y = run([&](Outcome& o) { o.module = b.apply(inputs); });
        if (Verdict v = outcome(x, y); !v) return v;
        if (x.ok && !(x.module == y.module)) return fail("generated modules differ");
      }
    }
    return {};
  }

  Verdict outcome(const Outcome& x, const Outcome& y) {
    if (x.ok != y.ok) return fail("one probe failed: " + (x.ok ? y.message : x.message));
    if (!x.ok && (x.kind != y.kind || x.message != y.message))
      return fail("probe errors differ: " + x.message + " vs " + y.message);
    return {};
  }

  static Verdict fail(std::string why) { return Verdict{false, std::move(why)}; }
  static Verdict within(const std::string& where, Verdict v) {
    v.reason = where + ": " + v.reason;
    return v;
  }

  std::set<std::pair<const Compiled*, const Compiled*>> seen_;
};

}  // namespace

const std::vector<std::vector<Value>>& closure_probes() {
  static const std::vector<std::vector<Value>> probes = {
      {},
      {Value::num(0)},
      {Value::num(3)},
      {Value::str("a")},
      {Value::list({})},
      {Value::num(1), Value::num(2)},
  };
  return probes;
}

const std::vector<ModuleDef>& module_probes() {
  static const std::vector<ModuleDef> probes = [] {
    std::vector<ModuleDef> out;
    for (const char* text : {
             "(module (imports) (model (entity thing ((a string) (b number)))))",
             "(module (imports (x y) (t (f z))) (model (entity other ())))",
             "(module (imports) (base ((f (lambda (n) n)) (k 7))))",
             "(module (imports (u v)) (transformation (lambda (m) m)))",
         })
      out.push_back(parse_module(parse_sexpr(text)));
    return out;
  }();
  return probes;
}

Verdict equivalent(const CompiledPtr& a, const CompiledPtr& b) { return Comparer().compiled(a, b); }

Verdict equivalent(const Value& a, const Value& b) { return Comparer().value(a, b, 0); }

}  // namespace modlock::observe
