#include <set>

#include "lang_internal.hpp"
#include "modlock/error.hpp"

namespace modlock::lang {

namespace {

constexpr std::size_t kIndexThreshold = 16;

struct ThreadLimits {
  std::uint64_t fuel = 0;
  std::uint32_t max_depth = EvalLimits{}.max_depth;
  std::uint32_t depth = 0;
  bool active = false;
};

thread_local ThreadLimits tl_limits;

class DepthGuard {
 public:
  DepthGuard() {
    if (tl_limits.active) {
      if (tl_limits.fuel == 0) throw Error(ErrorKind::BudgetExceeded, "evaluation step budget exhausted");
      --tl_limits.fuel;
    }
    if (++tl_limits.depth > tl_limits.max_depth) {
      --tl_limits.depth;
      throw Error(ErrorKind::BudgetExceeded,
                  "evaluation nested deeper than " + std::to_string(tl_limits.max_depth) + " levels");
    }
  }
  ~DepthGuard() { --tl_limits.depth; }
  DepthGuard(const DepthGuard&) = delete;
  DepthGuard& operator=(const DepthGuard&) = delete;
};

[[noreturn]] void bad_syntax(const std::string& what, const SExpr& e) {
  throw Error(ErrorKind::ExpSyntax, what + ": " + print_sexpr(e));
}

ExpPtr make(auto node) { return std::make_shared<const Exp>(Exp{std::move(node)}); }

std::shared_ptr<const Template> compile_template(const SExpr& d);

bool contains_unquote(const Template& t) { return t.kind != Template::Kind::Literal; }

std::shared_ptr<const Template> compile_template(const SExpr& d) {
  auto t = std::make_shared<Template>();
  if (d.is_form("quasiquote")) bad_syntax("nested quasiquote is not supported", d);
  if (d.is_form("unquote")) {
    if (d.items().size() != 2) bad_syntax("unquote takes exactly one expression", d);
    t->kind = Template::Kind::Unquote;
    t->expr = parse_exp(d.items()[1]);
    return t;
  }
  if (d.is_form("unquote-splicing")) bad_syntax("unquote-splicing outside of a list", d);
  if (d.is_list()) {
    bool dynamic = false;
    for (const auto& item : d.items()) {
      Template::Item entry;
      if (item.is_form("unquote-splicing")) {
        if (item.items().size() != 2) bad_syntax("unquote-splicing takes exactly one expression", item);
        auto inner = std::make_shared<Template>();
        inner->kind = Template::Kind::Unquote;
        inner->expr = parse_exp(item.items()[1]);
        entry.splice = true;
        entry.tmpl = std::move(inner);
      } else {
        entry.tmpl = compile_template(item);
      }
      dynamic = dynamic || entry.splice || contains_unquote(*entry.tmpl);
      t->items.push_back(std::move(entry));
    }
    if (dynamic) {
      t->kind = Template::Kind::List;
      return t;
    }
    t->items.clear();
  }
  t->kind = Template::Kind::Literal;
  t->literal = sexpr_to_value(d);
  return t;
}

Value instantiate(const Template& t, const Env& env) {
  switch (t.kind) {
    case Template::Kind::Literal: return t.literal;
    case Template::Kind::Unquote: return eval(env, *t.expr);
    case Template::Kind::List: {
      std::vector<Value> out;
      for (const auto& item : t.items) {
        Value v = instantiate(*item.tmpl, env);
        if (!item.splice) {
          out.push_back(std::move(v));
          continue;
        }
        if (!v.is_list()) throw Error(ErrorKind::SpliceError, "unquote-splicing of a non-list: " + show(v));
        out.insert(out.end(), v.items().begin(), v.items().end());
      }
      return Value::list(std::move(out));
    }
  }
  return Value();
}

Value make_closure(const Env& env, const Lambda& lambda, std::string name) {
  auto params = lambda.params;
  ExpPtr body = lambda.body;
  std::size_t arity = params.size();
  std::string label = name.empty() ? "lambda" : name;
  return Value::closure(
      [env, params, body, label](std::span<const Value> args) -> Value {
        if (args.size() != params.size()) {
          throw Error(ErrorKind::ArityMismatch, label + " expects " + std::to_string(params.size()) +
                                                    " argument(s), got " + std::to_string(args.size()));
        }
        std::vector<Env::Binding> frame;
        frame.reserve(params.size());
        for (std::size_t k = 0; k < params.size(); ++k) frame.emplace_back(params[k], args[k]);
        return eval(env.extend(std::move(frame)), *body);
      },
      arity, std::move(name));
}

Value eval_named(const Env& env, const Exp& e, const std::string& name) {
  if (auto* lambda = std::get_if<Lambda>(&e.node)) {
    DepthGuard guard;
    return make_closure(env, *lambda, name);
  }
  return eval(env, e);
}

std::shared_ptr<Env::Frame> new_frame(std::vector<Env::Binding> vars, std::shared_ptr<const Env::Frame> parent) {
  auto f = std::make_shared<Env::Frame>();
  f->vars = std::move(vars);
  f->parent = std::move(parent);
  if (f->vars.size() > kIndexThreshold) {
    for (std::size_t k = 0; k < f->vars.size(); ++k) f->index.emplace(f->vars[k].first, k);
  }
  return f;
}

const Value& force(RecFrame::Slot& slot, const Env& env) {
  if (slot.state == RecFrame::State::Done) return slot.value;
  if (slot.state == RecFrame::State::Evaluating)
    throw Error(ErrorKind::UnboundVariable, "definition of '" + slot.name + "' depends on its own value");
  slot.state = RecFrame::State::Evaluating;
  try {
    slot.value = eval_named(env, *slot.exp, slot.name);
  } catch (...) {
    slot.state = RecFrame::State::Pending;
    throw;
  }
  slot.state = RecFrame::State::Done;
  return slot.value;
}

}  // namespace

// ---------------------------------------------------------------- Env

Env::Env(std::vector<Binding> bindings) : top_(new_frame(std::move(bindings), nullptr)) {}

const Value* Env::lookup(std::string_view name) const {
  for (const Frame* f = top_.get(); f != nullptr; f = f->parent.get()) {
    if (f->rec) {
      for (auto& slot : f->rec->slots)
        if (slot.name == name) return &force(slot, f->rec->env);
      continue;
    }
    if (!f->index.empty()) {
      auto it = f->index.find(std::string(name));
      if (it != f->index.end()) return &f->vars[it->second].second;
      continue;
    }
    for (const auto& b : f->vars)
      if (b.first == name) return &b.second;
  }
  return nullptr;
}

Env Env::extend(std::vector<Binding> bindings) const {
  if (bindings.empty()) return *this;
  return Env(std::shared_ptr<const Frame>(new_frame(std::move(bindings), top_)));
}

Env Env::concat(const Env& tail) const {
  if (!top_) return tail;
  // Flatten this env into one frame on top of tail.
  return tail.extend(bindings());
}

std::vector<Env::Binding> Env::bindings() const {
  std::vector<Binding> out;
  for (const Frame* f = top_.get(); f != nullptr; f = f->parent.get()) {
    if (f->rec) {
      for (auto& slot : f->rec->slots) out.emplace_back(slot.name, force(slot, f->rec->env));
    } else {
      out.insert(out.end(), f->vars.begin(), f->vars.end());
    }
  }
  return out;
}

std::vector<Env::Binding> RecursiveScope::evaluate(std::vector<std::pair<std::string, ExpPtr>> defs,
                                                   const Env& parent) {
  auto rec = std::make_shared<RecFrame>();
  for (auto& [name, exp] : defs) rec->slots.push_back(RecFrame::Slot{std::move(name), std::move(exp), Value(), {}});
  auto frame = std::make_shared<Env::Frame>();
  frame->rec = rec;
  frame->parent = parent.top_;
  rec->env = Env(std::shared_ptr<const Env::Frame>(frame));

  std::vector<Env::Binding> out;
  out.reserve(rec->slots.size());
  for (auto& slot : rec->slots) out.emplace_back(slot.name, force(slot, rec->env));
  return out;
}

// ---------------------------------------------------------------- limits

LimitScope::LimitScope(const EvalLimits& limits)
    : saved_fuel_(tl_limits.fuel), saved_max_depth_(tl_limits.max_depth), saved_active_(tl_limits.active) {
  tl_limits.fuel = limits.step_budget;
  tl_limits.max_depth = limits.max_depth;
  tl_limits.active = true;
}

LimitScope::~LimitScope() {
  tl_limits.fuel = saved_fuel_;
  tl_limits.max_depth = saved_max_depth_;
  tl_limits.active = saved_active_;
}

Value apply(const Value& fn, std::vector<Value> args, const EvalLimits& limits) {
  LimitScope scope(limits);
  return fn(args);
}

// ---------------------------------------------------------------- parse

ExpPtr parse_exp(const SExpr& e) {
  switch (e.kind()) {
    case SExpr::Kind::Sym: return make(Var{e.text()});
    case SExpr::Kind::Num: return make(LitNum{e.number()});
    case SExpr::Kind::Str: return make(LitStr{e.text()});
    case SExpr::Kind::List: break;
  }
  const auto& items = e.items();
  if (items.empty()) bad_syntax("empty application", e);
  const SExpr& head = items.front();

  if (head.is_sym("lambda")) {
    if (items.size() != 3 || !items[1].is_list()) bad_syntax("expected (lambda (params...) body)", e);
    Lambda lambda;
    std::set<std::string> seen;
    for (const auto& p : items[1].items()) {
      if (!p.is_sym()) bad_syntax("lambda parameter must be a symbol", e);
      if (!seen.insert(p.text()).second) bad_syntax("duplicate parameter '" + p.text() + "'", e);
      lambda.params.push_back(p.text());
    }
    lambda.body = parse_exp(items[2]);
    return make(std::move(lambda));
  }
  if (head.is_sym("if")) {
    if (items.size() != 4) bad_syntax("expected (if cond then else)", e);
    return make(If{parse_exp(items[1]), parse_exp(items[2]), parse_exp(items[3])});
  }
  if (head.is_sym("let")) {
    if (items.size() != 3 || !items[1].is_list()) bad_syntax("expected (let ((name exp)...) body)", e);
    Let let;
    std::set<std::string> seen;
    for (const auto& b : items[1].items()) {
      if (!b.is_list() || b.items().size() != 2 || !b.items()[0].is_sym()) bad_syntax("malformed let binding", b);
      if (!seen.insert(b.items()[0].text()).second) bad_syntax("duplicate let binding '" + b.items()[0].text() + "'", e);
      let.bindings.emplace_back(b.items()[0].text(), parse_exp(b.items()[1]));
    }
    let.body = parse_exp(items[2]);
    return make(std::move(let));
  }
  if (head.is_sym("quote")) {
    if (items.size() != 2) bad_syntax("quote takes exactly one datum", e);
    return make(Quote{items[1], sexpr_to_value(items[1])});
  }
  if (head.is_sym("quasiquote")) {
    if (items.size() != 2) bad_syntax("quasiquote takes exactly one datum", e);
    return make(Quasiquote{items[1], compile_template(items[1])});
  }
  if (head.is_sym("unquote") || head.is_sym("unquote-splicing")) bad_syntax(head.text() + " outside of quasiquote", e);

  App app{parse_exp(head), {}};
  for (std::size_t k = 1; k < items.size(); ++k) app.args.push_back(parse_exp(items[k]));
  return make(std::move(app));
}

bool operator==(const Exp& a, const Exp& b) {
  if (a.node.index() != b.node.index()) return false;
  auto same = [](const ExpPtr& x, const ExpPtr& y) { return x == y || (x && y && *x == *y); };
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b.node);
        if constexpr (std::is_same_v<T, Var>) return x.name == y.name;
        else if constexpr (std::is_same_v<T, LitNum>) return x.value == y.value;
        else if constexpr (std::is_same_v<T, LitStr>) return x.text == y.text;
        else if constexpr (std::is_same_v<T, Lambda>) return x.params == y.params && same(x.body, y.body);
        else if constexpr (std::is_same_v<T, App>) {
          if (!same(x.fn, y.fn) || x.args.size() != y.args.size()) return false;
          for (std::size_t k = 0; k < x.args.size(); ++k)
            if (!same(x.args[k], y.args[k])) return false;
          return true;
        } else if constexpr (std::is_same_v<T, If>) {
          return same(x.cond, y.cond) && same(x.then_branch, y.then_branch) && same(x.else_branch, y.else_branch);
        } else if constexpr (std::is_same_v<T, Let>) {
          if (x.bindings.size() != y.bindings.size() || !same(x.body, y.body)) return false;
          for (std::size_t k = 0; k < x.bindings.size(); ++k)
            if (x.bindings[k].first != y.bindings[k].first || !same(x.bindings[k].second, y.bindings[k].second))
              return false;
          return true;
        } else {
          return x.datum == y.datum;
        }
      },
      a.node);
}

// ---------------------------------------------------------------- eval

Value eval(const Env& env, const Exp& e) {
  DepthGuard guard;
  return std::visit(
      [&](const auto& n) -> Value {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Var>) {
          const Value* v = env.lookup(n.name);
          if (v == nullptr) throw Error(ErrorKind::UnboundVariable, "unbound variable '" + n.name + "'");
          return *v;
        } else if constexpr (std::is_same_v<T, LitNum>) {
          return Value::num(n.value);
        } else if constexpr (std::is_same_v<T, LitStr>) {
          return Value::str(n.text);
        } else if constexpr (std::is_same_v<T, Lambda>) {
          return make_closure(env, n, {});
        } else if constexpr (std::is_same_v<T, App>) {
          Value fn = eval(env, *n.fn);
          if (!fn.is_closure()) throw Error(ErrorKind::NotAFunction, "not a function: " + show(fn));
          std::vector<Value> args;
          args.reserve(n.args.size());
          for (const auto& a : n.args) args.push_back(eval(env, *a));
          return fn(args);
        } else if constexpr (std::is_same_v<T, If>) {
          return eval(env, eval(env, *n.cond).truthy() ? *n.then_branch : *n.else_branch);
        } else if constexpr (std::is_same_v<T, Let>) {
          std::vector<Env::Binding> frame;
          frame.reserve(n.bindings.size());
          for (const auto& [name, exp] : n.bindings) frame.emplace_back(name, eval_named(env, *exp, name));
          return eval(env.extend(std::move(frame)), *n.body);
        } else if constexpr (std::is_same_v<T, Quote>) {
          return n.value;
        } else {
          return instantiate(*n.tmpl, env);
        }
      },
      e.node);
}

Value eval_sexpr(const Env& env, const SExpr& e, const EvalLimits& limits) {
  ExpPtr exp = parse_exp(e);
  LimitScope scope(limits);
  return eval(env, *exp);
}

}  // namespace modlock::lang
