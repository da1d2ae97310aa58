#pragma once

// Kernel expression language: a small call-by-value Scheme used for base
// module definitions and transformation functions, plus the bridge that
// reifies modules as values and back.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "modlock/core.hpp"
#include "modlock/sexpr.hpp"
#include "modlock/value.hpp"

namespace modlock::lang {

struct Exp;
using ExpPtr = std::shared_ptr<const Exp>;

struct Template;  // compiled quasiquote datum

struct Var {
  std::string name;
};
struct LitNum {
  std::int64_t value;
};
struct LitStr {
  std::string text;
};
struct Lambda {
  std::vector<std::string> params;
  ExpPtr body;
};
struct App {
  ExpPtr fn;
  std::vector<ExpPtr> args;
};
struct If {
  ExpPtr cond;
  ExpPtr then_branch;
  ExpPtr else_branch;
};
struct Let {
  std::vector<std::pair<std::string, ExpPtr>> bindings;
  ExpPtr body;
};
struct Quote {
  SExpr datum;
  Value value;
};
struct Quasiquote {
  SExpr datum;
  std::shared_ptr<const Template> tmpl;
};

struct Exp {
  std::variant<Var, LitNum, LitStr, Lambda, App, If, Let, Quote, Quasiquote> node;
};

/// Structural equality (quasiquote compares datums).
bool operator==(const Exp& a, const Exp& b);

/// Throws Error(ExpSyntax) on malformed special forms, duplicate parameters
/// or nested quasiquote.
ExpPtr parse_exp(const SExpr& e);

/// Association-ordered variable environment; first binding wins.
class Env {
 public:
  using Binding = std::pair<std::string, Value>;

  Env() = default;
  explicit Env(std::vector<Binding> bindings);

  /// nullptr when unbound. May force a pending recursive definition.
  const Value* lookup(std::string_view name) const;

  Env extend(std::vector<Binding> bindings) const;
  /// `*this ++ tail`
  Env concat(const Env& tail) const;

  /// All visible bindings in lookup order (shadowed ones included).
  std::vector<Binding> bindings() const;

  struct Frame;

 private:
  explicit Env(std::shared_ptr<const Frame> top) : top_(std::move(top)) {}
  friend class RecursiveScope;
  std::shared_ptr<const Frame> top_;
};

/// Evaluates under the thread's current limits (see LimitScope).
Value eval(const Env& env, const Exp& e);

/// Installs fresh limits for the current thread while alive. Without a
/// scope, evaluation has no step budget but keeps the depth limit.
class LimitScope {
 public:
  explicit LimitScope(const EvalLimits& limits);
  ~LimitScope();
  LimitScope(const LimitScope&) = delete;
  LimitScope& operator=(const LimitScope&) = delete;

 private:
  std::uint64_t saved_fuel_;
  std::uint32_t saved_max_depth_;
  bool saved_active_;
};

/// Applies a closure under its own LimitScope.
Value apply(const Value& fn, std::vector<Value> args, const EvalLimits& limits = {});

/// Builtins: arithmetic, list and string primitives, #t/#f, error, and the
/// module accessors get-imports/get-body.
const Env& initial_env();

/// Names bound by initial_env(), for documentation and tests.
std::vector<std::string> builtin_names();

/// `(base ((name exp)...))` evaluated in a recursive environment:
/// own definitions ++ menv_to_env(menv) ++ initial_env().
BaseDefs compile_base(const SExpr& body, const ModuleEnv& menv, const EvalLimits& limits = {});

/// `(transformation exp)`; exp must evaluate to a closure.
Transformation compile_trans(const SExpr& body, const ModuleEnv& menv, const EvalLimits& limits = {});

Value module_to_val(const ModuleDef& m);
/// Throws Error(MalformedGeneratedModule) with the printed value.
ModuleDef val_to_module(const Value& v);

/// Each local name binds the reified module; base modules additionally
/// bind `local:def` for each definition.
Env menv_to_env(const ModuleEnv& menv);

/// Parses and evaluates one expression in `env` (convenience for tests/CLI).
Value eval_sexpr(const Env& env, const SExpr& e, const EvalLimits& limits = {});

/// Environment a base module's own code sees, for evaluating expressions
/// against a compiled base module: its definitions ++ its imports ++ builtins.
Env module_env(const Compiled& c);

}  // namespace modlock::lang
