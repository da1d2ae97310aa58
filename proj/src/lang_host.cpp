#include <set>

#include "lang_internal.hpp"
#include "modlock/error.hpp"

namespace modlock::lang {

namespace {

std::string clip(std::string text, std::size_t limit = 400) {
  if (text.size() > limit) text = text.substr(0, limit) + " ...";
  return text;
}

Env env_for(const ModuleEnv& menv) { return menv_to_env(menv).concat(initial_env()); }

}  // namespace

const Env& initial_env() {
  static const Env env(make_builtins());
  return env;
}

std::vector<std::string> builtin_names() {
  std::vector<std::string> out;
  for (const auto& b : initial_env().bindings()) out.push_back(b.first);
  return out;
}

Value module_to_val(const ModuleDef& m) { return sexpr_to_value(module_to_sexpr(m)); }

ModuleDef val_to_module(const Value& v) {
  try {
    return parse_module(value_to_sexpr(v));
  } catch (const Error& e) {
    throw Error(ErrorKind::MalformedGeneratedModule, e.what() + std::string("; value: ") + clip(show(v)));
  }
}

Env menv_to_env(const ModuleEnv& menv) {
  std::vector<Env::Binding> out;
  for (const auto& [local, c] : menv.bindings()) {
    out.emplace_back(local, module_to_val(get_model(*c).syntax));
    if (c->type() == ModuleType::Base)
      for (const auto& [name, v] : c->defs()) out.emplace_back(local + ":" + name, v);
  }
  return Env(std::move(out));
}

BaseDefs compile_base(const SExpr& body, const ModuleEnv& menv, const EvalLimits& limits) {
  if (!body.is_form("base") || body.items().size() != 2 || !body.items()[1].is_list())
    throw Error(ErrorKind::MalformedBody, "expected (base ((name exp)...)): " + print_sexpr(body));

  std::vector<std::pair<std::string, ExpPtr>> defs;
  std::set<std::string> seen;
  for (const auto& d : body.items()[1].items()) {
    if (!d.is_list() || d.items().size() != 2 || !d.items()[0].is_sym())
      throw Error(ErrorKind::MalformedBody, "a definition is (name exp): " + print_sexpr(d));
    const std::string& name = d.items()[0].text();
    if (!seen.insert(name).second) throw Error(ErrorKind::DuplicateDefinition, "'" + name + "' is defined twice");
    defs.emplace_back(name, parse_exp(d.items()[1]));
  }

  LimitScope scope(limits);
  return RecursiveScope::evaluate(std::move(defs), env_for(menv));
}

Transformation compile_trans(const SExpr& body, const ModuleEnv& menv, const EvalLimits& limits) {
  if (!body.is_form("transformation") || body.items().size() != 2)
    throw Error(ErrorKind::MalformedBody, "expected (transformation exp): " + print_sexpr(body));

  ExpPtr exp = parse_exp(body.items()[1]);
  Value fn;
  {
    LimitScope scope(limits);
    fn = eval(env_for(menv), *exp);
  }
  if (!fn.is_closure()) throw Error(ErrorKind::NotAFunction, "transformation body is not a function: " + show(fn));
  std::optional<std::size_t> arity = fn.as_closure().arity;

  auto run = [fn, arity, limits](const std::vector<ModuleDef>& inputs) -> ModuleDef {
    if (arity && *arity != inputs.size()) {
      throw Error(ErrorKind::TransformationFailure, "transformation takes " + std::to_string(*arity) +
                                                        " argument(s), applied to " + std::to_string(inputs.size()));
    }
    std::vector<Value> args;
    args.reserve(inputs.size());
    for (const auto& m : inputs) args.push_back(module_to_val(m));
    Value out;
    try {
      out = apply(fn, std::move(args), limits);
    } catch (const Error& e) {
      if (!is_eval_error(e.kind())) throw;
      throw Error(ErrorKind::TransformationFailure, std::string(to_string(e.kind())) + ": " + e.what());
    }
    try {
      return val_to_module(out);
    } catch (const Error& e) {
      throw Error(ErrorKind::TransformationFailure, std::string(to_string(e.kind())) + ": " + e.what());
    }
  };
  return Transformation{std::move(run), arity};
}

Env module_env(const Compiled& c) {
  Env env = env_for(get_model(c).env);
  if (c.type() != ModuleType::Base) return env;
  return env.extend(std::vector<Env::Binding>(c.defs().begin(), c.defs().end()));
}

}  // namespace modlock::lang

namespace modlock {

namespace {

class KernelHost final : public Host {
 public:
  BaseDefs compile_base(const SExpr& body, const ModuleEnv& menv, const lang::EvalLimits& limits) const override {
    return lang::compile_base(body, menv, limits);
  }
  Transformation compile_trans(const SExpr& body, const ModuleEnv& menv,
                               const lang::EvalLimits& limits) const override {
    return lang::compile_trans(body, menv, limits);
  }
};

}  // namespace

const Host& kernel_host() {
  static const KernelHost host;
  return host;
}

}  // namespace modlock
