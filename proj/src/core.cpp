#include <set>
#include <stdexcept>

#include "modlock/core.hpp"
#include "modlock/error.hpp"

namespace modlock {

CompiledPtr ModuleEnv::lookup(std::string_view name) const {
  if (log_) log_->emplace_back(name);
  for (const auto& [n, c] : bindings_)
    if (n == name) return c;
  return nullptr;
}

bool ModuleEnv::contains(std::string_view name) const noexcept {
  for (const auto& b : bindings_)
    if (b.first == name) return true;
  return false;
}

ModuleEnv ModuleEnv::concat(const ModuleEnv& tail) const {
  std::vector<Binding> all = bindings_;
  all.insert(all.end(), tail.bindings_.begin(), tail.bindings_.end());
  return ModuleEnv(std::move(all));
}

ModuleEnv ModuleEnv::without(std::string_view name) const {
  std::vector<Binding> kept;
  for (const auto& b : bindings_)
    if (b.first != name) kept.push_back(b);
  return ModuleEnv(std::move(kept));
}

ModuleEnv ModuleEnv::instrumented(std::shared_ptr<LookupLog> log) const {
  ModuleEnv copy = *this;
  copy.log_ = std::move(log);
  return copy;
}

CompiledPtr Compiled::base(ModelClosure model, BaseDefs defs, std::string id) {
  return CompiledPtr(new Compiled(std::move(model), std::move(defs), std::move(id)));
}

CompiledPtr Compiled::trans(ModelClosure model, Transformation fn, std::string id) {
  return CompiledPtr(new Compiled(std::move(model), std::move(fn), std::move(id)));
}

CompiledPtr Compiled::model(ModelClosure model, std::string id) {
  return CompiledPtr(new Compiled(std::move(model), ModelOnly{}, std::move(id)));
}

const BaseDefs& Compiled::defs() const {
  if (auto* d = std::get_if<BaseDefs>(&payload_)) return *d;
  throw std::logic_error("Compiled::defs on a non-base module");
}

const Transformation& Compiled::transformation() const {
  if (auto* t = std::get_if<Transformation>(&payload_)) return *t;
  throw std::logic_error("Compiled::transformation on a non-transformation module");
}

const ModelClosure& get_model(const Compiled& c) { return c.closure(); }

namespace {

const Host& host_of(const CompileOptions& options) {
  return options.host != nullptr ? *options.host : kernel_host();
}

CompiledPtr compile_module_at(const ModuleEnv& env, const ModuleDef& m, const CompileOptions& options,
                              std::string id, std::size_t depth);

CompiledPtr compile_import_at(const ModuleEnv& env, const ImportExpr& i, const CompileOptions& options,
                              std::size_t depth) {
  if (i.is_simple()) {
    CompiledPtr found = env.lookup(i.name());
    if (!found) throw UnresolvedImport(i.name());
    return found;
  }

  CompiledPtr trans = compile_import_at(env, i.target(), options, depth);
  if (trans->type() != ModuleType::Trans) {
    throw Error(ErrorKind::NotATransformation,
                import_key(i.target()) + " is a " + std::string(to_string(trans->type())) +
                    " module and cannot be applied");
  }
  std::vector<CompiledPtr> args;
  args.reserve(i.args().size());
  for (const auto& a : i.args()) args.push_back(compile_import_at(env, a, options, depth));

  std::string id = trans->id() + "(";
  for (std::size_t k = 0; k < args.size(); ++k) {
    if (k > 0) id += ",";
    id += args[k]->id();
  }
  id += ")";

  GenerationHook* hook = options.hook;
  if (hook != nullptr) {
    if (CompiledPtr memo = hook->find(id)) return memo;
  }
  if (depth >= options.max_generation_depth) {
    throw Error(ErrorKind::TransformationFailure,
                "generation nested deeper than " + std::to_string(options.max_generation_depth) + " levels at " + id);
  }

  try {
    ModuleDef generated;
    std::optional<ModuleDef> cached = hook != nullptr ? hook->cached_syntax(id) : std::nullopt;
    if (cached) {
      generated = std::move(*cached);
    } else {
      std::vector<ModuleDef> inputs;
      inputs.reserve(args.size());
      for (const auto& a : args) inputs.push_back(get_model(*a).syntax);
      try {
        generated = trans->transformation().apply(inputs);
      } catch (Error& e) {
        e.add_trace("while generating " + id);
        throw;
      }
    }

    // current-arg-i ++ current-trans ++ argument closure envs ++ the
    // transformation's closure env. Nothing from the caller's env.
    std::vector<ModuleEnv::Binding> natives;
    for (std::size_t k = 0; k < args.size(); ++k) natives.emplace_back("current-arg-" + std::to_string(k + 1), args[k]);
    natives.emplace_back("current-trans", trans);
    ModuleEnv gen_env(std::move(natives));
    for (const auto& a : args) gen_env = gen_env.concat(get_model(*a).env);
    gen_env = gen_env.concat(get_model(*trans).env);

    if (hook != nullptr) hook->before_compile(GenerationEvent{id, generated, trans, args, gen_env});
    CompiledPtr result;
    try {
      result = compile_module_at(gen_env, generated, options, id, depth + 1);
    } catch (UnresolvedImport& e) {
      e.add_generated(id);
      throw;
    }
    if (hook != nullptr) hook->after_compile(id, result);
    return result;
  } catch (...) {
    if (hook != nullptr) hook->aborted(id);
    throw;
  }
}

CompiledPtr compile_module_at(const ModuleEnv& env, const ModuleDef& m, const CompileOptions& options,
                              std::string id, std::size_t depth) {
  std::vector<ModuleEnv::Binding> body_env;
  body_env.reserve(m.imports.size());
  for (const auto& imp : m.imports) body_env.emplace_back(imp.local_name, compile_import_at(env, imp.expr, options, depth));
  ModelClosure model{m, ModuleEnv(std::move(body_env))};

  switch (type_of(m.body)) {
    case ModuleType::Base: {
      BaseDefs defs = host_of(options).compile_base(m.body, model.env, options.limits);
      return Compiled::base(std::move(model), std::move(defs), std::move(id));
    }
    case ModuleType::Trans: {
      Transformation fn = host_of(options).compile_trans(m.body, model.env, options.limits);
      return Compiled::trans(std::move(model), std::move(fn), std::move(id));
    }
    case ModuleType::Model:
      return Compiled::model(std::move(model), std::move(id));
  }
  throw std::logic_error("unreachable module type");
}

}  // namespace

CompiledPtr compile_module(const ModuleEnv& env, const ModuleDef& m, const CompileOptions& options, std::string id) {
  return compile_module_at(env, m, options, std::move(id), 0);
}

CompiledPtr compile_import(const ModuleEnv& env, const ImportExpr& i, const CompileOptions& options) {
  return compile_import_at(env, i, options, 0);
}

std::vector<std::string> unresolved_names(const ModuleEnv& env, const ModuleDef& m) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& name : deps(m))
    if (!env.contains(name) && seen.insert(name).second) out.push_back(name);
  return out;
}

}  // namespace modlock
