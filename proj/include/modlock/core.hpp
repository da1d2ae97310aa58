#pragma once

// Modules, imports and their compilation. A module is a list of named
// imports plus a body; compiling it resolves every import against an
// explicit module environment and closes the module's syntax over the
// resulting environment. Transformation applications inside imports are
// run at compile time, and the generated module is compiled only against
// what the transformation and its arguments were themselves compiled with.

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "modlock/sexpr.hpp"
#include "modlock/value.hpp"

namespace modlock {

/// `name` or `target(args...)`; `target` may itself be an application.
class ImportExpr {
 public:
  static ImportExpr simple(std::string name);
  /// Throws std::invalid_argument when `args` is empty.
  static ImportExpr apply(ImportExpr target, std::vector<ImportExpr> args);

  bool is_simple() const noexcept { return target_ == nullptr; }
  const std::string& name() const;
  const ImportExpr& target() const;
  const std::vector<ImportExpr>& args() const noexcept { return args_; }

  friend bool operator==(const ImportExpr& a, const ImportExpr& b);

 private:
  std::string name_;
  std::shared_ptr<const ImportExpr> target_;
  std::vector<ImportExpr> args_;
};

struct Import {
  std::string local_name;
  ImportExpr expr;
  friend bool operator==(const Import&, const Import&) = default;
};

/// A module carries no name of its own; names are attached externally.
struct ModuleDef {
  std::vector<Import> imports;
  SExpr body;
  friend bool operator==(const ModuleDef&, const ModuleDef&) = default;
};

enum class ModuleType { Base, Trans, Model };

std::string_view to_string(ModuleType type);

/// Classifies a body: (model x), (transformation e) or (base (defs...)).
/// Throws MalformedBody otherwise.
ModuleType type_of(const SExpr& body);

/// Reads `(module (imports i...) body)`. Each import is `(local expr)` or a
/// bare name, whose local name defaults to its last dotted segment. A body of
/// one or more `(define ...)` forms is normalized to `(base ((name exp)...))`.
ModuleDef parse_module(const SExpr& e);

/// Canonical surface form with every local name explicit.
SExpr module_to_sexpr(const ModuleDef& m);

ImportExpr parse_import_expr(const SExpr& e);
SExpr import_to_sexpr(const ImportExpr& i);

/// Prose notation used for generated-module ids and the CLI:
/// `t`, `t(a,b)`, `t(u)(a)`.
std::string import_key(const ImportExpr& i);
/// Parses the prose notation. Throws SyntaxError.
ImportExpr parse_import_key(std::string_view text);

std::string default_local_name(std::string_view module_name);

/// Declared dependencies, in order, duplicates preserved.
std::vector<std::string> deps(const ModuleDef& m);
std::vector<std::string> deps_imp(const ImportExpr& i);

class Compiled;
using CompiledPtr = std::shared_ptr<const Compiled>;

/// Association list of module names to compiled modules; the first binding
/// of a name wins.
class ModuleEnv {
 public:
  using Binding = std::pair<std::string, CompiledPtr>;
  using LookupLog = std::vector<std::string>;

  ModuleEnv() = default;
  explicit ModuleEnv(std::vector<Binding> bindings) : bindings_(std::move(bindings)) {}

  /// nullptr when unbound. Records the name when the env is instrumented.
  CompiledPtr lookup(std::string_view name) const;
  bool contains(std::string_view name) const noexcept;

  const std::vector<Binding>& bindings() const noexcept { return bindings_; }
  bool empty() const noexcept { return bindings_.empty(); }
  std::size_t size() const noexcept { return bindings_.size(); }

  /// `*this ++ tail`
  ModuleEnv concat(const ModuleEnv& tail) const;
  /// All bindings of `name` removed.
  ModuleEnv without(std::string_view name) const;
  /// Copy that appends every looked-up name to `log`.
  ModuleEnv instrumented(std::shared_ptr<LookupLog> log) const;

 private:
  std::vector<Binding> bindings_;
  std::shared_ptr<LookupLog> log_;
};

/// A module's syntax closed over the environment it was compiled in.
struct ModelClosure {
  ModuleDef syntax;
  ModuleEnv env;
};

using BaseDefs = std::vector<std::pair<std::string, lang::Value>>;

/// Function from syntactic modules to a syntactic module.
struct Transformation {
  std::function<ModuleDef(const std::vector<ModuleDef>&)> apply;
  std::optional<std::size_t> arity;  // nullopt: any number of arguments
};

/// Semantic value of a module. Every variant carries its model closure.
class Compiled {
 public:
  static CompiledPtr base(ModelClosure model, BaseDefs defs, std::string id = {});
  static CompiledPtr trans(ModelClosure model, Transformation fn, std::string id = {});
  static CompiledPtr model(ModelClosure model, std::string id = {});

  ModuleType type() const noexcept { return static_cast<ModuleType>(payload_.index()); }
  const ModelClosure& closure() const noexcept { return model_; }
  const BaseDefs& defs() const;
  const Transformation& transformation() const;

  /// Workspace identity: a dotted module name, or the import key of the
  /// application that generated this module. Empty when compiled ad hoc.
  const std::string& id() const noexcept { return id_; }

 private:
  struct ModelOnly {};
  Compiled(ModelClosure model, std::variant<BaseDefs, Transformation, ModelOnly> payload, std::string id)
      : model_(std::move(model)), payload_(std::move(payload)), id_(std::move(id)) {}

  ModelClosure model_;
  std::variant<BaseDefs, Transformation, ModelOnly> payload_;
  std::string id_;
};

const ModelClosure& get_model(const Compiled& c);

/// The body language behind base and transformation modules.
class Host {
 public:
  virtual ~Host() = default;
  virtual BaseDefs compile_base(const SExpr& body, const ModuleEnv& menv,
                                const lang::EvalLimits& limits) const = 0;
  virtual Transformation compile_trans(const SExpr& body, const ModuleEnv& menv,
                                       const lang::EvalLimits& limits) const = 0;
};

/// The Scheme-like kernel language (see lang.hpp).
const Host& kernel_host();

struct GenerationEvent {
  const std::string& id;
  const ModuleDef& module;
  const CompiledPtr& trans;
  const std::vector<CompiledPtr>& args;
  const ModuleEnv& gen_env;
};

/// Observer for transformation applications. The workspace uses it to
/// memoize generated modules, replay cached generated syntax and check
/// compilation summaries; compile_import itself stays pure without it.
class GenerationHook {
 public:
  virtual ~GenerationHook() = default;
  /// Previously compiled result for this generated module, if any.
  virtual CompiledPtr find(const std::string& /*id*/) { return nullptr; }
  /// Generated syntax to use instead of running the transformation.
  virtual std::optional<ModuleDef> cached_syntax(const std::string& /*id*/) { return std::nullopt; }
  /// Called before the generated module is compiled; may throw.
  virtual void before_compile(const GenerationEvent& /*event*/) {}
  virtual void after_compile(const std::string& /*id*/, const CompiledPtr& /*result*/) {}
  virtual void aborted(const std::string& /*id*/) {}
};

struct CompileOptions {
  const Host* host = nullptr;  // nullptr: kernel_host()
  GenerationHook* hook = nullptr;
  lang::EvalLimits limits{};
  std::size_t max_generation_depth = 64;
};

CompiledPtr compile_module(const ModuleEnv& env, const ModuleDef& m, const CompileOptions& options = {},
                           std::string id = {});
CompiledPtr compile_import(const ModuleEnv& env, const ImportExpr& i, const CompileOptions& options = {});

/// Names in deps(m) that `env` does not bind, in order, without duplicates.
/// Unless an earlier import fails for another reason, compile_module(env, m)
/// raises UnresolvedImport for the first of them.
std::vector<std::string> unresolved_names(const ModuleEnv& env, const ModuleDef& m);

}  // namespace modlock
