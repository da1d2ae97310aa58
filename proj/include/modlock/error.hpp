#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace modlock {

enum class ErrorKind {
  // reader and module syntax
  Syntax,
  MalformedBody,
  MalformedModule,
  ExpSyntax,
  // module semantics
  UnresolvedImport,
  NotATransformation,
  TransformationFailure,
  MalformedGeneratedModule,
  DuplicateDefinition,
  // kernel evaluation
  UnboundVariable,
  NotAFunction,
  ArityMismatch,
  TypeError,
  SpliceError,
  UserError,
  BudgetExceeded,
  // summaries and workspace
  UnknownModule,
  ModuleNotFound,
  CyclicDependency,
  HiddenDependency,
  Io,
};

std::string_view to_string(ErrorKind kind);

/// True for the kinds raised by the kernel evaluator.
bool is_eval_error(ErrorKind kind);

/// Base of every error raised by the library. `trace()` collects context
/// frames (innermost first) as the error propagates through the workspace.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }
  const std::vector<std::string>& trace() const noexcept { return trace_; }
  void add_trace(std::string frame) { trace_.push_back(std::move(frame)); }

  /// "Kind: message" followed by one indented line per trace frame.
  std::string detailed() const;

 private:
  ErrorKind kind_;
  std::vector<std::string> trace_;
};

class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& message, std::size_t line, std::size_t column);
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// A Simple import name that is not bound in the module environment.
/// `generated_chain()` lists the generated modules (innermost first) whose
/// compilation was in progress when the lookup failed; it is non-empty
/// exactly when a transformation produced the unresolvable import.
class UnresolvedImport : public Error {
 public:
  explicit UnresolvedImport(std::string name);
  const std::string& name() const noexcept { return name_; }
  const std::vector<std::string>& generated_chain() const noexcept { return chain_; }
  void add_generated(std::string id) { chain_.push_back(std::move(id)); }

 private:
  std::string name_;
  std::vector<std::string> chain_;
};

class HiddenDependency : public Error {
 public:
  HiddenDependency(std::string generated, std::vector<std::string> names,
                   std::vector<std::string> gen_by);
  const std::string& generated() const noexcept { return generated_; }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::vector<std::string>& gen_by() const noexcept { return gen_by_; }

 private:
  std::string generated_;
  std::vector<std::string> names_;
  std::vector<std::string> gen_by_;
};

class CyclicDependency : public Error {
 public:
  explicit CyclicDependency(std::vector<std::string> cycle);
  const std::vector<std::string>& cycle() const noexcept { return cycle_; }

 private:
  std::vector<std::string> cycle_;
};

class ModuleNotFound : public Error {
 public:
  ModuleNotFound(std::string name, std::string searched);
  const std::string& name() const noexcept { return name_; }
  const std::string& searched() const noexcept { return searched_; }

 private:
  std::string name_;
  std::string searched_;
};

}  // namespace modlock
