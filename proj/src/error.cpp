#include "modlock/error.hpp"

namespace modlock {

namespace {

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Syntax: return "SyntaxError";
    case ErrorKind::MalformedBody: return "MalformedBody";
    case ErrorKind::MalformedModule: return "MalformedModule";
    case ErrorKind::ExpSyntax: return "ExpSyntaxError";
    case ErrorKind::UnresolvedImport: return "UnresolvedImport";
    case ErrorKind::NotATransformation: return "NotATransformation";
    case ErrorKind::TransformationFailure: return "TransformationFailure";
    case ErrorKind::MalformedGeneratedModule: return "MalformedGeneratedModule";
    case ErrorKind::DuplicateDefinition: return "DuplicateDefinition";
    case ErrorKind::UnboundVariable: return "UnboundVariable";
    case ErrorKind::NotAFunction: return "NotAFunction";
    case ErrorKind::ArityMismatch: return "ArityMismatch";
    case ErrorKind::TypeError: return "TypeError";
    case ErrorKind::SpliceError: return "SpliceError";
    case ErrorKind::UserError: return "UserError";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
    case ErrorKind::UnknownModule: return "UnknownModule";
    case ErrorKind::ModuleNotFound: return "ModuleNotFound";
    case ErrorKind::CyclicDependency: return "CyclicDependency";
    case ErrorKind::HiddenDependency: return "HiddenDependency";
    case ErrorKind::Io: return "IoError";
  }
  return "Error";
}

bool is_eval_error(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::UnboundVariable:
    case ErrorKind::NotAFunction:
    case ErrorKind::ArityMismatch:
    case ErrorKind::TypeError:
    case ErrorKind::SpliceError:
    case ErrorKind::UserError:
    case ErrorKind::BudgetExceeded:
      return true;
    default:
      return false;
  }
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(message), kind_(kind) {}

std::string Error::detailed() const {
  std::string out = std::string(to_string(kind_)) + ": " + what();
  for (const auto& frame : trace_) out += "\n  " + frame;
  return out;
}

SyntaxError::SyntaxError(const std::string& message, std::size_t line, std::size_t column)
    : Error(ErrorKind::Syntax,
            std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      line_(line),
      column_(column) {}

UnresolvedImport::UnresolvedImport(std::string name)
    : Error(ErrorKind::UnresolvedImport, "module name '" + name + "' is not bound"),
      name_(std::move(name)) {}

HiddenDependency::HiddenDependency(std::string generated, std::vector<std::string> names,
                                   std::vector<std::string> gen_by)
    : Error(ErrorKind::HiddenDependency,
            "generated module " + generated + " depends on " + join(names, ", ") +
                ", which is not declared by any of " + join(gen_by, ", ")),
      generated_(std::move(generated)),
      names_(std::move(names)),
      gen_by_(std::move(gen_by)) {}

CyclicDependency::CyclicDependency(std::vector<std::string> cycle)
    : Error(ErrorKind::CyclicDependency, "import cycle: " + join(cycle, " -> ")),
      cycle_(std::move(cycle)) {}

ModuleNotFound::ModuleNotFound(std::string name, std::string searched)
    : Error(ErrorKind::ModuleNotFound, "module " + name + " not found (looked for " + searched + ")"),
      name_(std::move(name)),
      searched_(std::move(searched)) {}

}  // namespace modlock
