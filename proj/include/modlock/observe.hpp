#pragma once

// Observational equality of compiled modules. Functions cannot be compared
// directly, so closures are applied to a fixed set of probe arguments and
// transformations to a fixed set of small probe modules; everything else is
// compared structurally.

#include <string>
#include <vector>

#include "modlock/core.hpp"
#include "modlock/lang.hpp"

namespace modlock::observe {

struct Verdict {
  bool equal = true;
  std::string reason;  // first difference found
  explicit operator bool() const noexcept { return equal; }
};

Verdict equivalent(const CompiledPtr& a, const CompiledPtr& b);
Verdict equivalent(const lang::Value& a, const lang::Value& b);

/// Argument lists every closure is applied to.
const std::vector<std::vector<lang::Value>>& closure_probes();
/// Modules transformations are applied to.
const std::vector<ModuleDef>& module_probes();

}  // namespace modlock::observe
