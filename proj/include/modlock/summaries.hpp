#pragma once

// Compilation summaries: for every compiled module, the module names it used
// and the names involved in generating it. Hidden dependencies of a
// generated module are the used names that neither its generators nor their
// own dependencies account for.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "modlock/sexpr.hpp"

namespace modlock::summaries {

using NameSet = std::set<std::string>;

struct Summary {
  std::string id;
  NameSet used;
  NameSet gen_by;  // empty exactly for user-written modules
  friend bool operator==(const Summary&, const Summary&) = default;
};

class SummaryStore {
 public:
  void put(Summary s);
  /// Throws Error(UnknownModule).
  const Summary& get(const std::string& id) const;
  const Summary* find(const std::string& id) const;
  bool contains(const std::string& id) const { return by_id_.contains(id); }
  bool erase(const std::string& id) { return by_id_.erase(id) > 0; }
  std::size_t size() const noexcept { return by_id_.size(); }
  const std::map<std::string, Summary>& all() const noexcept { return by_id_; }

  /// Ids whose used or gen_by sets mention any of `ids`, transitively,
  /// together with `ids` themselves.
  NameSet reverse_closure(const NameSet& ids) const;

 private:
  std::map<std::string, Summary> by_id_;
};

/// gen_by(mod) plus the used sets of its members.
NameSet allowed(const SummaryStore& store, const std::string& mod);

/// m is allowed in mod, or m is generated and all of its generators are.
/// Revisiting a name on the current path yields false.
bool dep_ok(const std::string& m, const std::string& mod, const SummaryStore& store);

/// Members of used(mod) that fail dep_ok.
NameSet hidden(const std::string& mod, const SummaryStore& store);

/// `(summary "id" (used "a" ...) (genby "t" ...))`
SExpr summary_to_sexpr(const Summary& s);
/// Throws Error(Syntax) on a malformed record.
Summary summary_from_sexpr(const SExpr& e);

}  // namespace modlock::summaries
