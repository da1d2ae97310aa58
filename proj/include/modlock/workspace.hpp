#pragma once

// A directory of module files compiled on demand. Module `a.b.C` lives in
// `<root>/a/b/C.mod`. Compiled modules are memoized by name, generated
// modules by the import key that produced them (`T(A)`), and every compiled
// module gets a summary used to reject hidden dependencies in generated code.

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "modlock/core.hpp"
#include "modlock/summaries.hpp"

namespace modlock {

enum class HiddenCheck {
  Enforce,  // raise HiddenDependency before compiling the generated module
  Audit,    // record the verdict and let compilation continue
  Off,
};

struct WorkspaceOptions {
  lang::EvalLimits limits{};
  std::size_t max_generation_depth = 64;
  HiddenCheck hidden_check = HiddenCheck::Enforce;
  /// Load `<root>/.modcache/cache.sexp` on open; save_cache() writes it.
  bool use_cache = false;
};

struct CompileEvent {
  std::string id;
  ModuleType type;
  bool generated;
  bool replayed;  // up to date in the cache; compiled again only to rebuild closures
};

/// Verdicts of the two hidden-dependency detectors for one generated module.
struct AuditRecord {
  std::string id;
  std::vector<std::string> hidden;      // summary-based
  std::vector<std::string> unresolved;  // names the generation env does not bind
};

std::string sha256_hex(std::string_view bytes);

class Workspace {
 public:
  explicit Workspace(std::filesystem::path root, WorkspaceOptions options = {});
  ~Workspace();
  Workspace(const Workspace&) = delete;
  Workspace& operator=(const Workspace&) = delete;

  const std::filesystem::path& root() const noexcept { return root_; }
  const WorkspaceOptions& options() const noexcept { return options_; }

  /// Path of an existing module file. Throws ModuleNotFound.
  std::filesystem::path resolve(std::string_view name) const;
  /// Inverse of the path mapping; nullopt outside the root or without `.mod`.
  std::optional<std::string> name_of(const std::filesystem::path& path) const;
  /// Every module file under the root, sorted by name.
  std::vector<std::string> list_modules() const;

  /// Parses a module file without compiling anything.
  ModuleDef parse(const std::string& name) const;

  CompiledPtr compile(const std::string& name);
  /// Compiles an import expression as a client module would see it.
  CompiledPtr compile_import(const ImportExpr& i);

  /// Recompiles after the given files changed. Returns the ids compiled
  /// afresh (replays from the cache are not counted), sorted.
  std::vector<std::string> rebuild(const std::vector<std::filesystem::path>& changed);

  const summaries::SummaryStore& store() const noexcept { return store_; }
  CompiledPtr memoized(const std::string& id) const;

  const std::vector<CompileEvent>& log() const noexcept { return log_; }
  void clear_log() { log_.clear(); }
  /// Number of compile events that were not replays.
  std::size_t fresh_compiles() const;

  const std::vector<AuditRecord>& audit() const noexcept { return audit_; }

  void save_cache() const;
  std::filesystem::path cache_path() const;

 private:
  class Hook;
  struct CacheEntry {
    std::optional<std::string> hash;  // user modules only
    std::optional<ModuleDef> syntax;  // generated modules only
    summaries::Summary summary;
  };

  std::string read_source(const std::string& name, std::filesystem::path& path) const;
  CompileOptions compile_options();
  void invalidate(const summaries::NameSet& ids);
  void load_cache();
  bool in_progress(const std::string& id) const;
  void record(const std::string& id, const CompiledPtr& c, bool generated);

  std::filesystem::path root_;
  WorkspaceOptions options_;
  std::unique_ptr<Hook> hook_;

  std::map<std::string, CompiledPtr> memo_;
  std::map<std::string, std::string> hashes_;
  std::map<std::string, CacheEntry> cache_;
  summaries::SummaryStore store_;
  std::vector<std::string> stack_;
  std::vector<CompileEvent> log_;
  std::vector<AuditRecord> audit_;
  std::set<std::string> replaying_;
};

}  // namespace modlock
