#include "modlock/workspace.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>
#include <system_error>

#include "modlock/error.hpp"

namespace fs = std::filesystem;

namespace modlock {

using summaries::NameSet;
using summaries::Summary;
using summaries::SummaryStore;

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorKind::Io, "sha256 failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int k = 0; k < len; ++k) {
    out += hex[digest[k] >> 4];
    out += hex[digest[k] & 0xf];
  }
  return out;
}

namespace {

constexpr const char* kCacheDir = ".modcache";
constexpr const char* kCacheFile = "cache.sexp";

std::optional<std::string> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

bool valid_segment(std::string_view s) {
  if (s.empty() || s == "." || s == "..") return false;
  return s.find_first_of("/\\") == std::string_view::npos && is_symbol_text(s);
}

void collect_apply_keys(const ImportExpr& i, NameSet& out) {
  if (i.is_simple()) return;
  out.insert(import_key(i));
  collect_apply_keys(i.target(), out);
  for (const auto& a : i.args()) collect_apply_keys(a, out);
}

struct StackGuard {
  std::vector<std::string>& stack;
  std::size_t depth;
  ~StackGuard() { stack.resize(depth); }
};

}  // namespace

// ---------------------------------------------------------------- hook

class Workspace::Hook final : public GenerationHook {
 public:
  explicit Hook(Workspace& ws) : ws_(ws) {}

  CompiledPtr find(const std::string& id) override {
    if (ws_.in_progress(id)) {
      auto at = std::find(ws_.stack_.begin(), ws_.stack_.end(), id);
      std::vector<std::string> cycle(at, ws_.stack_.end());
      cycle.push_back(id);
      throw CyclicDependency(std::move(cycle));
    }
    return ws_.memoized(id);
  }

  std::optional<ModuleDef> cached_syntax(const std::string& id) override {
    auto it = ws_.cache_.find(id);
    if (it == ws_.cache_.end() || !it->second.syntax) return std::nullopt;
    ws_.replaying_.insert(id);
    return it->second.syntax;
  }

  void before_compile(const GenerationEvent& ev) override {
    Summary s{ev.id, {}, {}};
    s.gen_by.insert(ev.trans->id());
    for (const auto& a : ev.args) s.gen_by.insert(a->id());

    NameSet unresolvable;
    std::map<std::string, std::optional<std::string>> resolved;
    auto resolve_name = [&](const std::string& n) -> std::optional<std::string> {
      if (auto it = resolved.find(n); it != resolved.end()) return it->second;
      std::optional<std::string> id;
      if (CompiledPtr c = ev.gen_env.lookup(n)) {
        id = c->id();
      } else if (!ws_.in_progress(n)) {
        // Not bound for the generated module: judge it as the global module.
        try {
          ws_.resolve(n);
          id = ws_.compile(n)->id();
        } catch (const Error&) {
        }
      }
      if (!id) unresolvable.insert(n);
      resolved.emplace(n, id);
      return id;
    };

    SummaryStore overlay = ws_.store_;
    std::function<std::optional<std::string>(const ImportExpr&)> key_of =
        [&](const ImportExpr& i) -> std::optional<std::string> {
      if (i.is_simple()) return resolve_name(i.name());
      auto target = key_of(i.target());
      std::vector<std::string> args;
      bool complete = target.has_value();
      for (const auto& a : i.args()) {
        auto k = key_of(a);
        if (k) args.push_back(*k);
        else complete = false;
      }
      if (!complete) return std::nullopt;
      std::string key = *target + "(";
      for (std::size_t k = 0; k < args.size(); ++k) key += (k > 0 ? "," : "") + args[k];
      key += ")";
      if (!overlay.contains(key)) {
        NameSet gen_by(args.begin(), args.end());
        gen_by.insert(*target);
        overlay.put(Summary{key, {}, std::move(gen_by)});
      }
      return key;
    };
    for (const auto& imp : ev.module.imports)
      if (auto k = key_of(imp.expr)) s.used.insert(*k);
    for (const auto& [n, id] : resolved)
      if (id) s.used.insert(*id);

    overlay.put(s);
    NameSet bad = unresolvable;
    for (const auto& m : s.used) {
      bool ok = false;
      try {
        ok = summaries::dep_ok(m, ev.id, overlay);
      } catch (const Error&) {
      }
      if (!ok) bad.insert(m);
    }

    if (ws_.options_.hidden_check == HiddenCheck::Audit) {
      ws_.audit_.push_back(AuditRecord{ev.id, std::vector<std::string>(bad.begin(), bad.end()),
                                       unresolved_names(ev.gen_env, ev.module)});
    } else if (ws_.options_.hidden_check == HiddenCheck::Enforce && !bad.empty()) {
      throw HiddenDependency(ev.id, std::vector<std::string>(bad.begin(), bad.end()),
                             std::vector<std::string>(s.gen_by.begin(), s.gen_by.end()));
    }

    ws_.stack_.push_back(ev.id);
    pending_.insert_or_assign(ev.id, std::move(s));
  }

  void after_compile(const std::string& id, const CompiledPtr& result) override {
    pop(id);
    Summary s = std::move(pending_.at(id));
    pending_.erase(id);
    ws_.store_.put(s);
    ws_.cache_.insert_or_assign(id, CacheEntry{std::nullopt, result->closure().syntax, std::move(s)});
    ws_.memo_.insert_or_assign(id, result);
    ws_.record(id, result, true);
  }

  void aborted(const std::string& id) override {
    if (pending_.erase(id) > 0) pop(id);
    ws_.replaying_.erase(id);
  }

 private:
  void pop(const std::string& id) {
    if (!ws_.stack_.empty() && ws_.stack_.back() == id) ws_.stack_.pop_back();
  }

  Workspace& ws_;
  std::map<std::string, Summary> pending_;
};

// ---------------------------------------------------------------- workspace

Workspace::Workspace(fs::path root, WorkspaceOptions options)
    : root_(std::move(root)), options_(options), hook_(std::make_unique<Hook>(*this)) {
  if (options_.use_cache) load_cache();
}

Workspace::~Workspace() = default;

fs::path Workspace::resolve(std::string_view name) const {
  fs::path path = root_;
  std::size_t start = 0;
  bool ok = !name.empty();
  while (ok) {
    std::size_t dot = name.find('.', start);
    std::string_view seg = name.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start);
    ok = valid_segment(seg);
    if (dot == std::string_view::npos) {
      path /= std::string(seg) + ".mod";
      break;
    }
    path /= std::string(seg);
    start = dot + 1;
  }
  std::error_code ec;
  if (!ok || !fs::is_regular_file(path, ec)) throw ModuleNotFound(std::string(name), path.string());
  return path;
}

std::optional<std::string> Workspace::name_of(const fs::path& path) const {
  std::error_code ec;
  fs::path abs = fs::weakly_canonical(path.is_absolute() ? path : fs::current_path() / path, ec);
  if (ec) return std::nullopt;
  fs::path base = fs::weakly_canonical(root_, ec);
  if (ec) return std::nullopt;
  fs::path rel = abs.lexically_relative(base);
  if (rel.empty() || rel.extension() != ".mod") return std::nullopt;
  std::string name;
  for (auto it = rel.begin(); it != rel.end(); ++it) {
    std::string seg = std::next(it) == rel.end() ? it->stem().string() : it->string();
    if (!valid_segment(seg)) return std::nullopt;
    if (!name.empty()) name += ".";
    name += seg;
  }
  return name;
}

std::vector<std::string> Workspace::list_modules() const {
  std::vector<std::string> out;
  std::error_code ec;
  for (auto it = fs::recursive_directory_iterator(root_, ec); !ec && it != fs::recursive_directory_iterator();
       it.increment(ec)) {
    if (it->is_directory() && it->path().filename() == kCacheDir) {
      it.disable_recursion_pending();
      continue;
    }
    if (it->is_regular_file() && it->path().extension() == ".mod")
      if (auto n = name_of(it->path())) out.push_back(*n);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string Workspace::read_source(const std::string& name, fs::path& path) const {
  path = resolve(name);
  auto text = read_file(path);
  if (!text) throw Error(ErrorKind::Io, "cannot read " + path.string());
  return std::move(*text);
}

ModuleDef Workspace::parse(const std::string& name) const {
  fs::path path;
  std::string source = read_source(name, path);
  try {
    return parse_module(parse_sexpr(source));
  } catch (Error& e) {
    e.add_trace("in " + path.string());
    throw;
  }
}

CompileOptions Workspace::compile_options() {
  CompileOptions o;
  o.hook = hook_.get();
  o.limits = options_.limits;
  o.max_generation_depth = options_.max_generation_depth;
  return o;
}

bool Workspace::in_progress(const std::string& id) const {
  return std::find(stack_.begin(), stack_.end(), id) != stack_.end();
}

CompiledPtr Workspace::memoized(const std::string& id) const {
  auto it = memo_.find(id);
  return it == memo_.end() ? nullptr : it->second;
}

void Workspace::record(const std::string& id, const CompiledPtr& c, bool generated) {
  bool replayed = generated ? replaying_.erase(id) > 0 : false;
  if (!generated) {
    auto it = cache_.find(id);
    replayed = it != cache_.end() && it->second.hash && hashes_.contains(id) && *it->second.hash == hashes_.at(id);
  }
  log_.push_back(CompileEvent{id, c->type(), generated, replayed});
}

std::size_t Workspace::fresh_compiles() const {
  return static_cast<std::size_t>(std::count_if(log_.begin(), log_.end(), [](const auto& e) { return !e.replayed; }));
}

CompiledPtr Workspace::compile(const std::string& name) {
  if (CompiledPtr hit = memoized(name)) return hit;
  if (in_progress(name)) {
    auto at = std::find(stack_.begin(), stack_.end(), name);
    std::vector<std::string> cycle(at, stack_.end());
    cycle.push_back(name);
    throw CyclicDependency(std::move(cycle));
  }

  fs::path path;
  std::string source = read_source(name, path);
  std::string hash = sha256_hex(source);
  if (auto it = cache_.find(name); it != cache_.end() && it->second.hash != hash) invalidate({name});

  StackGuard guard{stack_, stack_.size()};
  stack_.push_back(name);
  try {
    ModuleDef m = parse_module(parse_sexpr(source));
    std::vector<ModuleEnv::Binding> env;
    Summary s{name, {}, {}};
    for (const auto& dep : deps(m)) {
      if (!s.used.insert(dep).second) continue;
      env.emplace_back(dep, compile(dep));
    }
    for (const auto& imp : m.imports) collect_apply_keys(imp.expr, s.used);

    CompiledPtr c = modlock::compile_module(ModuleEnv(std::move(env)), m, compile_options(), name);

    hashes_.insert_or_assign(name, hash);
    record(name, c, false);
    store_.put(s);
    cache_.insert_or_assign(name, CacheEntry{hash, std::nullopt, std::move(s)});
    memo_.insert_or_assign(name, c);
    return c;
  } catch (Error& e) {
    e.add_trace("in module " + name + " (" + path.string() + ")");
    throw;
  }
}

CompiledPtr Workspace::compile_import(const ImportExpr& i) {
  if (i.is_simple()) return compile(i.name());
  std::vector<ModuleEnv::Binding> env;
  NameSet seen;
  for (const auto& n : deps_imp(i))
    if (seen.insert(n).second) env.emplace_back(n, compile(n));
  return modlock::compile_import(ModuleEnv(std::move(env)), i, compile_options());
}

void Workspace::invalidate(const NameSet& ids) {
  SummaryStore known = store_;
  for (const auto& [id, entry] : cache_)
    if (!known.contains(id)) known.put(entry.summary);
  for (const auto& id : known.reverse_closure(ids)) {
    memo_.erase(id);
    store_.erase(id);
    cache_.erase(id);
    hashes_.erase(id);
  }
}

std::vector<std::string> Workspace::rebuild(const std::vector<fs::path>& changed_paths) {
  NameSet changed;
  for (const auto& p : changed_paths) {
    auto name = name_of(p);
    if (!name) throw ModuleNotFound(p.string(), p.string());
    std::optional<std::string> known;
    if (auto it = hashes_.find(*name); it != hashes_.end()) known = it->second;
    else if (auto c = cache_.find(*name); c != cache_.end()) known = c->second.hash;
    auto text = read_file(p);
    if (!known || !text || sha256_hex(*text) != *known) changed.insert(*name);
  }

  NameSet roots = changed;
  for (const auto& [id, _] : hashes_) roots.insert(id);
  for (const auto& [id, entry] : cache_)
    if (entry.hash) roots.insert(id);

  invalidate(changed);

  std::size_t before = log_.size();
  for (const auto& name : roots) {
    try {
      resolve(name);
    } catch (const ModuleNotFound&) {
      continue;
    }
    compile(name);
  }
  NameSet fresh;
  for (std::size_t k = before; k < log_.size(); ++k)
    if (!log_[k].replayed) fresh.insert(log_[k].id);
  return std::vector<std::string>(fresh.begin(), fresh.end());
}

fs::path Workspace::cache_path() const { return root_ / kCacheDir / kCacheFile; }

void Workspace::load_cache() {
  auto text = read_file(cache_path());
  if (!text) return;
  std::map<std::string, CacheEntry> loaded;
  try {
    SExpr doc = parse_sexpr(*text);
    if (!doc.is_form("modcache") || doc.items().size() < 2 || !doc.items()[1].is_num() || doc.items()[1].number() != 1)
      return;
    for (std::size_t k = 2; k < doc.items().size(); ++k) {
      const SExpr& rec = doc.items()[k];
      const auto& items = rec.items();
      if (rec.is_form("module") && items.size() == 4 && items[1].is_str() && items[2].is_form("hash") &&
          items[2].items().size() == 2 && items[2].items()[1].is_str()) {
        loaded.emplace(items[1].text(),
                       CacheEntry{items[2].items()[1].text(), std::nullopt, summaries::summary_from_sexpr(items[3])});
      } else if (rec.is_form("generated") && items.size() == 4 && items[1].is_str() && items[2].is_form("syntax") &&
                 items[2].items().size() == 2) {
        loaded.emplace(items[1].text(), CacheEntry{std::nullopt, parse_module(items[2].items()[1]),
                                                   summaries::summary_from_sexpr(items[3])});
      } else {
        return;
      }
    }
  } catch (const Error&) {
    return;  // an unreadable cache only costs recompilation
  }
  cache_ = std::move(loaded);
}

void Workspace::save_cache() const {
  SExpr::List doc{SExpr::sym("modcache"), SExpr::num(1)};
  for (const auto& [id, entry] : cache_) {
    if (entry.hash) {
      doc.push_back(SExpr::list({SExpr::sym("module"), SExpr::str(id),
                                 SExpr::list({SExpr::sym("hash"), SExpr::str(*entry.hash)}),
                                 summaries::summary_to_sexpr(entry.summary)}));
    } else if (entry.syntax) {
      doc.push_back(SExpr::list({SExpr::sym("generated"), SExpr::str(id),
                                 SExpr::list({SExpr::sym("syntax"), module_to_sexpr(*entry.syntax)}),
                                 summaries::summary_to_sexpr(entry.summary)}));
    }
  }
  fs::path dir = root_ / kCacheDir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());
  fs::path tmp = dir / (std::string(kCacheFile) + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
    // One record per line keeps the file diffable.
    out << "(modcache 1";
    for (std::size_t k = 2; k < doc.size(); ++k) out << "\n " << print_sexpr(doc[k]);
    out << ")\n";
    if (!out) throw Error(ErrorKind::Io, "cannot write " + tmp.string());
  }
  fs::rename(tmp, cache_path(), ec);
  if (ec) throw Error(ErrorKind::Io, "cannot replace " + cache_path().string() + ": " + ec.message());
}

}  // namespace modlock
