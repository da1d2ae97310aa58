#include "gen.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include "modlock/error.hpp"

namespace modlock::testing {

std::string fixture_dir() { return MODLOCK_FIXTURE_DIR; }

namespace {

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& xs) {
  return xs[std::uniform_int_distribution<std::size_t>(0, xs.size() - 1)(rng)];
}

bool chance(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng); }

std::size_t below(Rng& rng, std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }

const std::vector<std::string> kSymbols = {"a",  "b",     "entity", "x-y", "f?",   "+",     "#t",  "set!",
                                           "-",  "a.b.C", "->",     "λ",   "k:v",  "model", "lambda", "...",
                                           "Z9", "x'",    "-a",     "a1",  "base", "unquote"};

std::string random_text(Rng& rng) {
  static const std::vector<std::string> parts = {"a", "Z", " ", "\"", "\\", "\n", "\t", "\r", ";", "(", ")", "é", "日", "'", "0", "#f"};
  std::string out;
  std::size_t n = below(rng, 6);
  for (std::size_t k = 0; k < n; ++k) out += pick(rng, parts);
  return out;
}

}  // namespace

SExpr random_sexpr(Rng& rng, int depth) {
  std::size_t choice = below(rng, depth > 0 ? 5 : 3);
  switch (choice) {
    case 0: return SExpr::sym(pick(rng, kSymbols));
    case 1: return SExpr::str(random_text(rng));
    case 2: {
      static const std::vector<std::int64_t> edge = {0, -1, 1, 42, std::numeric_limits<std::int64_t>::max(),
                                                     std::numeric_limits<std::int64_t>::min()};
      if (chance(rng, 0.3)) return SExpr::num(pick(rng, edge));
      return SExpr::num(std::uniform_int_distribution<std::int64_t>(-100000, 100000)(rng));
    }
    default: {
      SExpr::List items;
      std::size_t n = below(rng, 5);
      for (std::size_t k = 0; k < n; ++k) items.push_back(random_sexpr(rng, depth - 1));
      return SExpr::list(std::move(items));
    }
  }
}

namespace {

ImportExpr random_import_expr(Rng& rng, int depth) {
  static const std::vector<std::string> names = {"a", "b.c", "t", "lib.util.T", "m0"};
  if (depth <= 0 || chance(rng, 0.6)) return ImportExpr::simple(pick(rng, names));
  std::vector<ImportExpr> args;
  std::size_t n = 1 + below(rng, 2);
  for (std::size_t k = 0; k < n; ++k) args.push_back(random_import_expr(rng, depth - 1));
  return ImportExpr::apply(random_import_expr(rng, depth - 1), std::move(args));
}

}  // namespace

ModuleDef random_module(Rng& rng) {
  ModuleDef m;
  std::size_t n = below(rng, 4);
  for (std::size_t k = 0; k < n; ++k)
    m.imports.push_back(Import{"l" + std::to_string(k), random_import_expr(rng, 2)});
  switch (below(rng, 3)) {
    case 0: m.body = SExpr::list({SExpr::sym("model"), random_sexpr(rng, 3)}); break;
    case 1: m.body = SExpr::list({SExpr::sym("transformation"), random_sexpr(rng, 3)}); break;
    default: {
      SExpr::List defs;
      std::size_t d = below(rng, 4);
      for (std::size_t k = 0; k < d; ++k)
        defs.push_back(SExpr::list({SExpr::sym("d" + std::to_string(k)), random_sexpr(rng, 2)}));
      m.body = SExpr::list({SExpr::sym("base"), SExpr::list(std::move(defs))});
    }
  }
  return m;
}

// ---------------------------------------------------------------- graphs

namespace {

bool is_trans(Template t) { return t != Template::Model && t != Template::Base; }
bool unary_plain(Template t) { return is_trans(t) && t != Template::Wrapper && t != Template::Pair; }

std::string trans_source(Template kind, bool has_h) {
  switch (kind) {
    case Template::Identity: return "(lambda (m) m)";
    case Template::Stamp:
      return std::string("(lambda (m) `(module (imports ") + (has_h ? "(h h)" : "") +
             ") (base ((v ,(+ 1 (length (get-imports m)))) (tag \"stamp\")" + (has_h ? " (w h:v)" : "") + "))))";
    case Template::Propagate:
      return "(lambda (m) `(module (imports ,@(map (lambda (imp) `(,(car imp) (current-trans ,(car imp)))) "
             "(get-imports m))) (model (propagated ,(length (get-imports m))))))";
    case Template::Hidden: return "(lambda (m) '(module (imports (z zz)) (model hidden)))";
    case Template::KeepDeps:
      return "(lambda (m) `(module (imports ,@(map (lambda (imp) `(,(car imp) ,(car imp))) (get-imports m))) "
             "(model kept)))";
    case Template::ArgRef:
      return "(lambda (m) '(module (imports (a current-arg-1) (t current-trans)) "
             "(base ((n (length (get-imports a))) (f (lambda (x) (list x n)))))))";
    case Template::Wrapper:
      return "(lambda (t) `(module (imports ,@(map (lambda (imp) `(,(car imp) ,(car imp))) (get-imports t))) "
             "(transformation (lambda (m) (,(car (cdr (get-body t))) m)))))";
    case Template::Pair:
      return "(lambda (a b) '(module (imports (x current-arg-1) (y current-arg-2)) (model (pair))))";
    default: return "";
  }
}

}  // namespace

std::vector<GraphModule> random_graph(Rng& rng, std::size_t max_modules) {
  static const std::vector<Template> kinds = {
      Template::Model,    Template::Model,  Template::Model,   Template::Base,     Template::Base,
      Template::Base,     Template::Base,   Template::Model,   Template::Base,     Template::Base,
      Template::Identity, Template::Stamp,  Template::Stamp,   Template::Propagate, Template::Hidden,
      Template::KeepDeps, Template::ArgRef, Template::Wrapper, Template::Pair,
  };
  std::size_t n = 2 + below(rng, max_modules - 1);
  std::vector<GraphModule> out;

  for (std::size_t i = 0; i < n; ++i) {
    std::string name = "m" + std::to_string(i);
    Template kind = i == 0 ? (chance(rng, 0.5) ? Template::Model : Template::Base) : pick(rng, kinds);
    if (i == 1 && chance(rng, 0.7))
      while (!is_trans(kind)) kind = pick(rng, kinds);

    std::vector<std::string> imports;  // "(local expr)" texts
    std::set<std::string> locals;
    std::vector<std::pair<std::string, bool>> base_refs;  // local, imports a Base module directly
    auto add = [&](const std::string& local, const std::string& expr, bool base) {
      if (!locals.insert(local).second) return;
      imports.push_back("(" + local + " " + expr + ")");
      base_refs.emplace_back(local, base);
    };

    std::vector<std::size_t> bases, transes, plain_unary;
    for (std::size_t j = 0; j < i; ++j) {
      if (out[j].kind == Template::Base) bases.push_back(j);
      if (is_trans(out[j].kind)) transes.push_back(j);
      if (unary_plain(out[j].kind)) plain_unary.push_back(j);
    }

    bool has_h = false;
    if (is_trans(kind)) {
      if (!bases.empty() && (kind == Template::Stamp || chance(rng, 0.3))) {
        add("h", out[pick(rng, bases)].name, true);
        has_h = true;
      }
    } else if (i > 0) {
      std::size_t k = 1 + below(rng, 3);
      for (std::size_t c = 0; c < k; ++c) {
        std::string local = "l" + std::to_string(c);
        if (chance(rng, 0.03)) {
          add(local, "ghost", false);  // never defined
          continue;
        }
        if (!transes.empty() && chance(rng, 0.75)) {
          const GraphModule& t = out[pick(rng, transes)];
          std::string arg = out[below(rng, i)].name;
          if (t.kind == Template::Pair) {
            add(local, "(" + t.name + " " + arg + " " + out[below(rng, i)].name + ")", false);
          } else if (t.kind == Template::Wrapper && !plain_unary.empty() && chance(rng, 0.8)) {
            add(local, "((" + t.name + " " + out[pick(rng, plain_unary)].name + ") " + arg + ")", false);
          } else {
            add(local, "(" + t.name + " " + arg + ")", false);
          }
        } else {
          std::size_t j = below(rng, i);
          add(chance(rng, 0.5) ? out[j].name : local, out[j].name, out[j].kind == Template::Base);
        }
      }
    }

    std::ostringstream src;
    src << "(module (imports";
    for (const auto& imp : imports) src << " " << imp;
    src << ") ";
    switch (kind) {
      case Template::Model: src << "(model (entity " << name << " ((f string) (g number))))"; break;
      case Template::Base: {
        src << "(base ((v (+ 1";
        for (const auto& [local, base] : base_refs)
          src << " " << (base ? local + ":v" : "(length (get-imports " + local + "))");
        src << ")) (f (lambda (n) (+ n v))) (g (lambda (x) (list x v)))))";
        break;
      }
      default: src << "(transformation " << trans_source(kind, has_h) << ")";
    }
    src << ")";
    out.push_back(GraphModule{name, kind, parse_module(parse_sexpr(src.str()))});
  }
  return out;
}

// ---------------------------------------------------------------- outcomes

Outcome compile_outcome(const ModuleEnv& env, const ModuleDef& m) {
  Outcome o;
  try {
    o.value = compile_module(env, m);
  } catch (const Error& e) {
    o.failed = true;
    o.kind = e.kind();
    o.message = e.what();
  }
  return o;
}

observe::Verdict same_outcome(const Outcome& a, const Outcome& b) {
  if (a.failed != b.failed)
    return {false, "one compile failed: " + (a.failed ? a.message : b.message)};
  if (a.failed) {
    if (a.kind != b.kind || a.message != b.message) return {false, "errors differ: " + a.message + " | " + b.message};
    return {};
  }
  return observe::equivalent(a.value, b.value);
}

namespace {

std::string describe(const GraphModule& m) { return m.name + ": " + print_sexpr(module_to_sexpr(m.def)); }

void note_failure(PropertyStats& stats, const GraphModule& m, const std::string& why) {
  ++stats.failures;
  if (stats.first_failures.size() < 5) stats.first_failures.push_back(describe(m) + " -- " + why);
}

bool has_apply(const ModuleDef& m) {
  return std::any_of(m.imports.begin(), m.imports.end(), [](const Import& i) { return !i.expr.is_simple(); });
}

CompiledPtr filler() {
  static CompiledPtr c = compile_module({}, parse_module(parse_sexpr("(module (imports) (model noise))")));
  return c;
}

// Compiles every module of a fresh graph in an env binding all earlier
// successful modules by name, calling `check` for each.
template <typename Check>
PropertyStats over_graphs(std::size_t graphs, std::uint64_t seed, Check check) {
  PropertyStats stats;
  Rng rng(seed);
  for (std::size_t g = 0; g < graphs; ++g) {
    auto graph = random_graph(rng);
    ++stats.graphs;
    std::vector<ModuleEnv::Binding> full;
    for (const auto& m : graph) {
      ModuleEnv env(full);
      Outcome base = compile_outcome(env, m.def);
      ++stats.cases;
      if (!base.failed) ++stats.successes;
      if (has_apply(m.def)) ++stats.generated;
      check(rng, graph, m, env, base, stats);
      if (!base.failed) full.emplace_back(m.name, base.value);
    }
  }
  return stats;
}

}  // namespace

PropertyStats check_dependency_locality(std::size_t graphs, std::uint64_t seed) {
  return over_graphs(graphs, seed, [](Rng& rng, const std::vector<GraphModule>& graph, const GraphModule& m,
                                      const ModuleEnv& env, const Outcome& base, PropertyStats& stats) {
    auto dep_list = deps(m.def);
    std::set<std::string> dep_set(dep_list.begin(), dep_list.end());

    // Lookups are confined to deps(m), in declaration order.
    auto log = std::make_shared<ModuleEnv::LookupLog>();
    Outcome logged = compile_outcome(env.instrumented(log), m.def);
    for (const auto& n : *log)
      if (!dep_set.contains(n)) return note_failure(stats, m, "looked up undeclared name " + n);
    if (!base.failed && *log != dep_list) return note_failure(stats, m, "lookup sequence differs from deps");
    if (auto v = same_outcome(base, logged); !v) return note_failure(stats, m, "nondeterministic: " + v.reason);

    // Same bindings for deps(m), arbitrary bindings elsewhere, shuffled.
    std::vector<CompiledPtr> values;
    for (const auto& b : env.bindings()) values.push_back(b.second);
    values.push_back(filler());
    std::vector<ModuleEnv::Binding> noise;
    std::vector<std::string> names = {"zz", "current-trans", "current-arg-1", "current-arg-2", "h", "l0"};
    for (const auto& other : graph) names.push_back(other.name);
    for (const auto& n : names) {
      if (dep_set.contains(n)) continue;
      std::size_t copies = below(rng, 3);
      for (std::size_t k = 0; k < copies; ++k) noise.emplace_back(n, pick(rng, values));
    }
    std::vector<ModuleEnv::Binding> agreeing;
    for (const auto& d : dep_set)
      if (CompiledPtr c = env.lookup(d)) agreeing.emplace_back(d, c);
    std::vector<ModuleEnv::Binding> all = noise;
    all.insert(all.end(), agreeing.begin(), agreeing.end());
    std::shuffle(all.begin(), all.end(), rng);

    Outcome other = compile_outcome(ModuleEnv(all), m.def);
    if (auto v = same_outcome(base, other); !v) note_failure(stats, m, "env disagreement: " + v.reason);
  });
}

PropertyStats check_separate_compilation(std::size_t graphs, std::uint64_t seed) {
  PropertyStats total;
  PropertyStats stats = over_graphs(graphs, seed, [&](Rng&, const std::vector<GraphModule>&, const GraphModule& m,
                                                      const ModuleEnv& env, const Outcome& base, PropertyStats& s) {
    auto dep_list = deps(m.def);
    std::set<std::string> dep_set(dep_list.begin(), dep_list.end());
    std::set<std::string> removable;
    for (const auto& b : env.bindings())
      if (!dep_set.contains(b.first)) removable.insert(b.first);
    removable.insert("never-bound");
    for (const auto& n : removable) {
      ++total.cases;
      Outcome other = compile_outcome(env.without(n), m.def);
      if (auto v = same_outcome(base, other); !v) note_failure(s, m, "deleting " + n + ": " + v.reason);
    }
  });
  // Cases count deletions rather than modules.
  stats.cases = total.cases;
  return stats;
}

// ---------------------------------------------------------------- dep_ok

namespace {

// Least set containing allowed(mod) and closed under adding generated
// modules whose generators are all in the set.
std::set<std::string> oracle_set(const std::string& mod, const summaries::SummaryStore& store) {
  const auto& all = store.all();
  const auto& target = all.at(mod);
  std::set<std::string> ok = target.gen_by;
  for (const auto& g : target.gen_by) {
    const auto& used = all.at(g).used;
    ok.insert(used.begin(), used.end());
  }
  for (bool grew = true; grew;) {
    grew = false;
    for (const auto& [id, s] : all) {
      if (ok.contains(id) || s.gen_by.empty()) continue;
      if (std::all_of(s.gen_by.begin(), s.gen_by.end(), [&](const std::string& g) { return ok.contains(g); })) {
        ok.insert(id);
        grew = true;
      }
    }
  }
  return ok;
}

}  // namespace

bool dep_ok_oracle(const std::string& m, const std::string& mod, const summaries::SummaryStore& store) {
  return oracle_set(mod, store).contains(m);
}

namespace {

std::set<std::string> from_mask(std::uint64_t mask, std::size_t n) {
  std::set<std::string> out;
  for (std::size_t k = 0; k < n; ++k)
    if (mask & (1ULL << k)) out.insert("m" + std::to_string(k));
  return out;
}

void query_all(const summaries::SummaryStore& store, std::size_t n, DepOkStats& stats) {
  ++stats.stores;
  for (std::size_t mod = 0; mod < n; ++mod) {
    std::string mod_name = "m" + std::to_string(mod);
    std::set<std::string> ok = oracle_set(mod_name, store);
    for (std::size_t m = 0; m < n; ++m) {
      std::string m_name = "m" + std::to_string(m);
      ++stats.queries;
      bool got = summaries::dep_ok(m_name, mod_name, store);
      bool want = ok.contains(m_name);
      if (got != want) {
        ++stats.mismatches;
        if (stats.first_mismatch.empty()) {
          std::string text;
          for (const auto& [id, s] : store.all()) text += print_sexpr(summaries::summary_to_sexpr(s)) + " ";
          stats.first_mismatch = "dep_ok(" + m_name + ", " + mod_name + ") in " + text;
        }
      }
    }
  }
}

}  // namespace

DepOkStats check_dep_ok_exhaustive(std::size_t n) {
  DepOkStats stats;
  const std::size_t bits = 2 * n * n;
  for (std::uint64_t code = 0; code < (1ULL << bits); ++code) {
    summaries::SummaryStore store;
    for (std::size_t k = 0; k < n; ++k) {
      std::uint64_t used = (code >> (2 * n * k)) & ((1ULL << n) - 1);
      std::uint64_t gen_by = (code >> (2 * n * k + n)) & ((1ULL << n) - 1);
      store.put({"m" + std::to_string(k), from_mask(used, n), from_mask(gen_by, n)});
    }
    query_all(store, n, stats);
  }
  return stats;
}

DepOkStats check_dep_ok_dag(std::size_t n) {
  DepOkStats stats;
  // gen_by of module k ranges over subsets of {0..k-1}; used over subsets
  // of all other modules.
  std::size_t bits = 0;
  std::vector<std::size_t> gen_bits(n), used_bits(n);
  for (std::size_t k = 0; k < n; ++k) {
    gen_bits[k] = k;
    used_bits[k] = n - 1;
    bits += gen_bits[k] + used_bits[k];
  }
  for (std::uint64_t code = 0; code < (1ULL << bits); ++code) {
    summaries::SummaryStore store;
    std::size_t at = 0;
    for (std::size_t k = 0; k < n; ++k) {
      std::uint64_t gen_mask = (code >> at) & ((1ULL << gen_bits[k]) - 1);
      at += gen_bits[k];
      std::uint64_t other = (code >> at) & ((1ULL << used_bits[k]) - 1);
      at += used_bits[k];
      // Spread the n-1 bits over every module except k.
      std::uint64_t used_mask = (other & ((1ULL << k) - 1)) | ((other >> k) << (k + 1));
      store.put({"m" + std::to_string(k), from_mask(used_mask, n), from_mask(gen_mask, n)});
    }
    query_all(store, n, stats);
  }
  return stats;
}

DepOkStats check_dep_ok_bounded(std::size_t n) {
  DepOkStats stats;
  std::size_t gen_bits = n * (n - 1) / 2;
  std::uint64_t used_codes = 1;
  for (std::size_t k = 0; k < n; ++k) used_codes *= 3;
  const std::uint64_t everyone = (1ULL << n) - 1;
  for (std::uint64_t g = 0; g < (1ULL << gen_bits); ++g) {
    for (std::uint64_t u = 0; u < used_codes; ++u) {
      summaries::SummaryStore store;
      std::size_t at = 0;
      std::uint64_t digits = u;
      for (std::size_t k = 0; k < n; ++k) {
        std::uint64_t gen_mask = (g >> at) & ((1ULL << k) - 1);
        at += k;
        std::uint64_t used_mask = 0;
        switch (digits % 3) {
          case 1: used_mask = 1ULL << ((k + 1) % n); break;
          case 2: used_mask = everyone & ~(1ULL << k); break;
          default: break;
        }
        digits /= 3;
        store.put({"m" + std::to_string(k), from_mask(used_mask, n), from_mask(gen_mask, n)});
      }
      query_all(store, n, stats);
    }
  }
  return stats;
}

DepOkStats check_dep_ok_sampled(std::size_t n, std::size_t samples, std::uint64_t seed) {
  DepOkStats stats;
  Rng rng(seed);
  for (std::size_t s = 0; s < samples; ++s) {
    summaries::SummaryStore store;
    for (std::size_t k = 0; k < n; ++k) {
      std::uint64_t used = rng() & ((1ULL << n) - 1);
      std::uint64_t gen_by = rng() & ((1ULL << n) - 1);
      store.put({"m" + std::to_string(k), from_mask(used, n), from_mask(gen_by, n)});
    }
    query_all(store, n, stats);
  }
  return stats;
}

}  // namespace modlock::testing
