#include "modlock/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <map>
#include <set>

#include "modlock/error.hpp"
#include "modlock/workspace.hpp"

namespace modlock::cli {

namespace {

struct Config {
  std::string root = ".";
  std::optional<std::uint64_t> step_budget;
  bool color = false;
  bool no_cache = false;
  std::string name;
  std::string expr;
  std::vector<std::string> paths;
};

class Printer {
 public:
  Printer(std::ostream& out, std::ostream& err, bool color) : out_(out), err_(err), color_(color) {}

  std::ostream& out() { return out_; }
  void status(const std::string& tag, const std::string& text, const char* ansi) {
    out_ << paint(tag, ansi) << " " << text << "\n";
  }
  void error(const std::string& text) { err_ << paint("error:", "31") << " " << text << "\n"; }
  std::ostream& err() { return err_; }

 private:
  std::string paint(const std::string& s, const char* ansi) const {
    return color_ ? "\033[" + std::string(ansi) + "m" + s + "\033[0m" : s;
  }
  std::ostream& out_;
  std::ostream& err_;
  bool color_;
};

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::HiddenDependency: return kHiddenDependency;
    case ErrorKind::CyclicDependency: return kCycle;
    case ErrorKind::ModuleNotFound: return kUsage;
    case ErrorKind::UnresolvedImport:
      if (!static_cast<const UnresolvedImport&>(e).generated_chain().empty()) return kHiddenDependency;
      return kCompileError;
    default: return kCompileError;
  }
}

void print_log(Printer& p, const Workspace& ws) {
  for (const auto& ev : ws.log()) {
    std::string text = ev.id + " (" + std::string(to_string(ev.type)) + (ev.generated ? ", generated" : "") + ")";
    if (ev.replayed) p.status("cached  ", text, "36");
    else p.status("compiled", text, "32");
  }
}

std::string dot_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

void print_graph(std::ostream& out, const summaries::SummaryStore& store, const std::string& start) {
  std::set<std::string> nodes;
  std::vector<std::string> todo{start};
  while (!todo.empty()) {
    std::string id = todo.back();
    todo.pop_back();
    if (!nodes.insert(id).second) continue;
    if (const auto* s = store.find(id)) {
      todo.insert(todo.end(), s->used.begin(), s->used.end());
      todo.insert(todo.end(), s->gen_by.begin(), s->gen_by.end());
    }
  }
  out << "digraph modules {\n";
  for (const auto& id : nodes) {
    const auto* s = store.find(id);
    out << "  " << dot_quote(id) << (s && !s->gen_by.empty() ? " [shape=box]" : "") << ";\n";
  }
  for (const auto& id : nodes) {
    const auto* s = store.find(id);
    if (!s) continue;
    for (const auto& u : s->used) out << "  " << dot_quote(id) << " -> " << dot_quote(u) << ";\n";
    for (const auto& g : s->gen_by) out << "  " << dot_quote(id) << " -> " << dot_quote(g) << " [style=dashed];\n";
  }
  out << "}\n";
}

void report_hidden(Printer& p, const Error& e) {
  if (e.kind() == ErrorKind::HiddenDependency) {
    const auto& h = static_cast<const HiddenDependency&>(e);
    p.out() << "hidden dependencies in " << h.generated() << ":\n";
    for (const auto& n : h.names()) p.out() << "  " << n << "\n";
    p.out() << "generated by:";
    for (const auto& g : h.gen_by()) p.out() << " " << g;
    p.out() << "\n";
  } else {
    const auto& u = static_cast<const UnresolvedImport&>(e);
    p.out() << "hidden dependencies in " << u.generated_chain().front() << ":\n  " << u.name() << "\n";
  }
  for (const auto& frame : e.trace()) p.out() << "  " << frame << "\n";
}

int execute(const std::string& command, const Config& cfg, Printer& p) {
  WorkspaceOptions options;
  if (cfg.step_budget) options.limits.step_budget = *cfg.step_budget;
  options.use_cache = !cfg.no_cache;
  Workspace ws(cfg.root, options);

  try {
    if (command == "deps") {
      for (const auto& d : deps(ws.parse(cfg.name))) p.out() << d << "\n";
      return kOk;
    }
    if (command == "compile") {
      try {
        ws.compile(cfg.name);
      } catch (...) {
        print_log(p, ws);
        throw;
      }
      print_log(p, ws);
      p.status("ok", cfg.name, "32");
      ws.save_cache();
      return kOk;
    }
    if (command == "check") {
      try {
        ws.compile(cfg.name);
      } catch (const Error& e) {
        bool hidden = e.kind() == ErrorKind::HiddenDependency ||
                      (e.kind() == ErrorKind::UnresolvedImport &&
                       !static_cast<const UnresolvedImport&>(e).generated_chain().empty());
        if (!hidden) throw;
        report_hidden(p, e);
        return kHiddenDependency;
      }
      p.out() << "no hidden dependencies\n";
      ws.save_cache();
      return kOk;
    }
    if (command == "expand") {
      ImportExpr i = ImportExpr::simple("_");
      try {
        i = parse_import_key(cfg.expr);
      } catch (const Error& e) {
        p.error(e.what());
        return kUsage;
      }
      CompiledPtr c = ws.compile_import(i);
      p.out() << print_sexpr(module_to_sexpr(c->closure().syntax)) << "\n";
      ws.save_cache();
      return kOk;
    }
    if (command == "graph") {
      ws.compile(cfg.name);
      print_graph(p.out(), ws.store(), cfg.name);
      ws.save_cache();
      return kOk;
    }
    if (command == "rebuild") {
      std::vector<std::filesystem::path> paths(cfg.paths.begin(), cfg.paths.end());
      for (const auto& id : ws.rebuild(paths)) p.out() << id << "\n";
      ws.save_cache();
      return kOk;
    }
  } catch (const Error& e) {
    p.error(e.detailed());
    return exit_code_for(e);
  }
  p.error("unknown command " + command);
  return kUsage;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Config cfg;
  CLI::App app{"Compile and inspect module workspaces", "modlock"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  app.add_option("--root", cfg.root, "Workspace root directory");
  app.add_option("--step-budget", cfg.step_budget, "Evaluation step budget (also MODLOCK_STEP_BUDGET)");
  app.add_flag("--color", cfg.color, "Colored status output");
  app.add_flag("--no-cache", cfg.no_cache, "Neither read nor write .modcache");

  auto* compile = app.add_subcommand("compile", "Compile a module and its dependencies");
  compile->add_option("name", cfg.name, "Dotted module name")->required();
  auto* check = app.add_subcommand("check", "Report hidden dependencies");
  check->add_option("name", cfg.name, "Dotted module name")->required();
  auto* deps_cmd = app.add_subcommand("deps", "Print declared dependencies");
  deps_cmd->add_option("name", cfg.name, "Dotted module name")->required();
  auto* expand = app.add_subcommand("expand", "Print the module an import expression denotes");
  expand->add_option("expr", cfg.expr, "Import expression such as t(a,b)")->required();
  auto* graph = app.add_subcommand("graph", "Dependency graph in DOT");
  graph->add_option("name", cfg.name, "Dotted module name")->required();
  auto* rebuild = app.add_subcommand("rebuild", "Recompile after files changed");
  rebuild->add_option("paths", cfg.paths, "Changed module files");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  if (!cfg.step_budget) {
    if (const char* env = std::getenv("MODLOCK_STEP_BUDGET"); env != nullptr && *env != '\0') {
      char* end = nullptr;
      unsigned long long v = std::strtoull(env, &end, 10);
      if (*end != '\0' || env[0] == '-') {
        err << "error: MODLOCK_STEP_BUDGET is not a non-negative integer\n";
        return kUsage;
      }
      cfg.step_budget = v;
    }
  }

  Printer printer(out, err, cfg.color);
  return execute(app.get_subcommands().front()->get_name(), cfg, printer);
}

}  // namespace modlock::cli
