#include <set>
#include <stdexcept>

#include "modlock/core.hpp"
#include "modlock/error.hpp"

namespace modlock {

namespace {

[[noreturn]] void malformed(const std::string& what, const SExpr& e) {
  throw Error(ErrorKind::MalformedModule, what + ": " + print_sexpr(e));
}

bool is_define(const SExpr& e) { return e.is_form("define"); }

// (define x e) -> (x e); (define (f p...) e) -> (f (lambda (p...) e))
SExpr normalize_define(const SExpr& form) {
  const auto& items = form.items();
  if (items.size() != 3) throw Error(ErrorKind::MalformedBody, "define takes a name and one expression: " + print_sexpr(form));
  const SExpr& head = items[1];
  if (head.is_sym()) return SExpr::list({head, items[2]});
  if (head.is_list() && !head.items().empty() && head.items().front().is_sym()) {
    SExpr::List params(head.items().begin() + 1, head.items().end());
    SExpr lambda = SExpr::list({SExpr::sym("lambda"), SExpr::list(std::move(params)), items[2]});
    return SExpr::list({head.items().front(), std::move(lambda)});
  }
  throw Error(ErrorKind::MalformedBody, "bad define target: " + print_sexpr(form));
}

class KeyParser {
 public:
  explicit KeyParser(std::string_view text) : text_(text) {}

  ImportExpr parse() {
    ImportExpr e = expr();
    skip_space();
    if (pos_ != text_.size()) fail("trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw SyntaxError("import expression: " + msg, 1, pos_ + 1);
  }

  void skip_space() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
  }

  ImportExpr expr() {
    skip_space();
    std::size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] != '(' && text_[pos_] != ')' && text_[pos_] != ',' &&
           text_[pos_] != ' ' && text_[pos_] != '\t')
      ++pos_;
    std::string name(text_.substr(start, pos_ - start));
    if (!is_symbol_text(name)) fail(name.empty() ? "expected a module name" : "invalid module name '" + name + "'");
    ImportExpr result = ImportExpr::simple(std::move(name));
    skip_space();
    while (pos_ < text_.size() && text_[pos_] == '(') {
      ++pos_;
      std::vector<ImportExpr> args{expr()};
      skip_space();
      while (pos_ < text_.size() && text_[pos_] == ',') {
        ++pos_;
        args.push_back(expr());
        skip_space();
      }
      if (pos_ >= text_.size() || text_[pos_] != ')') fail("expected ')'");
      ++pos_;
      result = ImportExpr::apply(std::move(result), std::move(args));
      skip_space();
    }
    return result;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

ImportExpr ImportExpr::simple(std::string name) {
  ImportExpr e;
  e.name_ = std::move(name);
  return e;
}

ImportExpr ImportExpr::apply(ImportExpr target, std::vector<ImportExpr> args) {
  if (args.empty()) throw std::invalid_argument("a transformation application needs at least one argument");
  ImportExpr e;
  e.target_ = std::make_shared<const ImportExpr>(std::move(target));
  e.args_ = std::move(args);
  return e;
}

const std::string& ImportExpr::name() const {
  if (!is_simple()) throw std::logic_error("ImportExpr::name on an application");
  return name_;
}

const ImportExpr& ImportExpr::target() const {
  if (is_simple()) throw std::logic_error("ImportExpr::target on a simple import");
  return *target_;
}

bool operator==(const ImportExpr& a, const ImportExpr& b) {
  if (a.is_simple() != b.is_simple()) return false;
  if (a.is_simple()) return a.name_ == b.name_;
  return *a.target_ == *b.target_ && a.args_ == b.args_;
}

std::string_view to_string(ModuleType type) {
  switch (type) {
    case ModuleType::Base: return "base";
    case ModuleType::Trans: return "transformation";
    case ModuleType::Model: return "model";
  }
  return "?";
}

ModuleType type_of(const SExpr& body) {
  if (body.is_list() && body.items().size() == 2) {
    const SExpr& head = body.items()[0];
    if (head.is_sym("model")) return ModuleType::Model;
    if (head.is_sym("transformation")) return ModuleType::Trans;
    if (head.is_sym("base") && body.items()[1].is_list()) return ModuleType::Base;
  }
  throw Error(ErrorKind::MalformedBody, "not a model, transformation or base body: " + print_sexpr(body));
}

ImportExpr parse_import_expr(const SExpr& e) {
  if (e.is_sym()) return ImportExpr::simple(e.text());
  if (e.is_list() && e.items().size() >= 2) {
    const auto& items = e.items();
    std::vector<ImportExpr> args;
    args.reserve(items.size() - 1);
    for (std::size_t i = 1; i < items.size(); ++i) args.push_back(parse_import_expr(items[i]));
    return ImportExpr::apply(parse_import_expr(items[0]), std::move(args));
  }
  malformed("not an import expression", e);
}

SExpr import_to_sexpr(const ImportExpr& i) {
  if (i.is_simple()) return SExpr::sym(i.name());
  SExpr::List items{import_to_sexpr(i.target())};
  for (const auto& a : i.args()) items.push_back(import_to_sexpr(a));
  return SExpr::list(std::move(items));
}

std::string import_key(const ImportExpr& i) {
  if (i.is_simple()) return i.name();
  std::string out = import_key(i.target()) + "(";
  for (std::size_t k = 0; k < i.args().size(); ++k) {
    if (k > 0) out += ",";
    out += import_key(i.args()[k]);
  }
  return out + ")";
}

ImportExpr parse_import_key(std::string_view text) { return KeyParser(text).parse(); }

std::string default_local_name(std::string_view module_name) {
  auto dot = module_name.rfind('.');
  return std::string(dot == std::string_view::npos ? module_name : module_name.substr(dot + 1));
}

ModuleDef parse_module(const SExpr& e) {
  if (!e.is_form("module") || e.items().size() < 3) malformed("expected (module (imports ...) body)", e);
  const auto& items = e.items();
  const SExpr& imports = items[1];
  if (!imports.is_form("imports")) {
    if (imports.is_sym()) malformed("modules carry no inline name; expected (imports ...) after 'module'", e);
    malformed("expected (imports ...)", imports);
  }

  ModuleDef m;
  std::set<std::string> locals;
  for (std::size_t k = 1; k < imports.items().size(); ++k) {
    const SExpr& entry = imports.items()[k];
    Import imp;
    if (entry.is_sym()) {
      imp.expr = ImportExpr::simple(entry.text());
      imp.local_name = default_local_name(entry.text());
      if (imp.local_name.empty() || !is_symbol_text(imp.local_name)) malformed("cannot derive a local name", entry);
    } else if (entry.is_list() && entry.items().size() == 2 && entry.items()[0].is_sym()) {
      imp.local_name = entry.items()[0].text();
      imp.expr = parse_import_expr(entry.items()[1]);
    } else {
      (void)parse_import_expr(entry);  // reports a malformed expression first
      malformed("a transformation application import needs an explicit local name", entry);
    }
    if (!locals.insert(imp.local_name).second) malformed("duplicate local name '" + imp.local_name + "'", imports);
    m.imports.push_back(std::move(imp));
  }

  if (items.size() == 3 && !is_define(items[2])) {
    m.body = items[2];
  } else {
    SExpr::List defs;
    for (std::size_t k = 2; k < items.size(); ++k) {
      if (!is_define(items[k])) malformed("a module body is one model/transformation/base form or a list of defines", e);
      defs.push_back(normalize_define(items[k]));
    }
    m.body = SExpr::list({SExpr::sym("base"), SExpr::list(std::move(defs))});
  }
  (void)type_of(m.body);
  return m;
}

SExpr module_to_sexpr(const ModuleDef& m) {
  SExpr::List imports{SExpr::sym("imports")};
  for (const auto& imp : m.imports) imports.push_back(SExpr::list({SExpr::sym(imp.local_name), import_to_sexpr(imp.expr)}));
  return SExpr::list({SExpr::sym("module"), SExpr::list(std::move(imports)), m.body});
}

std::vector<std::string> deps_imp(const ImportExpr& i) {
  if (i.is_simple()) return {i.name()};
  std::vector<std::string> out = deps_imp(i.target());
  for (const auto& a : i.args()) {
    auto more = deps_imp(a);
    out.insert(out.end(), more.begin(), more.end());
  }
  return out;
}

std::vector<std::string> deps(const ModuleDef& m) {
  std::vector<std::string> out;
  for (const auto& imp : m.imports) {
    auto more = deps_imp(imp.expr);
    out.insert(out.end(), more.begin(), more.end());
  }
  return out;
}

}  // namespace modlock
