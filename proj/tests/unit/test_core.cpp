#include <doctest.h>

#include <memory>

#include "gen.hpp"
#include "modlock/core.hpp"
#include "modlock/error.hpp"
#include "modlock/lang.hpp"

using namespace modlock;

namespace {

ModuleDef mod(const std::string& text) { return parse_module(parse_sexpr(text)); }

CompiledPtr compile(const ModuleEnv& env, const std::string& text, const std::string& id = {}) {
  return compile_module(env, mod(text), {}, id);
}

template <typename E, typename F>
E expect_throw(F&& f) {
  try {
    f();
  } catch (const E& e) {
    return e;
  }
  FAIL("expected exception");
  throw std::logic_error("unreachable");
}

ImportExpr S(const char* n) { return ImportExpr::simple(n); }
ImportExpr A(ImportExpr t, std::vector<ImportExpr> args) { return ImportExpr::apply(std::move(t), std::move(args)); }

const char* kAccount = "(module (imports) (model (entity Account ((IBAN string) (BIC string) (balance number)))))";
const char* kCustomer = "(module (imports (acc Account)) (model (entity Customer ((name string) (account acc)))))";
const char* kToRecord = R"((module (imports)
  (transformation
    (lambda (m)
      (let ((name (symbol->string (car (cdr (car (cdr (get-body m))))))))
        `(module (imports)
           (base ((,(string->symbol (string-append "make-" name)) (lambda (x) (list ,name x)))
                  (,(string->symbol (string-append name "?"))
                   (lambda (v) (if (list? v) (equal? (car v) ,name) #f)))))))))))";

}  // namespace

TEST_CASE("type_of") {
  CHECK(type_of(parse_sexpr("(model (entity ()))")) == ModuleType::Model);
  CHECK(type_of(parse_sexpr("(transformation (lambda (m) m))")) == ModuleType::Trans);
  CHECK(type_of(parse_sexpr("(base ())")) == ModuleType::Base);
  for (const char* bad : {"(foo)", "x", "(base x)", "(model)", "(model a b)", "()"}) {
    auto e = expect_throw<Error>([&] { type_of(parse_sexpr(bad)); });
    CHECK(e.kind() == ErrorKind::MalformedBody);
  }
}

TEST_CASE("parse_module") {
  ModuleDef account = mod("(module (imports) (model (entity ((IBAN string) (BIC string) (balance number)))))");
  CHECK(account.imports.empty());
  CHECK(type_of(account.body) == ModuleType::Model);

  ModuleDef test = mod("(module (imports (acc-rec (entity-to-record account))) (base ()))");
  REQUIRE(test.imports.size() == 1);
  CHECK(test.imports[0].local_name == "acc-rec");
  CHECK(test.imports[0].expr == A(S("entity-to-record"), {S("account")}));

  ModuleDef nested = mod(
      "(module (imports (sim ((statemachine.data.Simulator entity.ToRecord) banking.DataATM))) (model x))");
  CHECK(nested.imports[0].expr ==
        A(A(S("statemachine.data.Simulator"), {S("entity.ToRecord")}), {S("banking.DataATM")}));

  SUBCASE("default local names") {
    ModuleDef m = mod("(module (imports banking.Account util) (model x))");
    CHECK(m.imports[0].local_name == "Account");
    CHECK(m.imports[1].local_name == "util");
    CHECK(m.imports[0].expr == S("banking.Account"));
  }
  SUBCASE("define sugar normalizes to the base form") {
    ModuleDef m = mod("(module (imports) (define x 1) (define (f a b) (+ a b)))");
    CHECK(m.body == parse_sexpr("(base ((x 1) (f (lambda (a b) (+ a b)))))"));
  }
  SUBCASE("malformed modules") {
    for (const char* bad : {
             "(module factorial (imports) (base ()))",
             "(module (imports (a x) (a y)) (model m))",
             "(module (imports a.x b.x) (model m))",
             "(module (imports (t a b)) (model m))",
             "(module (imports ((t a) b)) (model m))",
             "(module (imports 3) (model m))",
             "(module (imports) )",
             "(modul (imports) (model m))",
             "(module (imports) (model m) (define x 1))",
         }) {
      auto e = expect_throw<Error>([&] { mod(bad); });
      CHECK_MESSAGE((e.kind() == ErrorKind::MalformedModule || e.kind() == ErrorKind::MalformedBody), bad);
    }
    CHECK(expect_throw<Error>([] { mod("(module (imports) (frob))"); }).kind() == ErrorKind::MalformedBody);
  }
  SUBCASE("surface form round-trips") {
    ModuleDef m = mod("(module (imports a (x (t b c))) (base ((v 1))))");
    CHECK(parse_module(module_to_sexpr(m)) == m);
  }
}

TEST_CASE("deps and deps_imp") {
  CHECK(deps(mod("(module (imports) (model x))")).empty());
  CHECK(deps(mod("(module (imports (x (t a))) (model x))")) == std::vector<std::string>{"t", "a"});
  CHECK(deps(mod("(module (imports (x a) (y ((t u) a))) (model x))")) ==
        std::vector<std::string>{"a", "t", "u", "a"});
  CHECK(deps_imp(S("a")) == std::vector<std::string>{"a"});
  CHECK(deps_imp(A(S("t"), {S("a"), S("b")})) == std::vector<std::string>{"t", "a", "b"});
  CHECK(deps_imp(A(A(S("t"), {S("u")}), {S("a")})) == std::vector<std::string>{"t", "u", "a"});
}

TEST_CASE("import keys") {
  CHECK(import_key(A(A(S("t"), {S("u")}), {S("a"), S("b")})) == "t(u)(a,b)");
  CHECK(parse_import_key("t(u)(a, b)") == A(A(S("t"), {S("u")}), {S("a"), S("b")}));
  CHECK(parse_import_key("entity-to-record(account)") == A(S("entity-to-record"), {S("account")}));
  CHECK(parse_import_key("x.y.Z") == S("x.y.Z"));
  for (const char* bad : {"", "t(", "t()", "t(a", "t(a))", "(a)", "t(a,)", "t a"})
    CHECK_THROWS_AS(parse_import_key(bad), SyntaxError);
  CHECK_THROWS_AS(ImportExpr::apply(S("t"), {}), std::invalid_argument);
}

TEST_CASE("compile_module") {
  CompiledPtr acc = compile({}, kAccount, "Account");
  CHECK(acc->type() == ModuleType::Model);
  CHECK(acc->closure().env.empty());
  CHECK(get_model(*acc).syntax == mod(kAccount));

  CompiledPtr cus = compile(ModuleEnv({{"Account", acc}}), kCustomer, "Customer");
  REQUIRE(cus->closure().env.size() == 1);
  CHECK(cus->closure().env.bindings()[0].first == "acc");
  CHECK(cus->closure().env.lookup("acc") == acc);

  auto e = expect_throw<UnresolvedImport>([] { compile({}, "(module (imports missing) (model x))"); });
  CHECK(e.name() == "missing");
  CHECK(e.generated_chain().empty());
  CHECK(e.kind() == ErrorKind::UnresolvedImport);
}

TEST_CASE("get_model projects every variant") {
  CompiledPtr m = compile({}, "(module (imports) (model x))");
  CompiledPtr b = compile({}, "(module (imports) (define x 1))");
  CompiledPtr t = compile({}, "(module (imports) (transformation (lambda (m) m)))");
  CHECK(get_model(*m).syntax == mod("(module (imports) (model x))"));
  CHECK(get_model(*b).syntax == mod("(module (imports) (define x 1))"));
  CHECK(get_model(*t).syntax == mod("(module (imports) (transformation (lambda (m) m)))"));
  CHECK(b->type() == ModuleType::Base);
  CHECK(t->type() == ModuleType::Trans);
  CHECK(b->defs().size() == 1);
}

TEST_CASE("compile_import runs transformations") {
  CompiledPtr acc = compile({}, kAccount, "account");
  CompiledPtr tr = compile({}, kToRecord, "entity-to-record");
  ModuleEnv env({{"account", acc}, {"entity-to-record", tr}});

  CompiledPtr rec = compile_import(env, A(S("entity-to-record"), {S("account")}));
  CHECK(rec->type() == ModuleType::Base);
  CHECK(rec->id() == "entity-to-record(account)");
  auto script = lang::module_env(*rec);
  CHECK(lang::eval_sexpr(script, parse_sexpr("(Account? (make-Account 5))")) == lang::Value::boolean(true));
  CHECK(lang::eval_sexpr(script, parse_sexpr("(Account? 5)")) == lang::Value::boolean(false));

  SUBCASE("the target must be a transformation") {
    auto e = expect_throw<Error>([&] { compile_import(env, A(S("account"), {S("account")})); });
    CHECK(e.kind() == ErrorKind::NotATransformation);
  }
  SUBCASE("arity mismatch") {
    auto e = expect_throw<Error>([&] { compile_import(env, A(S("entity-to-record"), {S("account"), S("account")})); });
    CHECK(e.kind() == ErrorKind::TransformationFailure);
  }
  SUBCASE("non-module output") {
    CompiledPtr bad = compile({}, "(module (imports) (transformation (lambda (m) 3)))", "bad");
    auto e = expect_throw<Error>([&] { compile_import(ModuleEnv({{"bad", bad}, {"a", acc}}), A(S("bad"), {S("a")})); });
    CHECK(e.kind() == ErrorKind::TransformationFailure);
  }
  SUBCASE("failing transformation") {
    CompiledPtr bad = compile({}, "(module (imports) (transformation (lambda (m) (error \"nope\" 1))))", "bad");
    auto e = expect_throw<Error>([&] { compile_import(ModuleEnv({{"bad", bad}, {"a", acc}}), A(S("bad"), {S("a")})); });
    CHECK(e.kind() == ErrorKind::TransformationFailure);
    CHECK(std::string(e.what()).find("nope 1") != std::string::npos);
  }
}

TEST_CASE("generated modules cannot see the caller's environment") {
  CompiledPtr acc = compile({}, kAccount, "Account");
  CompiledPtr hib = compile({}, "(module (imports) (define (persist r) r))", "Hibernate");
  const char* gen_hib = "(module (imports) (transformation (lambda (m) '(module (imports Hibernate) (model x)))))";
  CompiledPtr blind = compile({}, gen_hib, "EntityToJava");
  ModuleEnv caller({{"Account", acc}, {"Hibernate", hib}, {"EntityToJava", blind}});

  auto e = expect_throw<UnresolvedImport>([&] { compile_import(caller, A(S("EntityToJava"), {S("Account")})); });
  CHECK(e.name() == "Hibernate");
  REQUIRE(e.generated_chain().size() == 1);
  CHECK(e.generated_chain()[0] == "EntityToJava(Account)");

  // Declaring the import on the transformation makes it visible.
  CompiledPtr sighted = compile(ModuleEnv({{"Hibernate", hib}}),
                                "(module (imports Hibernate) (transformation (lambda (m) '(module (imports Hibernate) "
                                "(model x)))))",
                                "EntityToJava");
  ModuleEnv ok({{"Account", acc}, {"EntityToJava", sighted}});
  CompiledPtr g = compile_import(ok, A(S("EntityToJava"), {S("Account")}));
  CHECK(g->closure().env.lookup("Hibernate") == hib);

  SUBCASE("instrumented caller env sees only the declared names") {
    auto log = std::make_shared<ModuleEnv::LookupLog>();
    ModuleEnv spied = ModuleEnv({{"Account", acc}, {"EntityToJava", sighted}, {"Hibernate", hib}}).instrumented(log);
    compile_import(spied, A(S("EntityToJava"), {S("Account")}));
    CHECK(*log == std::vector<std::string>{"EntityToJava", "Account"});
  }
}

TEST_CASE("gen env bindings: current-arg, current-trans and closure envs") {
  CompiledPtr acc = compile({}, kAccount, "Account");
  CompiledPtr cus = compile(ModuleEnv({{"Account", acc}}), kCustomer, "Customer");
  const char* propagate = R"((module (imports)
    (transformation (lambda (m)
      `(module (imports (self current-trans) (arg current-arg-1)
                        ,@(map (lambda (imp) `(,(car imp) (current-trans ,(car imp)))) (get-imports m)))
         (model done))))))";
  CompiledPtr tr = compile({}, propagate, "P");
  CompiledPtr g = compile_import(ModuleEnv({{"P", tr}, {"Customer", cus}}), A(S("P"), {S("Customer")}));
  CHECK(g->id() == "P(Customer)");
  CHECK(g->closure().env.lookup("self") == tr);
  CHECK(g->closure().env.lookup("arg") == cus);
  CompiledPtr inner = g->closure().env.lookup("acc");
  REQUIRE(inner);
  CHECK(inner->id() == "P(Account)");
  CHECK(inner->closure().env.lookup("arg") == acc);

  SUBCASE("current-arg-2 is unbound for a unary application") {
    CompiledPtr t2 = compile({}, "(module (imports) (transformation (lambda (m) '(module (imports current-arg-2) (model x)))))", "T2");
    auto e = expect_throw<UnresolvedImport>([&] { compile_import(ModuleEnv({{"T2", t2}, {"A", acc}}), A(S("T2"), {S("A")})); });
    CHECK(e.name() == "current-arg-2");
  }
}

TEST_CASE("first binding wins in module environments") {
  CompiledPtr a = compile({}, "(module (imports) (model a))");
  CompiledPtr b = compile({}, "(module (imports) (model b))");
  ModuleEnv env({{"x", a}, {"x", b}});
  CHECK(env.lookup("x") == a);
  CHECK(env.without("x").empty());
  CHECK(ModuleEnv({{"x", b}}).concat(env).lookup("x") == b);
  CHECK(unresolved_names(env, mod("(module (imports x y (z (y x))) (model m))")) == std::vector<std::string>{"y"});
}

TEST_CASE("runaway generation is cut off") {
  const char* loop = "(module (imports) (transformation (lambda (m) '(module (imports (x (current-trans current-arg-1))) (model x)))))";
  CompiledPtr t = compile({}, loop, "L");
  CompiledPtr a = compile({}, "(module (imports) (model a))", "A");
  CompileOptions opts;
  opts.max_generation_depth = 8;
  auto e = expect_throw<Error>([&] { compile_import(ModuleEnv({{"L", t}, {"A", a}}), A(S("L"), {S("A")}), opts); });
  CHECK(e.kind() == ErrorKind::TransformationFailure);
}

TEST_CASE("compilation is deterministic and closes over syntax") {
  testing::Rng rng(3);
  for (int k = 0; k < 40; ++k) {
    auto graph = testing::random_graph(rng);
    std::vector<ModuleEnv::Binding> env;
    for (const auto& m : graph) {
      auto a = testing::compile_outcome(ModuleEnv(env), m.def);
      auto b = testing::compile_outcome(ModuleEnv(env), m.def);
      auto v = testing::same_outcome(a, b);
      CHECK_MESSAGE(v.equal, v.reason);
      if (!a.failed) {
        CHECK(get_model(*a.value).syntax == m.def);
        env.emplace_back(m.name, a.value);
      }
    }
  }
}
