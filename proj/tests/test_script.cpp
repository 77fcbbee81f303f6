#include <doctest.h>

#include <filesystem>

#include "pathagent/script/interpreter.hpp"
#include "pathagent/script/parser.hpp"
#include "pathagent/script/value.hpp"
#include "support.hpp"

using namespace pathagent;
using namespace pathagent::script;
using pathagent::testing::TempDir;
namespace fs = std::filesystem;

namespace {

InterpreterLimits limits_in(const fs::path& wd, std::uint64_t max_ops = 10'000'000) {
  InterpreterLimits l;
  l.working_dir = wd;
  l.max_operations = max_ops;
  return l;
}

ExecutionResult run(const std::string& src, const InterpreterLimits& l) {
  ScriptSession s;
  return s.run_source(src, l);
}

nlohmann::json data(const char* name) {
  return nlohmann::json::parse(testing::read_file(testing::source_dir() / "tests" / "data" / name));
}

}  // namespace

TEST_CASE("parse: one assignment") {
  auto p = parse("x = 1 + 2");
  CHECK(p.body().size() == 1);
}

TEST_CASE("stdout matches CPython on the semantics corpus") {
  TempDir wd;
  for (const auto& e : data("semantics.json")) {
    auto r = run(e["source"].get<std::string>(), limits_in(wd.path()));
    INFO(e["source"].get<std::string>());
    CHECK_FALSE(r.error.has_value());
    CHECK(r.stdout_text == e["stdout"].get<std::string>());
  }
}

TEST_CASE("operation counts match the instrumented reference") {
  TempDir wd;
  for (const auto& e : data("op_counts.json")) {
    const auto src = e["source"].get<std::string>();
    const auto expected = e["operations"].get<std::uint64_t>();
    INFO(src);
    auto ok = run(src, limits_in(wd.path(), expected));
    CHECK_FALSE(ok.error.has_value());
    CHECK(ok.operations_used == expected);
    auto over = run(src, limits_in(wd.path(), expected - 1));
    REQUIRE(over.error.has_value());
    CHECK(over.error->kind == ErrorKind::OperationLimitExceeded);
    CHECK(over.operations_used == expected - 1);
  }
}

TEST_CASE("infinite loop stops at the budget") {
  TempDir wd;
  auto r = run("print('start')\nwhile True:\n    pass\n", limits_in(wd.path(), 5000));
  REQUIRE(r.error);
  CHECK(r.error->kind == ErrorKind::OperationLimitExceeded);
  CHECK(r.operations_used == 5000);
  CHECK(r.stdout_text == "start\n");
}

TEST_CASE("forbidden import has no side effects") {
  TempDir wd;
  const std::vector<std::string> variants = {
      "import os",
      "from os import path",
      "import os.path",
      "import json, os",
      "def f():\n    import os\n",
      "if False:\n    import os\n",
  };
  for (const auto& v : variants) {
    INFO(v);
    std::string src = "from pathlib import Path\nPath('marker.txt').write_text('x')\nprint('ran')\n" + v + "\n";
    auto r = run(src, limits_in(wd.path()));
    REQUIRE(r.error);
    // imports in function bodies are rejected by the parser instead
    CHECK((r.error->kind == ErrorKind::ForbiddenImport || r.error->kind == ErrorKind::ParseError));
    CHECK(r.stdout_text.empty());
    CHECK(r.operations_used == 0);
    CHECK(r.files_written.empty());
    CHECK_FALSE(fs::exists(wd.path() / "marker.txt"));
  }
  auto unknown = run("import subprocess", limits_in(wd.path()));
  REQUIRE(unknown.error);
  CHECK(unknown.error->kind == ErrorKind::UnknownImport);
}

TEST_CASE("sandbox rejects escapes") {
  TempDir root;
  fs::create_directories(root.path() / "wd");
  fs::create_directories(root.path() / "outside");
  testing::write_file(root.path() / "outside" / "secret.txt", "secret");
  fs::create_directory_symlink(root.path() / "outside", root.path() / "wd" / "link");
  const std::string out = (root.path() / "outside").string();
  const std::vector<std::string> attempts = {
      "open('../escape.txt', 'w').write('x')",
      "print(open('/etc/passwd').read())",
      "print(Path('/etc/passwd').read_text())",
      "Path('sub/../../escape.txt').write_text('x')",
      "print(open('link/secret.txt').read())",
      "print(list(Path('/tmp').glob('*')))",
      "print([p.name for p in Path('..').iterdir()])",
      "Path('" + out + "/new.txt').write_text('x')",
      "open('link/new.txt', 'w').write('x')",
  };
  for (const auto& a : attempts) {
    INFO(a);
    auto r = run("from pathlib import Path\n" + a, limits_in(root.path() / "wd"));
    REQUIRE(r.error);
    CHECK(r.error->kind == ErrorKind::SandboxViolation);
  }
  CHECK_FALSE(fs::exists(root.path() / "escape.txt"));
  CHECK_FALSE(fs::exists(root.path() / "outside" / "new.txt"));

  // a sandbox violation cannot be swallowed by the script
  auto caught = run("try:\n    open('/etc/passwd')\nexcept Exception:\n    print('swallowed')",
                    limits_in(root.path() / "wd"));
  REQUIRE(caught.error);
  CHECK(caught.error->kind == ErrorKind::SandboxViolation);
  CHECK(caught.stdout_text.empty());
}

TEST_CASE("read-only roots can be read but not written") {
  TempDir root;
  fs::create_directories(root.path() / "wd");
  testing::write_file(root.path() / "data" / "a.txt", "hello");
  auto l = limits_in(root.path() / "wd");
  l.read_only_roots = {root.path() / "data"};
  const std::string data = (root.path() / "data").string();
  auto ok = run("print(open('" + data + "/a.txt').read())", l);
  CHECK_FALSE(ok.error);
  CHECK(ok.stdout_text == "hello\n");
  auto bad = run("open('" + data + "/b.txt', 'w').write('x')", l);
  REQUIRE(bad.error);
  CHECK(bad.error->kind == ErrorKind::SandboxViolation);
  CHECK_FALSE(fs::exists(root.path() / "data" / "b.txt"));
}

TEST_CASE("random module reproduces CPython draws") {
  TempDir wd;
  auto doc = data("random_golden.json");
  const std::string src = doc["script"].get<std::string>() + "import json\nprint(json.dumps(out))\n";
  for (const auto& c : doc["cases"]) {
    auto l = limits_in(wd.path());
    l.random_seed = c["seed"].get<std::uint64_t>();
    auto r = run(src, l);
    REQUIRE_FALSE(r.error);
    CHECK(nlohmann::json::parse(r.stdout_text) == c["draws"]);
  }
}

TEST_CASE("seeded execution is deterministic") {
  TempDir wd;
  const std::string src =
      "import random\nxs = [random.random() for _ in range(20)]\nprint(sum(xs), random.choice('abcdef'))";
  auto first = run(src, limits_in(wd.path()));
  for (int i = 0; i < 50; ++i) {
    auto again = run(src, limits_in(wd.path()));
    CHECK(again.stdout_text == first.stdout_text);
    CHECK(again.operations_used == first.operations_used);
  }
}

TEST_CASE("session keeps globals until reset") {
  TempDir wd;
  ScriptSession s;
  auto l = limits_in(wd.path());
  CHECK_FALSE(s.run_source("x = 41", l).error);
  auto r = s.run_source("print(x + 1)", l);
  CHECK(r.stdout_text == "42\n");
  CHECK(s.global_names() == std::vector<std::string>{"x"});
  s.reset();
  auto after = s.run_source("print(x)", l);
  REQUIRE(after.error);
  CHECK(after.error->render() == "RuntimeFault at line 1: NameError: name 'x' is not defined");
}

TEST_CASE("final_answer stops the program") {
  TempDir wd;
  auto r = run("print('a')\nfinal_answer({'k': [1, 2]})\nprint('b')", limits_in(wd.path()));
  CHECK_FALSE(r.error);
  CHECK(r.stdout_text == "a\n");
  REQUIRE(r.final_answer);
  CHECK(repr(*r.final_answer) == "{'k': [1, 2]}");
}

TEST_CASE("errors carry line numbers") {
  TempDir wd;
  auto r = run("a = 1\nb = 0\nc = a / b", limits_in(wd.path()));
  REQUIRE(r.error);
  CHECK(r.error->render() == "RuntimeFault at line 3: ZeroDivisionError: division by zero");
  auto p = run("x = (1,", limits_in(wd.path()));
  REQUIRE(p.error);
  CHECK(p.error->kind == ErrorKind::ParseError);
}

TEST_CASE("limits are validated") {
  InterpreterLimits l;
  CHECK_THROWS_AS(l.validate(), std::invalid_argument);  // no working dir
  TempDir wd;
  l.working_dir = wd.path();
  l.forbidden_imports.insert("json");
  CHECK_THROWS_AS(l.validate(), std::invalid_argument);
}
