#include "doctest.h"

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "ska/dsl.hpp"
#include "ska/errors.hpp"
#include "ska/registry.hpp"
#include "test_util.hpp"

using namespace ska;

TEST_CASE("assignment plus measure parses to the expected tree") {
  const std::string text =
      "comm_pt2pt = MPI_COMM_WORLD\n"
      "measure comm_pt2pt : Shmem_Put_Simple(10, 5)\n";

  SkiAst want;
  {
    auto assign = std::make_shared<Stmt>();
    assign->kind = Stmt::Kind::Assign;
    assign->name = "comm_pt2pt";
    assign->value = Expr::ident("MPI_COMM_WORLD");
    want.items.push_back(assign);

    auto meas = std::make_shared<Stmt>();
    meas->kind = Stmt::Kind::Measure;
    meas->name = "comm_pt2pt";
    meas->routine = "Shmem_Put_Simple";
    meas->args = {Expr::num(10), Expr::num(5)};
    want.items.push_back(meas);
  }
  CHECK(equal(parse(text), want));
}

TEST_CASE("a bare builtin call parses to the expected tree") {
  SkiAst want;
  auto call = std::make_shared<Stmt>();
  call->kind = Stmt::Kind::Call;
  call->name = "set_unit";
  call->args = {Expr::num(1000000000)};
  want.items.push_back(call);
  CHECK(equal(parse("set_unit(1000000000)\n"), want));
}

TEST_CASE("a measurement block with a loop parses to the expected tree") {
  // Trailing blanks after an assignment must not confuse the lexer.
  const std::string text =
      "begin measurement \"Iput_Round\"\n"
      "  stride = 16\t  \n"
      "  for count = 1 to MAXSIZE/stride step *sqrt(2) do\n"
      "    measure comm_pt2pt : Shmem_Iput_Round(count, stride, 5)\n"
      "  od\n"
      "end measurement\n";

  SkiAst want;
  auto block = std::make_shared<Stmt>();
  block->kind = Stmt::Kind::MeasureBlock;
  block->title = "Iput_Round";

  auto assign = std::make_shared<Stmt>();
  assign->kind = Stmt::Kind::Assign;
  assign->name = "stride";
  assign->value = Expr::num(16);
  block->body.push_back(assign);

  auto loop = std::make_shared<Stmt>();
  loop->kind = Stmt::Kind::For;
  loop->name = "count";
  loop->from = Expr::num(1);
  loop->to = Expr::binary('/', Expr::ident("MAXSIZE"), Expr::ident("stride"));
  loop->step.multiplicative = true;
  loop->step.factor = Expr::call("sqrt", {Expr::num(2)});

  auto meas = std::make_shared<Stmt>();
  meas->kind = Stmt::Kind::Measure;
  meas->name = "comm_pt2pt";
  meas->routine = "Shmem_Iput_Round";
  meas->args = {Expr::ident("count"), Expr::ident("stride"), Expr::num(5)};
  loop->body.push_back(meas);

  block->body.push_back(loop);
  want.items.push_back(block);
  CHECK(equal(parse(text), want));
}

TEST_CASE("print and parse are inverses") {
  const char* scripts[] = {
      "x = 3\n",
      "x = 1 + 2 * 3\n",
      "x = (1 + 2) * 3\n",
      "x = 1 - 2 - 3\n",
      "x = 1 - (2 - 3)\n",
      "x = 8 / 4 / 2\n",
      "x = 8 / (4 / 2)\n",
      "x = sqrt(2) * (MAXSIZE + 1)\n",
      "set_unit(1000000000)\n",
      "comm = MPI_COMM_WORLD\n"
      "measure comm : Shmem_Get_Simple(64, 3)\n",
      "begin measurement \"t\"\n"
      "  for i = 1 to 64 step 7 do\n"
      "    measure c : Shmem_P_Simple(5)\n"
      "  od\n"
      "end measurement\n",
  };
  for (const char* s : scripts) {
    CAPTURE(s);
    SkiAst once = parse(s);
    SkiAst twice = parse(print(once));
    CHECK(equal(once, twice));
  }
}

TEST_CASE("random expressions survive a print/parse round trip") {
  std::mt19937_64 rng(777);
  auto gen = [&](auto&& self, int depth) -> ExprPtr {
    const int pick = depth >= 4 ? static_cast<int>(rng() % 2)
                                : static_cast<int>(rng() % 5);
    switch (pick) {
      case 0: {
        // Magnitudes the plain formatter renders without an exponent.
        const double choices[] = {0.0, 1, 7, 0.5, 0.25, 999999, 123456, 0.125};
        return Expr::num(choices[rng() % 8]);
      }
      case 1:
        return Expr::ident(rng() & 1 ? "count" : "MAXSIZE");
      case 2:
        return Expr::call("sqrt", {self(self, depth + 1)});
      default: {
        const char ops[] = {'+', '-', '*', '/'};
        return Expr::binary(ops[rng() % 4], self(self, depth + 1),
                            self(self, depth + 1));
      }
    }
  };
  for (int i = 0; i < 200; ++i) {
    ExprPtr e = gen(gen, 0);
    SkiAst ast;
    auto s = std::make_shared<Stmt>();
    s->kind = Stmt::Kind::Assign;
    s->name = "x";
    s->value = e;
    ast.items.push_back(s);
    SkiAst back = parse(print(ast));
    REQUIRE(back.items.size() == 1);
    CHECK(equal(*back.items[0]->value, *e));
  }
}

TEST_CASE("loop expansion follows float iteration with rounding") {
  const std::vector<std::int64_t> want = {1,  2,  3,  4,   6,   8,   11,
                                          16, 23, 32, 45,  64,  91,  128,
                                          181, 256, 362, 512, 724};
  CHECK(expand_for(1, 1024, true, std::sqrt(2.0)) == want);
  CHECK(expand_for(1, 3, true, 1.1) ==
        std::vector<std::int64_t>{1, 2, 3});
  CHECK(expand_for(1, 10.5, false, 2.4) ==
        std::vector<std::int64_t>{1, 3, 6, 8});
  CHECK(expand_for(1, 5, false, 1) ==
        std::vector<std::int64_t>{1, 2, 3, 4, 5});
  CHECK(expand_for(2, 1, false, 1).empty());
}

TEST_CASE("loop expansion is strictly increasing and starts at the origin") {
  std::mt19937_64 rng(31337);
  for (int i = 0; i < 100; ++i) {
    const double from = 1 + static_cast<double>(rng() % 50);
    const double to = from + static_cast<double>(rng() % 5000);
    const bool mult = rng() & 1;
    const double factor =
        mult ? 1.05 + (rng() % 100) / 25.0 : 0.7 + (rng() % 40) / 4.0;
    auto vals = expand_for(from, to, mult, factor);
    REQUIRE(!vals.empty());
    CHECK(vals.front() == std::llround(from));
    for (std::size_t k = 1; k < vals.size(); ++k)
      CHECK(vals[k] > vals[k - 1]);
    CHECK(static_cast<double>(vals.back()) <= to + 0.5);
  }
}

TEST_CASE("non-terminating loop specs are rejected") {
  CHECK_THROWS_AS(expand_for(1, 100, true, 1.0), ScriptError);
  CHECK_THROWS_AS(expand_for(1, 100, true, 0.5), ScriptError);
  CHECK_THROWS_AS(expand_for(1, 100, false, 0.0), ScriptError);
  CHECK_THROWS_AS(expand_for(1, 100, false, -2.0), ScriptError);
  CHECK_THROWS_AS(expand_for(0.25, 100, true, 2.0), ScriptError);
}

TEST_CASE("syntax errors carry their position") {
  try {
    parse("x = 1\ny = 3 +\n");
    FAIL("expected a syntax error");
  } catch (const ScriptError& e) {
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("2:") == 0);
  }
}

TEST_CASE("the lexer spells out its dislikes") {
  CHECK_THROWS_WITH_AS(parse("x = 1e9\n"),
                       doctest::Contains("scientific notation"), ScriptError);
  CHECK_THROWS_AS(parse("x = 1.2.3\n"), ScriptError);
  CHECK_THROWS_AS(parse("s = \"unterminated\n"), ScriptError);
  CHECK_THROWS_AS(parse("begin measurement \"a\"\nbegin measurement \"b\"\n"),
                  ScriptError);
  CHECK_THROWS_AS(parse("od\n"), ScriptError);
  CHECK_THROWS_AS(parse("measure c Shmem_Put_Simple(1, 1)\n"), ScriptError);
}

// --- evaluator --------------------------------------------------------------

namespace {
ScriptOutput run_text(const std::string& text, int npes = 2) {
  World world(ska_test::virtual_cfg(npes));
  return run_script(parse(text), world, routine_registry());
}
}  // namespace

TEST_CASE("the evaluator expands loops and records titles") {
  ScriptOutput out = run_text(
      "comm = MPI_COMM_WORLD\n"
      "begin measurement \"sweep\"\n"
      "  for n = 1 to 8 step *2 do\n"
      "    measure comm : Shmem_Put_Simple(n, 2)\n"
      "  od\n"
      "end measurement\n");
  REQUIRE(out.records.size() == 4);
  for (const auto& r : out.records) {
    CHECK(r.title == "sweep");
    CHECK(r.routine == "Shmem_Put_Simple");
  }
  CHECK(out.records[0].args == std::vector<std::int64_t>{1, 2});
  CHECK(out.records[3].args == std::vector<std::int64_t>{8, 2});
}

TEST_CASE("set_unit changes the final unit") {
  ScriptOutput out = run_text(
      "set_unit(1000000000)\n"
      "comm = MPI_COMM_WORLD\n"
      "measure comm : Shmem_P_Simple(3)\n");
  CHECK(out.final_unit == 1e9);
  REQUIRE(out.records.size() == 1);
}

TEST_CASE("loop variables participate in arithmetic") {
  ScriptOutput out = run_text(
      "c = MPI_COMM_WORLD\n"
      "stride = 2\n"
      "for n = 2 to 8/stride step 2 do\n"
      "  measure c : Shmem_Iput_Round(n, stride, 1)\n"
      "od\n");
  REQUIRE(out.records.size() == 2);
  CHECK(out.records[0].args == std::vector<std::int64_t>{2, 2, 1});
  CHECK(out.records[1].args == std::vector<std::int64_t>{4, 2, 1});
}

TEST_CASE("script-level mistakes come back as script errors") {
  CHECK_THROWS_WITH_AS(
      run_text("c = MPI_COMM_WORLD\nmeasure c : Shmem_Put_Simpel(1, 1)\n"),
      doctest::Contains("did you mean"), ScriptError);
  CHECK_THROWS_AS(
      run_text("c = MPI_COMM_WORLD\nmeasure c : Shmem_Put_Simple(1)\n"),
      ScriptError);
  CHECK_THROWS_AS(run_text("measure c : Shmem_Put_Simple(1, 1)\n"),
                  ScriptError);
  CHECK_THROWS_AS(run_text("x = 1 / 0\nset_unit(x)\n"), ScriptError);
  CHECK_THROWS_AS(run_text("x = sqrt(0 - 4)\nset_unit(x)\n"), ScriptError);
  CHECK_THROWS_AS(run_text("set_fancy_hats(1)\n"), ScriptError);
  CHECK_THROWS_AS(
      run_text("c = MPI_COMM_WORLD\nmeasure c : Shmem_Put_Simple(0, 5)\n"),
      ScriptError);
}

TEST_CASE("buffer constraints name the remedy") {
  CHECK_THROWS_WITH_AS(
      run_text("c = MPI_COMM_WORLD\n"
               "measure c : Shmem_Iput_Round(1048576, 8, 2)\n"),
      doctest::Contains("set_skampi_buffer"), ScriptError);
}

TEST_CASE("interruption aborts the run") {
  World world(ska_test::virtual_cfg(2));
  std::atomic<bool> stop{true};
  CHECK_THROWS_AS(run_script(parse("c = MPI_COMM_WORLD\n"
                                   "measure c : Shmem_P_Simple(2)\n"),
                             world, routine_registry(), &stop),
                  ScriptError);
}
