#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "ska/errors.hpp"
#include "ska/measure.hpp"
#include "ska/registry.hpp"

namespace ska {

// --- expressions -----------------------------------------------------------

struct Expr;
using ExprPtr = std::shared_ptr<Expr>;

struct Expr {
  enum class Kind { Number, Ident, Binary, Call };
  Kind kind = Kind::Number;
  double number = 0.0;       // Number
  std::string name;          // Ident, Call
  char op = 0;               // Binary: + - * /
  ExprPtr lhs, rhs;          // Binary
  std::vector<ExprPtr> args; // Call
  int line = 0, col = 0;

  static ExprPtr num(double v);
  static ExprPtr ident(std::string n);
  static ExprPtr binary(char op, ExprPtr l, ExprPtr r);
  static ExprPtr call(std::string n, std::vector<ExprPtr> a);
};

bool equal(const Expr& a, const Expr& b);

// --- statements ------------------------------------------------------------

struct Stmt;
using StmtPtr = std::shared_ptr<Stmt>;

struct StepSpec {
  bool multiplicative = false;
  ExprPtr factor;
};

struct Stmt {
  enum class Kind { Assign, Call, Measure, MeasureBlock, For };
  Kind kind = Kind::Assign;
  int line = 0, col = 0;

  // Assign
  std::string name;          // also Call routine name, Measure comm name
  ExprPtr value;
  // Call
  std::vector<ExprPtr> args; // also Measure routine args
  // Measure
  std::string routine;
  // MeasureBlock
  std::string title;
  std::vector<StmtPtr> body; // also For body
  // For
  ExprPtr from, to;
  StepSpec step;
};

bool equal(const Stmt& a, const Stmt& b);

struct SkiAst {
  std::vector<StmtPtr> items;
};

bool equal(const SkiAst& a, const SkiAst& b);

// --- parse / print ---------------------------------------------------------

/// Parses one `.ski` script.  Throws ScriptError with line:col on the first
/// syntax problem.
SkiAst parse(const std::string& text);

/// Canonical text form; parse(print(ast)) is structurally equal to ast.
std::string print(const SkiAst& ast);
std::string print(const Expr& e);

// --- loop expansion --------------------------------------------------------

/// Values a `for` loop visits: float iteration from `from` by the step,
/// emitting nearest integers while the running value stays <= `to`,
/// with consecutive duplicates dropped.  Throws ScriptError when the range
/// cannot terminate (factor <= 1 multiplicative, <= 0 additive) or a
/// multiplicative range starts below 1.
std::vector<std::int64_t> expand_for(double from, double to,
                                     bool multiplicative, double factor);

// --- evaluation ------------------------------------------------------------

struct ScriptOutput {
  std::vector<MeasurementRecord> records;
  double final_unit = 1e6;
};

/// Runs the script SPMD across the world's PEs and collects the records on
/// PE 0.  `interrupted`, when non-null, is polled before each measurement;
/// a true value aborts the run with a ScriptError.
ScriptOutput run_script(const SkiAst& ast, World& world,
                        const Registry& registry,
                        const std::atomic<bool>* interrupted = nullptr);

}  // namespace ska
