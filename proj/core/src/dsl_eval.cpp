#include <cmath>
#include <map>
#include <sstream>

#include "ska/dsl.hpp"

namespace ska {

namespace {

struct EvalValue {
  double num = 0.0;
  bool is_comm = false;
};

struct EvalEnv {
  std::map<std::string, EvalValue> vars;
  double unit = 1e6;
  double skampi_buffer = 4.0 * 1024 * 1024;
  std::string title;  // active measurement-block title, "" outside blocks
};

[[noreturn]] void err(const std::string& msg, const Expr& at) {
  throw ScriptError(msg, at.line, at.col);
}

EvalValue eval_expr(const Expr& e, const EvalEnv& env);

double eval_num(const Expr& e, const EvalEnv& env) {
  EvalValue v = eval_expr(e, env);
  if (v.is_comm) err("cannot use a communicator as a number", e);
  return v.num;
}

EvalValue eval_expr(const Expr& e, const EvalEnv& env) {
  switch (e.kind) {
    case Expr::Kind::Number:
      return {e.number, false};
    case Expr::Kind::Ident: {
      auto it = env.vars.find(e.name);
      if (it == env.vars.end()) err("undefined variable '" + e.name + "'", e);
      return it->second;
    }
    case Expr::Kind::Binary: {
      double l = eval_num(*e.lhs, env);
      double r = eval_num(*e.rhs, env);
      switch (e.op) {
        case '+': return {l + r, false};
        case '-': return {l - r, false};
        case '*': return {l * r, false};
        case '/':
          if (r == 0.0) err("division by zero", e);
          return {l / r, false};
      }
      err("bad operator", e);
    }
    case Expr::Kind::Call: {
      if (e.name != "sqrt")
        err("unknown function '" + e.name + "'", e);
      if (e.args.size() != 1) err("sqrt takes exactly one argument", e);
      double v = eval_num(*e.args[0], env);
      if (v < 0.0) err("sqrt of a negative value", e);
      return {std::sqrt(v), false};
    }
  }
  err("bad expression", e);
}

std::int64_t round_arg(double v) {
  return static_cast<std::int64_t>(std::floor(v + 0.5));
}

class Evaluator {
public:
  Evaluator(Pe& pe, MeasureSession& session, const Registry& registry,
            const std::atomic<bool>* interrupted,
            std::vector<MeasurementRecord>& records)
      : pe_(pe),
        session_(session),
        registry_(registry),
        interrupted_(interrupted),
        records_(records) {
    env_.vars["MPI_COMM_WORLD"] = {0.0, true};
    env_.vars["MAXSIZE"] = {4.0 * 1024 * 1024, false};
  }

  void run(const SkiAst& ast) {
    for (const StmtPtr& s : ast.items) exec(*s);
  }

  double unit() const { return env_.unit; }

private:
  void exec(const Stmt& s) {
    try {
      exec_inner(s);
    } catch (const ScriptError& e) {
      if (e.line() > 0) throw;
      throw ScriptError(e.what(), s.line, s.col);
    }
  }

  void exec_inner(const Stmt& s) {
    switch (s.kind) {
      case Stmt::Kind::Assign:
        env_.vars[s.name] = eval_expr(*s.value, env_);
        return;
      case Stmt::Kind::Call:
        exec_call(s);
        return;
      case Stmt::Kind::Measure:
        exec_measure(s);
        return;
      case Stmt::Kind::MeasureBlock: {
        env_.title = s.title;
        for (const StmtPtr& c : s.body) exec(*c);
        env_.title.clear();
        return;
      }
      case Stmt::Kind::For: {
        double from = eval_num(*s.from, env_);
        double to = eval_num(*s.to, env_);
        double factor = eval_num(*s.step.factor, env_);
        std::vector<std::int64_t> values =
            expand_for(from, to, s.step.multiplicative, factor);
        for (std::int64_t v : values) {
          env_.vars[s.name] = {static_cast<double>(v), false};
          for (const StmtPtr& c : s.body) exec(*c);
        }
        return;
      }
    }
  }

  void exec_call(const Stmt& s) {
    if (s.name == "set_unit") {
      double v = arg1(s);
      double u = std::floor(v + 0.5);
      if (u < 1.0) throw ScriptError("unit must be at least 1");
      env_.unit = u;
      return;
    }
    if (s.name == "set_skampi_buffer") {
      double v = arg1(s);
      double b = std::floor(v + 0.5);
      if (b < 1.0)
        throw ScriptError("communication buffer size must be at least 1 byte");
      env_.skampi_buffer = b;
      return;
    }
    if (s.name.rfind("set_", 0) == 0)
      throw ScriptError("unknown setting '" + s.name + "'");
    if (s.name == "sqrt") {
      // legal as an expression; as a statement the value is just dropped
      for (const ExprPtr& a : s.args) eval_num(*a, env_);
      return;
    }
    throw ScriptError("unknown procedure '" + s.name + "'");
  }

  double arg1(const Stmt& s) {
    if (s.args.size() != 1)
      throw ScriptError(s.name + " takes exactly one argument");
    return eval_num(*s.args[0], env_);
  }

  void exec_measure(const Stmt& s) {
    auto cv = env_.vars.find(s.name);
    if (cv == env_.vars.end())
      throw ScriptError("undefined communicator '" + s.name + "'");
    if (!cv->second.is_comm)
      throw ScriptError("'" + s.name + "' is not a communicator");

    const RoutineDef* def = registry_.find(s.routine);
    if (!def) {
      std::ostringstream msg;
      msg << "unknown routine '" << s.routine << "'";
      std::vector<std::string> close = registry_.near_misses(s.routine);
      if (!close.empty()) {
        msg << "; did you mean ";
        for (std::size_t i = 0; i < close.size(); ++i) {
          if (i) msg << (i + 1 == close.size() ? " or " : ", ");
          msg << "'" << close[i] << "'";
        }
        msg << "?";
      }
      throw ScriptError(msg.str());
    }

    if (static_cast<int>(s.args.size()) != def->arity) {
      std::ostringstream msg;
      msg << s.routine << " takes " << def->arity << " argument"
          << (def->arity == 1 ? "" : "s") << ", got " << s.args.size();
      throw ScriptError(msg.str());
    }

    std::vector<std::int64_t> args;
    args.reserve(s.args.size());
    for (const ExprPtr& a : s.args) args.push_back(round_arg(eval_num(*a, env_)));

    int npes = pe_.world().npes();
    if (def->validate) def->validate(args, npes);
    if (def->footprint) {
      std::uint64_t need = def->footprint(args, npes);
      if (static_cast<double>(need) > env_.skampi_buffer) {
        std::ostringstream msg;
        msg << s.routine << " needs " << need
            << " bytes of buffer space but the communication buffer is "
            << static_cast<std::uint64_t>(env_.skampi_buffer)
            << " bytes (raise it with set_skampi_buffer)";
        throw ScriptError(msg.str());
      }
    }

    if (interrupted_ && interrupted_->load(std::memory_order_relaxed))
      throw ScriptError("interrupted");

    MeasurementRecord rec =
        run_measurement(pe_, session_, *def, args, env_.unit);
    if (pe_.rank() == 0) {
      rec.title = env_.title;
      records_.push_back(std::move(rec));
    }
  }

  Pe& pe_;
  MeasureSession& session_;
  const Registry& registry_;
  const std::atomic<bool>* interrupted_;
  std::vector<MeasurementRecord>& records_;
  EvalEnv env_;
};

}  // namespace

ScriptOutput run_script(const SkiAst& ast, World& world,
                        const Registry& registry,
                        const std::atomic<bool>* interrupted) {
  ScriptOutput out;
  MeasureSession session(world);
  world.run([&](Pe& pe) {
    session.sync_clocks(pe);
    Evaluator ev(pe, session, registry, interrupted, out.records);
    ev.run(ast);
    if (pe.rank() == 0) out.final_unit = ev.unit();
  });
  return out;
}

}  // namespace ska
