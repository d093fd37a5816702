#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ska/measure.hpp"

namespace ska {

enum class Participants { Pair01, Ring, All, Half };

const char* to_string(Participants p);

/// One registered measurement routine.
struct RoutineDef {
  std::string name;      // canonical spelling resolved by scripts
  int arity = 0;
  Participants participants = Participants::All;
  bool calibrated = false;  // subtracts the empty-quiet baseline
  /// Symmetric bytes the largest buffer needs; checked against the
  /// configured communication-buffer limit before running.
  std::function<std::uint64_t(const std::vector<std::int64_t>&, int npes)>
      footprint;
  /// Validates argument values and npes; throws ScriptError on violation.
  std::function<void(const std::vector<std::int64_t>&, int npes)> validate;
  /// SPMD body: runs on every PE, returns that PE's timing contribution.
  std::function<RoutinePeResult(Pe&, MeasureSession&,
                                const std::vector<std::int64_t>&)>
      run;
};

class Registry {
public:
  void add(RoutineDef def);
  /// Adds an alternate spelling resolving to an already-registered routine.
  void alias(const std::string& alt, const std::string& canonical);

  /// nullptr when unknown.  Aliases resolve to their canonical routine.
  const RoutineDef* find(const std::string& name) const;

  /// Canonical definitions in registration order.
  const std::vector<RoutineDef>& all() const { return defs_; }

  /// Registered spellings (canonical + aliases) closest to `name` by edit
  /// distance, for diagnostics; at most 3, distance <= 3.
  std::vector<std::string> near_misses(const std::string& name) const;

private:
  std::vector<RoutineDef> defs_;
  std::vector<std::pair<std::string, std::size_t>> index_;  // name -> defs_ slot
};

/// The process-wide registry with every routine registered.
const Registry& routine_registry();

/// Executes one measurement end to end on every PE: the routine body (which
/// performs its own setup, warm-up, and synchronized start), a trailing
/// audit barrier, and aggregation of per-PE statistics on PE 0.  PEs other
/// than 0 get a zeroed record.
MeasurementRecord run_measurement(Pe& pe, MeasureSession& session,
                                  const RoutineDef& def,
                                  const std::vector<std::int64_t>& args,
                                  double unit);

}  // namespace ska
