#pragma once

// Shared plumbing for the SPMD test bodies: world factories for the two
// clock flavours and a tiny per-rank result sink so assertions can stay on
// the main thread.

#include <deque>
#include <functional>
#include <vector>

#include "ska/runtime.hpp"

namespace ska_test {

inline ska::WorldConfig virtual_cfg(int npes,
                                    ska::ProgressMode progress =
                                        ska::ProgressMode::QuietOnly) {
  ska::WorldConfig cfg;
  cfg.npes = npes;
  cfg.clock.kind = ska::ClockKind::Virtual;
  // Deliberately lopsided constants so no two cost formulas collide.
  cfg.clock.alpha = 1.5e-6;
  cfg.clock.beta = 2e-9;
  cfg.clock.gamma = 3e-7;
  cfg.clock.quiet_cost = 7e-7;
  cfg.progress = progress;
  return cfg;
}

inline ska::WorldConfig real_cfg(int npes, ska::ProgressMode progress =
                                               ska::ProgressMode::Async) {
  ska::WorldConfig cfg;
  cfg.npes = npes;
  cfg.clock.kind = ska::ClockKind::Real;
  cfg.progress = progress;
  return cfg;
}

/// One value slot per rank, written inside the body, read after run().
/// Backed by a deque so PerRank<bool> still hands out real references.
template <typename T>
struct PerRank {
  std::deque<T> v;
  explicit PerRank(int npes) : v(npes) {}
  T& operator()(const ska::Pe& pe) { return v[pe.rank()]; }
  const T& operator[](int r) const { return v[r]; }
};

}  // namespace ska_test
