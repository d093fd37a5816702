#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ska/runtime.hpp"

namespace ska {

/// Cross-PE clock relationship estimated by ping-pong probing.
/// offsets[p] converts a PE-0 clock reading into PE p's clock:
/// local = pe0_time + offsets[p].  offsets[0] == 0 by definition.
struct ClockSyncData {
  std::vector<double> offsets;
  std::vector<double> rtt;  // per-PE minimum observed round trip vs PE 0
  double max_rtt = 0.0;     // max over PEs of rtt[p]
};

/// One PE's contribution to a measurement.
struct TimingSample {
  int pe = 0;
  double elapsed = 0.0;  // seconds spent in the timed region
  std::uint64_t iterations = 1;
};

/// Finished, aggregated measurement as it appears in the result file.
/// Statistics are in seconds; the writer converts with `unit`.
struct MeasurementRecord {
  std::string title;
  std::string routine;
  std::vector<std::int64_t> args;
  double time = 0.0;    // headline: slowest participating PE's per-iteration mean
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double stderr_ = 0.0;
  double calibration = 0.0;  // empty-quiet value subtracted per iteration
  bool clamped = false;      // a subtraction went negative and was floored at 0
  double unit = 1e6;         // ticks-per-second divisor in effect
  // Side data for overlap analysis; not part of the file format.
  double transfer_ref = 0.0;
  double empty_quiet_ref = 0.0;
};

/// Per-PE output of one measurement routine.
struct RoutinePeResult {
  bool measured = false;     // excluded from aggregation when false
  double elapsed = 0.0;      // seconds in the timed region
  std::uint64_t iterations = 1;
  double subtract = 0.0;     // per-iteration baseline removed from the mean
  double calib = 0.0;        // the empty-quiet part of `subtract`, reported
  double transfer_ref = 0.0;
  double empty_quiet_ref = 0.0;
};

/// Shared measurement state for one script run: clock sync results and the
/// synchronized-start machinery.  One instance serves all PE threads.
class MeasureSession {
public:
  explicit MeasureSession(World& world);

  /// Collective.  PE 0 ping-pongs every other PE 100 times; the offset comes
  /// from the minimum-RTT exchange.  Results land in sync() for all PEs.
  void sync_clocks(Pe& pe);

  const ClockSyncData& sync() const { return sync_; }

  /// Collective.  Aligns all PEs on a future instant chosen by PE 0
  /// (now + delta, delta = 10x the largest RTT with a 100 us floor).  A PE
  /// that receives the start time too late triggers one retry with a doubled
  /// window; a second failure is fatal.
  void synchronized_start(Pe& pe);

  /// Mean cost of a quiet with nothing pending, over `iterations` calls.
  static double calibrate_empty_quiet(Pe& pe, int iterations);

  /// Mean cost of a full barrier over `iterations` untimed calls.
  static double barrier_mean(Pe& pe, int iterations);

private:
  World& world_;
  ClockSyncData sync_;
  std::atomic<int> start_round_{0};
};

/// Number of untimed runs of a routine's body before its timed region.
inline constexpr int kWarmupIters = 2;
/// Repetitions for routines whose listed signature has no iteration count.
inline constexpr int kInternalReps = 64;
/// Repetitions of synchronized single-shot (Synchro) measurements.
inline constexpr int kSynchroReps = 8;
/// Calls used to estimate the empty-quiet and mean-barrier baselines.
inline constexpr int kBaselineReps = 16;

/// What each PE reports to PE 0 after a measurement: its per-iteration mean
/// with any baseline already subtracted (and clamped at zero if negative).
struct PeStat {
  bool measured = false;
  double mean = 0.0;
  double calib = 0.0;
  bool clamped = false;
  double transfer_ref = 0.0;
  double empty_quiet_ref = 0.0;
};

/// Folds per-PE statistics into a record on PE 0.  The headline is the
/// slowest measuring PE's mean; calibration and overlap side data follow
/// the headline PE.
MeasurementRecord aggregate_samples(const std::string& routine,
                                    const std::vector<std::int64_t>& args,
                                    const std::vector<PeStat>& stats,
                                    double unit);

/// Renders the result file.  Values print with six significant digits;
/// consecutive records with the same title share one block.
void write_results(const std::vector<MeasurementRecord>& records, int npes,
                   double final_unit, ClockKind clock, std::ostream& out);

}  // namespace ska
