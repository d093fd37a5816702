#include "ska/measure.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <ostream>

#include "ska/registry.hpp"

namespace ska {

namespace {

enum : std::uint64_t {
  kPingTag = 0x100,
  kPongTag,
  kStartTag,
  kOkTag,
  kGoTag,
  kStatTag,
};

constexpr int kSyncRounds = 100;
constexpr double kStartWindowFloor = 100e-6;

std::string fmt6(double v) {
  char b[64];
  std::snprintf(b, sizeof b, "%.6g", v);
  return b;
}

}  // namespace

MeasureSession::MeasureSession(World& world) : world_(world) {
  sync_.offsets.assign(world.npes(), 0.0);
  sync_.rtt.assign(world.npes(), 0.0);
}

void MeasureSession::sync_clocks(Pe& pe) {
  int n = pe.npes();
  if (pe.rank() == 0) {
    sync_.offsets.assign(n, 0.0);
    sync_.rtt.assign(n, 0.0);
    sync_.max_rtt = 0.0;
    for (int p = 1; p < n; ++p) {
      double best_rtt = std::numeric_limits<double>::infinity();
      double best_off = 0.0;
      for (int i = 0; i < kSyncRounds; ++i) {
        double t0 = pe.now();
        pe.infra_send(p, kPingTag, &t0, sizeof t0);
        double echoed = 0.0;
        pe.infra_recv(p, kPongTag, &echoed, sizeof echoed);
        double t1 = pe.now();
        double rtt = t1 - t0;
        if (rtt < best_rtt) {
          best_rtt = rtt;
          best_off = echoed - (t0 + t1) / 2.0;
        }
      }
      sync_.rtt[p] = best_rtt;
      sync_.offsets[p] = best_off;
      sync_.max_rtt = std::max(sync_.max_rtt, best_rtt);
    }
  } else {
    for (int i = 0; i < kSyncRounds; ++i) {
      double ping = 0.0;
      pe.infra_recv(0, kPingTag, &ping, sizeof ping);
      double echoed = pe.now();
      pe.infra_send(0, kPongTag, &echoed, sizeof echoed);
    }
  }
  pe.barrier();
}

void MeasureSession::synchronized_start(Pe& pe) {
  pe.barrier();
  int n = pe.npes();
  int r = pe.rank();
  // Binomial tree rooted at PE 0: on one core every hop costs a scheduler
  // round, so the depth of the relay (log n), not the fan-out, decides
  // whether the last PE still sees the start time in the future.
  int parent = r & (r - 1);
  std::vector<int> children;
  int span = r == 0 ? 1 << ceil_log2(static_cast<unsigned>(n)) : r & -r;
  for (int bit = 1; bit < span; bit <<= 1)
    if (r + bit < n && (r & bit) == 0) children.push_back(r + bit);

  double delta = std::max(10.0 * sync_.max_rtt, kStartWindowFloor);
  for (int attempt = 0;; ++attempt) {
    double start = 0.0;
    if (r == 0)
      start = pe.now() + delta;
    else
      pe.infra_recv(parent, kStartTag, &start, sizeof start);
    for (int c : children) pe.infra_send(c, kStartTag, &start, sizeof start);

    double target = start + sync_.offsets[r];
    std::uint8_t ok = pe.now() <= target ? 1 : 0;
    std::uint8_t everyone_ok = ok;
    for (auto it = children.rbegin(); it != children.rend(); ++it) {
      std::uint8_t theirs = 0;
      pe.infra_recv(*it, kOkTag, &theirs, 1);
      everyone_ok &= theirs;
    }
    if (r != 0) {
      pe.infra_send(parent, kOkTag, &everyone_ok, 1);
      pe.infra_recv(parent, kGoTag, &everyone_ok, 1);
    }
    for (int c : children) pe.infra_send(c, kGoTag, &everyone_ok, 1);

    if (everyone_ok) {
      pe.spin_until(target);
      return;
    }
    if (attempt >= 1)
      throw FatalError(
          "synchronized start failed twice: a PE saw the start time only "
          "after it had passed");
    delta *= 2.0;
  }
}

double MeasureSession::calibrate_empty_quiet(Pe& pe, int iterations) {
  double t0 = pe.now();
  for (int i = 0; i < iterations; ++i) pe.quiet();
  return (pe.now() - t0) / iterations;
}

double MeasureSession::barrier_mean(Pe& pe, int iterations) {
  double t0 = pe.now();
  for (int i = 0; i < iterations; ++i) pe.barrier();
  return (pe.now() - t0) / iterations;
}

MeasurementRecord aggregate_samples(const std::string& routine,
                                    const std::vector<std::int64_t>& args,
                                    const std::vector<PeStat>& stats,
                                    double unit) {
  MeasurementRecord r;
  r.routine = routine;
  r.args = args;
  r.unit = unit;
  int k = 0;
  double sum = 0.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  int head = -1;
  for (std::size_t i = 0; i < stats.size(); ++i) {
    if (!stats[i].measured) continue;
    ++k;
    double m = stats[i].mean;
    sum += m;
    lo = std::min(lo, m);
    if (m > hi) {
      hi = m;
      head = static_cast<int>(i);
    }
    r.clamped = r.clamped || stats[i].clamped;
  }
  if (k == 0) throw FatalError(routine + ": no PE produced a sample");
  r.time = hi;
  r.min = lo;
  r.max = hi;
  r.mean = sum / k;
  if (k > 1) {
    double ss = 0.0;
    for (const PeStat& s : stats)
      if (s.measured) ss += (s.mean - r.mean) * (s.mean - r.mean);
    r.stderr_ = std::sqrt(ss / (k - 1)) / std::sqrt(static_cast<double>(k));
  }
  r.calibration = stats[head].calib;
  r.transfer_ref = stats[head].transfer_ref;
  r.empty_quiet_ref = stats[head].empty_quiet_ref;
  return r;
}

MeasurementRecord run_measurement(Pe& pe, MeasureSession& session,
                                  const RoutineDef& def,
                                  const std::vector<std::int64_t>& args,
                                  double unit) {
  std::uint64_t live_before = pe.live_allocs();
  RoutinePeResult out = def.run(pe, session, args);
  pe.barrier();
  if (pe.live_allocs() != live_before)
    throw FatalError(def.name + " left symmetric allocations behind");

  PeStat mine;
  mine.measured = out.measured;
  if (out.measured) {
    double m = out.iterations
                   ? out.elapsed / static_cast<double>(out.iterations)
                   : out.elapsed;
    m -= out.subtract;
    if (m < 0.0) {
      m = 0.0;
      mine.clamped = true;
    }
    mine.mean = m;
    mine.calib = out.calib;
    mine.transfer_ref = out.transfer_ref;
    mine.empty_quiet_ref = out.empty_quiet_ref;
  }

  // Everything funnels to PE 0 as six doubles per PE.
  double wire[6] = {mine.measured ? 1.0 : 0.0, mine.mean,
                    mine.calib,               mine.clamped ? 1.0 : 0.0,
                    mine.transfer_ref,        mine.empty_quiet_ref};
  if (pe.rank() != 0) {
    pe.infra_send(0, kStatTag, wire, sizeof wire);
    return {};
  }
  std::vector<PeStat> stats(pe.npes());
  stats[0] = mine;
  for (int p = 1; p < pe.npes(); ++p) {
    double in[6];
    pe.infra_recv(p, kStatTag, in, sizeof in);
    stats[p].measured = in[0] != 0.0;
    stats[p].mean = in[1];
    stats[p].calib = in[2];
    stats[p].clamped = in[3] != 0.0;
    stats[p].transfer_ref = in[4];
    stats[p].empty_quiet_ref = in[5];
  }
  return aggregate_samples(def.name, args, stats, unit);
}

void write_results(const std::vector<MeasurementRecord>& records, int npes,
                   double final_unit, ClockKind clock, std::ostream& out) {
  out << "# ska-shmem result file, version 1\n";
  char unit_buf[32];
  std::snprintf(unit_buf, sizeof unit_buf, "%.0f", final_unit);
  out << "# npes=" << npes << " unit=" << unit_buf << " clock="
      << (clock == ClockKind::Real ? "real" : "virtual") << "\n";
  bool open = false;
  std::string open_title;
  for (const MeasurementRecord& r : records) {
    if (!open || r.title != open_title) {
      if (open) out << "end result\n";
      out << "begin result \"" << r.title << "\"\n";
      open = true;
      open_title = r.title;
    }
    out << r.routine;
    for (std::int64_t a : r.args) out << " " << a;
    out << " time=" << fmt6(r.time * r.unit) << " min=" << fmt6(r.min * r.unit)
        << " max=" << fmt6(r.max * r.unit)
        << " stderr=" << fmt6(r.stderr_ * r.unit)
        << " calib=" << fmt6(r.calibration * r.unit);
    if (r.clamped) out << " clamped";
    out << "\n";
  }
  if (open) out << "end result\n";
}

}  // namespace ska
