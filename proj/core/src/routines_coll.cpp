#include <algorithm>
#include <cstring>
#include <vector>

#include "routines.hpp"

namespace ska {
namespace {

using routines_detail::fill_bytes;
using routines_detail::require;

constexpr std::uint64_t kSkAckTag = 0x200;

enum class CollVariant { Consecutive, Barrier, Synchro };

// Measurement scaffolds around one collective call.  Consecutive times
// back-to-back calls; Barrier interleaves a barrier and subtracts its
// separately estimated mean; Synchro re-aligns all PEs before each of a
// fixed number of single-shot repetitions.
struct CollKind {
  std::uint64_t (*src_span)(std::int64_t count, int npes);
  std::uint64_t (*dst_span)(std::int64_t count, int npes);
  void (*op)(Pe& pe, const SymRef& dst, const SymRef& src, std::int64_t count);
};

RoutinePeResult run_coll(Pe& pe, MeasureSession& session, CollVariant v,
                         std::int64_t iters, std::int64_t count,
                         const CollKind& kind) {
  SymRef src = pe.sym_malloc(kind.src_span(count, pe.npes()));
  SymRef dst = pe.sym_malloc(kind.dst_span(count, pe.npes()));
  fill_bytes(pe, pe.resolve(src, pe.rank()), src.len, 31);
  std::memset(pe.resolve(dst, pe.rank()), 0, dst.len);
  pe.barrier();

  double bhat = v == CollVariant::Barrier
                    ? MeasureSession::barrier_mean(pe, kBaselineReps)
                    : 0.0;

  for (int w = 0; w < kWarmupIters; ++w) kind.op(pe, dst, src, count);

  RoutinePeResult res;
  res.measured = true;
  if (v == CollVariant::Synchro) {
    res.iterations = kSynchroReps;
    double acc = 0.0;
    for (int rep = 0; rep < kSynchroReps; ++rep) {
      session.synchronized_start(pe);
      double t0 = pe.now();
      kind.op(pe, dst, src, count);
      acc += pe.now() - t0;
    }
    res.elapsed = acc;
  } else {
    res.iterations = static_cast<std::uint64_t>(iters);
    res.subtract = bhat;
    session.synchronized_start(pe);
    double t0 = pe.now();
    for (std::int64_t i = 0; i < iters; ++i) {
      kind.op(pe, dst, src, count);
      if (v == CollVariant::Barrier) pe.barrier();
    }
    res.elapsed = pe.now() - t0;
  }

  pe.sym_free(dst);
  pe.sym_free(src);
  return res;
}

void add_coll(Registry& r, std::string name, CollVariant v,
              const CollKind& kind) {
  RoutineDef d;
  d.name = std::move(name);
  d.arity = v == CollVariant::Synchro ? 1 : 2;
  d.participants = Participants::All;
  d.calibrated = false;
  d.validate = [v](const std::vector<std::int64_t>& a, int) {
    if (v == CollVariant::Synchro) {
      require(a[0] >= 1, "count must be at least 1");
    } else {
      require(a[0] >= 1, "iterations must be at least 1");
      require(a[1] >= 1, "count must be at least 1");
    }
  };
  d.footprint = [v, kind](const std::vector<std::int64_t>& a,
                          int npes) -> std::uint64_t {
    std::int64_t count = v == CollVariant::Synchro ? a[0] : a[1];
    return std::max(kind.src_span(count, npes), kind.dst_span(count, npes));
  };
  d.run = [v, kind](Pe& pe, MeasureSession& s,
                    const std::vector<std::int64_t>& a) {
    std::int64_t iters = v == CollVariant::Synchro ? 1 : a[0];
    std::int64_t count = v == CollVariant::Synchro ? a[0] : a[1];
    return run_coll(pe, s, v, iters, count, kind);
  };
  r.add(std::move(d));
}

// --- broadcast -------------------------------------------------------------

double est_rtt(const ClockSyncData& sync, int x, int y) {
  if (x == y) return 0.0;
  if (x == 0) return sync.rtt[static_cast<std::size_t>(y)];
  if (y == 0) return sync.rtt[static_cast<std::size_t>(x)];
  return sync.rtt[static_cast<std::size_t>(x)] +
         sync.rtt[static_cast<std::size_t>(y)];
}

enum class BcastVariant { All, AllRounds, AllSk, AllSynchro };

RoutinePeResult run_bcast(Pe& pe, MeasureSession& session,
                          const std::vector<std::int64_t>& args,
                          BcastVariant v) {
  auto n = static_cast<std::uint64_t>(args[0]);
  int root = static_cast<int>(args[1]);
  int npes = pe.npes();

  SymRef src = pe.sym_malloc(n);
  SymRef dst = pe.sym_malloc(n);
  fill_bytes(pe, pe.resolve(src, pe.rank()), n, 41);
  std::memset(pe.resolve(dst, pe.rank()), 0, n);
  pe.barrier();

  auto bcast = [&](int rt) {
    pe.broadcast(TeamId::WorldTeam, rt, dst, src, n);
  };
  for (int w = 0; w < kWarmupIters; ++w) bcast(root);

  RoutinePeResult res;
  res.measured = true;
  switch (v) {
    case BcastVariant::All: {
      res.iterations = 1;
      session.synchronized_start(pe);
      double t0 = pe.now();
      bcast(root);
      res.elapsed = pe.now() - t0;
      break;
    }
    case BcastVariant::AllRounds: {
      res.iterations = static_cast<std::uint64_t>(npes);
      session.synchronized_start(pe);
      double t0 = pe.now();
      for (int k = 0; k < npes; ++k) bcast((root + k) % npes);
      res.elapsed = pe.now() - t0;
      break;
    }
    case BcastVariant::AllSynchro: {
      res.iterations = kSynchroReps;
      double acc = 0.0;
      for (int rep = 0; rep < kSynchroReps; ++rep) {
        session.synchronized_start(pe);
        double t0 = pe.now();
        bcast(root);
        acc += pe.now() - t0;
      }
      res.elapsed = acc;
      break;
    }
    case BcastVariant::AllSk: {
      // Root times broadcast + acknowledgment round trips; the designated
      // acknowledger rotates over the other PEs.  Half the estimated
      // root<->acknowledger round trip is taken back out of each sample.
      int iters = std::max(1, npes - 1);
      res.iterations = static_cast<std::uint64_t>(iters);
      res.measured = pe.rank() == root;
      const ClockSyncData& sync = session.sync();
      session.synchronized_start(pe);
      double acc = 0.0;
      for (int k = 0; k < iters; ++k) {
        int acker = npes > 1 ? (root + 1 + k % (npes - 1)) % npes : -1;
        std::uint64_t tag = kSkAckTag + static_cast<std::uint64_t>(k);
        if (pe.rank() == root) {
          double t0 = pe.now();
          bcast(root);
          if (acker >= 0) {
            std::uint64_t token = 0;
            pe.infra_recv(acker, tag, &token, sizeof token);
          }
          double round = pe.now() - t0;
          double est = acker >= 0 ? est_rtt(sync, root, acker) : 0.0;
          acc += round - est / 2;
        } else {
          bcast(root);
          if (pe.rank() == acker) {
            std::uint64_t token = 1;
            pe.infra_send(root, tag, &token, sizeof token);
          }
        }
      }
      res.elapsed = acc;
      break;
    }
  }

  pe.sym_free(dst);
  pe.sym_free(src);
  return res;
}

void add_bcast(Registry& r, std::string name, BcastVariant v) {
  RoutineDef d;
  d.name = std::move(name);
  d.arity = 2;
  d.participants = Participants::All;
  d.calibrated = false;
  d.validate = [](const std::vector<std::int64_t>& a, int npes) {
    require(a[0] >= 1, "count must be at least 1");
    require(a[1] >= 0 && a[1] < npes, "root is out of range");
  };
  d.footprint = [](const std::vector<std::int64_t>& a, int) {
    return static_cast<std::uint64_t>(a[0]);
  };
  d.run = [v](Pe& pe, MeasureSession& s, const std::vector<std::int64_t>& a) {
    return run_bcast(pe, s, a, v);
  };
  r.add(std::move(d));
}

// --- barrier / sync --------------------------------------------------------

RoutinePeResult run_barrier_sync(Pe& pe, MeasureSession& session,
                                 const std::vector<std::int64_t>& args,
                                 bool is_sync, bool half, bool consecutive) {
  TeamId tid = half ? TeamId::HalfTeam : TeamId::WorldTeam;
  bool member = pe.in_team(tid);
  std::int64_t iters = consecutive ? args[0] : 1;

  auto op = [&] {
    if (is_sync)
      pe.sync(tid);
    else
      pe.barrier(tid);
  };
  if (member)
    for (int w = 0; w < kWarmupIters; ++w) op();

  session.synchronized_start(pe);

  RoutinePeResult res;
  res.iterations = static_cast<std::uint64_t>(iters);
  res.measured = member;
  if (member) {
    double t0 = pe.now();
    for (std::int64_t i = 0; i < iters; ++i) op();
    res.elapsed = pe.now() - t0;
  }
  return res;
}

void add_barrier_sync(Registry& r, std::string name, bool is_sync, bool half,
                      bool consecutive) {
  RoutineDef d;
  d.name = std::move(name);
  d.arity = consecutive ? 1 : 0;
  d.participants = half ? Participants::Half : Participants::All;
  d.calibrated = false;
  if (consecutive)
    d.validate = [](const std::vector<std::int64_t>& a, int) {
      require(a[0] >= 1, "iterations must be at least 1");
    };
  d.run = [is_sync, half, consecutive](Pe& pe, MeasureSession& s,
                                       const std::vector<std::int64_t>& a) {
    return run_barrier_sync(pe, s, a, is_sync, half, consecutive);
  };
  r.add(std::move(d));
}

// --- kinds -----------------------------------------------------------------

std::uint64_t span_reduce(std::int64_t c, int) {
  return static_cast<std::uint64_t>(c) * 8;
}
std::uint64_t span_per_pe(std::int64_t c, int) {
  return static_cast<std::uint64_t>(c);
}
std::uint64_t span_all(std::int64_t c, int npes) {
  return static_cast<std::uint64_t>(c) * static_cast<std::uint64_t>(npes);
}
std::uint64_t span_strided(std::int64_t c, int npes) {
  return static_cast<std::uint64_t>(c) * static_cast<std::uint64_t>(npes) * 16;
}

const CollKind kReduce{span_reduce, span_reduce,
                       [](Pe& pe, const SymRef& dst, const SymRef& src,
                          std::int64_t c) {
                         pe.reduce_and(TeamId::WorldTeam, dst, src,
                                       static_cast<std::uint64_t>(c));
                       }};
const CollKind kCollect{span_per_pe, span_all,
                        [](Pe& pe, const SymRef& dst, const SymRef& src,
                           std::int64_t c) {
                          pe.collect(TeamId::WorldTeam, dst, src,
                                     static_cast<std::uint64_t>(c));
                        }};
const CollKind kFcollect{span_per_pe, span_all,
                         [](Pe& pe, const SymRef& dst, const SymRef& src,
                            std::int64_t c) {
                           pe.fcollect(TeamId::WorldTeam, dst, src,
                                       static_cast<std::uint64_t>(c));
                         }};
const CollKind kAlltoall{span_all, span_all,
                         [](Pe& pe, const SymRef& dst, const SymRef& src,
                            std::int64_t c) {
                           pe.alltoall(TeamId::WorldTeam, dst, src,
                                       static_cast<std::uint64_t>(c));
                         }};
const CollKind kAlltoalls{span_strided, span_strided,
                          [](Pe& pe, const SymRef& dst, const SymRef& src,
                             std::int64_t c) {
                            pe.alltoalls(TeamId::WorldTeam, dst, src, 2, 2,
                                         static_cast<std::uint64_t>(c));
                          }};

}  // namespace

void register_coll(Registry& r) {
  add_bcast(r, "Shmem_Bcast_All", BcastVariant::All);
  add_bcast(r, "Shmem_Bcast_All_Rounds", BcastVariant::AllRounds);
  add_bcast(r, "Shmem_Bcast_All_SK", BcastVariant::AllSk);
  add_bcast(r, "Shmem_Bcast_All_Synchro", BcastVariant::AllSynchro);

  add_coll(r, "Shmem_Reduce_And_Consecutive", CollVariant::Consecutive,
           kReduce);
  add_coll(r, "Shmem_Reduce_And_Barrier", CollVariant::Barrier, kReduce);
  add_coll(r, "Shmem_Reduce_And_Synchro", CollVariant::Synchro, kReduce);

  add_coll(r, "Shmem_Collect_Consecutive", CollVariant::Consecutive, kCollect);
  add_coll(r, "Shmem_Collect_Barrier", CollVariant::Barrier, kCollect);
  add_coll(r, "Shmem_Collect_Synchro", CollVariant::Synchro, kCollect);

  add_coll(r, "Shmem_Fcollect_Consecutive", CollVariant::Consecutive,
           kFcollect);
  add_coll(r, "Shmem_Fcollect_Barrier", CollVariant::Barrier, kFcollect);
  add_coll(r, "Shmem_Fcollect_Synchro", CollVariant::Synchro, kFcollect);

  add_coll(r, "Shmem_Alltoall_Consecutive", CollVariant::Consecutive,
           kAlltoall);
  add_coll(r, "Shmem_Alltoall_Barrier", CollVariant::Barrier, kAlltoall);
  add_coll(r, "Shmem_Alltoall_Synchro", CollVariant::Synchro, kAlltoall);

  add_coll(r, "Shmem_Alltoalls_Consecutive", CollVariant::Consecutive,
           kAlltoalls);
  add_coll(r, "Shmem_Alltoalls_Barrier", CollVariant::Barrier, kAlltoalls);
  add_coll(r, "Shmem_Alltoalls_Synchro", CollVariant::Synchro, kAlltoalls);

  add_barrier_sync(r, "Shmem_Barrier", false, false, false);
  add_barrier_sync(r, "Shmem_Barrier_Consecutive", false, false, true);
  add_barrier_sync(r, "Shmem_Barrier_Half", false, true, false);
  add_barrier_sync(r, "Shmem_Barrier_Half_Consecutive", false, true, true);
  add_barrier_sync(r, "Shmem_Sync", true, false, false);
  add_barrier_sync(r, "Shmem_Sync_Consecutive", true, false, true);
  add_barrier_sync(r, "Shmem_Sync_Half", true, true, false);
  add_barrier_sync(r, "Shmem_Sync_Half_Consecutive", true, true, true);
}

}  // namespace ska
