#include <cstring>
#include <vector>

#include "routines.hpp"

namespace ska {
namespace {

using routines_detail::fill_bytes;
using routines_detail::require;
using routines_detail::ring_next;

// --- symmetric-memory management -------------------------------------------

enum class MemVariant { Malloc, Free, Realloc, Align, Calloc };

RoutinePeResult run_memory(Pe& pe, MeasureSession& session,
                           const std::vector<std::int64_t>& args,
                           MemVariant v) {
  std::int64_t iters = args[0];
  std::uint64_t count = args.size() > 1 ? static_cast<std::uint64_t>(
                                              args[args.size() - 1])
                                        : 0;
  std::uint64_t nb = v == MemVariant::Calloc
                         ? static_cast<std::uint64_t>(args[1])
                         : 0;

  for (int w = 0; w < kWarmupIters; ++w) pe.sym_free(pe.sym_malloc(64));

  RoutinePeResult res;
  res.measured = true;
  res.iterations = static_cast<std::uint64_t>(iters);

  std::vector<SymRef> held;
  held.reserve(static_cast<std::size_t>(iters));

  switch (v) {
    case MemVariant::Malloc: {
      session.synchronized_start(pe);
      double t0 = pe.now();
      for (std::int64_t i = 0; i < iters; ++i)
        held.push_back(pe.sym_malloc(count));
      res.elapsed = pe.now() - t0;
      for (const SymRef& ref : held) pe.sym_free(ref);
      break;
    }
    case MemVariant::Free: {
      for (std::int64_t i = 0; i < iters; ++i)
        held.push_back(pe.sym_malloc(64));
      session.synchronized_start(pe);
      double t0 = pe.now();
      for (const SymRef& ref : held) pe.sym_free(ref);
      res.elapsed = pe.now() - t0;
      break;
    }
    case MemVariant::Realloc: {
      // the half-sized starting allocation stays off the clock
      session.synchronized_start(pe);
      double acc = 0.0;
      for (std::int64_t i = 0; i < iters; ++i) {
        SymRef half = pe.sym_malloc(count / 2);
        double t0 = pe.now();
        SymRef full = pe.sym_realloc(half, count);
        acc += pe.now() - t0;
        pe.sym_free(full);
      }
      res.elapsed = acc;
      break;
    }
    case MemVariant::Align: {
      session.synchronized_start(pe);
      double t0 = pe.now();
      for (std::int64_t i = 0; i < iters; ++i)
        held.push_back(pe.sym_align(2, count));
      res.elapsed = pe.now() - t0;
      for (const SymRef& ref : held) pe.sym_free(ref);
      break;
    }
    case MemVariant::Calloc: {
      session.synchronized_start(pe);
      double t0 = pe.now();
      for (std::int64_t i = 0; i < iters; ++i)
        held.push_back(pe.sym_calloc(nb, count));
      res.elapsed = pe.now() - t0;
      for (const SymRef& ref : held) pe.sym_free(ref);
      break;
    }
  }
  return res;
}

void add_memory(Registry& r, std::string name, MemVariant v, int arity) {
  RoutineDef d;
  d.name = std::move(name);
  d.arity = arity;
  d.participants = Participants::All;
  d.calibrated = false;
  d.validate = [v](const std::vector<std::int64_t>& a, int) {
    require(a[0] >= 1, "iterations must be at least 1");
    switch (v) {
      case MemVariant::Free:
        break;
      case MemVariant::Realloc:
        require(a[1] >= 2, "count must be at least 2");
        break;
      case MemVariant::Calloc:
        require(a[1] >= 1, "block count must be at least 1");
        require(a[2] >= 1, "block size must be at least 1");
        break;
      default:
        require(a[1] >= 1, "count must be at least 1");
        break;
    }
  };
  d.run = [v](Pe& pe, MeasureSession& s, const std::vector<std::int64_t>& a) {
    return run_memory(pe, s, a, v);
  };
  r.add(std::move(d));
}

// --- communication contexts ------------------------------------------------

RoutinePeResult run_ctx(Pe& pe, MeasureSession& session, CtxOptions opts,
                        bool time_destroy) {
  for (int w = 0; w < kWarmupIters; ++w) pe.ctx_destroy(pe.ctx_create(opts));

  std::vector<CtxId> ids;
  ids.reserve(kInternalReps);

  RoutinePeResult res;
  res.measured = true;
  res.iterations = kInternalReps;

  if (time_destroy) {
    for (int i = 0; i < kInternalReps; ++i) ids.push_back(pe.ctx_create(opts));
    session.synchronized_start(pe);
    double t0 = pe.now();
    for (CtxId id : ids) pe.ctx_destroy(id);
    res.elapsed = pe.now() - t0;
  } else {
    session.synchronized_start(pe);
    double t0 = pe.now();
    for (int i = 0; i < kInternalReps; ++i) ids.push_back(pe.ctx_create(opts));
    res.elapsed = pe.now() - t0;
    for (CtxId id : ids) pe.ctx_destroy(id);
  }
  return res;
}

void add_ctx(Registry& r, std::string name, CtxOptions opts,
             bool time_destroy) {
  RoutineDef d;
  d.name = std::move(name);
  d.arity = 0;
  d.participants = Participants::All;
  d.calibrated = false;
  d.run = [opts, time_destroy](Pe& pe, MeasureSession& s,
                               const std::vector<std::int64_t>&) {
    return run_ctx(pe, s, opts, time_destroy);
  };
  r.add(std::move(d));
}

// --- ordering --------------------------------------------------------------

enum class OrdVariant { Quiet, Fence, WaitUntil, Test, QuietPut, FencePut };

RoutinePeResult run_ordering(Pe& pe, MeasureSession& session,
                             const std::vector<std::int64_t>& args,
                             OrdVariant v) {
  std::int64_t count = args[0];
  std::uint64_t nb =
      args.size() > 1 ? static_cast<std::uint64_t>(args[1]) : 0;
  int to = ring_next(pe);

  RoutinePeResult res;
  res.measured = true;
  res.iterations = static_cast<std::uint64_t>(count);

  switch (v) {
    case OrdVariant::Quiet:
    case OrdVariant::Fence: {
      auto op = [&] { v == OrdVariant::Quiet ? pe.quiet() : pe.fence(); };
      for (int w = 0; w < kWarmupIters; ++w) op();
      session.synchronized_start(pe);
      double t0 = pe.now();
      for (std::int64_t i = 0; i < count; ++i) op();
      res.elapsed = pe.now() - t0;
      break;
    }
    case OrdVariant::Test: {
      SymRef flag = pe.sym_calloc(1, 8);
      bool sink = false;
      for (int w = 0; w < kWarmupIters; ++w)
        sink ^= pe.test(flag, CmpOp::Eq, 1);
      session.synchronized_start(pe);
      double t0 = pe.now();
      for (std::int64_t i = 0; i < count; ++i)
        sink ^= pe.test(flag, CmpOp::Eq, 1);  // value never arrives
      res.elapsed = pe.now() - t0;
      (void)sink;
      pe.sym_free(flag);
      break;
    }
    case OrdVariant::WaitUntil: {
      SymRef flag = pe.sym_calloc(1, 8);
      std::int64_t seq = 0;
      auto step = [&](bool timed) {
        ++seq;
        pe.p(flag, seq, to);
        pe.quiet();
        // Ge, not Eq: a fast neighbor may lap us and overwrite the flag
        // with a later sequence number before we observe this one.
        if (timed) {
          double t0 = pe.now();
          pe.wait_until(flag, CmpOp::Ge, seq);
          res.elapsed += pe.now() - t0;
        } else {
          pe.wait_until(flag, CmpOp::Ge, seq);
        }
      };
      for (int w = 0; w < kWarmupIters; ++w) step(false);
      session.synchronized_start(pe);
      for (std::int64_t i = 0; i < count; ++i) step(true);
      pe.barrier();  // nobody frees the flag while a neighbor still waits
      pe.sym_free(flag);
      break;
    }
    case OrdVariant::QuietPut:
    case OrdVariant::FencePut: {
      SymRef dst = pe.sym_malloc(nb);
      std::vector<std::byte> src(nb);
      fill_bytes(pe, src.data(), nb, 51);
      pe.barrier();
      bool time_quiet = v == OrdVariant::QuietPut;
      auto step = [&](bool timed) {
        pe.put(dst, src.data(), nb, to);
        double t0 = timed ? pe.now() : 0.0;
        if (time_quiet)
          pe.quiet();
        else
          pe.fence();
        if (timed) res.elapsed += pe.now() - t0;
      };
      for (int w = 0; w < kWarmupIters; ++w) step(false);
      pe.quiet();
      session.synchronized_start(pe);
      for (std::int64_t i = 0; i < count; ++i) step(true);
      pe.quiet();  // fence leaves the puts pending; drain before teardown
      pe.barrier();
      pe.sym_free(dst);
      break;
    }
  }
  return res;
}

void add_ordering(Registry& r, std::string name, OrdVariant v, int arity) {
  RoutineDef d;
  d.name = std::move(name);
  d.arity = arity;
  d.participants =
      (v == OrdVariant::WaitUntil || v == OrdVariant::QuietPut ||
       v == OrdVariant::FencePut)
          ? Participants::Ring
          : Participants::All;
  d.calibrated = false;
  d.validate = [v](const std::vector<std::int64_t>& a, int npes) {
    require(a[0] >= 1, "count must be at least 1");
    if (a.size() > 1) require(a[1] >= 1, "put size must be at least 1");
    if (v == OrdVariant::WaitUntil) require(npes >= 2, "needs at least 2 PEs");
  };
  d.footprint = [v](const std::vector<std::int64_t>& a, int) -> std::uint64_t {
    if (a.size() > 1) return static_cast<std::uint64_t>(a[1]);
    return v == OrdVariant::Test || v == OrdVariant::WaitUntil ? 8 : 0;
  };
  d.run = [v](Pe& pe, MeasureSession& s, const std::vector<std::int64_t>& a) {
    return run_ordering(pe, s, a, v);
  };
  r.add(std::move(d));
}

// --- distributed locks -----------------------------------------------------

enum class LockVariant { Set, Clear, Busy, BusyAll, BusyTurns, BusyRound };

void check_busy(Pe& pe, const SymRef& lock, bool busy) {
  if (!busy) {
    pe.lock_clear(lock);  // the test acquired it; release before failing
    throw FatalError("lock_test acquired a lock that was expected busy");
  }
}

void audit_released(Pe& pe, const SymRef& lock) {
  pe.barrier();
  if (pe.rank() == 0) {
    std::int64_t word = 0;
    std::memcpy(&word, pe.resolve(lock, 0), sizeof word);
    if (word != 0)
      throw FatalError("lock word left non-zero after measurement");
  }
}

RoutinePeResult run_lock(Pe& pe, MeasureSession& session, LockVariant v) {
  int npes = pe.npes();
  int locker = npes - 1;
  SymRef words = pe.sym_calloc(2, 8);
  SymRef lock = words.sub(0, 8);
  SymRef flag = words.sub(8, 8);

  RoutinePeResult res;
  res.iterations = 1;

  switch (v) {
    case LockVariant::Set:
    case LockVariant::Clear: {
      bool timing_set = v == LockVariant::Set;
      res.measured = pe.rank() == 0;
      res.iterations = kInternalReps;
      if (pe.rank() == 0)
        for (int w = 0; w < kWarmupIters; ++w) {
          pe.lock_set(lock);
          pe.lock_clear(lock);
        }
      session.synchronized_start(pe);
      if (pe.rank() == 0) {
        double acc = 0.0;
        for (int i = 0; i < kInternalReps; ++i) {
          double t0 = pe.now();
          if (timing_set) {
            pe.lock_set(lock);
            acc += pe.now() - t0;
            pe.lock_clear(lock);
          } else {
            pe.lock_set(lock);
            t0 = pe.now();
            pe.lock_clear(lock);
            acc += pe.now() - t0;
          }
        }
        res.elapsed = acc;
      }
      break;
    }
    case LockVariant::Busy: {
      // PE 1 takes the lock and holds it for ten barrier-lengths; PE 0
      // times a single failing acquisition attempt in that window.
      double bhat = MeasureSession::barrier_mean(pe, kBaselineReps);
      res.measured = pe.rank() == 0;
      session.synchronized_start(pe);
      if (pe.rank() == 1) pe.lock_set(lock);
      pe.barrier();
      if (pe.rank() == 0) {
        double t0 = pe.now();
        bool busy = pe.lock_test(lock);
        res.elapsed = pe.now() - t0;
        check_busy(pe, lock, busy);
        pe.p(flag, 1, 1);
        pe.quiet();
      } else if (pe.rank() == 1) {
        pe.spin_until(pe.now() + 10 * bhat);
        pe.wait_until(flag, CmpOp::Eq, 1);
        pe.lock_clear(lock);
      }
      break;
    }
    case LockVariant::BusyAll: {
      res.measured = pe.rank() != locker;
      if (pe.rank() == locker)
        for (int w = 0; w < kWarmupIters; ++w) {
          pe.lock_set(lock);
          pe.lock_clear(lock);
        }
      session.synchronized_start(pe);
      if (pe.rank() == locker) pe.lock_set(lock);
      pe.barrier();
      if (pe.rank() != locker) {
        double t0 = pe.now();
        bool busy = pe.lock_test(lock);
        res.elapsed = pe.now() - t0;
        check_busy(pe, lock, busy);
      }
      pe.barrier();
      if (pe.rank() == locker) pe.lock_clear(lock);
      break;
    }
    case LockVariant::BusyTurns: {
      res.measured = pe.rank() != locker;
      session.synchronized_start(pe);
      if (pe.rank() == locker) pe.lock_set(lock);
      pe.barrier();
      for (int t = 0; t < npes; ++t) {
        if (t == locker) continue;
        if (pe.rank() == t) {
          double t0 = pe.now();
          bool busy = pe.lock_test(lock);
          res.elapsed = pe.now() - t0;
          check_busy(pe, lock, busy);
        }
        pe.barrier();
      }
      if (pe.rank() == locker) pe.lock_clear(lock);
      break;
    }
    case LockVariant::BusyRound: {
      res.measured = true;
      res.iterations = static_cast<std::uint64_t>(npes - 1);
      session.synchronized_start(pe);
      for (int who = 0; who < npes; ++who) {
        if (pe.rank() == who) pe.lock_set(lock);
        pe.barrier();
        for (int t = 0; t < npes; ++t) {
          if (t == who) continue;
          if (pe.rank() == t) {
            double t0 = pe.now();
            bool busy = pe.lock_test(lock);
            res.elapsed += pe.now() - t0;
            check_busy(pe, lock, busy);
          }
          pe.barrier();
        }
        if (pe.rank() == who) pe.lock_clear(lock);
        pe.barrier();
      }
      break;
    }
  }

  audit_released(pe, lock);
  pe.sym_free(words);
  return res;
}

void add_lock(Registry& r, std::string name, LockVariant v) {
  RoutineDef d;
  d.name = std::move(name);
  d.arity = 0;
  d.participants = (v == LockVariant::Set || v == LockVariant::Clear)
                       ? Participants::All
                   : v == LockVariant::Busy ? Participants::Pair01
                                            : Participants::All;
  d.calibrated = false;
  if (v != LockVariant::Set && v != LockVariant::Clear)
    d.validate = [](const std::vector<std::int64_t>&, int npes) {
      require(npes >= 2, "needs at least 2 PEs");
    };
  d.run = [v](Pe& pe, MeasureSession& s, const std::vector<std::int64_t>&) {
    return run_lock(pe, s, v);
  };
  r.add(std::move(d));
}

}  // namespace

void register_misc(Registry& r) {
  add_memory(r, "Shmem_Malloc", MemVariant::Malloc, 2);
  add_memory(r, "Shmem_Free", MemVariant::Free, 1);
  add_memory(r, "Shmem_Realloc", MemVariant::Realloc, 2);
  add_memory(r, "Shmem_Align", MemVariant::Align, 2);
  add_memory(r, "Shmem_Calloc", MemVariant::Calloc, 3);

  add_ctx(r, "Shmem_Ctx_Create_Serialized", CtxOptions::Serialized, false);
  add_ctx(r, "Shmem_Ctx_Create_Private", CtxOptions::Private, false);
  add_ctx(r, "Shmem_Ctx_Create_Nostore", CtxOptions::Nostore, false);
  add_ctx(r, "Shmem_Ctx_Destroy_Serialized", CtxOptions::Serialized, true);
  add_ctx(r, "Shmem_Ctx_Destroy_Private", CtxOptions::Private, true);
  add_ctx(r, "Shmem_Ctx_Destroy_Nostore", CtxOptions::Nostore, true);

  add_ordering(r, "Shmem_Quiet", OrdVariant::Quiet, 1);
  add_ordering(r, "Shmem_Fence", OrdVariant::Fence, 1);
  add_ordering(r, "Shmem_Wait_Until", OrdVariant::WaitUntil, 1);
  add_ordering(r, "Shmem_Test", OrdVariant::Test, 1);
  add_ordering(r, "Shmem_Quiet_Put", OrdVariant::QuietPut, 2);
  add_ordering(r, "Shmem_Fence_Put", OrdVariant::FencePut, 2);

  add_lock(r, "Shmem_Set_Lock", LockVariant::Set);
  add_lock(r, "Shmem_Clear_Lock", LockVariant::Clear);
  add_lock(r, "Shmem_Lock_Test_Busy", LockVariant::Busy);
  add_lock(r, "Shmem_Lock_Test_Busy_All", LockVariant::BusyAll);
  add_lock(r, "Shmem_Lock_Test_Busy_Turns", LockVariant::BusyTurns);
  add_lock(r, "Shmem_Lock_Test_Busy_Round", LockVariant::BusyRound);
}

}  // namespace ska
