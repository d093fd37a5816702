#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <exception>
#include <functional>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <thread>
#include <vector>

#include "ska/clock.hpp"
#include "ska/errors.hpp"
#include "ska/sym_heap.hpp"

namespace ska {

class World;
class Pe;

enum class ProgressMode { Async, QuietOnly };

enum class CtxOptions { Serialized, Private, Nostore };

enum class CmpOp { Eq, Ne, Gt, Le, Lt, Ge };

enum class TeamId { WorldTeam, HalfTeam };

struct WorldConfig {
  int npes = 2;
  std::uint64_t heap_bytes = 64ull << 20;
  ClockConfig clock{};
  ProgressMode progress = ProgressMode::Async;
  std::uint64_t seed = 12345;
};

using CtxId = std::uint32_t;
constexpr CtxId kDefaultCtx = 0;

enum class RmaKind { Put, Get, IPut, IGet, PElem, GElem, PutNbi, GetNbi };

/// One queued one-sided operation.  Put flavours snapshot their source bytes
/// at post time; get flavours read the target when delivered.
struct RmaOp {
  RmaKind kind;
  int origin = 0;          // issuing PE
  int target = 0;          // remote PE
  SymRef local{};          // origin-side buffer (nbi-get destination)
  SymRef remote{};         // target-side buffer
  std::uint64_t nbytes = 0;       // payload bytes actually moved
  std::uint64_t nelems = 0;       // strided flavours (8-byte elements)
  std::uint64_t target_stride = 1;
  std::vector<std::byte> src_bytes;  // snapshot for put flavours
};

struct Context {
  CtxId id = 0;
  CtxOptions opts = CtxOptions::Serialized;
  bool destroyed = false;

  std::mutex mu;  // guards queue and serializes delivery order
  std::deque<RmaOp> queue;
  std::atomic<std::uint64_t> pending{0};

  // Virtual-clock accounting, touched only by the owning PE's thread.
  double unquieted_cost = 0.0;   // quiet-only progress: cost parked for quiet
  double pipeline_ready = 0.0;   // async progress: when the wire drains
};

/// Internal message slot for one ordered PE pair within one team.  Used by
/// collectives, clock sync and other infrastructure.  Payload bytes travel
/// either inline (vector) or directly into symmetric memory both sides can
/// compute; the slot then only carries metadata.  Single writer (the `from`
/// PE), single reader (the `to` PE), flow controlled by posted/consumed.
struct MsgSlot {
  std::atomic<std::uint64_t> posted{0};
  std::atomic<std::uint64_t> consumed{0};
  double ts = 0.0;          // sender's virtual send time
  std::uint64_t tag = 0;    // consistency check across team members
  std::uint64_t bytes = 0;  // size charged by the cost model
  std::vector<std::byte> payload;
};

struct TeamSpec {
  TeamId id = TeamId::WorldTeam;
  std::vector<int> members;  // world ranks, ascending

  int size() const { return static_cast<int>(members.size()); }
  int index_of(int world_rank) const {
    for (int i = 0; i < size(); ++i)
      if (members[i] == world_rank) return i;
    return -1;
  }
};

/// Counters a test can read to see what a PE has been asked to do.
struct PeCounters {
  std::uint64_t puts_posted = 0;
  std::uint64_t gets_posted = 0;
  std::uint64_t quiets = 0;
  std::uint64_t fences = 0;
};

/// Handle each SPMD body receives.  All communication goes through here.
class Pe {
public:
  Pe(World& w, int rank);
  ~Pe();

  Pe(const Pe&) = delete;
  Pe& operator=(const Pe&) = delete;

  int rank() const { return rank_; }
  int npes() const;
  World& world() { return world_; }

  // --- clock ---------------------------------------------------------
  double now() const { return clock_.now(); }
  PeClock& clock() { return clock_; }
  /// Busy-wait (real clock) or jump (virtual clock) until now() >= t.
  void spin_until(double t);

  // --- symmetric heap (collective calls) -----------------------------
  SymRef sym_malloc(std::uint64_t nbytes);
  SymRef sym_align(std::uint64_t alignment, std::uint64_t nbytes);
  SymRef sym_calloc(std::uint64_t count, std::uint64_t size);
  SymRef sym_realloc(const SymRef& ref, std::uint64_t nbytes);
  void sym_free(const SymRef& ref);

  /// Raw local pointer to a symmetric region on any PE.  Test and
  /// infrastructure use; ordinary code goes through put/get.
  std::byte* resolve(const SymRef& ref, int pe);

  // --- one-sided RMA -------------------------------------------------
  void put(const SymRef& dst, const void* src, std::uint64_t nbytes, int pe,
           CtxId ctx = kDefaultCtx);
  void get(void* dst, const SymRef& src, std::uint64_t nbytes, int pe,
           CtxId ctx = kDefaultCtx);
  void iput(const SymRef& dst, const void* src, std::uint64_t dst_stride,
            std::uint64_t src_stride, std::uint64_t nelems, int pe,
            CtxId ctx = kDefaultCtx);
  void iget(void* dst, const SymRef& src, std::uint64_t dst_stride,
            std::uint64_t src_stride, std::uint64_t nelems, int pe,
            CtxId ctx = kDefaultCtx);
  void p(const SymRef& dst, std::int64_t value, int pe, CtxId ctx = kDefaultCtx);
  std::int64_t g(const SymRef& src, int pe, CtxId ctx = kDefaultCtx);
  void put_nbi(const SymRef& dst, const void* src, std::uint64_t nbytes, int pe,
               CtxId ctx = kDefaultCtx);
  void get_nbi(const SymRef& dst_local, const SymRef& src, std::uint64_t nbytes,
               int pe, CtxId ctx = kDefaultCtx);

  /// Convenience for symmetric-to-symmetric transfers.
  void put_sym(const SymRef& dst, const SymRef& src, std::uint64_t nbytes,
               int pe, CtxId ctx = kDefaultCtx);

  // --- ordering ------------------------------------------------------
  void quiet(CtxId ctx = kDefaultCtx);
  void fence(CtxId ctx = kDefaultCtx);
  void wait_until(const SymRef& word, CmpOp op, std::int64_t value);
  bool test(const SymRef& word, CmpOp op, std::int64_t value);

  // --- contexts ------------------------------------------------------
  CtxId ctx_create(CtxOptions opts);
  void ctx_destroy(CtxId ctx);
  std::uint64_t live_ctxs() const;

  // --- teams and collectives ----------------------------------------
  const TeamSpec& team(TeamId id) const;
  bool in_team(TeamId id) const;
  void sync(TeamId team);
  void barrier(TeamId team = TeamId::WorldTeam);
  void broadcast(TeamId team, int root_idx, const SymRef& dst,
                 const SymRef& src, std::uint64_t nbytes);
  void reduce_and(TeamId team, const SymRef& dst, const SymRef& src,
                  std::uint64_t nelems);
  void collect(TeamId team, const SymRef& dst, const SymRef& src,
               std::uint64_t my_nbytes);
  void fcollect(TeamId team, const SymRef& dst, const SymRef& src,
                std::uint64_t nbytes);
  void alltoall(TeamId team, const SymRef& dst, const SymRef& src,
                std::uint64_t nbytes_per_pe);
  void alltoalls(TeamId team, const SymRef& dst, const SymRef& src,
                 std::uint64_t dst_stride, std::uint64_t src_stride,
                 std::uint64_t nelems_per_pe);

  // --- distributed lock (word lives on PE 0) -------------------------
  void lock_set(const SymRef& word);
  void lock_clear(const SymRef& word);
  /// One acquisition attempt; true means the lock was busy.  On false the
  /// caller now holds the lock.
  bool lock_test(const SymRef& word);

  // --- infrastructure point-to-point (internal channel, not RMA) -----
  void infra_send(int to, std::uint64_t tag, const void* payload,
                  std::uint64_t nbytes);
  /// Blocks for the next infra message from `from`, copies the payload out
  /// and returns the sender's send timestamp.  Charges the cost model.
  double infra_recv(int from, std::uint64_t tag, void* payload,
                    std::uint64_t nbytes);

  // --- introspection -------------------------------------------------
  std::uint64_t pending_ops() const;  // over all live contexts
  std::uint64_t live_allocs() const;
  const PeCounters& counters() const { return counters_; }
  const WorldConfig& config() const;
  std::uint64_t deterministic_u64(std::uint64_t stream, std::uint64_t i) const;

private:
  friend class World;

  enum class RecvCharge { Edge, Serial, None };

  Context& ctx_ref(CtxId id, bool allow_destroyed = false);
  void post(RmaOp op, CtxId ctx, double post_charge, double wire_cost);
  /// Spin with abort checking; optionally keep delivery moving while waiting.
  void wait_pred(const std::function<bool()>& pred, bool help);
  bool help_delivery();
  void slot_post(TeamId team, int to, std::uint64_t tag, std::uint64_t bytes,
                 const void* payload, std::uint64_t payload_n,
                 const std::function<void()>& direct_write = {});
  double slot_take(TeamId team, int from, std::uint64_t tag, RecvCharge charge,
                   void* payload, std::uint64_t payload_n,
                   std::uint64_t* bytes_out = nullptr);
  void charge(double dt) { clock_.advance(dt); }

  World& world_;
  int rank_;
  PeClock clock_;
  mutable std::shared_mutex ctx_mu_;  // guards the vector, not the contexts
  std::vector<std::unique_ptr<Context>> ctxs_;
  std::uint64_t destroyed_ctxs_ = 0;
  PeCounters counters_{};
};

/// The embedded multi-PE world: one thread per PE plus, with the real clock
/// in async progress mode, one delivery thread per PE.  Construct, call
/// run() with the SPMD body (repeatable), destroy.
class World {
public:
  explicit World(WorldConfig cfg);
  ~World();

  World(const World&) = delete;
  World& operator=(const World&) = delete;

  /// Runs body(pe) on every PE and joins.  The first failure anywhere
  /// aborts the other PEs and is rethrown here.
  void run(const std::function<void(Pe&)>& body);

  const WorldConfig& config() const { return cfg_; }
  int npes() const { return cfg_.npes; }

  std::byte* heap_base(int pe) { return heaps_[pe].get(); }
  SymHeap& heap(int pe) { return *allocators_[pe]; }
  const TeamSpec& team(TeamId id) const {
    return id == TeamId::WorldTeam ? world_team_ : half_team_;
  }
  MsgSlot& slot(TeamId team, int from, int to);

  std::uint64_t pending_ops_total() const;
  std::uint64_t total_deliveries() const { return deliveries_.load(); }

  /// Test hook: virtual-clock skew installed on a PE before run().
  void set_virtual_skew(int pe, double s) { skews_[pe] = s; }

private:
  friend class Pe;

  void progress_thread(int pe);
  bool deliver_one(int pe);
  void deliver(RmaOp& op);
  void fail(std::exception_ptr e);
  bool aborted() const { return abort_.load(std::memory_order_relaxed); }

  WorldConfig cfg_;
  PeClock::steady::time_point epoch_;
  std::vector<std::unique_ptr<std::byte[]>> heaps_;
  std::vector<std::unique_ptr<SymHeap>> allocators_;
  std::vector<double> skews_;
  TeamSpec world_team_;
  TeamSpec half_team_;
  std::vector<std::unique_ptr<MsgSlot[]>> slots_;  // [team][from*npes+to]
  std::vector<Pe*> pes_;  // registered while run() executes
  std::atomic<int> registered_{0};
  std::atomic<bool> stop_progress_{false};
  std::atomic<bool> abort_{false};
  std::atomic<std::uint64_t> deliveries_{0};
  std::atomic<std::uint64_t> inflight_{0};  // queued ops across all PEs
  std::exception_ptr first_error_;
  std::mutex error_mu_;
  std::mutex run_mu_;
};

int ceil_log2(int n);

/// SplitMix64 finalizer; basis for every deterministic payload pattern.
std::uint64_t mix64(std::uint64_t x);

}  // namespace ska
