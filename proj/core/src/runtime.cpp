#include "ska/runtime.hpp"

#include <cstring>

namespace ska {

namespace {

inline void cpu_pause() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_ia32_pause();
#else
  std::this_thread::yield();
#endif
}

/// Scheduler-friendly wait: a few pauses, then yield every lap.  Everything
/// in this runtime spins through here so single-core hosts stay live.
template <class Pred>
void spin(Pred&& pred) {
  int lap = 0;
  while (!pred()) {
    if (++lap < 16) {
      cpu_pause();
    } else {
      std::this_thread::yield();
    }
  }
}

inline bool word_aligned(const void* p) {
  return (reinterpret_cast<std::uintptr_t>(p) & 7u) == 0;
}

/// Store with release semantics so a concurrent wait_until/test poll on the
/// same word observes the delivered value.  Non-word-sized or unaligned
/// payloads fall back to memcpy plus a release fence; flag words used with
/// wait_until are always 8 bytes and 8-aligned.
inline void deliver_bytes(std::byte* dst, const std::byte* src, std::uint64_t n) {
  if (n == 8 && word_aligned(dst)) {
    std::int64_t v;
    std::memcpy(&v, src, 8);
    std::atomic_ref<std::int64_t>(*reinterpret_cast<std::int64_t*>(dst))
        .store(v, std::memory_order_release);
  } else {
    std::memcpy(dst, src, n);
    std::atomic_thread_fence(std::memory_order_release);
  }
}

inline bool cmp_eval(CmpOp op, std::int64_t a, std::int64_t b) {
  switch (op) {
    case CmpOp::Eq: return a == b;
    case CmpOp::Ne: return a != b;
    case CmpOp::Gt: return a > b;
    case CmpOp::Le: return a <= b;
    case CmpOp::Lt: return a < b;
    case CmpOp::Ge: return a >= b;
  }
  return false;
}

constexpr double kBackoffInitial = 1e-6;
constexpr double kBackoffCap = 100e-6;

/// Real-time pause used by lock backoff; independent of the PE clock so the
/// virtual flavour still waits physically instead of jumping.
inline void real_pause(double seconds) {
  auto until = std::chrono::steady_clock::now() +
               std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                   std::chrono::duration<double>(seconds));
  while (std::chrono::steady_clock::now() < until) std::this_thread::yield();
}

}  // namespace

int ceil_log2(int n) {
  int r = 0;
  while ((1 << r) < n) ++r;
  return r;
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// ---------------------------------------------------------------------------
// World
// ---------------------------------------------------------------------------

World::World(WorldConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.npes < 1) throw FatalError("world needs at least one PE");
  epoch_ = PeClock::steady::now();
  heaps_.resize(cfg_.npes);
  allocators_.resize(cfg_.npes);
  skews_.assign(cfg_.npes, 0.0);
  for (int r = 0; r < cfg_.npes; ++r) {
    heaps_[r].reset(new std::byte[cfg_.heap_bytes]);
    allocators_[r] = std::make_unique<SymHeap>(cfg_.heap_bytes);
  }
  world_team_.id = TeamId::WorldTeam;
  half_team_.id = TeamId::HalfTeam;
  for (int r = 0; r < cfg_.npes; ++r) world_team_.members.push_back(r);
  int half = (cfg_.npes + 1) / 2;  // front half, PEs 0..ceil(n/2)-1
  for (int r = 0; r < half; ++r) half_team_.members.push_back(r);
  slots_.resize(2);
  for (auto& s : slots_)
    s = std::make_unique<MsgSlot[]>(static_cast<size_t>(cfg_.npes) * cfg_.npes);
  pes_.assign(cfg_.npes, nullptr);
}

World::~World() = default;

MsgSlot& World::slot(TeamId team, int from, int to) {
  auto& arr = slots_[team == TeamId::WorldTeam ? 0 : 1];
  return arr[static_cast<size_t>(from) * cfg_.npes + to];
}

std::uint64_t World::pending_ops_total() const {
  std::uint64_t total = 0;
  for (Pe* pe : pes_)
    if (pe) total += pe->pending_ops();
  return total;
}

void World::fail(std::exception_ptr e) {
  {
    std::lock_guard lk(error_mu_);
    if (!first_error_) first_error_ = e;
  }
  abort_.store(true, std::memory_order_relaxed);
}

void World::run(const std::function<void(Pe&)>& body) {
  std::lock_guard run_lock(run_mu_);
  abort_.store(false);
  stop_progress_.store(false);
  first_error_ = nullptr;
  registered_.store(0);

  std::vector<std::unique_ptr<Pe>> pes;
  pes.reserve(cfg_.npes);
  for (int r = 0; r < cfg_.npes; ++r) {
    pes.push_back(std::make_unique<Pe>(*this, r));
    pes_[r] = pes.back().get();
  }

  bool async_real = cfg_.progress == ProgressMode::Async &&
                    cfg_.clock.kind == ClockKind::Real;
  std::vector<std::thread> workers;
  std::atomic<bool> go{false};
  for (int r = 0; r < cfg_.npes; ++r) {
    workers.emplace_back([this, r, &pes, &body, &go] {
      spin([&] { return go.load(std::memory_order_acquire); });
      try {
        body(*pes[r]);
      } catch (...) {
        fail(std::current_exception());
      }
    });
  }
  std::vector<std::thread> progress;
  if (async_real) {
    for (int r = 0; r < cfg_.npes; ++r)
      progress.emplace_back([this, r] { progress_thread(r); });
  }
  go.store(true, std::memory_order_release);

  for (auto& t : workers) t.join();
  stop_progress_.store(true);
  for (auto& t : progress) t.join();
  for (auto& p : pes_) p = nullptr;
  pes.clear();

  if (first_error_) std::rethrow_exception(first_error_);
}

void World::progress_thread(int pe) {
  // Idle threads back off exponentially: PEs waiting on their own transfers
  // help with delivery anyway, so a drowsy progress thread costs little,
  // while eight of them waking every 20 us ruins single-core scheduling.
  int idle = 0;
  double nap = 20e-6;
  while (!stop_progress_.load(std::memory_order_relaxed)) {
    if (deliver_one(pe)) {
      idle = 0;
      nap = 20e-6;
    } else if (++idle < 64) {
      std::this_thread::yield();
    } else {
      real_pause(nap);
      nap = std::min(nap * 2.0, 2e-3);
    }
  }
}

bool World::deliver_one(int pe) {
  if (inflight_.load(std::memory_order_acquire) == 0) return false;
  Pe* p = pes_[pe];
  if (!p) return false;
  std::shared_lock ctx_lk(p->ctx_mu_);
  for (auto& cptr : p->ctxs_) {
    Context* c = cptr.get();
    if (!c) continue;
    if (c->pending.load(std::memory_order_relaxed) == 0) continue;
    std::unique_lock lk(c->mu, std::try_to_lock);
    if (!lk.owns_lock()) continue;  // someone else is on this context
    if (c->queue.empty()) continue;
    RmaOp op = std::move(c->queue.front());
    c->queue.pop_front();
    try {
      deliver(op);
    } catch (...) {
      c->pending.fetch_sub(1, std::memory_order_release);
      inflight_.fetch_sub(1, std::memory_order_release);
      fail(std::current_exception());
      return false;
    }
    c->pending.fetch_sub(1, std::memory_order_release);
    inflight_.fetch_sub(1, std::memory_order_release);
    deliveries_.fetch_add(1, std::memory_order_relaxed);
    return true;
  }
  return false;
}

void World::deliver(RmaOp& op) {
  switch (op.kind) {
    case RmaKind::Put:
    case RmaKind::PutNbi:
    case RmaKind::PElem: {
      std::uint64_t off = heap(op.target).resolve(op.remote);
      deliver_bytes(heap_base(op.target) + off, op.src_bytes.data(), op.nbytes);
      break;
    }
    case RmaKind::IPut: {
      std::uint64_t off = heap(op.target).resolve(op.remote);
      std::byte* base = heap_base(op.target) + off;
      for (std::uint64_t k = 0; k < op.nelems; ++k)
        std::memcpy(base + k * op.target_stride * 8,
                    op.src_bytes.data() + k * 8, 8);
      std::atomic_thread_fence(std::memory_order_release);
      break;
    }
    case RmaKind::GetNbi: {
      std::uint64_t soff = heap(op.target).resolve(op.remote);
      std::uint64_t doff = heap(op.origin).resolve(op.local);
      std::memcpy(heap_base(op.origin) + doff, heap_base(op.target) + soff,
                  op.nbytes);
      std::atomic_thread_fence(std::memory_order_release);
      break;
    }
    default:
      throw FatalError("blocking operation found in a delivery queue");
  }
}

// ---------------------------------------------------------------------------
// Pe: construction, clock, waiting
// ---------------------------------------------------------------------------

Pe::Pe(World& w, int rank) : world_(w), rank_(rank) {
  clock_ = PeClock(w.cfg_.clock.kind, w.epoch_);
  clock_.set_skew(w.skews_[rank]);
  auto def = std::make_unique<Context>();
  def->id = kDefaultCtx;
  ctxs_.push_back(std::move(def));
}

Pe::~Pe() = default;

int Pe::npes() const { return world_.cfg_.npes; }

const WorldConfig& Pe::config() const { return world_.cfg_; }

std::uint64_t Pe::deterministic_u64(std::uint64_t stream, std::uint64_t i) const {
  return mix64(world_.cfg_.seed ^ mix64(stream + 0x632be59bd9b4e019ull) ^
               mix64(i * 0xff51afd7ed558ccdull + stream));
}

void Pe::wait_pred(const std::function<bool()>& pred, bool help) {
  int lap = 0;
  while (!pred()) {
    if (world_.aborted())
      throw FatalError("aborted while waiting: another PE failed");
    if (help && help_delivery()) continue;
    if (++lap < 16) {
      cpu_pause();
    } else {
      std::this_thread::yield();
    }
  }
}

bool Pe::help_delivery() {
  // A waiting PE standing in for the NIC is exactly the asynchronous
  // progress that quiet-only mode promises not to have, so helping is
  // confined to async mode.
  if (world_.cfg_.progress != ProgressMode::Async) return false;
  if (world_.inflight_.load(std::memory_order_acquire) == 0) return false;
  for (int r = 0; r < npes(); ++r)
    if (world_.deliver_one(r)) return true;
  return false;
}

void Pe::spin_until(double t) {
  if (clock_.kind() == ClockKind::Virtual) {
    clock_.jump_to(t);
    return;
  }
  wait_pred([&] { return now() >= t; }, /*help=*/true);
}

// ---------------------------------------------------------------------------
// Pe: symmetric heap
// ---------------------------------------------------------------------------

SymRef Pe::sym_malloc(std::uint64_t nbytes) {
  SymRef r = world_.heap(rank_).allocate(nbytes);
  barrier(TeamId::WorldTeam);
  return r;
}

SymRef Pe::sym_align(std::uint64_t alignment, std::uint64_t nbytes) {
  if (alignment == 0) throw FatalError("sym_align: zero alignment");
  SymRef r = world_.heap(rank_).allocate(
      nbytes, std::max(alignment, SymHeap::kMinAlign));
  barrier(TeamId::WorldTeam);
  return r;
}

SymRef Pe::sym_calloc(std::uint64_t count, std::uint64_t size) {
  SymRef r = world_.heap(rank_).allocate(count * size);
  std::memset(resolve(r, rank_), 0, count * size);
  barrier(TeamId::WorldTeam);
  return r;
}

SymRef Pe::sym_realloc(const SymRef& ref, std::uint64_t nbytes) {
  std::uint64_t old_region = 0, old_len = 0, new_region = 0;
  SymRef out =
      world_.heap(rank_).reallocate(ref, nbytes, &old_region, &old_len,
                                    &new_region);
  std::byte* base = world_.heap_base(rank_);
  std::memmove(base + new_region, base + old_region,
               std::min(old_len, nbytes));
  barrier(TeamId::WorldTeam);
  return out;
}

void Pe::sym_free(const SymRef& ref) {
  world_.heap(rank_).release(ref);
  barrier(TeamId::WorldTeam);
}

std::byte* Pe::resolve(const SymRef& ref, int pe) {
  if (pe < 0 || pe >= npes())
    throw FatalError("PE index out of range: " + std::to_string(pe));
  return world_.heap_base(pe) + world_.heap(pe).resolve(ref);
}

std::uint64_t Pe::live_allocs() const { return world_.heap(rank_).live_blocks(); }

// ---------------------------------------------------------------------------
// Pe: contexts
// ---------------------------------------------------------------------------

Context& Pe::ctx_ref(CtxId id, bool allow_destroyed) {
  std::shared_lock lk(ctx_mu_);
  if (id >= ctxs_.size() || !ctxs_[id])
    throw FatalError("unknown communication context " + std::to_string(id));
  Context& c = *ctxs_[id];
  if (c.destroyed && !allow_destroyed)
    throw FatalError("use of destroyed communication context " +
                     std::to_string(id));
  return c;
}

CtxId Pe::ctx_create(CtxOptions opts) {
  auto c = std::make_unique<Context>();
  c->opts = opts;
  std::unique_lock lk(ctx_mu_);
  c->id = static_cast<CtxId>(ctxs_.size());
  CtxId id = c->id;
  ctxs_.push_back(std::move(c));
  return id;
}

void Pe::ctx_destroy(CtxId id) {
  if (id == kDefaultCtx)
    throw FatalError("the default context cannot be destroyed");
  quiet(id);  // a context quiesces before it goes away
  std::unique_lock lk(ctx_mu_);
  if (id >= ctxs_.size() || !ctxs_[id] || ctxs_[id]->destroyed)
    throw FatalError("double destroy of communication context " +
                     std::to_string(id));
  ctxs_[id]->destroyed = true;
  ++destroyed_ctxs_;
}

std::uint64_t Pe::live_ctxs() const {
  std::shared_lock lk(ctx_mu_);
  return ctxs_.size() - 1 - destroyed_ctxs_;
}

std::uint64_t Pe::pending_ops() const {
  std::shared_lock lk(ctx_mu_);
  std::uint64_t total = 0;
  for (auto& c : ctxs_)
    if (c) total += c->pending.load(std::memory_order_acquire);
  return total;
}

// ---------------------------------------------------------------------------
// Pe: RMA
// ---------------------------------------------------------------------------

void Pe::post(RmaOp op, CtxId ctx, double post_charge, double wire_cost) {
  Context& c = ctx_ref(ctx);
  charge(post_charge);
  if (clock_.kind() == ClockKind::Virtual) {
    if (world_.cfg_.progress == ProgressMode::QuietOnly) {
      c.unquieted_cost += wire_cost;
    } else {
      double head = std::max(now(), c.pipeline_ready);
      c.pipeline_ready = head + wire_cost;
    }
  }
  {
    std::lock_guard lk(c.mu);
    c.queue.push_back(std::move(op));
  }
  c.pending.fetch_add(1, std::memory_order_release);
  world_.inflight_.fetch_add(1, std::memory_order_release);
}

void Pe::put(const SymRef& dst, const void* src, std::uint64_t nbytes, int pe,
             CtxId ctx) {
  if (pe < 0 || pe >= npes()) throw FatalError("put: PE out of range");
  ++counters_.puts_posted;
  RmaOp op;
  op.kind = RmaKind::Put;
  op.origin = rank_;
  op.target = pe;
  op.remote = dst;
  op.nbytes = nbytes;
  op.src_bytes.resize(nbytes);
  std::memcpy(op.src_bytes.data(), src, nbytes);
  post(std::move(op), ctx, 0.0, world_.cfg_.clock.transfer_cost(nbytes));
}

void Pe::put_sym(const SymRef& dst, const SymRef& src, std::uint64_t nbytes,
                 int pe, CtxId ctx) {
  put(dst, resolve(src, rank_), nbytes, pe, ctx);
}

void Pe::put_nbi(const SymRef& dst, const void* src, std::uint64_t nbytes,
                 int pe, CtxId ctx) {
  if (pe < 0 || pe >= npes()) throw FatalError("put_nbi: PE out of range");
  ++counters_.puts_posted;
  RmaOp op;
  op.kind = RmaKind::PutNbi;
  op.origin = rank_;
  op.target = pe;
  op.remote = dst;
  op.nbytes = nbytes;
  op.src_bytes.resize(nbytes);
  std::memcpy(op.src_bytes.data(), src, nbytes);
  post(std::move(op), ctx, world_.cfg_.clock.gamma,
       world_.cfg_.clock.transfer_cost(nbytes));
}

void Pe::iput(const SymRef& dst, const void* src, std::uint64_t dst_stride,
              std::uint64_t src_stride, std::uint64_t nelems, int pe,
              CtxId ctx) {
  if (pe < 0 || pe >= npes()) throw FatalError("iput: PE out of range");
  if (dst_stride == 0 || src_stride == 0)
    throw FatalError("iput: zero stride");
  ++counters_.puts_posted;
  RmaOp op;
  op.kind = RmaKind::IPut;
  op.origin = rank_;
  op.target = pe;
  op.remote = dst;
  op.nelems = nelems;
  op.target_stride = dst_stride;
  op.nbytes = nelems * 8;
  op.src_bytes.resize(nelems * 8);
  for (std::uint64_t k = 0; k < nelems; ++k)
    std::memcpy(op.src_bytes.data() + k * 8,
                static_cast<const std::byte*>(src) + k * src_stride * 8, 8);
  post(std::move(op), ctx, 0.0, world_.cfg_.clock.transfer_cost(nelems * 8));
}

void Pe::p(const SymRef& dst, std::int64_t value, int pe, CtxId ctx) {
  if (pe < 0 || pe >= npes()) throw FatalError("p: PE out of range");
  ++counters_.puts_posted;
  RmaOp op;
  op.kind = RmaKind::PElem;
  op.origin = rank_;
  op.target = pe;
  op.remote = dst;
  op.nbytes = 8;
  op.src_bytes.resize(8);
  std::memcpy(op.src_bytes.data(), &value, 8);
  post(std::move(op), ctx, 0.0, world_.cfg_.clock.transfer_cost(8));
}

void Pe::get(void* dst, const SymRef& src, std::uint64_t nbytes, int pe,
             CtxId ctx) {
  if (pe < 0 || pe >= npes()) throw FatalError("get: PE out of range");
  ctx_ref(ctx);  // validates the context even though gets bypass the queue
  ++counters_.gets_posted;
  charge(world_.cfg_.clock.transfer_cost(nbytes));
  std::memcpy(dst, resolve(src, pe), nbytes);
}

void Pe::iget(void* dst, const SymRef& src, std::uint64_t dst_stride,
              std::uint64_t src_stride, std::uint64_t nelems, int pe,
              CtxId ctx) {
  if (pe < 0 || pe >= npes()) throw FatalError("iget: PE out of range");
  if (dst_stride == 0 || src_stride == 0)
    throw FatalError("iget: zero stride");
  ctx_ref(ctx);
  ++counters_.gets_posted;
  charge(world_.cfg_.clock.transfer_cost(nelems * 8));
  const std::byte* base = resolve(src, pe);
  for (std::uint64_t k = 0; k < nelems; ++k)
    std::memcpy(static_cast<std::byte*>(dst) + k * dst_stride * 8,
                base + k * src_stride * 8, 8);
}

std::int64_t Pe::g(const SymRef& src, int pe, CtxId ctx) {
  if (pe < 0 || pe >= npes()) throw FatalError("g: PE out of range");
  ctx_ref(ctx);
  ++counters_.gets_posted;
  charge(world_.cfg_.clock.transfer_cost(8));
  std::int64_t v;
  std::memcpy(&v, resolve(src, pe), 8);
  return v;
}

void Pe::get_nbi(const SymRef& dst_local, const SymRef& src,
                 std::uint64_t nbytes, int pe, CtxId ctx) {
  if (pe < 0 || pe >= npes()) throw FatalError("get_nbi: PE out of range");
  ++counters_.gets_posted;
  RmaOp op;
  op.kind = RmaKind::GetNbi;
  op.origin = rank_;
  op.target = pe;
  op.local = dst_local;
  op.remote = src;
  op.nbytes = nbytes;
  post(std::move(op), ctx, world_.cfg_.clock.gamma,
       world_.cfg_.clock.transfer_cost(nbytes));
}

// ---------------------------------------------------------------------------
// Pe: ordering
// ---------------------------------------------------------------------------

void Pe::quiet(CtxId ctx) {
  Context& c = ctx_ref(ctx, /*allow_destroyed=*/true);
  ++counters_.quiets;
  // Physical completion: drain the queue, helping whoever else delivers.
  wait_pred(
      [&] {
        while (true) {
          std::unique_lock lk(c.mu);
          if (c.queue.empty()) break;
          RmaOp op = std::move(c.queue.front());
          c.queue.pop_front();
          world_.deliver(op);
          c.pending.fetch_sub(1, std::memory_order_release);
          world_.inflight_.fetch_sub(1, std::memory_order_release);
          world_.deliveries_.fetch_add(1, std::memory_order_relaxed);
        }
        return c.pending.load(std::memory_order_acquire) == 0;
      },
      /*help=*/false);
  // Virtual cost: parked transfer charges plus the empty-quiet constant.
  if (clock_.kind() == ClockKind::Virtual) {
    if (world_.cfg_.progress == ProgressMode::QuietOnly) {
      charge(c.unquieted_cost);
      c.unquieted_cost = 0.0;
    } else {
      clock_.jump_to(c.pipeline_ready);
    }
    charge(world_.cfg_.clock.quiet_cost);
  }
}

void Pe::fence(CtxId ctx) {
  ctx_ref(ctx);
  ++counters_.fences;
  // Delivery is FIFO per context, which is stronger than the per-target
  // ordering a fence asks for, so the marker needs no queue manipulation.
}

void Pe::wait_until(const SymRef& word, CmpOp op, std::int64_t value) {
  std::byte* ptr = resolve(word, rank_);
  if (!word_aligned(ptr))
    throw FatalError("wait_until needs an 8-byte aligned word");
  auto* w = reinterpret_cast<std::int64_t*>(ptr);
  wait_pred(
      [&] {
        std::int64_t v =
            std::atomic_ref<std::int64_t>(*w).load(std::memory_order_acquire);
        return cmp_eval(op, v, value);
      },
      /*help=*/true);
}

bool Pe::test(const SymRef& word, CmpOp op, std::int64_t value) {
  std::byte* ptr = resolve(word, rank_);
  if (!word_aligned(ptr))
    throw FatalError("test needs an 8-byte aligned word");
  help_delivery();
  std::int64_t v = std::atomic_ref<std::int64_t>(
                        *reinterpret_cast<std::int64_t*>(ptr))
                        .load(std::memory_order_acquire);
  return cmp_eval(op, v, value);
}

// ---------------------------------------------------------------------------
// Pe: distributed lock (test-and-set word on PE 0 with bounded backoff)
// ---------------------------------------------------------------------------

void Pe::lock_set(const SymRef& word) {
  std::byte* ptr = resolve(word, 0);
  if (!word_aligned(ptr)) throw FatalError("lock word must be 8-byte aligned");
  std::atomic_ref<std::int64_t> w(*reinterpret_cast<std::int64_t*>(ptr));
  double backoff = kBackoffInitial;
  while (true) {
    std::int64_t expected = 0;
    if (w.compare_exchange_strong(expected, rank_ + 1,
                                  std::memory_order_acq_rel,
                                  std::memory_order_acquire))
      return;
    if (world_.aborted())
      throw FatalError("aborted while locking: another PE failed");
    real_pause(backoff);
    backoff = std::min(backoff * 2.0, kBackoffCap);
  }
}

void Pe::lock_clear(const SymRef& word) {
  std::byte* ptr = resolve(word, 0);
  std::atomic_ref<std::int64_t> w(*reinterpret_cast<std::int64_t*>(ptr));
  std::int64_t holder = w.load(std::memory_order_acquire);
  if (holder != rank_ + 1)
    throw FatalError("lock_clear by PE " + std::to_string(rank_) +
                     " but the lock holder token is " + std::to_string(holder));
  w.store(0, std::memory_order_release);
}

bool Pe::lock_test(const SymRef& word) {
  std::byte* ptr = resolve(word, 0);
  if (!word_aligned(ptr)) throw FatalError("lock word must be 8-byte aligned");
  std::atomic_ref<std::int64_t> w(*reinterpret_cast<std::int64_t*>(ptr));
  std::int64_t expected = 0;
  return !w.compare_exchange_strong(expected, rank_ + 1,
                                    std::memory_order_acq_rel,
                                    std::memory_order_acquire);
}

}  // namespace ska
