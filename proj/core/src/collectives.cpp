#include <algorithm>
#include <cstring>

#include "ska/runtime.hpp"

namespace ska {

namespace {

inline void cpu_pause() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_ia32_pause();
#else
  std::this_thread::yield();
#endif
}

// Op codes folded into collective tags so mismatched calls across PEs are
// detected instead of silently exchanging the wrong payloads.
enum : std::uint64_t {
  kTagSync = 1,
  kTagBcast,
  kTagReduceUp,
  kTagCollectSize,
  kTagCollectData,
  kTagFcollect,
  kTagAlltoall,
  kTagAlltoallS,
  kTagInfraBase = 1u << 16,
};

std::uint64_t coll_tag(std::uint64_t code, std::uint64_t a, std::uint64_t b) {
  return mix64(code ^ mix64(a + 0x6a09e667f3bcc909ull) ^
               mix64(b + 0x3c6ef372fe94f82bull));
}

}  // namespace

// ---------------------------------------------------------------------------
// Message slots
// ---------------------------------------------------------------------------

void Pe::slot_post(TeamId team, int to, std::uint64_t tag, std::uint64_t bytes,
                   const void* payload, std::uint64_t payload_n,
                   const std::function<void()>& direct_write) {
  MsgSlot& s = world_.slot(team, rank_, to);
  // Depth-one flow control: wait for the previous message to be consumed.
  wait_pred(
      [&] {
        return s.consumed.load(std::memory_order_acquire) ==
               s.posted.load(std::memory_order_relaxed);
      },
      /*help=*/true);
  if (direct_write) direct_write();
  s.ts = clock_.kind() == ClockKind::Virtual ? clock_.vtime() : now();
  s.tag = tag;
  s.bytes = bytes;
  s.payload.resize(payload_n);
  if (payload_n) std::memcpy(s.payload.data(), payload, payload_n);
  s.posted.fetch_add(1, std::memory_order_release);
}

double Pe::slot_take(TeamId team, int from, std::uint64_t tag,
                     RecvCharge charge_kind, void* payload,
                     std::uint64_t payload_n, std::uint64_t* bytes_out) {
  MsgSlot& s = world_.slot(team, from, rank_);
  wait_pred(
      [&] {
        return s.posted.load(std::memory_order_acquire) >
               s.consumed.load(std::memory_order_relaxed);
      },
      /*help=*/true);
  if (s.tag != tag)
    throw FatalError("mismatched collective: PE " + std::to_string(rank_) +
                     " expected op tag " + std::to_string(tag) + " but PE " +
                     std::to_string(from) + " sent " + std::to_string(s.tag));
  double ts = s.ts;
  std::uint64_t bytes = s.bytes;
  if (payload_n) {
    if (s.payload.size() < payload_n)
      throw FatalError("collective payload shorter than expected");
    std::memcpy(payload, s.payload.data(), payload_n);
  }
  if (bytes_out) *bytes_out = bytes;
  s.consumed.fetch_add(1, std::memory_order_release);
  switch (charge_kind) {
    case RecvCharge::Edge:
      clock_.jump_global(ts + world_.cfg_.clock.transfer_cost(bytes));
      break;
    case RecvCharge::Serial:
      clock_.jump_global(ts);
      charge(world_.cfg_.clock.transfer_cost(bytes));
      break;
    case RecvCharge::None:
      break;
  }
  return ts;
}

void Pe::infra_send(int to, std::uint64_t tag, const void* payload,
                    std::uint64_t nbytes) {
  slot_post(TeamId::WorldTeam, to, kTagInfraBase + tag, nbytes, payload,
            nbytes);
}

double Pe::infra_recv(int from, std::uint64_t tag, void* payload,
                      std::uint64_t nbytes) {
  return slot_take(TeamId::WorldTeam, from, kTagInfraBase + tag,
                   RecvCharge::Edge, payload, nbytes);
}

// ---------------------------------------------------------------------------
// Teams
// ---------------------------------------------------------------------------

const TeamSpec& Pe::team(TeamId id) const { return world_.team(id); }

bool Pe::in_team(TeamId id) const { return team(id).index_of(rank_) >= 0; }

// ---------------------------------------------------------------------------
// Synchronization
// ---------------------------------------------------------------------------

/// Dissemination rounds.  The payload is a running maximum of the entry
/// times seen so far, so after ceil(log2 m) rounds every member knows the
/// latest entry time; everyone then leaves at that time plus one fixed
/// per-round charge, which gives a single well-defined exit instant.
void Pe::sync(TeamId team_id) {
  const TeamSpec& t = team(team_id);
  int idx = t.index_of(rank_);
  if (idx < 0) throw FatalError("sync on a team this PE is not part of");
  int m = t.size();
  int rounds = ceil_log2(m);
  std::uint64_t tag0 = coll_tag(kTagSync, static_cast<std::uint64_t>(m), 0);
  double fold = now();
  for (int k = 0; k < rounds; ++k) {
    int dist = 1 << k;
    int to = t.members[(idx + dist) % m];
    int from = t.members[(idx - dist + m) % m];
    std::uint64_t tag = tag0 + static_cast<std::uint64_t>(k);
    slot_post(team_id, to, tag, 8, &fold, sizeof fold);
    double incoming = 0.0;
    slot_take(team_id, from, tag, RecvCharge::None, &incoming,
              sizeof incoming);
    fold = std::max(fold, incoming);
  }
  double c8 = world_.cfg_.clock.transfer_cost(8);
  clock_.jump_to(fold + rounds * c8);
}

void Pe::barrier(TeamId team_id) {
  quiet(kDefaultCtx);
  sync(team_id);
}

// ---------------------------------------------------------------------------
// Broadcast (binomial tree over ranks relative to the root)
// ---------------------------------------------------------------------------

void Pe::broadcast(TeamId team_id, int root_idx, const SymRef& dst,
                   const SymRef& src, std::uint64_t nbytes) {
  const TeamSpec& t = team(team_id);
  int idx = t.index_of(rank_);
  if (idx < 0) throw FatalError("broadcast on a team this PE is not part of");
  int m = t.size();
  if (root_idx < 0 || root_idx >= m)
    throw FatalError("broadcast root out of range");
  if (m == 1) return;
  std::uint64_t tag =
      coll_tag(kTagBcast, nbytes, static_cast<std::uint64_t>(root_idx));
  int rel = (idx - root_idx + m) % m;

  unsigned mask = 1;
  while (static_cast<int>(mask) < m) {
    if (rel & mask) {
      int from_rel = rel - static_cast<int>(mask);
      int from = t.members[(from_rel + root_idx) % m];
      slot_take(team_id, from, tag, RecvCharge::Edge, nullptr, 0);
      break;
    }
    mask <<= 1;
  }
  mask >>= 1;
  const SymRef& my_data = rel == 0 ? src : dst;
  while (mask > 0) {
    if (rel + static_cast<int>(mask) < m) {
      int to_rel = rel + static_cast<int>(mask);
      int to = t.members[(to_rel + root_idx) % m];
      std::byte* mine = resolve(my_data, rank_);
      slot_post(team_id, to, tag, nbytes, nullptr, 0, [&] {
        std::memcpy(resolve(dst, to), mine, nbytes);
      });
    }
    mask >>= 1;
  }
}

// ---------------------------------------------------------------------------
// AND-reduction (binomial gather to team index 0, then broadcast)
// ---------------------------------------------------------------------------

void Pe::reduce_and(TeamId team_id, const SymRef& dst, const SymRef& src,
                    std::uint64_t nelems) {
  const TeamSpec& t = team(team_id);
  int idx = t.index_of(rank_);
  if (idx < 0) throw FatalError("reduce on a team this PE is not part of");
  int m = t.size();
  std::uint64_t nbytes = nelems * 8;
  std::uint64_t tag = coll_tag(kTagReduceUp, nelems, 0);

  std::vector<std::int64_t> acc(nelems), incoming(nelems);
  std::memcpy(acc.data(), resolve(src, rank_), nbytes);

  unsigned mask = 1;
  while (static_cast<int>(mask) < m) {
    if (idx & mask) {
      int to = t.members[idx - static_cast<int>(mask)];
      slot_post(team_id, to, tag, nbytes, acc.data(), nbytes);
      break;
    }
    if (idx + static_cast<int>(mask) < m) {
      int from = t.members[idx + static_cast<int>(mask)];
      slot_take(team_id, from, tag, RecvCharge::Edge, incoming.data(), nbytes);
      for (std::uint64_t i = 0; i < nelems; ++i) acc[i] &= incoming[i];
    }
    mask <<= 1;
  }
  if (idx == 0) std::memcpy(resolve(dst, rank_), acc.data(), nbytes);
  broadcast(team_id, 0, dst, dst, nbytes);
}

// ---------------------------------------------------------------------------
// Gather-to-all family.  Data lands by direct writes into each receiver's
// buffer; the receiver then charges one message cost per peer in ascending
// team order, which is what a single NIC draining n-1 arrivals would do.
// ---------------------------------------------------------------------------

void Pe::collect(TeamId team_id, const SymRef& dst, const SymRef& src,
                 std::uint64_t my_nbytes) {
  const TeamSpec& t = team(team_id);
  int idx = t.index_of(rank_);
  if (idx < 0) throw FatalError("collect on a team this PE is not part of");
  int m = t.size();
  std::uint64_t size_tag = coll_tag(kTagCollectSize, 0, 0);

  // Round 1: everyone learns everyone's contribution size.
  std::vector<std::uint64_t> sizes(m, 0);
  sizes[idx] = my_nbytes;
  for (int j = 0; j < m; ++j)
    if (j != idx)
      slot_post(team_id, t.members[j], size_tag, 8, &my_nbytes,
                sizeof my_nbytes);
  for (int j = 0; j < m; ++j)
    if (j != idx)
      slot_take(team_id, t.members[j], size_tag, RecvCharge::Serial, &sizes[j],
                sizeof sizes[j]);

  std::vector<std::uint64_t> offset(m + 1, 0);
  for (int j = 0; j < m; ++j) offset[j + 1] = offset[j] + sizes[j];
  std::uint64_t data_tag = coll_tag(kTagCollectData, offset[m], 0);

  // Round 2: contributions go straight to their prefix offsets.
  std::byte* mine = resolve(src, rank_);
  SymRef my_span = dst.sub(offset[idx], my_nbytes);
  std::memcpy(resolve(my_span, rank_), mine, my_nbytes);
  for (int j = 0; j < m; ++j) {
    if (j == idx) continue;
    int to = t.members[j];
    slot_post(team_id, to, data_tag, my_nbytes, nullptr, 0, [&] {
      std::memcpy(resolve(my_span, to), mine, my_nbytes);
    });
  }
  for (int j = 0; j < m; ++j)
    if (j != idx)
      slot_take(team_id, t.members[j], data_tag, RecvCharge::Serial, nullptr,
                0);
}

void Pe::fcollect(TeamId team_id, const SymRef& dst, const SymRef& src,
                  std::uint64_t nbytes) {
  const TeamSpec& t = team(team_id);
  int idx = t.index_of(rank_);
  if (idx < 0) throw FatalError("fcollect on a team this PE is not part of");
  int m = t.size();
  std::uint64_t tag = coll_tag(kTagFcollect, nbytes, 0);

  std::byte* mine = resolve(src, rank_);
  SymRef my_span = dst.sub(static_cast<std::uint64_t>(idx) * nbytes, nbytes);
  std::memcpy(resolve(my_span, rank_), mine, nbytes);
  for (int j = 0; j < m; ++j) {
    if (j == idx) continue;
    int to = t.members[j];
    slot_post(team_id, to, tag, nbytes, nullptr, 0, [&] {
      std::memcpy(resolve(my_span, to), mine, nbytes);
    });
  }
  for (int j = 0; j < m; ++j)
    if (j != idx)
      slot_take(team_id, t.members[j], tag, RecvCharge::Serial, nullptr, 0);
}

void Pe::alltoall(TeamId team_id, const SymRef& dst, const SymRef& src,
                  std::uint64_t nbytes_per_pe) {
  const TeamSpec& t = team(team_id);
  int idx = t.index_of(rank_);
  if (idx < 0) throw FatalError("alltoall on a team this PE is not part of");
  int m = t.size();
  std::uint64_t tag = coll_tag(kTagAlltoall, nbytes_per_pe, 0);

  std::memcpy(
      resolve(dst.sub(static_cast<std::uint64_t>(idx) * nbytes_per_pe,
                      nbytes_per_pe),
              rank_),
      resolve(src.sub(static_cast<std::uint64_t>(idx) * nbytes_per_pe,
                      nbytes_per_pe),
              rank_),
      nbytes_per_pe);
  for (int j = 0; j < m; ++j) {
    if (j == idx) continue;
    int to = t.members[j];
    // Block j of my source becomes block idx of j's destination.
    std::byte* block =
        resolve(src.sub(static_cast<std::uint64_t>(j) * nbytes_per_pe,
                        nbytes_per_pe),
                rank_);
    SymRef their_span = dst.sub(static_cast<std::uint64_t>(idx) * nbytes_per_pe,
                                nbytes_per_pe);
    slot_post(team_id, to, tag, nbytes_per_pe, nullptr, 0, [&] {
      std::memcpy(resolve(their_span, to), block, nbytes_per_pe);
    });
  }
  for (int j = 0; j < m; ++j)
    if (j != idx)
      slot_take(team_id, t.members[j], tag, RecvCharge::Serial, nullptr, 0);
}

void Pe::alltoalls(TeamId team_id, const SymRef& dst, const SymRef& src,
                   std::uint64_t dst_stride, std::uint64_t src_stride,
                   std::uint64_t nelems_per_pe) {
  const TeamSpec& t = team(team_id);
  int idx = t.index_of(rank_);
  if (idx < 0) throw FatalError("alltoalls on a team this PE is not part of");
  if (dst_stride == 0 || src_stride == 0)
    throw FatalError("alltoalls: zero stride");
  int m = t.size();
  std::uint64_t ne = nelems_per_pe;
  std::uint64_t need_dst =
      ne == 0 ? 0 : ((static_cast<std::uint64_t>(m - 1) * ne + ne - 1) *
                         dst_stride * 8 + 8);
  std::uint64_t need_src =
      ne == 0 ? 0 : ((static_cast<std::uint64_t>(m - 1) * ne + ne - 1) *
                         src_stride * 8 + 8);
  if (need_dst > dst.len)
    throw FatalError("alltoalls: strided destination exceeds its window");
  if (need_src > src.len)
    throw FatalError("alltoalls: strided source exceeds its window");
  std::uint64_t tag = coll_tag(kTagAlltoallS, ne, dst_stride * 131 + src_stride);

  auto scatter_to = [&](int dst_idx, std::byte* dst_base) {
    // Element k of the block for dst_idx sits at (dst_idx*ne+k)*src_stride
    // in my source and lands at (idx*ne+k)*dst_stride in their destination.
    std::byte* src_base = resolve(src, rank_);
    for (std::uint64_t k = 0; k < ne; ++k)
      std::memcpy(
          dst_base + (static_cast<std::uint64_t>(idx) * ne + k) * dst_stride * 8,
          src_base + (static_cast<std::uint64_t>(dst_idx) * ne + k) *
                         src_stride * 8,
          8);
  };

  scatter_to(idx, resolve(dst, rank_));
  for (int j = 0; j < m; ++j) {
    if (j == idx) continue;
    int to = t.members[j];
    slot_post(team_id, to, tag, ne * 8, nullptr, 0,
              [&] { scatter_to(j, resolve(dst, to)); });
  }
  for (int j = 0; j < m; ++j)
    if (j != idx)
      slot_take(team_id, t.members[j], tag, RecvCharge::Serial, nullptr, 0);
}

}  // namespace ska
