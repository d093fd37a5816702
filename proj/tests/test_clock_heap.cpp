#include "doctest.h"

#include "ska/clock.hpp"
#include "ska/errors.hpp"
#include "ska/runtime.hpp"
#include "ska/sym_heap.hpp"

using namespace ska;

namespace {
PeClock vclock() {
  return PeClock(ClockKind::Virtual, PeClock::steady::time_point{});
}
}  // namespace

TEST_CASE("virtual clock advances and never runs backwards") {
  PeClock c = vclock();
  CHECK(c.now() == 0.0);
  c.advance(1.5e-6);
  CHECK(c.now() == 1.5e-6);
  c.advance(0.5e-6);
  CHECK(c.now() == 1.5e-6 + 0.5e-6);

  c.jump_to(5e-6);
  CHECK(c.now() == 5e-6);
  c.jump_to(2e-6);  // backwards jumps are ignored
  CHECK(c.now() == 5e-6);
}

TEST_CASE("skew shifts readings but not the raw timeline") {
  PeClock c = vclock();
  c.set_skew(3e-6);
  CHECK(c.now() == 3e-6);
  CHECK(c.vtime() == 0.0);

  // jump_to speaks in now()-units, so the skew is subtracted out.
  c.jump_to(10e-6);
  CHECK(c.now() == 10e-6);
  CHECK(c.vtime() == 10e-6 - 3e-6);

  // jump_global speaks in raw-timeline units and ignores the skew.
  c.jump_global(9e-6);
  CHECK(c.vtime() == 9e-6);
  CHECK(c.now() == 9e-6 + 3e-6);
  c.jump_global(4e-6);
  CHECK(c.vtime() == 9e-6);
}

TEST_CASE("real clock is monotonic and immune to virtual charges") {
  PeClock c(ClockKind::Real, PeClock::steady::now());
  const double t0 = c.now();
  c.advance(100.0);
  c.jump_to(1000.0);
  const double t1 = c.now();
  CHECK(t1 >= t0);
  CHECK(t1 < 1.0);  // charges did not teleport the reading
}

TEST_CASE("transfer cost is affine in the byte count") {
  ClockConfig cfg;
  cfg.alpha = 1.5e-6;
  cfg.beta = 2e-9;
  CHECK(cfg.transfer_cost(0) == 1.5e-6);
  CHECK(cfg.transfer_cost(1000) == 1.5e-6 + 2e-9 * 1000.0);
  CHECK(cfg.transfer_cost(8) == 1.5e-6 + 2e-9 * 8.0);
}

TEST_CASE("ceil_log2 oracle") {
  const int want[][2] = {{1, 0}, {2, 1}, {3, 2}, {4, 2},  {5, 3},
                         {7, 3}, {8, 3}, {9, 4}, {15, 4}, {16, 4},
                         {17, 5}, {1024, 10}, {1025, 11}};
  for (auto [n, r] : want) CHECK(ceil_log2(n) == r);
}

TEST_CASE("heap placement is deterministic across replicas") {
  SymHeap a(1 << 16), b(1 << 16);
  for (int i = 0; i < 20; ++i) {
    const std::uint64_t n = 17 * (i + 1);
    SymRef ra = a.allocate(n), rb = b.allocate(n);
    CHECK(ra == rb);
    CHECK(a.resolve(ra) == b.resolve(rb));
    if (i % 3 == 0) {
      a.release(ra);
      b.release(rb);
    }
  }
  CHECK(a.live_blocks() == b.live_blocks());
  CHECK(a.live_bytes() == b.live_bytes());
}

TEST_CASE("alignment holds, power of two or not") {
  SymHeap h(1 << 16);
  SymRef a = h.allocate(10);  // default
  CHECK(h.resolve(a) % SymHeap::kMinAlign == 0);
  SymRef b = h.allocate(5, 64);
  CHECK(h.resolve(b) % 64 == 0);
  SymRef c = h.allocate(5, 24);
  CHECK(h.resolve(c) % 24 == 0);
  SymRef d = h.allocate(1, 1);
  CHECK_NOTHROW(h.resolve(d));
}

TEST_CASE("first fit reuses the earliest hole") {
  SymHeap h(1 << 16);
  SymRef a = h.allocate(128);
  SymRef b = h.allocate(128);
  const std::uint64_t a_at = h.resolve(a);
  h.release(a);
  SymRef c = h.allocate(64);
  CHECK(h.resolve(c) == a_at);
  h.release(b);
  h.release(c);
  CHECK(h.live_blocks() == 0);
  CHECK(h.live_bytes() == 0);
}

TEST_CASE("exhaustion and misuse raise fatal errors") {
  SymHeap h(256);
  CHECK_THROWS_AS(h.allocate(300), FatalError);
  SymRef a = h.allocate(64);
  CHECK_THROWS_AS(h.release(a.sub(8, 8)), FatalError);
  h.release(a);
  CHECK_THROWS_AS(h.release(a), FatalError);
  CHECK_THROWS_AS(h.resolve(a), FatalError);
}

TEST_CASE("resolve rejects out-of-bounds views") {
  SymHeap h(1 << 12);
  SymRef a = h.allocate(100);
  CHECK_NOTHROW(h.resolve(a.sub(90, 10)));
  CHECK_THROWS_AS(h.resolve(a.sub(90, 11)), FatalError);
  CHECK_THROWS_AS(h.resolve(SymRef{999, 0, 1}), FatalError);
  h.release(a);
}

TEST_CASE("reallocate moves the block and reports both placements") {
  SymHeap h(1 << 12);
  SymRef a = h.allocate(100);
  SymRef pad = h.allocate(8);  // stop in-place growth
  const std::uint64_t a_at = h.resolve(a);

  std::uint64_t old_region = 0, old_len = 0, new_region = 0;
  SymRef grown = h.reallocate(a, 200, &old_region, &old_len, &new_region);
  CHECK(old_region == a_at);
  CHECK(old_len == 100);
  CHECK(grown.len == 200);
  CHECK(h.resolve(grown) == new_region);
  CHECK_THROWS_AS(h.resolve(a), FatalError);  // old id is gone
  CHECK(h.live_blocks() == 2);
  CHECK(h.live_bytes() == 208);
  h.release(grown);
  h.release(pad);
}
