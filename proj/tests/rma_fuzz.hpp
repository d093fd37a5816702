#pragma once

// Randomized RMA cross-check.  Every rank replays the same deterministic op
// stream against a private byte-level model of all symmetric regions; one
// origin rank per batch actually issues the operations.  Put-type traffic is
// committed with quiet + barrier before the get phase reads it back, so the
// model is exact regardless of delivery timing.

#include <cstdint>
#include <cstring>
#include <random>
#include <vector>

#include "ska/runtime.hpp"

namespace ska_test {

struct FuzzConfig {
  std::uint64_t seed = 1;
  int batches = 16;
  int puts_per_batch = 32;   // get phase issues half as many
  std::uint64_t region_bytes = 1 << 16;
  bool use_extra_ctx = false;
};

struct FuzzResult {
  std::uint64_t ops = 0;         // modeled on every rank, so identical
  std::uint64_t mismatches = 0;  // verified only on the issuing rank
};

namespace fuzz_detail {

inline std::uint64_t draw(std::mt19937_64& rng, std::uint64_t lo,
                          std::uint64_t hi) {
  return lo + rng() % (hi - lo + 1);
}

}  // namespace fuzz_detail

inline FuzzResult run_rma_fuzz(ska::Pe& pe, const FuzzConfig& fc) {
  using fuzz_detail::draw;
  const int npes = pe.npes();
  const std::uint64_t R = fc.region_bytes;

  ska::SymRef region = pe.sym_calloc(R, 1);
  ska::SymRef land = pe.sym_malloc(1 << 16);  // get_nbi landing zone
  ska::CtxId extra = ska::kDefaultCtx;
  if (fc.use_extra_ctx) extra = pe.ctx_create(ska::CtxOptions::Private);

  // One model region per PE, kept in lockstep on every rank.
  std::vector<std::vector<std::uint8_t>> model(
      npes, std::vector<std::uint8_t>(R, 0));

  std::mt19937_64 rng(fc.seed);
  FuzzResult out;

  struct PendingGet {
    std::uint64_t land_off, src_off, nbytes;
    int src_pe;
  };
  std::vector<std::uint64_t> payload;
  std::vector<std::uint8_t> scratch;

  for (int batch = 0; batch < fc.batches; ++batch) {
    const int origin = batch % npes;
    const bool me = pe.rank() == origin;

    // --- put phase --------------------------------------------------
    for (int j = 0; j < fc.puts_per_batch; ++j) {
      if (draw(rng, 0, 15) == 15) {  // sprinkle ordering calls
        if (me) (rng() & 1) ? pe.fence(extra) : pe.quiet(extra);
        else rng();
        continue;
      }
      const int kind = j < 4 ? j : static_cast<int>(draw(rng, 0, 3));
      const int target = static_cast<int>(draw(rng, 0, npes - 1));
      // With two contexts, each gets its own half of the region.
      // Overlapping stores then always share a context, whose in-order
      // delivery matches the model's program order; across contexts the
      // winner of an overlap would be timing-dependent.
      ska::CtxId ctx = ska::kDefaultCtx;
      auto place = [&](std::uint64_t span, std::uint64_t align) {
        std::uint64_t base = 0, window = R;
        ctx = ska::kDefaultCtx;
        if (fc.use_extra_ctx) {
          window = R / 2;
          if (rng() & 1) {
            base = R / 2;
            ctx = extra;
          }
        }
        return base + draw(rng, 0, (window - span) / align) * align;
      };
      ++out.ops;
      switch (kind) {
        case 0: {  // contiguous put, 1..4096 bytes
          const std::uint64_t n = draw(rng, 1, 4096);
          const std::uint64_t off = place(n, 1);
          scratch.resize(n);
          for (auto& b : scratch) b = static_cast<std::uint8_t>(rng());
          if (me) pe.put(region.sub(off, n), scratch.data(), n, target, ctx);
          std::memcpy(model[target].data() + off, scratch.data(), n);
          break;
        }
        case 1: {  // strided put, element stride 1..8
          const std::uint64_t ne = draw(rng, 1, 64);
          const std::uint64_t ds = draw(rng, 1, 8);
          const std::uint64_t ss = draw(rng, 1, 8);
          const std::uint64_t span = ((ne - 1) * ds + 1) * 8;
          const std::uint64_t off = place(span, 8);
          payload.resize(ne * ss);
          for (auto& w : payload) w = rng();
          if (me)
            pe.iput(region.sub(off, span), payload.data(), ds, ss, ne, target,
                    ctx);
          for (std::uint64_t k = 0; k < ne; ++k)
            std::memcpy(model[target].data() + off + k * ds * 8,
                        &payload[k * ss], 8);
          break;
        }
        case 2: {  // single element
          const std::int64_t v = static_cast<std::int64_t>(rng());
          const std::uint64_t off = place(8, 8);
          if (me) pe.p(region.sub(off, 8), v, target, ctx);
          std::memcpy(model[target].data() + off, &v, 8);
          break;
        }
        default: {  // non-blocking put
          const std::uint64_t n = draw(rng, 1, 4096);
          const std::uint64_t off = place(n, 1);
          scratch.resize(n);
          for (auto& b : scratch) b = static_cast<std::uint8_t>(rng());
          if (me)
            pe.put_nbi(region.sub(off, n), scratch.data(), n, target, ctx);
          std::memcpy(model[target].data() + off, scratch.data(), n);
          break;
        }
      }
    }
    if (me) {
      pe.quiet();
      if (fc.use_extra_ctx) pe.quiet(extra);
    }
    pe.barrier();

    // --- get phase --------------------------------------------------
    std::vector<PendingGet> pending;
    std::uint64_t land_used = 0;
    for (int j = 0; j < fc.puts_per_batch / 2; ++j) {
      const int kind = j < 4 ? j : static_cast<int>(draw(rng, 0, 3));
      const int src = static_cast<int>(draw(rng, 0, npes - 1));
      const ska::CtxId ctx =
          fc.use_extra_ctx && (rng() & 1) ? extra : ska::kDefaultCtx;
      ++out.ops;
      switch (kind) {
        case 0: {
          const std::uint64_t n = draw(rng, 1, 4096);
          const std::uint64_t off = draw(rng, 0, R - n);
          if (me) {
            scratch.assign(n, 0);
            pe.get(scratch.data(), region.sub(off, n), n, src, ctx);
            if (std::memcmp(scratch.data(), model[src].data() + off, n) != 0)
              ++out.mismatches;
          }
          break;
        }
        case 1: {
          const std::uint64_t ne = draw(rng, 1, 64);
          const std::uint64_t ds = draw(rng, 1, 8);
          const std::uint64_t ss = draw(rng, 1, 8);
          const std::uint64_t span = ((ne - 1) * ss + 1) * 8;
          const std::uint64_t off = draw(rng, 0, (R - span) / 8) * 8;
          if (me) {
            payload.assign(ne * ds, 0);
            pe.iget(payload.data(), region.sub(off, span), ds, ss, ne, src,
                    ctx);
            for (std::uint64_t k = 0; k < ne; ++k)
              if (std::memcmp(&payload[k * ds],
                              model[src].data() + off + k * ss * 8, 8) != 0) {
                ++out.mismatches;
                break;
              }
          }
          break;
        }
        case 2: {
          const std::uint64_t off = draw(rng, 0, R / 8 - 1) * 8;
          if (me) {
            const std::int64_t v = pe.g(region.sub(off, 8), src, ctx);
            if (std::memcmp(&v, model[src].data() + off, 8) != 0)
              ++out.mismatches;
          }
          break;
        }
        default: {
          const std::uint64_t n = draw(rng, 1, 1024);
          const std::uint64_t off = draw(rng, 0, R - n);
          if (me && land_used + n <= (1 << 16)) {
            pe.get_nbi(land.sub(land_used, n), region.sub(off, n), n, src,
                       ctx);
            pending.push_back({land_used, off, n, src});
            land_used += n;
          }
          break;
        }
      }
    }
    if (me) {
      pe.quiet();
      if (fc.use_extra_ctx) pe.quiet(extra);
      for (const auto& pg : pending) {
        const std::byte* got = pe.resolve(land.sub(pg.land_off, pg.nbytes),
                                          pe.rank());
        if (std::memcmp(got, model[pg.src_pe].data() + pg.src_off,
                        pg.nbytes) != 0)
          ++out.mismatches;
      }
    }
    pe.barrier();
  }

  if (fc.use_extra_ctx) pe.ctx_destroy(extra);
  pe.sym_free(land);
  pe.sym_free(region);
  return out;
}

}  // namespace ska_test
