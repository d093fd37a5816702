#pragma once

// Byte-level oracles for the six collectives.  Every contribution is a pure
// function of (collective, team index, size, byte position), so any rank can
// reconstruct what any other rank contributed and check the combined result
// without further communication.
//
// Symmetric allocation synchronizes the whole world, so every rank must call
// the battery even when the target team is smaller; ranks outside the team
// only mirror the alloc/free sequence and skip the communication.

#include <cstdint>
#include <cstring>
#include <vector>

#include "ska/runtime.hpp"

namespace ska_test {

inline std::uint8_t coll_byte(std::uint64_t tag, std::uint64_t who,
                              std::uint64_t n, std::uint64_t i) {
  return static_cast<std::uint8_t>(
      ska::mix64(tag * 0x9e3779b97f4a7c15ull + who * 0x100000001b3ull +
                 n * 8191 + i));
}

inline std::uint64_t coll_word(std::uint64_t tag, std::uint64_t who,
                               std::uint64_t n, std::uint64_t k) {
  // Low bit always set so an AND across members keeps at least one bit.
  return ska::mix64(tag ^ (who << 40) ^ (n << 20) ^ k) | 1;
}

/// Runs every collective at each size on the given team; returns the number
/// of result bytes/words that disagreed with the oracle on this rank.
inline std::uint64_t run_collective_battery(
    ska::Pe& pe, ska::TeamId team_id,
    const std::vector<std::uint64_t>& sizes) {
  using ska::SymRef;
  const ska::TeamSpec& team = pe.team(team_id);
  const bool member = pe.in_team(team_id);
  const int m = team.size();
  const int idx = member ? team.index_of(pe.rank()) : 0;
  std::uint64_t bad = 0;

  for (std::uint64_t n : sizes) {
    const std::uint64_t ne = (n + 7) / 8;  // element count for word ops

    // --- broadcast: non-roots receive, the root's dst stays untouched ---
    for (int root : {0, m - 1}) {
      SymRef src = pe.sym_malloc(n);
      SymRef dst = pe.sym_malloc(n);
      if (member) {
        std::byte* s = pe.resolve(src, pe.rank());
        std::byte* d = pe.resolve(dst, pe.rank());
        for (std::uint64_t i = 0; i < n; ++i) {
          s[i] = static_cast<std::byte>(coll_byte(1, idx, n, i));
          d[i] = static_cast<std::byte>(coll_byte(2, idx, n, i));
        }
        pe.barrier(team_id);
        pe.broadcast(team_id, root, dst, src, n);
        const int expect_from = idx == root ? -1 : root;
        for (std::uint64_t i = 0; i < n; ++i) {
          const std::uint8_t want = expect_from < 0
                                        ? coll_byte(2, idx, n, i)
                                        : coll_byte(1, expect_from, n, i);
          if (static_cast<std::uint8_t>(d[i]) != want) ++bad;
        }
        pe.barrier(team_id);
      }
      pe.sym_free(dst);
      pe.sym_free(src);
    }

    // --- reduce_and: every member ends with the AND of all inputs -------
    {
      SymRef src = pe.sym_malloc(ne * 8);
      SymRef dst = pe.sym_malloc(ne * 8);
      if (member) {
        std::byte* s = pe.resolve(src, pe.rank());
        for (std::uint64_t k = 0; k < ne; ++k) {
          const std::uint64_t w = coll_word(3, idx, n, k);
          std::memcpy(s + k * 8, &w, 8);
        }
        pe.barrier(team_id);
        pe.reduce_and(team_id, dst, src, ne);
        const std::byte* d = pe.resolve(dst, pe.rank());
        for (std::uint64_t k = 0; k < ne; ++k) {
          std::uint64_t want = ~0ull;
          for (int j = 0; j < m; ++j) want &= coll_word(3, j, n, k);
          std::uint64_t got = 0;
          std::memcpy(&got, d + k * 8, 8);
          if (got != want) ++bad;
        }
        pe.barrier(team_id);
      }
      pe.sym_free(dst);
      pe.sym_free(src);
    }

    // --- collect: concatenation of variable-sized contributions ---------
    {
      std::uint64_t total = 0;
      for (int j = 0; j < m; ++j)
        total += n + 8 * static_cast<std::uint64_t>(j);
      const std::uint64_t mine = n + 8 * static_cast<std::uint64_t>(idx);
      SymRef src = pe.sym_malloc(mine);
      SymRef dst = pe.sym_malloc(total);
      if (member) {
        std::byte* s = pe.resolve(src, pe.rank());
        for (std::uint64_t i = 0; i < mine; ++i)
          s[i] = static_cast<std::byte>(coll_byte(4, idx, n, i));
        pe.barrier(team_id);
        pe.collect(team_id, dst, src, mine);
        const std::byte* d = pe.resolve(dst, pe.rank());
        std::uint64_t off = 0;
        for (int j = 0; j < m; ++j) {
          const std::uint64_t len = n + 8 * static_cast<std::uint64_t>(j);
          for (std::uint64_t i = 0; i < len; ++i)
            if (static_cast<std::uint8_t>(d[off + i]) !=
                coll_byte(4, j, n, i))
              ++bad;
          off += len;
        }
        pe.barrier(team_id);
      }
      pe.sym_free(dst);
      pe.sym_free(src);
    }

    // --- fcollect: fixed-size concatenation -----------------------------
    {
      SymRef src = pe.sym_malloc(n);
      SymRef dst = pe.sym_malloc(n * m);
      if (member) {
        std::byte* s = pe.resolve(src, pe.rank());
        for (std::uint64_t i = 0; i < n; ++i)
          s[i] = static_cast<std::byte>(coll_byte(5, idx, n, i));
        pe.barrier(team_id);
        pe.fcollect(team_id, dst, src, n);
        const std::byte* d = pe.resolve(dst, pe.rank());
        for (int j = 0; j < m; ++j)
          for (std::uint64_t i = 0; i < n; ++i)
            if (static_cast<std::uint8_t>(d[j * n + i]) !=
                coll_byte(5, j, n, i))
              ++bad;
        pe.barrier(team_id);
      }
      pe.sym_free(dst);
      pe.sym_free(src);
    }

    // --- alltoall: block j of my dst is block my-idx of j's src ---------
    {
      SymRef src = pe.sym_malloc(n * m);
      SymRef dst = pe.sym_malloc(n * m);
      if (member) {
        std::byte* s = pe.resolve(src, pe.rank());
        for (int j = 0; j < m; ++j)
          for (std::uint64_t i = 0; i < n; ++i)
            s[j * n + i] = static_cast<std::byte>(
                coll_byte(6, (static_cast<std::uint64_t>(idx) << 8) | j, n,
                          i));
        pe.barrier(team_id);
        pe.alltoall(team_id, dst, src, n);
        const std::byte* d = pe.resolve(dst, pe.rank());
        for (int j = 0; j < m; ++j)
          for (std::uint64_t i = 0; i < n; ++i)
            if (static_cast<std::uint8_t>(d[j * n + i]) !=
                coll_byte(6, (static_cast<std::uint64_t>(j) << 8) | idx, n,
                          i))
              ++bad;
        pe.barrier(team_id);
      }
      pe.sym_free(dst);
      pe.sym_free(src);
    }

    // --- alltoalls: strided exchange of 8-byte elements ------------------
    {
      const std::uint64_t ds = 2, ss = 3;
      SymRef src = pe.sym_malloc(m * ne * ss * 8);
      SymRef dst = pe.sym_malloc(m * ne * ds * 8);
      if (member) {
        std::byte* s = pe.resolve(src, pe.rank());
        std::byte* d = pe.resolve(dst, pe.rank());
        for (std::uint64_t k = 0; k < m * ne * ss; ++k) {
          const std::uint64_t w = coll_word(7, idx, n, k);
          std::memcpy(s + k * 8, &w, 8);
        }
        for (std::uint64_t k = 0; k < m * ne * ds; ++k) {
          const std::uint64_t w = coll_word(8, idx, n, k);  // sentinel
          std::memcpy(d + k * 8, &w, 8);
        }
        pe.barrier(team_id);
        pe.alltoalls(team_id, dst, src, ds, ss, ne);
        for (int j = 0; j < m; ++j)
          for (std::uint64_t k = 0; k < ne; ++k) {
            const std::uint64_t slot =
                (static_cast<std::uint64_t>(j) * ne + k) * ds;
            std::uint64_t got = 0;
            std::memcpy(&got, d + slot * 8, 8);
            const std::uint64_t want =
                coll_word(7, j, n,
                          (static_cast<std::uint64_t>(idx) * ne + k) * ss);
            if (got != want) ++bad;
          }
        // Gap slots keep their sentinel.
        for (std::uint64_t k = 0; k < m * ne; ++k) {
          const std::uint64_t slot = k * ds + 1;
          std::uint64_t got = 0;
          std::memcpy(&got, d + slot * 8, 8);
          if (got != coll_word(8, idx, n, slot)) ++bad;
        }
        pe.barrier(team_id);
      }
      pe.sym_free(dst);
      pe.sym_free(src);
    }
  }
  return bad;
}

}  // namespace ska_test
