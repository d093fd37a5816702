#pragma once

#include <cstring>

#include "ska/measure.hpp"
#include "ska/registry.hpp"

namespace ska {

// Each translation unit registers one slice of the catalog; registration
// order is the order --list-routines prints.
void register_pt2pt(Registry& r);
void register_coll(Registry& r);
void register_misc(Registry& r);

namespace routines_detail {

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw ScriptError(msg);
}

/// Deterministic payload pattern, reproducible per (seed, stream, offset).
inline void fill_bytes(Pe& pe, std::byte* dst, std::uint64_t n,
                       std::uint64_t stream) {
  for (std::uint64_t i = 0; i < n; i += 8) {
    std::uint64_t v = pe.deterministic_u64(stream, i / 8);
    std::memcpy(dst + i, &v, n - i < 8 ? n - i : 8);
  }
}

inline int ring_next(const Pe& pe) { return (pe.rank() + 1) % pe.npes(); }

}  // namespace routines_detail

}  // namespace ska
