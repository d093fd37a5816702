#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <shared_mutex>
#include <vector>

#include "ska/errors.hpp"

namespace ska {

/// Handle to a symmetric allocation: same block id, offset and length on
/// every PE.  `offset` addresses bytes within the block, so sub() can carve
/// views without touching the allocator.
struct SymRef {
  std::uint64_t block = 0;
  std::uint64_t offset = 0;
  std::uint64_t len = 0;

  SymRef sub(std::uint64_t off, std::uint64_t n) const {
    return SymRef{block, offset + off, n};
  }
  bool operator==(const SymRef&) const = default;
};

/// Deterministic first-fit allocator over one PE's heap region.  Every PE
/// owns a replica and the collective allocation calls keep the replicas in
/// lockstep, which is what makes a SymRef meaningful everywhere.  Lookups
/// are taken by concurrent deliverers, hence the shared mutex.
class SymHeap {
public:
  explicit SymHeap(std::uint64_t size) : size_(size) { free_[0] = size; }

  /// Allocate n bytes whose region offset is a multiple of `align`
  /// (power-of-two not required; must be >= 1).  Returns the new block.
  SymRef allocate(std::uint64_t n, std::uint64_t align = kMinAlign);

  /// Release a block.  The ref must address a whole live block (offset 0).
  void release(const SymRef& ref);

  /// Grow or shrink a block, first-fit like allocate.  Returns the new
  /// block; the caller copies contents (the heap does not own storage).
  /// old_region/new_region report where the bytes live.
  SymRef reallocate(const SymRef& ref, std::uint64_t n,
                    std::uint64_t* old_region, std::uint64_t* old_len,
                    std::uint64_t* new_region);

  /// Map a ref (block + offset + len) to the region-relative byte offset,
  /// bounds-checked against the live block.  Throws FatalError on misuse.
  std::uint64_t resolve(const SymRef& ref) const;

  std::uint64_t size() const { return size_; }
  std::uint64_t live_blocks() const;
  std::uint64_t live_bytes() const;

  static constexpr std::uint64_t kMinAlign = 8;

private:
  struct Block {
    std::uint64_t region;  // offset of first byte within the heap region
    std::uint64_t len;
  };

  SymRef allocate_locked(std::uint64_t n, std::uint64_t align);
  void release_locked(std::uint64_t block);

  std::uint64_t size_;
  std::uint64_t next_id_ = 1;
  std::map<std::uint64_t, Block> blocks_;      // id -> placement
  std::map<std::uint64_t, std::uint64_t> free_;  // region offset -> span length
  mutable std::shared_mutex mu_;
};

}  // namespace ska
