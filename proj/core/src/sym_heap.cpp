#include "ska/sym_heap.hpp"

#include <mutex>
#include <algorithm>

namespace ska {

SymRef SymHeap::allocate(std::uint64_t n, std::uint64_t align) {
  std::unique_lock lk(mu_);
  return allocate_locked(n, align);
}

SymRef SymHeap::allocate_locked(std::uint64_t n, std::uint64_t align) {
  if (align == 0) align = 1;
  if (align < kMinAlign) align = kMinAlign;
  if (n == 0) n = 1;  // zero-byte blocks still need a distinct placement
  for (auto it = free_.begin(); it != free_.end(); ++it) {
    std::uint64_t start = it->first, span = it->second;
    std::uint64_t aligned = (start + align - 1) / align * align;
    std::uint64_t pad = aligned - start;
    if (span < pad + n) continue;
    free_.erase(it);
    if (pad) free_[start] = pad;
    if (span - pad - n) free_[aligned + n] = span - pad - n;
    std::uint64_t id = next_id_++;
    blocks_[id] = Block{aligned, n};
    return SymRef{id, 0, n};
  }
  throw FatalError("symmetric heap exhausted: cannot allocate " +
                   std::to_string(n) + " bytes");
}

void SymHeap::release(const SymRef& ref) {
  std::unique_lock lk(mu_);
  if (ref.offset != 0)
    throw FatalError("sym_free of an interior reference");
  release_locked(ref.block);
}

void SymHeap::release_locked(std::uint64_t block) {
  auto it = blocks_.find(block);
  if (it == blocks_.end())
    throw FatalError("sym_free of an unknown or already freed block");
  std::uint64_t start = it->second.region, len = it->second.len;
  blocks_.erase(it);
  // Coalesce with neighbours.
  auto next = free_.lower_bound(start);
  if (next != free_.end() && next->first == start + len) {
    len += next->second;
    next = free_.erase(next);
  }
  if (next != free_.begin()) {
    auto prev = std::prev(next);
    if (prev->first + prev->second == start) {
      start = prev->first;
      len += prev->second;
      free_.erase(prev);
    }
  }
  free_[start] = len;
}

SymRef SymHeap::reallocate(const SymRef& ref, std::uint64_t n,
                           std::uint64_t* old_region, std::uint64_t* old_len,
                           std::uint64_t* new_region) {
  std::unique_lock lk(mu_);
  if (ref.offset != 0)
    throw FatalError("sym_realloc of an interior reference");
  auto it = blocks_.find(ref.block);
  if (it == blocks_.end())
    throw FatalError("sym_realloc of an unknown or already freed block");
  *old_region = it->second.region;
  *old_len = it->second.len;
  // Allocate first so the bytes survive for the caller's copy, then free.
  SymRef out = allocate_locked(n, kMinAlign);
  *new_region = blocks_[out.block].region;
  release_locked(ref.block);
  return out;
}

std::uint64_t SymHeap::resolve(const SymRef& ref) const {
  std::shared_lock lk(mu_);
  auto it = blocks_.find(ref.block);
  if (it == blocks_.end())
    throw FatalError("reference to an unknown or freed symmetric block");
  if (ref.offset + ref.len > it->second.len)
    throw FatalError("symmetric reference out of block bounds");
  return it->second.region + ref.offset;
}

std::uint64_t SymHeap::live_blocks() const {
  std::shared_lock lk(mu_);
  return blocks_.size();
}

std::uint64_t SymHeap::live_bytes() const {
  std::shared_lock lk(mu_);
  std::uint64_t total = 0;
  for (auto& [id, b] : blocks_) total += b.len;
  return total;
}

}  // namespace ska
