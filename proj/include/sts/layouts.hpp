#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "sts/sorted_table.hpp"

namespace sts {

inline constexpr std::size_t kCacheLineBytes = 64;

namespace detail {

// Advisory read prefetch. The address may lie past the end of the array:
// hardware prefetches never fault, and the pointer is never dereferenced.
template <typename T>
inline void prefetch(const T* base, std::size_t index) {
#if defined(__GNUC__) || defined(__clang__)
  __builtin_prefetch(reinterpret_cast<const void*>(reinterpret_cast<std::uintptr_t>(base) + index * sizeof(T)), 0, 0);
#else
  (void)base;
  (void)index;
#endif
}

inline std::uint32_t ceil_log2(std::size_t n) {
  return n <= 1 ? 0u : static_cast<std::uint32_t>(std::bit_width(n - 1));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Eytzinger layout
// ---------------------------------------------------------------------------

/// Breadth-first serialization of the complete binary search tree over a
/// sorted table. Node i has children 2i+1 and 2i+2.
template <TableKey K>
class EytzingerTable {
 public:
  EytzingerTable(std::vector<K> keys, std::size_t prefetch_multiplier, std::size_t prefetch_offset)
      : keys_(std::move(keys)), multiplier_(prefetch_multiplier), offset_(prefetch_offset) {}

  std::span<const K> keys() const { return keys_; }
  std::size_t size() const { return keys_.size(); }
  std::size_t prefetch_multiplier() const { return multiplier_; }
  std::size_t prefetch_offset() const { return offset_; }

 private:
  std::vector<K> keys_;
  std::size_t multiplier_;
  std::size_t offset_;
};

namespace detail {

// In-order fill of the heap-shaped tree; `next` walks the sorted keys.
template <TableKey K>
void fill_eytzinger(std::span<const K> sorted, std::vector<K>& out, std::size_t& next, std::size_t node) {
  if (node >= out.size()) return;
  fill_eytzinger(sorted, out, next, 2 * node + 1);
  out[node] = sorted[next++];
  fill_eytzinger(sorted, out, next, 2 * node + 2);
}

// 1-based in-order position of heap node `k` (1-based) in a complete binary
// tree holding n nodes. Missing bottom-level leaves are discounted.
inline std::size_t eytzinger_inorder_position(std::size_t k, std::size_t n) {
  const unsigned height = static_cast<unsigned>(std::bit_width(n)) - 1;  // deepest level index
  const unsigned depth = static_cast<unsigned>(std::bit_width(k)) - 1;
  const std::size_t offset = k - (std::size_t{1} << depth);
  const std::size_t perfect = (2 * offset + 1) << (height - depth);
  const std::size_t leaves_present = n - ((std::size_t{1} << height) - 1);
  const std::size_t missing = perfect > 2 * leaves_present ? (perfect - 2 * leaves_present) / 2 : 0;
  return perfect - missing;
}

}  // namespace detail

/// Builds the Eytzinger layout. Prefetch parameters default to one cache line
/// worth of elements ahead: multiplier = line / sizeof(K), offset = multiplier - 1.
template <TableKey K>
EytzingerTable<K> build_eytzinger(const SortedTable<K>& table, std::size_t prefetch_multiplier = 0,
                                  std::size_t prefetch_offset = std::numeric_limits<std::size_t>::max()) {
  if (prefetch_multiplier == 0) prefetch_multiplier = kCacheLineBytes / sizeof(K);
  if (prefetch_offset == std::numeric_limits<std::size_t>::max()) prefetch_offset = prefetch_multiplier - 1;
  std::vector<K> out(table.size());
  std::size_t next = 0;
  detail::fill_eytzinger(table.keys(), out, next, 0);
  return EytzingerTable<K>(std::move(out), prefetch_multiplier, prefetch_offset);
}

// ---------------------------------------------------------------------------
// (B+1)-ary layout
// ---------------------------------------------------------------------------

/// Sorted keys re-blocked into a level-order (B+1)-ary search tree of
/// B-key nodes. Block i has children (B+1)i + 1 + c for c in [0, B].
/// Only the final block may be partial; its unused slots hold the maximum
/// representable key.
template <TableKey K>
class BTreeLayoutTable {
 public:
  static constexpr K pad_value = std::numeric_limits<K>::max();

  BTreeLayoutTable(std::vector<K> keys, std::size_t block_size, std::size_t n)
      : keys_(std::move(keys)), block_size_(block_size), n_(n) {
    blocks_ = keys_.size() / block_size_;
    // Levels 0..height-1 are full; `height` is the level of the last block.
    std::size_t first = 0, width = 1;
    height_ = 0;
    while (first + width < blocks_) {
      first += width;
      width *= block_size_ + 1;
      ++height_;
    }
    first_leaf_block_ = first;
    bottom_keys_ = n_ - first_leaf_block_ * block_size_;
    steps_.resize(height_ + 1);
    std::size_t s = 1;
    for (std::size_t d = height_ + 1; d-- > 0;) {
      steps_[d] = s;
      s *= block_size_ + 1;
    }
  }

  std::span<const K> keys() const { return keys_; }
  std::size_t block_size() const { return block_size_; }
  std::size_t size() const { return n_; }
  std::size_t block_count() const { return blocks_; }

  /// (B+1)^(height - depth): number of bottom-level slots spanned per child at `depth`.
  std::span<const std::size_t> level_steps() const { return steps_; }

  /// Converts a position in the virtual perfect tree of this height into the
  /// 1-based sorted position, discounting bottom-level slots that do not exist.
  std::size_t sorted_position(std::size_t perfect) const {
    const std::size_t b1 = block_size_ + 1;
    const std::size_t before = (perfect - 1) / b1 * block_size_ + std::min((perfect - 1) % b1, block_size_);
    return perfect - (before > bottom_keys_ ? before - bottom_keys_ : 0);
  }

 private:
  std::vector<K> keys_;
  std::size_t block_size_;
  std::size_t n_;
  std::size_t blocks_ = 0;
  std::size_t height_ = 0;
  std::size_t first_leaf_block_ = 0;
  std::size_t bottom_keys_ = 0;
  std::vector<std::size_t> steps_;
};

namespace detail {

template <TableKey K>
void fill_btree(std::span<const K> sorted, std::vector<K>& out, std::size_t block_size, std::size_t blocks,
                std::size_t last_block_keys, std::size_t& next, std::size_t block) {
  if (block >= blocks) return;
  const std::size_t slots = block + 1 == blocks ? last_block_keys : block_size;
  for (std::size_t c = 0; c <= block_size; ++c) {
    fill_btree(sorted, out, block_size, blocks, last_block_keys, next, block * (block_size + 1) + 1 + c);
    if (c < slots) out[block * block_size + c] = sorted[next++];
  }
}

}  // namespace detail

/// Builds the (B+1)-ary layout. `block_size` = 0 selects one cache line of keys.
template <TableKey K>
BTreeLayoutTable<K> build_btree_layout(const SortedTable<K>& table, std::size_t block_size = 0) {
  if (block_size == 0) block_size = kCacheLineBytes / sizeof(K);
  const std::size_t n = table.size();
  const std::size_t blocks = (n + block_size - 1) / block_size;
  const std::size_t last_block_keys = n - (blocks - 1) * block_size;
  std::vector<K> out(blocks * block_size, BTreeLayoutTable<K>::pad_value);
  std::size_t next = 0;
  detail::fill_btree(table.keys(), out, block_size, blocks, last_block_keys, next, 0);
  return BTreeLayoutTable<K>(std::move(out), block_size, n);
}

/// Checked overload: rejects B = 0 instead of picking the default.
template <TableKey K>
BTreeLayoutTable<K> build_btree_layout_checked(const SortedTable<K>& table, std::size_t block_size) {
  if (block_size == 0) throw std::invalid_argument("B-tree block size must be positive");
  return build_btree_layout(table, block_size);
}

// ---------------------------------------------------------------------------
// Searches over the sorted layout
// ---------------------------------------------------------------------------

/// Branchy textbook binary search (BBS).
template <TableKey K>
SearchOutcome bbs_search(const SortedTable<K>& table, K x) {
  const K* a = table.data();
  std::size_t lo = 0, hi = table.size();
  std::uint32_t it = 0;
  while (lo < hi) {
    ++it;
    const std::size_t mid = lo + (hi - lo) / 2;
    if (a[mid] <= x)
      lo = mid + 1;
    else
      hi = mid;
  }
  return {lo, it};
}

namespace detail {

// Branch-free halving over a[0, n), n >= 1. Returns |{y in a : y <= x}|.
// The final comparison counts as one iteration.
template <TableKey K>
inline SearchOutcome branchfree_rank(const K* a, std::size_t n, K x) {
  const K* base = a;
  std::uint32_t it = 1;
  while (n > 1) {
    const std::size_t half = n / 2;
    prefetch(base, half / 2);
    prefetch(base, half + half / 2);
    base = (base[half] <= x) ? base + half : base;
    n -= half;
    ++it;
  }
  return {static_cast<std::size_t>(base - a) + (*base <= x), it};
}

}  // namespace detail

/// Branch-free binary search with prefetching (BFS).
template <TableKey K>
SearchOutcome bfs_search(const SortedTable<K>& table, K x) {
  return detail::branchfree_rank(table.data(), table.size(), x);
}

/// Branch-free search restricted to the 1-based positions [lo, hi].
///
/// Assumes the answer lies in [lo-1, hi]. One probe on each side of the
/// window confirms this; if it fails the search is redone on the full table,
/// so the returned rank is always exact.
template <TableKey K>
SearchOutcome bounded_bfs_search(const SortedTable<K>& table, K x, std::size_t lo, std::size_t hi) {
  if (lo > hi) throw std::invalid_argument("bounded search: lo > hi");
  if (lo < 1 || hi > table.size()) throw std::out_of_range("bounded search: window outside table");
  const K* a = table.data();
  SearchOutcome out = detail::branchfree_rank(a + (lo - 1), hi - lo + 1, x);
  out.rank += lo - 1;
  const bool below = out.rank == lo - 1 && lo > 1 && x < a[lo - 2];
  const bool above = out.rank == hi && hi < table.size() && a[hi] <= x;
  if (below || above) {
    const SearchOutcome full = detail::branchfree_rank(a, table.size(), x);
    return {full.rank, out.iterations + full.iterations};
  }
  return out;
}

// ---------------------------------------------------------------------------
// Eytzinger search (BFE)
// ---------------------------------------------------------------------------

template <TableKey K>
SearchOutcome bfe_search(const EytzingerTable<K>& table, K x) {
  const K* a = table.keys().data();
  const std::size_t n = table.size();
  const std::size_t mult = table.prefetch_multiplier();
  const std::size_t off = table.prefetch_offset();
  // Every node on the first `full` levels exists, so the descent runs a
  // fixed number of steps. A missing node on the last level counts as a
  // right turn, which the trailing-ones strip below discards.
  const auto full = static_cast<std::uint32_t>(std::bit_width(n + 1) - 1);
  std::size_t i = 0;
  for (std::uint32_t d = 0; d < full; ++d) {
    detail::prefetch(a, mult * i + off);
    i = 2 * i + 1 + static_cast<std::size_t>(a[i] <= x);
  }
  std::uint32_t it = full;
  if (full < std::bit_width(n)) {
    const bool real = i < n;
    const K v = a[real ? i : n - 1];
    i = 2 * i + 1 + static_cast<std::size_t>(!real || v <= x);
    it += real;
  }
  // Strip the trailing right turns and the last left turn: heap index of the
  // first key greater than x, or 0 when every key is <= x.
  const std::size_t k = (i + 1) >> (std::countr_one(i + 1) + 1);
  const std::size_t rank = k == 0 ? n : detail::eytzinger_inorder_position(k, n) - 1;
  return {rank, it};
}

// ---------------------------------------------------------------------------
// (B+1)-ary search (BFB)
// ---------------------------------------------------------------------------

template <TableKey K>
SearchOutcome bfb_search(const BTreeLayoutTable<K>& table, K x) {
  // Queries at or above the pad value would count sentinels; no table key
  // reaches pad_value - 1, so clamping leaves the rank unchanged.
  x = std::min<K>(x, BTreeLayoutTable<K>::pad_value - 1);
  const K* a = table.keys().data();
  const std::size_t bsize = table.block_size();
  const std::size_t blocks = table.block_count();
  const auto steps = table.level_steps();
  std::size_t block = 0, depth = 0, base = 0, successor = 0;
  std::uint32_t it = 0;
  while (block < blocks) {
    const K* node = a + block * bsize;
    const std::size_t first_child = block * (bsize + 1) + 1;
    detail::prefetch(a, first_child * bsize);
    detail::prefetch(a, (first_child + bsize) * bsize);
    std::size_t c = 0;
    for (std::size_t s = 0; s < bsize; ++s) c += static_cast<std::size_t>(node[s] <= x);
    const std::size_t step = steps[depth];
    const bool real = c < bsize && node[c] != BTreeLayoutTable<K>::pad_value;
    successor = real ? base + (c + 1) * step : successor;
    base += c * step;
    block = first_child + c;
    ++depth;
    ++it;
  }
  const std::size_t rank = successor == 0 ? table.size() : table.sorted_position(successor) - 1;
  return {rank, it};
}

}  // namespace sts
