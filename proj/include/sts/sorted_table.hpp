#pragma once

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sts {

/// Key types accepted by every table and search procedure.
template <typename K>
concept TableKey = std::same_as<K, std::uint32_t> || std::same_as<K, std::uint64_t>;

/// Result of a predecessor search.
///
/// `rank` is the number of table keys <= the query, so it lies in [0, n].
/// A rank of j (j >= 1) means A[j] <= x < A[j+1] with 1-based positions.
struct SearchOutcome {
  std::size_t rank = 0;
  std::uint32_t iterations = 0;

  friend bool operator==(const SearchOutcome&, const SearchOutcome&) = default;
};

/// Closed interval of 1-based table positions.
struct Interval {
  std::size_t lo = 1;
  std::size_t hi = 1;

  std::size_t length() const { return hi - lo + 1; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Largest key a table of width `bits` may hold: 2^(bits-1) - 1.
template <TableKey K>
constexpr K max_table_key() {
  return static_cast<K>((K{1} << (std::numeric_limits<K>::digits - 1)) - 1);
}

/// Immutable ascending array of unique keys in [1, 2^(r-1) - 1].
template <TableKey K>
class SortedTable {
 public:
  using key_type = K;
  static constexpr unsigned width = std::numeric_limits<K>::digits;

  explicit SortedTable(std::vector<K> keys) : keys_(std::move(keys)) {
    if (keys_.empty()) throw std::invalid_argument("sorted table must hold at least one key");
    for (std::size_t i = 0; i < keys_.size(); ++i) {
      if (keys_[i] < 1 || keys_[i] > max_table_key<K>())
        throw std::invalid_argument("key " + std::to_string(keys_[i]) + " at index " + std::to_string(i) +
                                    " outside [1, 2^(r-1)-1]");
      if (i > 0 && keys_[i] <= keys_[i - 1])
        throw std::invalid_argument("keys not strictly increasing at index " + std::to_string(i));
    }
  }

  std::span<const K> keys() const { return keys_; }
  std::size_t size() const { return keys_.size(); }
  const K* data() const { return keys_.data(); }

  /// 0-based access.
  K operator[](std::size_t i) const { return keys_[i]; }
  /// 1-based access, matching positions used by intervals and ranks.
  K at_position(std::size_t j) const { return keys_[j - 1]; }

  K front() const { return keys_.front(); }
  K back() const { return keys_.back(); }

 private:
  std::vector<K> keys_;
};

}  // namespace sts
