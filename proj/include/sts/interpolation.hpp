#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <type_traits>
#include <vector>

#include "sts/layouts.hpp"
#include "sts/sorted_table.hpp"

namespace sts {

namespace detail {

struct NoTrace {
  void operator()(std::size_t) const {}
};

struct VectorTrace {
  std::vector<std::size_t>* probes;
  void operator()(std::size_t pos) const { probes->push_back(pos); }
};

// Interpolation step shared by IBS and the ISM probe model:
// lo + floor((hi - lo) * (x - A[lo]) / (A[hi] - A[lo])), evaluated exactly.
template <TableKey K>
inline std::size_t interpolation_probe(const K* a, K x, std::size_t lo, std::size_t hi) {
  using Wide = std::conditional_t<sizeof(K) == 4, std::uint64_t, unsigned __int128>;
  const Wide num = static_cast<Wide>(hi - lo) * static_cast<Wide>(x - a[lo - 1]);
  const auto pos = lo + static_cast<std::size_t>(num / static_cast<Wide>(a[hi - 1] - a[lo - 1]));
  return std::min(pos, hi);
}

// Narrowing loop of classic interpolation search over 1-based [lo, hi].
template <TableKey K, typename Trace>
SearchOutcome ibs_loop(const K* a, K x, std::size_t lo, std::size_t hi, Trace trace) {
  std::uint32_t it = 0;
  while (lo <= hi && x >= a[lo - 1] && x <= a[hi - 1]) {
    ++it;
    if (lo == hi) return {lo, it};  // guard implies a[lo] == x
    const std::size_t pos = interpolation_probe(a, x, lo, hi);
    trace(pos);
    const K probe = a[pos - 1];
    if (probe == x) return {pos, it};
    if (probe < x)
      lo = pos + 1;
    else
      hi = pos - 1;
  }
  // Keys left of lo are < x and keys right of hi are > x.
  if (lo > hi) return {hi, it};
  if (x < a[lo - 1]) return {lo - 1, it};
  return {hi, it};
}

template <TableKey K, typename Trace>
SearchOutcome ibs_impl(const SortedTable<K>& table, K x, std::size_t lo, std::size_t hi, Trace trace) {
  if (lo > hi) throw std::invalid_argument("interpolation search: lo > hi");
  if (lo < 1 || hi > table.size()) throw std::out_of_range("interpolation search: window outside table");
  const K* a = table.data();
  const std::size_t lo0 = lo, hi0 = hi;
  SearchOutcome out = ibs_loop(a, x, lo, hi, trace);
  const bool below = out.rank == lo0 - 1 && lo0 > 1 && x < a[lo0 - 2];
  const bool above = out.rank == hi0 && hi0 < table.size() && a[hi0] <= x;
  if (below || above) {
    const SearchOutcome full = ibs_loop(a, x, std::size_t{1}, table.size(), trace);
    return {full.rank, out.iterations + full.iterations};
  }
  return out;
}

}  // namespace detail

/// Classic interpolation search (IBS) over 1-based positions [lo, hi].
///
/// Returns the full-table rank. Queries outside [A[lo], A[hi]] settle at the
/// window edge; if the neighbouring key shows the answer lies outside the
/// window, the search restarts once on the whole table.
template <TableKey K>
SearchOutcome ibs_search(const SortedTable<K>& table, K x, std::size_t lo, std::size_t hi) {
  return detail::ibs_impl(table, x, lo, hi, detail::NoTrace{});
}

template <TableKey K>
SearchOutcome ibs_search(const SortedTable<K>& table, K x) {
  return detail::ibs_impl(table, x, std::size_t{1}, table.size(), detail::NoTrace{});
}

/// Probe positions visited by ibs_search, in order.
template <TableKey K>
std::vector<std::size_t> ibs_trace(const SortedTable<K>& table, K x, std::size_t lo, std::size_t hi) {
  std::vector<std::size_t> probes;
  detail::ibs_impl(table, x, lo, hi, detail::VectorTrace{&probes});
  return probes;
}

}  // namespace sts
