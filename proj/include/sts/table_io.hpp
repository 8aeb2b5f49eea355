#pragma once

#include <cstdint>
#include <string>
#include <variant>

#include "sts/datasets.hpp"
#include "sts/sorted_table.hpp"

// Binary table (STSB) and query workload (STSQ) files. All integers are
// little-endian.
//
//   STSB: "STSB" u32 version u32 width u64 n, n keys
//   STSQ: "STSQ" u32 version u32 width u64 m u32 has_intervals, m keys,
//         then m (lo, hi) u64 pairs when has_intervals is 1

namespace sts {

inline constexpr std::uint32_t kFormatVersion = 1;

using AnyTable = std::variant<SortedTable<std::uint32_t>, SortedTable<std::uint64_t>>;
using AnyWorkload = std::variant<QueryWorkload<std::uint32_t>, QueryWorkload<std::uint64_t>>;

template <TableKey K>
void write_table(const std::string& path, const SortedTable<K>& table);
template <TableKey K>
void write_workload(const std::string& path, const QueryWorkload<K>& workload);

/// Reads either width; throws std::runtime_error on malformed or unsorted files.
AnyTable read_table(const std::string& path);
AnyWorkload read_workload(const std::string& path);

extern template void write_table(const std::string&, const SortedTable<std::uint32_t>&);
extern template void write_table(const std::string&, const SortedTable<std::uint64_t>&);
extern template void write_workload(const std::string&, const QueryWorkload<std::uint32_t>&);
extern template void write_workload(const std::string&, const QueryWorkload<std::uint64_t>&);

}  // namespace sts
