#include "sts/table_io.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace sts {
namespace {

template <typename T>
void put(std::ostream& out, T v) {
  std::array<char, sizeof(T)> bytes;
  for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xff);
  out.write(bytes.data(), bytes.size());
}

template <typename T>
T get(std::istream& in, const std::string& path) {
  std::array<unsigned char, sizeof(T)> bytes;
  if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size()))
    throw std::runtime_error(path + ": unexpected end of file");
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return static_cast<T>(v);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  return out;
}

std::ifstream open_in(const std::string& path, const char* magic) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  char got[4];
  if (!in.read(got, 4) || std::memcmp(got, magic, 4) != 0)
    throw std::runtime_error(path + ": not a " + std::string(magic, 4) + " file");
  const auto version = get<std::uint32_t>(in, path);
  if (version != kFormatVersion) throw std::runtime_error(path + ": unsupported version " + std::to_string(version));
  return in;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw std::runtime_error("error writing '" + path + "'");
}

template <TableKey K>
std::vector<K> read_keys(std::istream& in, std::uint64_t count, const std::string& path) {
  std::vector<K> keys;
  keys.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) keys.push_back(get<K>(in, path));
  return keys;
}

void expect_eof(std::istream& in, const std::string& path) {
  if (in.peek() != std::char_traits<char>::eof()) throw std::runtime_error(path + ": trailing bytes");
}

std::uint32_t read_width(std::istream& in, const std::string& path) {
  const auto width = get<std::uint32_t>(in, path);
  if (width != 32 && width != 64) throw std::runtime_error(path + ": bad key width " + std::to_string(width));
  return width;
}

template <TableKey K>
AnyTable read_table_body(std::istream& in, const std::string& path) {
  const auto n = get<std::uint64_t>(in, path);
  auto keys = read_keys<K>(in, n, path);
  expect_eof(in, path);
  try {
    return SortedTable<K>(std::move(keys));
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

template <TableKey K>
AnyWorkload read_workload_body(std::istream& in, const std::string& path) {
  QueryWorkload<K> w;
  const auto m = get<std::uint64_t>(in, path);
  const auto flag = get<std::uint32_t>(in, path);
  if (flag > 1) throw std::runtime_error(path + ": bad has_intervals flag");
  w.queries = read_keys<K>(in, m, path);
  if (flag == 1) {
    w.intervals.reserve(m);
    for (std::uint64_t i = 0; i < m; ++i) {
      const auto lo = get<std::uint64_t>(in, path);
      const auto hi = get<std::uint64_t>(in, path);
      if (lo < 1 || lo > hi) throw std::runtime_error(path + ": bad interval at query " + std::to_string(i));
      w.intervals.push_back({lo, hi});
    }
  }
  expect_eof(in, path);
  return w;
}

}  // namespace

template <TableKey K>
void write_table(const std::string& path, const SortedTable<K>& table) {
  auto out = open_out(path);
  out.write("STSB", 4);
  put<std::uint32_t>(out, kFormatVersion);
  put<std::uint32_t>(out, SortedTable<K>::width);
  put<std::uint64_t>(out, table.size());
  for (K k : table.keys()) put<K>(out, k);
  finish(out, path);
}

template <TableKey K>
void write_workload(const std::string& path, const QueryWorkload<K>& workload) {
  if (workload.has_intervals() && workload.intervals.size() != workload.queries.size())
    throw std::invalid_argument("workload has " + std::to_string(workload.intervals.size()) + " intervals for " +
                                std::to_string(workload.queries.size()) + " queries");
  auto out = open_out(path);
  out.write("STSQ", 4);
  put<std::uint32_t>(out, kFormatVersion);
  put<std::uint32_t>(out, SortedTable<K>::width);
  put<std::uint64_t>(out, workload.queries.size());
  put<std::uint32_t>(out, workload.has_intervals() ? 1 : 0);
  for (K k : workload.queries) put<K>(out, k);
  for (const Interval& w : workload.intervals) {
    put<std::uint64_t>(out, w.lo);
    put<std::uint64_t>(out, w.hi);
  }
  finish(out, path);
}

AnyTable read_table(const std::string& path) {
  auto in = open_in(path, "STSB");
  if (read_width(in, path) == 32) return read_table_body<std::uint32_t>(in, path);
  return read_table_body<std::uint64_t>(in, path);
}

AnyWorkload read_workload(const std::string& path) {
  auto in = open_in(path, "STSQ");
  if (read_width(in, path) == 32) return read_workload_body<std::uint32_t>(in, path);
  return read_workload_body<std::uint64_t>(in, path);
}

template void write_table(const std::string&, const SortedTable<std::uint32_t>&);
template void write_table(const std::string&, const SortedTable<std::uint64_t>&);
template void write_workload(const std::string&, const QueryWorkload<std::uint32_t>&);
template void write_workload(const std::string&, const QueryWorkload<std::uint64_t>&);

}  // namespace sts
