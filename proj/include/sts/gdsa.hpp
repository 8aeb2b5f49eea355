#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sts/interpolation.hpp"
#include "sts/layouts.hpp"
#include "sts/regression.hpp"
#include "sts/sorted_table.hpp"

// Generic dichotomic search: a narrowing loop whose probe index comes from a
// pluggable model of the key distribution on the live subrange.

namespace sts {

enum class ProbeKind { bsm, fsm, ism, sim, tip, lrm };

struct ProbeModel {
  ProbeKind kind = ProbeKind::bsm;
  double slope = 0.0;  // SIM only
  // When set, SIM uses the exact slope slope_num / slope_den instead.
  std::uint64_t slope_num = 0;
  std::uint64_t slope_den = 0;

  static ProbeModel bsm() { return {ProbeKind::bsm}; }
  static ProbeModel fsm() { return {ProbeKind::fsm}; }
  static ProbeModel ism() { return {ProbeKind::ism}; }
  static ProbeModel tip() { return {ProbeKind::tip}; }
  static ProbeModel lrm() { return {ProbeKind::lrm}; }
  static ProbeModel sim(double slope) {
    if (!(slope > 0.0) || !std::isfinite(slope)) throw std::invalid_argument("SIM slope must be finite and positive");
    return {ProbeKind::sim, slope};
  }
  /// SIM with the exact slope num / den.
  static ProbeModel sim(std::uint64_t num, std::uint64_t den) {
    if (num == 0 || den == 0) throw std::invalid_argument("SIM slope must be positive");
    return {ProbeKind::sim, static_cast<double>(num) / static_cast<double>(den), num, den};
  }

  /// Parses bsm | fsm | ism | sim:<slope> | tip | lrm.
  static ProbeModel parse(std::string_view name) {
    if (name == "bsm") return bsm();
    if (name == "fsm") return fsm();
    if (name == "ism") return ism();
    if (name == "tip") return tip();
    if (name == "lrm") return lrm();
    if (name.starts_with("sim:")) {
      const std::string s(name.substr(4));
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(s, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != s.size() || s.empty()) throw std::invalid_argument("bad SIM slope '" + s + "'");
      return sim(v);
    }
    throw std::invalid_argument("unknown probe model '" + std::string(name) + "'");
  }

  std::string name() const {
    switch (kind) {
      case ProbeKind::bsm: return "bsm";
      case ProbeKind::fsm: return "fsm";
      case ProbeKind::ism: return "ism";
      case ProbeKind::sim: {
        if (slope == 0.0) return "sim";
        char buf[32];
        return "sim:" + std::string(buf, std::to_chars(buf, buf + sizeof buf, slope).ptr);
      }
      case ProbeKind::tip: return "tip";
      case ProbeKind::lrm: return "lrm";
    }
    return "?";
  }
};

/// SIM with the full-range interpolation slope (n-1) / (A[n] - A[1]).
template <TableKey K>
ProbeModel full_range_sim(const SortedTable<K>& table) {
  if (table.size() < 2) return ProbeModel::sim(1, 1);
  return ProbeModel::sim(table.size() - 1, table.back() - table.front());
}

/// F_{g-1} with F_0 = 0, F_1 = F_2 = 1 and g the least integer such that
/// F_{g+1} >= length.
inline std::size_t fibonacci_offset(std::size_t length) {
  std::size_t f_prev = 0, f = 1, f_next = 1;  // F_{g-1}, F_g, F_{g+1} for g = 1
  while (f_next < length) {
    f_prev = f;
    f = f_next;
    f_next = f_prev + f;
  }
  return f_prev;
}

class GdsaNonTermination : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Probe index in [lo, hi] (1-based) chosen by `model` for query x.
template <TableKey K>
std::size_t probe(const ProbeModel& model, const SortedTable<K>& table, K x, std::size_t lo, std::size_t hi) {
  const K* a = table.data();
  auto clamp = [&](long double pos) {
    if (!(pos >= static_cast<long double>(lo))) return lo;  // also catches NaN
    if (pos >= static_cast<long double>(hi)) return hi;
    return static_cast<std::size_t>(pos);
  };
  const std::size_t mid = (lo + hi + 1) / 2;
  switch (model.kind) {
    case ProbeKind::bsm:
      return mid;
    case ProbeKind::fsm:
      return std::clamp(lo - 1 + fibonacci_offset(hi - lo + 1), lo, hi);
    case ProbeKind::ism:
      if (lo == hi || x < a[lo - 1] || x > a[hi - 1]) return lo;
      return detail::interpolation_probe(a, x, lo, hi);
    case ProbeKind::sim: {
      if (x < a[lo - 1]) return lo;
      if (model.slope_den != 0) {
        const auto q = static_cast<unsigned __int128>(model.slope_num) * (x - a[lo - 1]) / model.slope_den;
        return q >= hi - lo ? hi : lo + static_cast<std::size_t>(q);
      }
      const double offset = model.slope * static_cast<double>(x - a[lo - 1]);
      return clamp(static_cast<long double>(lo) + std::floor(static_cast<long double>(offset)));
    }
    case ProbeKind::tip: {
      // Three-point rational interpolation through (k, A[k]), (l, A[l]), (m, A[m]).
      using LD = long double;
      const std::size_t k = lo, l = mid, m = hi;
      const LD ak = a[k - 1], al = a[l - 1], am = a[m - 1], xv = x;
      const LD dlm = LD(l) - LD(m), dlk = LD(l) - LD(k);
      const LD num = (al - xv) * dlm * dlk * (am - ak);
      const LD den = (am - xv) * dlm * (ak - al) + (ak - xv) * dlk * (al - am);
      if (den == 0.0L) return mid;
      const LD pos = LD(l) + num / den;
      if (!std::isfinite(pos)) return mid;
      return clamp(std::round(pos));
    }
    case ProbeKind::lrm: {
      const PolyModel line = fit_slr_range(table.keys().subspan(lo - 1, hi - lo + 1), lo);
      return clamp(static_cast<long double>(round_half_up(line.predict(static_cast<double>(x)))));
    }
  }
  return mid;
}

namespace detail {

template <TableKey K, typename Trace>
SearchOutcome gdsa_impl(const SortedTable<K>& table, K x, const ProbeModel& model, Trace trace) {
  const K* a = table.data();
  const std::size_t n = table.size();
  const std::size_t cap = n + 4 * static_cast<std::size_t>(ceil_log2(n)) + 64;
  std::size_t lo = 1, hi = n;
  std::uint32_t it = 0;
  while (lo <= hi && x >= a[lo - 1] && x <= a[hi - 1]) {
    if (++it > cap)
      throw GdsaNonTermination("GDSA exceeded " + std::to_string(cap) + " iterations with model " + model.name());
    if (lo == hi) return {lo, it};  // guard implies a[lo] == x
    const std::size_t pos = probe(model, table, x, lo, hi);
    trace(pos);
    const K v = a[pos - 1];
    if (v == x) return {pos, it};
    if (v < x)
      lo = pos + 1;
    else
      hi = pos - 1;
  }
  if (lo > hi) return {hi, it};
  if (x < a[lo - 1]) return {lo - 1, it};
  return {hi, it};
}

}  // namespace detail

/// Full-table GDSA search with the given probe model.
template <TableKey K>
SearchOutcome gdsa_search(const SortedTable<K>& table, K x, const ProbeModel& model) {
  return detail::gdsa_impl(table, x, model, detail::NoTrace{});
}

template <TableKey K>
std::vector<std::size_t> gdsa_trace(const SortedTable<K>& table, K x, const ProbeModel& model) {
  std::vector<std::size_t> probes;
  detail::gdsa_impl(table, x, model, detail::VectorTrace{&probes});
  return probes;
}

}  // namespace sts
