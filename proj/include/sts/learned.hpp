#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>

#include "sts/interpolation.hpp"
#include "sts/layouts.hpp"
#include "sts/neural.hpp"
#include "sts/regression.hpp"
#include "sts/sorted_table.hpp"

namespace sts {

/// A fitted predictor of 1-based table position from key.
using RegressionModel = std::variant<PolyModel, NNModel>;

inline double model_predict(const RegressionModel& model, std::uint64_t key) {
  if (const auto* poly = std::get_if<PolyModel>(&model)) return poly->predict(static_cast<double>(key));
  return std::get<NNModel>(model).predict(key);
}

/// Regression model plus the error envelope measured on the table's keys.
///
/// eps1: largest |round(pred(A[j])) - j| over keys predicted inside [1, n].
/// eps2: largest j predicted below 1 (0 when none is).
/// eps3: smallest j predicted above n (n + 1 when none is).
struct LearnedIndex {
  RegressionModel model;
  std::size_t eps1 = 0;
  std::size_t eps2 = 0;
  std::size_t eps3 = 1;
  std::size_t n = 0;

  /// Longest interval a query can be sent to, as a fraction of n (at most 1).
  double maxleft() const {
    const std::size_t longest = std::max({2 * eps1 + 1, eps2, n + 1 - eps3});
    return std::min(1.0, static_cast<double>(longest) / static_cast<double>(n));
  }
  double reduction_factor() const { return 1.0 - maxleft(); }

  /// Variant that uses eps3 itself instead of the case-(c) interval length
  /// n - eps3 + 1. eps3 counts as 0 when no key is predicted above n.
  double reduction_factor_literal() const {
    const std::size_t e3 = eps3 > n ? 0 : eps3;
    const std::size_t longest = std::max({2 * eps1 + 1, eps2, e3});
    return 1.0 - std::min(1.0, static_cast<double>(longest) / static_cast<double>(n));
  }

  Interval predict_interval(std::uint64_t x) const {
    const std::int64_t p = round_half_up(model_predict(model, x));
    const auto sn = static_cast<std::int64_t>(n);
    if (p < 1) return {1, std::max<std::size_t>(eps2, 1)};
    if (p > sn) return {std::min(eps3, n), n};
    const auto e = static_cast<std::int64_t>(eps1);
    return {static_cast<std::size_t>(std::max<std::int64_t>(1, p - e)),
            static_cast<std::size_t>(std::min<std::int64_t>(sn, p + e))};
  }
};

/// Measures the envelope of `model` over every key of the table.
template <TableKey K>
LearnedIndex build_learned_index(const SortedTable<K>& table, RegressionModel model) {
  LearnedIndex idx{std::move(model), 0, 0, table.size() + 1, table.size()};
  const auto sn = static_cast<std::int64_t>(table.size());
  for (std::size_t j = 1; j <= table.size(); ++j) {
    const std::int64_t p = round_half_up(model_predict(idx.model, table.at_position(j)));
    if (p < 1)
      idx.eps2 = std::max(idx.eps2, j);
    else if (p > sn)
      idx.eps3 = std::min(idx.eps3, j);
    else
      idx.eps1 = std::max(idx.eps1, static_cast<std::size_t>(std::abs(p - static_cast<std::int64_t>(j))));
  }
  return idx;
}

/// Fits a degree-g polynomial to (A[j], j) and measures its envelope. Tables
/// with too few keys for the degree fall back to the largest degree they
/// support; a single key gets the constant model 1.
template <TableKey K>
LearnedIndex fit_learned_index(const SortedTable<K>& table, int degree = 1) {
  if (table.size() == 1) {
    PolyModel constant;
    constant.w = {0.0};
    constant.b = 1.0;
    return build_learned_index(table, constant);
  }
  const int g = std::min<int>(degree, static_cast<int>(table.size()) - 1);
  return build_learned_index(table, fit_poly(samples_from_table(table), g));
}

/// Learned binary search: predicted interval, then branch-free search in it.
template <TableKey K>
SearchOutcome l_bfs_search(const LearnedIndex& index, const SortedTable<K>& table, K x) {
  const Interval w = index.predict_interval(x);
  return bounded_bfs_search(table, x, w.lo, w.hi);
}

/// Learned interpolation search: predicted interval, then interpolation in it.
template <TableKey K>
SearchOutcome l_ibs_search(const LearnedIndex& index, const SortedTable<K>& table, K x) {
  const Interval w = index.predict_interval(x);
  return ibs_search(table, x, w.lo, w.hi);
}

/// Model record followed by `eps <eps1> <eps2> <eps3> <n>`.
std::string serialize(const LearnedIndex& index);
std::string serialize(const RegressionModel& model);

/// Reads a model record and, when present, the eps line.
struct ParsedIndex {
  RegressionModel model;
  bool has_envelope = false;
  std::size_t eps1 = 0, eps2 = 0, eps3 = 0, n = 0;
};
ParsedIndex parse_index(std::istream& in);

/// Loads an index for `table`; an absent or mismatched envelope is recomputed.
template <TableKey K>
LearnedIndex load_index(std::istream& in, const SortedTable<K>& table) {
  ParsedIndex p = parse_index(in);
  if (p.has_envelope && p.n == table.size()) return LearnedIndex{std::move(p.model), p.eps1, p.eps2, p.eps3, p.n};
  return build_learned_index(table, std::move(p.model));
}

}  // namespace sts
