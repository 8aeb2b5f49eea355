#pragma once

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sts/datasets.hpp"
#include "sts/gdsa.hpp"
#include "sts/interpolation.hpp"
#include "sts/layouts.hpp"
#include "sts/learned.hpp"
#include "sts/sorted_table.hpp"

namespace sts {

enum class ProcKind { bbs, bfs, bfe, bfb, ibs, l_bfs, l_ibs, gdsa, restricted_bfs };

/// A named search procedure: bbs, bfs, bfe, bfb, ibs, l-bfs, l-ibs,
/// gdsa:<model>, or restricted (branch-free search inside each workload
/// interval).
struct Procedure {
  ProcKind kind = ProcKind::bbs;
  ProbeModel probe_model;

  static Procedure parse(std::string_view name);
  std::string name() const;
  bool learned() const { return kind == ProcKind::l_bfs || kind == ProcKind::l_ibs; }
};

/// A procedure bound to the table and whatever auxiliary structure it needs.
template <TableKey K>
class PreparedSearch {
 public:
  PreparedSearch(Procedure proc, const SortedTable<K>& table, const LearnedIndex* index = nullptr)
      : proc_(proc), table_(&table), index_(index) {
    if (proc.learned() && index == nullptr)
      throw std::invalid_argument("procedure " + proc.name() + " needs a trained model");
    if (index != nullptr && proc.learned() && index->n != table.size())
      throw std::invalid_argument("model was fitted to a table of a different size");
    if (proc.kind == ProcKind::bfe) eytzinger_.emplace(build_eytzinger(table));
    if (proc.kind == ProcKind::bfb) btree_.emplace(build_btree_layout(table));
    if (proc.kind == ProcKind::gdsa && proc.probe_model.kind == ProbeKind::sim && proc.probe_model.slope == 0.0)
      proc_.probe_model = full_range_sim(table);
  }

  const Procedure& procedure() const { return proc_; }
  const SortedTable<K>& table() const { return *table_; }

  /// Calls `body(search)` with a callable search(x, i) specialised for the
  /// procedure, so a query loop inside `body` carries no dispatch.
  template <typename Body>
  decltype(auto) visit(const QueryWorkload<K>& w, Body&& body) const {
    const SortedTable<K>& t = *table_;
    if (proc_.kind == ProcKind::restricted_bfs && w.intervals.size() != w.queries.size())
      throw std::invalid_argument("procedure restricted needs a workload with intervals");
    switch (proc_.kind) {
      case ProcKind::bbs: return body([&](K x, std::size_t) { return bbs_search(t, x); });
      case ProcKind::bfs: return body([&](K x, std::size_t) { return bfs_search(t, x); });
      case ProcKind::bfe: return body([&, &e = *eytzinger_](K x, std::size_t) { return bfe_search(e, x); });
      case ProcKind::bfb: return body([&, &b = *btree_](K x, std::size_t) { return bfb_search(b, x); });
      case ProcKind::ibs: return body([&](K x, std::size_t) { return ibs_search(t, x); });
      case ProcKind::l_bfs: return body([&, &ix = *index_](K x, std::size_t) { return l_bfs_search(ix, t, x); });
      case ProcKind::l_ibs: return body([&, &ix = *index_](K x, std::size_t) { return l_ibs_search(ix, t, x); });
      case ProcKind::gdsa:
        return body([&, m = proc_.probe_model](K x, std::size_t) { return gdsa_search(t, x, m); });
      case ProcKind::restricted_bfs:
        return body([&](K x, std::size_t i) {
          const Interval& iv = w.intervals[i];
          return bounded_bfs_search(t, x, iv.lo, iv.hi);
        });
    }
    throw std::logic_error("unhandled procedure");
  }

 private:
  Procedure proc_;
  const SortedTable<K>* table_;
  const LearnedIndex* index_;
  std::optional<EytzingerTable<K>> eytzinger_;
  std::optional<BTreeLayoutTable<K>> btree_;
};

struct BreakevenPoint {
  double p = 0.0;
  double restricted_median = 0.0;
  double competitor_median = 0.0;
  bool restricted_wins = false;
};

struct BenchReport {
  std::string procedure;
  std::string dataset;
  std::size_t m = 0;
  std::size_t reps = 0;
  std::vector<double> rep_seconds;  // per-query time of each timed repetition
  double mean_seconds = 0.0;
  double median_seconds = 0.0;
  double min_seconds = 0.0;
  double mean_iterations = 0.0;
  std::uint64_t checksum = 0;
  std::optional<double> reduction_factor;

  // Breakeven search only.
  std::string competitor;
  std::vector<BreakevenPoint> sweep;
  std::optional<double> breakeven;
  std::vector<std::string> violations;
};

inline constexpr std::uint64_t kChecksumSeed = 1469598103934665603ULL;

inline std::uint64_t mix_checksum(std::uint64_t acc, std::uint64_t rank) {
  return (acc ^ rank) * 1099511628211ULL;
}

/// Sets mean, median and min from rep_seconds.
void summarize_times(BenchReport& report);

/// Exact mean of the iteration counts over the workload.
template <TableKey K>
double count_iterations(const PreparedSearch<K>& search, const QueryWorkload<K>& w) {
  if (w.queries.empty()) throw std::invalid_argument("empty workload");
  return search.visit(w, [&](auto&& find) {
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < w.queries.size(); ++i) total += find(w.queries[i], i).iterations;
    return static_cast<double>(total) / static_cast<double>(w.queries.size());
  });
}

/// Rank checksum over the workload, in query order.
template <TableKey K>
std::uint64_t rank_checksum(const PreparedSearch<K>& search, const QueryWorkload<K>& w) {
  return search.visit(w, [&](auto&& find) {
    std::uint64_t acc = kChecksumSeed;
    for (std::size_t i = 0; i < w.queries.size(); ++i) acc = mix_checksum(acc, find(w.queries[i], i).rank);
    return acc;
  });
}

namespace detail {

// Wall time of one pass over the workload divided by m. `extra(x)` is folded
// into the checksum so its cost is not optimised away.
template <TableKey K, typename Find, typename Extra>
double time_pass(const QueryWorkload<K>& w, Find& find, Extra& extra, std::uint64_t& checksum) {
  using Clock = std::chrono::steady_clock;
  std::uint64_t acc = kChecksumSeed;
  const auto start = Clock::now();
  for (std::size_t i = 0; i < w.queries.size(); ++i) {
    const K x = w.queries[i];
    acc = mix_checksum(acc, find(x, i).rank) + extra(x);
  }
  const auto stop = Clock::now();
  checksum = acc;
  return std::chrono::duration<double>(stop - start).count() / static_cast<double>(w.queries.size());
}

struct NoExtra {
  template <typename K>
  std::uint64_t operator()(K) const {
    return 0;
  }
};

template <TableKey K, typename Extra>
BenchReport time_impl(const PreparedSearch<K>& search, const QueryWorkload<K>& w, std::size_t reps, Extra extra) {
  if (w.queries.empty()) throw std::invalid_argument("empty workload");
  if (reps < 3) throw std::invalid_argument("at least 3 repetitions are required");
  BenchReport r;
  r.procedure = search.procedure().name();
  r.m = w.queries.size();
  r.reps = reps;
  search.visit(w, [&](auto&& find) {
    std::uint64_t sum = 0;
    time_pass(w, find, extra, sum);  // warm-up
    for (std::size_t k = 0; k < reps; ++k) r.rep_seconds.push_back(time_pass(w, find, extra, sum));
    return 0;
  });
  summarize_times(r);
  r.checksum = rank_checksum(search, w);
  r.mean_iterations = count_iterations(search, w);
  return r;
}

}  // namespace detail

/// Times `reps` passes over the workload after one discarded warm-up pass.
template <TableKey K>
BenchReport time_procedure(const PreparedSearch<K>& search, const QueryWorkload<K>& w, std::size_t reps,
                           const LearnedIndex* index = nullptr) {
  BenchReport r = detail::time_impl(search, w, reps, detail::NoExtra{});
  if (index != nullptr && search.procedure().learned()) r.reduction_factor = index->reduction_factor();
  return r;
}

struct BreakevenOptions {
  std::size_t m = 100'000;
  std::size_t reps = 5;
  std::vector<double> grid = {0.90, 0.95, 0.99, 0.995, 0.999, 0.9995};
  std::uint64_t seed = 1;
  double noise_band = 2.0;
};

inline constexpr double kMaxReductionFactor = 0.9995;

/// Least grid p at which search restricted to an rf-workload interval (plus
/// the cost of evaluating a linear model, standing in for the predictor)
/// beats the competitor on the same queries.
template <TableKey K>
BenchReport find_breakeven_rf(const SortedTable<K>& table, Procedure competitor, const BreakevenOptions& opt) {
  if (opt.grid.empty()) throw std::invalid_argument("empty reduction-factor grid");
  for (std::size_t i = 0; i < opt.grid.size(); ++i) {
    if (!(opt.grid[i] > 0.0 && opt.grid[i] <= kMaxReductionFactor))
      throw std::invalid_argument("grid values must lie in (0, " + std::to_string(kMaxReductionFactor) + "]");
    if (i > 0 && !(opt.grid[i] > opt.grid[i - 1])) throw std::invalid_argument("grid must be strictly ascending");
  }
  if (competitor.kind == ProcKind::restricted_bfs || competitor.learned())
    throw std::invalid_argument("competitor must be a standard search procedure");

  const LearnedIndex slr = fit_learned_index(table, 1);
  const PolyModel& line = std::get<PolyModel>(slr.model);
  auto predictor = [&line](K x) { return static_cast<std::uint64_t>(round_half_up(line.predict(static_cast<double>(x)))); };

  const PreparedSearch<K> restricted(Procedure{ProcKind::restricted_bfs, {}}, table);
  const PreparedSearch<K> rival(competitor, table);

  BenchReport r;
  r.procedure = "restricted";
  r.competitor = competitor.name();
  r.m = opt.m;
  r.reps = opt.reps;
  for (std::size_t i = 0; i < opt.grid.size(); ++i) {
    const double p = opt.grid[i];
    const auto w = generate_rf_workload(table, p, opt.m, opt.seed);
    const BenchReport a = detail::time_impl(restricted, w, opt.reps, predictor);
    const BenchReport b = detail::time_impl(rival, w, opt.reps, detail::NoExtra{});
    if (a.checksum != b.checksum)
      throw std::logic_error("restricted and competitor ranks disagree at p = " + std::to_string(p));
    r.checksum = a.checksum;
    r.sweep.push_back({p, a.median_seconds, b.median_seconds, a.median_seconds < b.median_seconds});
  }
  for (std::size_t i = 0; i < r.sweep.size(); ++i) {
    if (r.sweep[i].restricted_wins && !r.breakeven) r.breakeven = r.sweep[i].p;
    if (r.breakeven && !r.sweep[i].restricted_wins)
      r.violations.push_back("restricted search loses at p = " + std::to_string(r.sweep[i].p) +
                             " after winning at a smaller p");
    for (std::size_t k = 0; k < i; ++k)
      if (r.sweep[i].restricted_median > opt.noise_band * r.sweep[k].restricted_median)
        r.violations.push_back("restricted median at p = " + std::to_string(r.sweep[i].p) + " exceeds " +
                               std::to_string(opt.noise_band) + "x the median at p = " +
                               std::to_string(r.sweep[k].p));
  }
  return r;
}

enum class ReportFormat { csv, text, json };
ReportFormat parse_format(std::string_view name);

/// Timing reports as one row each.
std::string format_reports(const std::vector<BenchReport>& reports, ReportFormat format);
/// Breakeven sweep, one row per grid point, and the breakeven itself.
std::string format_breakeven(const BenchReport& report, ReportFormat format);

}  // namespace sts
