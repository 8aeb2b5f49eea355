#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sts/layouts.hpp"
#include "sts/random.hpp"
#include "sts/sorted_table.hpp"

namespace sts {

enum class Distribution { uniform, lognormal, logit };

/// Uniform(a, b) over integers, LogNormal(mu, sigma) or Logit(mu, s).
/// For Uniform, b = 0 stands for the top of the key universe, 2^(r-1) - 1.
struct DistributionSpec {
  Distribution kind = Distribution::uniform;
  std::uint64_t a = 1;
  std::uint64_t b = 0;
  double mu = 0.0;
  double sigma = 1.0;  // s for Logit

  static DistributionSpec uniform(std::uint64_t a = 1, std::uint64_t b = 0) {
    return {Distribution::uniform, a, b, 0.0, 1.0};
  }
  static DistributionSpec lognormal(double mu = 0.0, double sigma = 1.0) {
    return {Distribution::lognormal, 1, 0, mu, sigma};
  }
  static DistributionSpec logit(double mu = 0.5, double s = 0.04) { return {Distribution::logit, 1, 0, mu, s}; }

  static DistributionSpec parse(std::string_view name) {
    if (name == "uniform") return uniform();
    if (name == "lognormal") return lognormal();
    if (name == "logit") return logit();
    throw std::invalid_argument("unknown distribution '" + std::string(name) + "'");
  }

  std::string name() const {
    switch (kind) {
      case Distribution::uniform: return "uniform";
      case Distribution::lognormal: return "lognormal";
      case Distribution::logit: return "logit";
    }
    return "?";
  }

  void validate() const {
    if (kind != Distribution::uniform && !(sigma > 0.0)) throw std::invalid_argument("scale parameter must be positive");
    if (kind == Distribution::uniform && b != 0 && !(a < b)) throw std::invalid_argument("uniform needs a < b");
  }

  /// CDF of the continuous distribution at x (Uniform uses [a, b]).
  double cdf(double x) const {
    switch (kind) {
      case Distribution::uniform:
        return std::clamp((x - static_cast<double>(a)) / static_cast<double>(b - a), 0.0, 1.0);
      case Distribution::lognormal:
        if (x <= 0.0) return 0.0;
        return 0.5 * std::erfc(-(std::log(x) - mu) / (sigma * std::numbers::sqrt2));
      case Distribution::logit:
        return 1.0 / (1.0 + std::exp(-(x - mu) / sigma));
    }
    return 0.0;
  }
};

/// Table sizes chosen to fit successive levels of the memory hierarchy
/// (32 KB L1, 256 KB L2, 8 MB L3 with 32-bit keys; then 12 GB and 32 GB with
/// 64-bit keys).
struct TierPreset {
  std::string_view name;
  std::uint64_t n;
};
inline constexpr TierPreset kTiers[] = {
    {"L1", 7'500}, {"L2", 63'000}, {"L3", 1'500'000}, {"L4", 1'250'000'000}, {"L5", 3'750'000'000},
};

inline std::uint64_t tier_size(std::string_view name) {
  for (const auto& t : kTiers)
    if (t.name == name) return t.n;
  throw std::invalid_argument("unknown table tier '" + std::string(name) + "'");
}

template <TableKey K>
struct GeneratedTable {
  SortedTable<K> table;
  // Continuous samples were mapped affinely so that sample_min -> 1 and
  // sample_max -> 2^(r-1) - 2. Unused for Uniform.
  double sample_min = 0.0;
  double sample_max = 0.0;

  static constexpr double span_keys() { return static_cast<double>(max_table_key<K>()) - 2.0; }

  double to_continuous(K key) const {
    return sample_min + (static_cast<double>(key) - 1.0) / span_keys() * (sample_max - sample_min);
  }
};

/// Draws n unique keys in [1, 2^(r-1) - 1] following `spec`.
template <TableKey K>
GeneratedTable<K> generate_table_mapped(const DistributionSpec& spec, std::uint64_t n, std::uint64_t seed) {
  spec.validate();
  const std::uint64_t universe = max_table_key<K>();
  if (n < 1) throw std::invalid_argument("table size must be at least 1");
  const std::uint64_t lo = spec.kind == Distribution::uniform ? spec.a : 1;
  const std::uint64_t hi = spec.kind == Distribution::uniform && spec.b != 0 ? spec.b : universe;
  if (lo < 1 || hi > universe) throw std::invalid_argument("uniform bounds outside the key universe");
  if (n > (hi - lo + 1) / 2)
    throw std::invalid_argument("table size " + std::to_string(n) + " too close to the universe size " +
                                std::to_string(hi - lo + 1));

  Rng rng(seed);
  std::vector<K> keys;
  keys.reserve(n);
  double smin = 0.0, smax = 0.0;

  auto draw_continuous = [&]() {
    if (spec.kind == Distribution::lognormal) return std::exp(spec.mu + spec.sigma * rng.normal());
    const double u = rng.uniform_open01();
    return spec.mu + spec.sigma * std::log(u / (1.0 - u));
  };
  auto to_key = [&](double x) -> K {
    if (smax <= smin) return 1;
    const long double t = std::clamp((static_cast<long double>(x) - smin) / (smax - smin), 0.0L, 1.0L);
    const auto span = static_cast<long double>(universe - 2);
    return static_cast<K>(std::min<std::uint64_t>(static_cast<std::uint64_t>(std::llroundl(t * span)), universe - 2) + 1);
  };

  if (spec.kind == Distribution::uniform) {
    for (std::uint64_t i = 0; i < n; ++i) keys.push_back(static_cast<K>(rng.uniform_int(lo, hi)));
  } else {
    std::vector<double> samples(n);
    for (auto& s : samples) s = draw_continuous();
    const auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
    smin = *mn;
    smax = *mx;
    for (double s : samples) keys.push_back(to_key(s));
  }
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());

  for (int round = 0; keys.size() < n; ++round) {
    if (round > 10'000) throw std::runtime_error("could not draw enough distinct keys");
    const std::size_t missing = n - keys.size();
    for (std::size_t i = 0; i < missing; ++i)
      keys.push_back(spec.kind == Distribution::uniform ? static_cast<K>(rng.uniform_int(lo, hi))
                                                        : to_key(draw_continuous()));
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  }
  return {SortedTable<K>(std::move(keys)), smin, smax};
}

template <TableKey K>
SortedTable<K> generate_table(const DistributionSpec& spec, std::uint64_t n, std::uint64_t seed) {
  return generate_table_mapped<K>(spec, n, seed).table;
}

/// Query keys, optionally paired with a synthetic search interval each.
template <TableKey K>
struct QueryWorkload {
  std::vector<K> queries;
  std::vector<Interval> intervals;  // empty, or one per query
  double p = std::numeric_limits<double>::quiet_NaN();

  std::size_t size() const { return queries.size(); }
  bool has_intervals() const { return !intervals.empty(); }
};

/// m = fraction * n queries in random order: half drawn from the table, half
/// absent keys falling in a uniformly chosen gap between consecutive keys.
template <TableKey K>
QueryWorkload<K> make_benchmark_queries(const SortedTable<K>& table, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw std::invalid_argument("query fraction must be in (0, 1]");
  const std::size_t n = table.size();
  const auto m = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  const std::uint64_t universe = max_table_key<K>();
  Rng rng(seed);
  QueryWorkload<K> w;
  w.queries.reserve(m);
  const std::size_t present = m / 2;
  for (std::size_t i = 0; i < present; ++i) w.queries.push_back(table[rng.uniform_int(0, n - 1)]);
  std::size_t attempts = 0;
  while (w.queries.size() < m) {
    if (++attempts > 64 * (m + 16)) throw std::runtime_error("table leaves no room for absent query keys");
    const std::uint64_t j = rng.uniform_int(0, n);
    const std::uint64_t below = j == 0 ? 0 : table[j - 1];
    const std::uint64_t above = j == n ? universe + 1 : table[j];
    if (above - below < 2) continue;
    w.queries.push_back(static_cast<K>(rng.uniform_int(below + 1, above - 1)));
  }
  rng.shuffle(w.queries.begin(), w.queries.end());
  return w;
}

/// Interval length ceil((1 - p) n) + 1, ignoring floating-point residue in
/// (1 - p) n.
inline std::size_t rf_interval_length(double p, std::size_t n) {
  const double v = (1.0 - p) * static_cast<double>(n);
  const double r = std::round(v);
  const double c = std::abs(v - r) <= 1e-9 * std::max(1.0, v) ? r : std::ceil(v);
  return static_cast<std::size_t>(c) + 1;
}

/// Absent queries with synthetic intervals of fixed length that contain the
/// query's rank at a uniformly random offset, translated to fit [1, n].
template <TableKey K>
QueryWorkload<K> generate_rf_workload(const SortedTable<K>& table, double p, std::size_t m, std::uint64_t seed) {
  if (!(p >= 0.0 && p < 1.0)) throw std::invalid_argument("reduction factor must be in [0, 1)");
  if (m < 1) throw std::invalid_argument("query count must be at least 1");
  const std::size_t n = table.size();
  const std::uint64_t universe = max_table_key<K>();
  if (n >= universe) throw std::runtime_error("key universe exhausted: no absent keys to query");
  const std::size_t len = rf_interval_length(p, n);
  Rng rng(seed);
  QueryWorkload<K> w;
  w.p = p;
  w.queries.reserve(m);
  w.intervals.reserve(m);
  while (w.queries.size() < m) {
    const auto q = static_cast<K>(rng.uniform_int(1, universe));
    const std::size_t j = bbs_search(table, q).rank;
    if (j > 0 && table[j - 1] == q) continue;
    const auto k = static_cast<std::int64_t>(rng.uniform_int(0, len - 1));
    std::int64_t lo = static_cast<std::int64_t>(j) - k;
    std::int64_t hi = lo + static_cast<std::int64_t>(len) - 1;
    const auto sn = static_cast<std::int64_t>(n);
    if (lo < 1) {
      hi += 1 - lo;
      lo = 1;
    }
    if (hi > sn) {
      lo = std::max<std::int64_t>(1, lo - (hi - sn));
      hi = sn;
    }
    w.queries.push_back(q);
    w.intervals.push_back({static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)});
  }
  return w;
}

}  // namespace sts
