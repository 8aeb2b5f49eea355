#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sts/sorted_table.hpp"

namespace sts {

/// Predictor/outcome pairs. For a table these are (A[j], j), j = 1..n.
struct SampleSet {
  std::vector<double> x;
  std::vector<double> y;

  std::size_t size() const { return x.size(); }
};

template <TableKey K>
SampleSet samples_from_table(const SortedTable<K>& table) {
  SampleSet s;
  s.x.reserve(table.size());
  s.y.reserve(table.size());
  for (std::size_t j = 0; j < table.size(); ++j) {
    s.x.push_back(static_cast<double>(table[j]));
    s.y.push_back(static_cast<double>(j + 1));
  }
  return s;
}

/// Neumaier's compensated summation.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Real prediction to table index, rounding halves up. Saturates far outside
/// any table so that the case analysis never overflows.
inline std::int64_t round_half_up(double v) {
  constexpr double kLimit = 0x1.0p62;
  if (!(v > -kLimit)) return static_cast<std::int64_t>(-kLimit);
  if (v > kLimit) return static_cast<std::int64_t>(kLimit);
  return static_cast<std::int64_t>(std::floor(v + 0.5));
}

/// Thrown when the design matrix has fewer distinct predictors than parameters.
class DegenerateFit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Polynomial model  sum_i w_i t^i + b  with  t = (x - shift) / scale.
struct PolyModel {
  int degree = 1;
  std::vector<double> w;  // w[0] multiplies t^1
  double b = 0.0;
  double shift = 0.0;
  double scale = 1.0;

  double predict(double x) const {
    const double t = (x - shift) / scale;
    double acc = 0.0;
    for (std::size_t i = w.size(); i-- > 0;) acc = (acc + w[i]) * t;
    return acc + b;
  }

  /// Coefficients expanded in the raw key x (shift 0, scale 1).
  PolyModel to_raw() const;

  friend bool operator==(const PolyModel&, const PolyModel&) = default;
};

struct FitOptions {
  /// Map keys to [0, 1] by (x - min) / (max - min) before lifting to powers.
  bool normalize = true;
};

/// Least-squares polynomial of degree g (g = 1 is simple linear regression).
PolyModel fit_poly(const SampleSet& samples, int degree, FitOptions options = {});

/// Mean squared error of the model over the samples.
double mse(const PolyModel& model, const SampleSet& samples);

inline double predict(const PolyModel& model, double x) { return model.predict(x); }

/// `poly g shift scale b w1 ... wg`, shortest round-trip decimal form.
std::string serialize(const PolyModel& model);
PolyModel parse_poly(std::string_view line);

namespace detail {

// Solves the (g+1)x(g+1) normal system with entries power_sums[i+j] and
// right-hand side cross_sums[i], by partial-pivot elimination.
// Returns [b, w_1, ..., w_g]. Throws DegenerateFit on a vanishing pivot.
std::vector<double> solve_normal_system(std::span<const double> power_sums, std::span<const double> cross_sums,
                                        int degree);

}  // namespace detail

/// Simple linear regression of position on key over a contiguous run of
/// table keys whose first element sits at 1-based position `first_position`.
template <TableKey K>
PolyModel fit_slr_range(std::span<const K> keys, std::size_t first_position) {
  PolyModel m;
  m.degree = 1;
  m.shift = static_cast<double>(keys.front());
  const double range = static_cast<double>(keys.back() - keys.front());
  if (keys.size() < 2 || range <= 0.0) {
    m.w = {0.0};
    m.b = static_cast<double>(first_position);
    return m;
  }
  m.scale = range;
  CompensatedSum s1, s2, ty, y0;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const double t = static_cast<double>(keys[i] - keys.front()) / range;
    const double y = static_cast<double>(first_position + i);
    s1.add(t);
    s2.add(t * t);
    y0.add(y);
    ty.add(t * y);
  }
  const double power[3] = {static_cast<double>(keys.size()), s1.value(), s2.value()};
  const double cross[2] = {y0.value(), ty.value()};
  const auto c = detail::solve_normal_system(power, cross, 1);
  m.b = c[0];
  m.w = {c[1]};
  return m;
}

}  // namespace sts
