#include "sts/regression.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include "format_util.hpp"

namespace sts {

namespace detail {

std::vector<double> solve_normal_system(std::span<const double> power_sums, std::span<const double> cross_sums,
                                        int degree) {
  const std::size_t dim = static_cast<std::size_t>(degree) + 1;
  std::vector<long double> m(dim * (dim + 1));
  long double largest = 0.0L;
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      m[i * (dim + 1) + j] = power_sums[i + j];
      largest = std::max(largest, std::abs(m[i * (dim + 1) + j]));
    }
    m[i * (dim + 1) + dim] = cross_sums[i];
  }
  const long double tiny = largest * 1e-14L;
  for (std::size_t col = 0; col < dim; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < dim; ++r)
      if (std::abs(m[r * (dim + 1) + col]) > std::abs(m[pivot * (dim + 1) + col])) pivot = r;
    if (!(std::abs(m[pivot * (dim + 1) + col]) > tiny))
      throw DegenerateFit("normal equations are singular: too few distinct keys for degree " +
                          std::to_string(degree));
    if (pivot != col)
      for (std::size_t c = 0; c <= dim; ++c) std::swap(m[pivot * (dim + 1) + c], m[col * (dim + 1) + c]);
    for (std::size_t r = col + 1; r < dim; ++r) {
      const long double f = m[r * (dim + 1) + col] / m[col * (dim + 1) + col];
      for (std::size_t c = col; c <= dim; ++c) m[r * (dim + 1) + c] -= f * m[col * (dim + 1) + c];
    }
  }
  std::vector<long double> sol(dim);
  for (std::size_t i = dim; i-- > 0;) {
    long double acc = m[i * (dim + 1) + dim];
    for (std::size_t c = i + 1; c < dim; ++c) acc -= m[i * (dim + 1) + c] * sol[c];
    sol[i] = acc / m[i * (dim + 1) + i];
  }
  std::vector<double> out(sol.begin(), sol.end());
  for (double v : out)
    if (!std::isfinite(v)) throw DegenerateFit("least-squares solution is not finite");
  return out;
}

}  // namespace detail

PolyModel PolyModel::to_raw() const {
  // sum_i c_i ((x - s) / k)^i expanded by the binomial theorem; c_0 = b.
  const std::size_t dim = w.size() + 1;
  std::vector<double> coeff(dim, 0.0);
  std::vector<double> binom(dim, 0.0);
  for (std::size_t i = 0; i < dim; ++i) {
    const double ci = i == 0 ? b : w[i - 1];
    const double inv_scale_pow = std::pow(1.0 / scale, static_cast<double>(i));
    // binomial row i
    binom[0] = 1.0;
    for (std::size_t k = 1; k <= i; ++k) binom[k] = binom[k - 1] * static_cast<double>(i - k + 1) / static_cast<double>(k);
    for (std::size_t k = 0; k <= i; ++k)
      coeff[k] += ci * inv_scale_pow * binom[k] * std::pow(-shift, static_cast<double>(i - k));
  }
  PolyModel raw;
  raw.degree = degree;
  raw.b = coeff[0];
  raw.w.assign(coeff.begin() + 1, coeff.end());
  return raw;
}

PolyModel fit_poly(const SampleSet& samples, int degree, FitOptions options) {
  if (degree < 1) throw std::invalid_argument("polynomial degree must be at least 1");
  if (samples.x.size() != samples.y.size()) throw std::invalid_argument("sample set has mismatched x/y lengths");
  const std::size_t n = samples.size();
  if (n < static_cast<std::size_t>(degree) + 1)
    throw DegenerateFit("need at least " + std::to_string(degree + 1) + " samples for degree " +
                        std::to_string(degree));
  {
    std::vector<double> xs = samples.x;
    std::sort(xs.begin(), xs.end());
    const auto distinct = static_cast<std::size_t>(std::unique(xs.begin(), xs.end()) - xs.begin());
    if (distinct < static_cast<std::size_t>(degree) + 1)
      throw DegenerateFit("only " + std::to_string(distinct) + " distinct keys for degree " + std::to_string(degree));
  }

  PolyModel model;
  model.degree = degree;
  if (options.normalize) {
    const auto [lo, hi] = std::minmax_element(samples.x.begin(), samples.x.end());
    model.shift = *lo;
    model.scale = *hi - *lo;
  }

  const std::size_t dim = static_cast<std::size_t>(degree) + 1;
  std::vector<CompensatedSum> power(2 * dim - 1), cross(dim);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = (samples.x[i] - model.shift) / model.scale;
    double tp = 1.0;
    for (std::size_t k = 0; k < 2 * dim - 1; ++k) {
      power[k].add(tp);
      if (k < dim) cross[k].add(samples.y[i] * tp);
      tp *= t;
    }
  }
  std::vector<double> ps, cs;
  for (const auto& s : power) ps.push_back(s.value());
  for (const auto& s : cross) cs.push_back(s.value());
  const auto c = detail::solve_normal_system(ps, cs, degree);
  model.b = c[0];
  model.w.assign(c.begin() + 1, c.end());
  return model;
}

double mse(const PolyModel& model, const SampleSet& samples) {
  if (samples.size() == 0) throw std::invalid_argument("mse of an empty sample set");
  CompensatedSum acc;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double r = model.predict(samples.x[i]) - samples.y[i];
    acc.add(r * r);
  }
  return acc.value() / static_cast<double>(samples.size());
}

std::string serialize(const PolyModel& model) {
  std::string out = "poly " + std::to_string(model.degree);
  for (double v : {model.shift, model.scale, model.b}) out += ' ' + detail::format_double(v);
  for (double v : model.w) out += ' ' + detail::format_double(v);
  return out;
}

PolyModel parse_poly(std::string_view line) {
  std::istringstream in{std::string(line)};
  std::string tag;
  PolyModel m;
  if (!(in >> tag) || tag != "poly") throw std::runtime_error("expected a 'poly' model record");
  std::string tok;
  auto next = [&]() {
    if (!(in >> tok)) throw std::runtime_error("truncated 'poly' model record");
    return detail::parse_double(tok);
  };
  if (!(in >> m.degree) || m.degree < 1) throw std::runtime_error("bad polynomial degree in model record");
  m.shift = next();
  m.scale = next();
  m.b = next();
  m.w.resize(static_cast<std::size_t>(m.degree));
  for (auto& v : m.w) v = next();
  return m;
}

}  // namespace sts
