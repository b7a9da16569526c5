#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "cpthermal/errors.hpp"

namespace cpthermal {

namespace detail {

struct DD {
  double hi;
  double lo;
};

inline DD two_sum(double a, double b) {
  const double s = a + b;
  const double bb = s - a;
  return {s, (a - (s - bb)) + (b - bb)};
}

inline DD two_prod(double a, double b) {
  const double p = a * b;
  return {p, std::fma(a, b, -p)};
}

template <class T> double magnitude(const T &v) { return std::abs(v); }

} // namespace detail

/// Result of a panelled quadrature.
template <class T> struct QuadResult {
  T value{};
  double error = 0.0; // summed Kronrod error estimates
  double l1 = 0.0;    // integral of |f|
};

struct QuadOptions {
  double rel_tol = 1e-10;
  double abs_tol = 0.0;
  unsigned max_depth = 18;
  const char *what = "quadrature";
};

namespace detail {

template <class T> struct Segment {
  double a, b;
  T value;
  double error, l1;
};

// One G10/K21 application on [a, b]. Boost reports |K - G| on the reference
// interval, so the error is rescaled here.
template <class F> auto gk21(F &f, double a, double b) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 21>;
  using T = decltype(f(0.0));
  double err = 0.0, l1 = 0.0;
  const T v = GK::integrate(f, a, b, 0, 0.0, &err, &l1);
  return Segment<T>{a, b, v, err * 0.5 * (b - a), l1};
}

} // namespace detail

/// Globally adaptive Gauss-Kronrod (G10/K21) seeded with the panels
/// [b_i, b_{i+1}]; the panel with the largest error is bisected until the
/// summed error meets the target. Throws ConvergenceError otherwise.
template <class F>
auto integrate_panels(F &&f, std::span<const double> breaks,
                      const QuadOptions &opt = {}) {
  using T = decltype(f(0.0));
  using Seg = detail::Segment<T>;
  auto cmp = [](const Seg &x, const Seg &y) { return x.error < y.error; };
  std::vector<Seg> heap;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
    if (breaks[i + 1] > breaks[i])
      heap.push_back(detail::gk21(f, breaks[i], breaks[i + 1]));
  std::make_heap(heap.begin(), heap.end(), cmp);

  auto totals = [&] {
    QuadResult<T> r;
    for (const auto &g : heap) {
      r.value += g.value;
      r.error += g.error;
      r.l1 += g.l1;
    }
    return r;
  };
  auto target = [&](const QuadResult<T> &r) {
    // floor: round-off on the panel sums themselves
    return std::max(
        {opt.abs_tol,
         opt.rel_tol * std::max(detail::magnitude(r.value), 1e-3 * r.l1),
         64.0 * std::numeric_limits<double>::epsilon() * r.l1});
  };

  const std::size_t max_segments =
      heap.size() + (std::size_t{1} << std::min(opt.max_depth, 24u));
  QuadResult<T> res = totals();
  std::size_t since_refresh = 0;
  while (!heap.empty() && res.error > target(res) && heap.size() < max_segments) {
    std::pop_heap(heap.begin(), heap.end(), cmp);
    const Seg worst = heap.back();
    heap.pop_back();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      heap.push_back(worst);
      std::push_heap(heap.begin(), heap.end(), cmp);
      break;
    }
    const Seg lo = detail::gk21(f, worst.a, mid);
    const Seg hi = detail::gk21(f, mid, worst.b);
    heap.push_back(lo);
    std::push_heap(heap.begin(), heap.end(), cmp);
    heap.push_back(hi);
    std::push_heap(heap.begin(), heap.end(), cmp);
    res.value += lo.value + hi.value - worst.value;
    res.error += lo.error + hi.error - worst.error;
    res.l1 += lo.l1 + hi.l1 - worst.l1;
    // running sums drift; rebuild them now and then
    if (++since_refresh == 256) {
      since_refresh = 0;
      res = totals();
    }
  }
  res = totals();
  if (!(res.error <= target(res)))
    throw ConvergenceError(std::string(opt.what) + ": quadrature did not converge",
                           detail::magnitude(res.value), res.error);
  return res;
}

template <class F>
auto integrate_panels(F &&f, std::initializer_list<double> breaks,
                      const QuadOptions &opt = {}) {
  const std::vector<double> b(breaks);
  return integrate_panels(std::forward<F>(f), std::span<const double>(b), opt);
}

/// Sorted, de-duplicated breakpoints restricted to [lo, hi] with both ends.
inline std::vector<double> make_breaks(std::vector<double> pts, double lo,
                                       double hi) {
  pts.push_back(lo);
  pts.push_back(hi);
  std::erase_if(pts, [&](double p) { return !(p >= lo && p <= hi); });
  std::sort(pts.begin(), pts.end());
  const double eps = 1e-13 * std::max(std::abs(lo), std::abs(hi));
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [eps](double a, double b) { return b - a <= eps; }),
            pts.end());
  pts.front() = lo;
  pts.back() = hi;
  return pts;
}

} // namespace cpthermal
