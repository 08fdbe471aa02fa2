#pragma once

// Globally adaptive Gauss-Kronrod (7/15) quadrature for real or complex
// integrands. The interval with the largest error estimate is bisected until
// the summed estimate meets the tolerance.

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <queue>
#include <string>
#include <type_traits>
#include <vector>

#include "chiral/error.hpp"

namespace chiral {

struct QuadratureOptions {
  double abs_tol = 1e-10;
  double rel_tol = 0.0;
  std::size_t max_intervals = 4000;
};

template <class T>
struct QuadratureResult {
  T value{};
  double error = 0.0;
  std::size_t evaluations = 0;
  std::size_t intervals = 0;
};

namespace detail {

inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

// Gauss weights for the odd Kronrod nodes 1, 3, 5 and the centre.
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class T>
double magnitude(const T& v) {
  return std::abs(v);
}

template <class T>
struct Segment {
  double a;
  double b;
  T value;
  double error;
  bool operator<(const Segment& other) const { return error < other.error; }
};

template <class T, class F>
Segment<T> gauss_kronrod_15(F& f, double a, double b) {
  const double centre = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const T fc = f(centre);
  T kronrod = fc * kKronrodWeights[7];
  T gauss = fc * kGaussWeights[3];
  for (std::size_t j = 0; j < 7; ++j) {
    const double dx = half * kKronrodNodes[j];
    const T sum = f(centre - dx) + f(centre + dx);
    kronrod += sum * kKronrodWeights[j];
    if (j % 2 == 1) gauss += sum * kGaussWeights[j / 2];
  }
  return {a, b, kronrod * half, magnitude(T((kronrod - gauss) * half))};
}

}  // namespace detail

/// Integrates f over [a, b]; a > b integrates in reverse. Throws
/// QuadratureFailure when the tolerance cannot be met within max_intervals or
/// when the integrand returns a non-finite value.
template <class F>
auto integrate(F&& f, double a, double b, const QuadratureOptions& options = {})
    -> QuadratureResult<std::decay_t<std::invoke_result_t<F&, double>>> {
  using T = std::decay_t<std::invoke_result_t<F&, double>>;
  QuadratureResult<T> result;
  if (a == b) return result;
  if (a > b) {
    auto flipped = integrate(f, b, a, options);
    flipped.value = -flipped.value;
    return flipped;
  }

  std::priority_queue<detail::Segment<T>> heap;
  auto first = detail::gauss_kronrod_15<T>(f, a, b);
  T total = first.value;
  double total_error = first.error;
  heap.push(first);
  result.evaluations = 15;

  auto target = [&] { return std::max(options.abs_tol, options.rel_tol * detail::magnitude(total)); };
  while (!(total_error <= target())) {
    if (!std::isfinite(total_error) || heap.size() >= options.max_intervals) {
      throw Error(ErrorKind::QuadratureFailure,
                  "adaptive quadrature on [" + std::to_string(a) + ", " + std::to_string(b) +
                      "] stalled at error estimate " + std::to_string(total_error) + " after " +
                      std::to_string(heap.size()) + " intervals");
    }
    const auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      throw Error(ErrorKind::QuadratureFailure,
                  "interval around t = " + std::to_string(mid) + " cannot be subdivided further");
    }
    auto left = detail::gauss_kronrod_15<T>(f, worst.a, mid);
    auto right = detail::gauss_kronrod_15<T>(f, mid, worst.b);
    result.evaluations += 30;
    total += left.value + right.value - worst.value;
    total_error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }

  // Re-sum to drop the cancellation noise accumulated by the running updates.
  T resummed{};
  double error_sum = 0.0;
  result.intervals = heap.size();
  while (!heap.empty()) {
    resummed += heap.top().value;
    error_sum += heap.top().error;
    heap.pop();
  }
  result.value = resummed;
  result.error = error_sum;
  return result;
}

}  // namespace chiral
