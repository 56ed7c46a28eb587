#pragma once

#include <cmath>

#include "lss/linalg.hpp"

namespace lss::fd {

inline constexpr double kFirstOrderScale = 1e-5;
inline constexpr double kSecondOrderScale = 1e-4;

inline double step(const Vec& x, double scale = kFirstOrderScale) {
  return scale * (1.0 + x.norm());
}

// Central-difference Jacobian of a vector map; column j is d f / d x_j.
template <class F>
Mat jacobian(F&& f, const Vec& x, double h) {
  const int d = static_cast<int>(x.size());
  Mat J;
  Vec xp = x, xm = x;
  for (int j = 0; j < d; ++j) {
    xp[j] = x[j] + h;
    xm[j] = x[j] - h;
    const Vec df = (f(xp) - f(xm)) / (2.0 * h);
    if (j == 0) J.resize(df.size(), d);
    J.col(j) = df;
    xp[j] = xm[j] = x[j];
  }
  return J;
}

template <class F>
Vec gradient(F&& f, const Vec& x, double h) {
  const int d = static_cast<int>(x.size());
  Vec g(d);
  Vec xp = x, xm = x;
  for (int j = 0; j < d; ++j) {
    xp[j] = x[j] + h;
    xm[j] = x[j] - h;
    g[j] = (f(xp) - f(xm)) / (2.0 * h);
    xp[j] = xm[j] = x[j];
  }
  return g;
}

// Row divergence of a matrix field: out_i = sum_j d M_ij / d x_j.
template <class F>
Vec row_divergence(F&& M, const Vec& x, double h) {
  const int d = static_cast<int>(x.size());
  Vec out = Vec::Zero(d);
  Vec xp = x, xm = x;
  for (int j = 0; j < d; ++j) {
    xp[j] = x[j] + h;
    xm[j] = x[j] - h;
    out += (M(xp).col(j) - M(xm).col(j)) / (2.0 * h);
    xp[j] = xm[j] = x[j];
  }
  return out;
}

namespace detail {

template <class F>
Mat hessian_plain(F&& f, const Vec& x, double h) {
  const int d = static_cast<int>(x.size());
  Mat H(d, d);
  const double f0 = f(x);
  Vec y = x;
  for (int i = 0; i < d; ++i) {
    y[i] = x[i] + h;
    const double fp = f(y);
    y[i] = x[i] - h;
    const double fm = f(y);
    y[i] = x[i];
    H(i, i) = (fp - 2.0 * f0 + fm) / (h * h);
    for (int j = 0; j < i; ++j) {
      y[i] = x[i] + h; y[j] = x[j] + h; const double fpp = f(y);
      y[j] = x[j] - h; const double fpm = f(y);
      y[i] = x[i] - h; const double fmm = f(y);
      y[j] = x[j] + h; const double fmp = f(y);
      y[i] = x[i]; y[j] = x[j];
      H(i, j) = H(j, i) = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
    }
  }
  return H;
}

}  // namespace detail

// Second derivatives with one Richardson level: (4 H(h/2) - H(h)) / 3.
template <class F>
Mat hessian(F&& f, const Vec& x, double h) {
  const Mat coarse = detail::hessian_plain(f, x, h);
  const Mat fine = detail::hessian_plain(f, x, 0.5 * h);
  return (4.0 * fine - coarse) / 3.0;
}

}  // namespace lss::fd

namespace lss::fd {

// Partial derivative along x_j of a matrix-valued map, central differences
// with one Richardson level: (4 D(h/2) - D(h)) / 3.
template <class F>
Mat partial(F&& f, const Vec& x, int j, double h) {
  auto central = [&](double s) {
    Vec xp = x, xm = x;
    xp[j] += s;
    xm[j] -= s;
    return Mat((f(xp) - f(xm)) / (2.0 * s));
  };
  return (4.0 * central(0.5 * h) - central(h)) / 3.0;
}

}  // namespace lss::fd
