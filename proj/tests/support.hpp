// Shared test oracles: adaptive quadrature, bisection inversion of integrated
// rates, Gaussian targets with exact rates, and small statistics helpers. These
// stay independent of the library code paths they are used to check.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "zigzag/rng.hpp"
#include "zigzag/samplers.hpp"

namespace testsupport {

inline double simpson(const std::function<double(double)>& f, double a, double b, double fa,
                      double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b,
                                   double fa, double fm, double fb, double whole, double tol,
                                   int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = simpson(f, a, m, fa, flm, fm);
  const double right = simpson(f, m, b, fm, frm, fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol = 1e-12, int depth = 40) {
  if (a == b) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  return adaptive_simpson_rec(f, a, b, fa, fm, fb, simpson(f, a, b, fa, fm, fb), tol, depth);
}

// first event time of an inhomogeneous rate by bracketing + bisection on the
// integrated rate; nullopt means no event (mass below the deviate)
inline std::optional<double> bisect_first_event(const std::function<double(double)>& rate,
                                                double deviate, double t_cap = 1e7) {
  auto mass = [&](double t) { return adaptive_simpson(rate, 0.0, t, 1e-13); };
  double hi = 1.0;
  while (mass(hi) < deviate) {
    hi *= 2.0;
    if (hi > t_cap) return std::nullopt;
  }
  double lo = 0.0;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mass(mid) < deviate)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-13 * (1.0 + hi)) break;
  }
  return 0.5 * (lo + hi);
}

// Gaussian target with precision matrix P: exact affine event rates
class GaussianExactProvider final : public zz::ExactRateProvider {
 public:
  GaussianExactProvider(Eigen::MatrixXd precision, Eigen::VectorXd mean)
      : precision_(std::move(precision)), mean_(std::move(mean)) {
    neighborhoods_.resize(precision_.rows());
    for (int i = 0; i < precision_.rows(); ++i)
      for (int j = 0; j < precision_.cols(); ++j)
        if (precision_(i, j) != 0.0 || i == j) neighborhoods_[i].push_back(j);
  }

  int dim() const override { return static_cast<int>(precision_.rows()); }

  zz::RateSpec rate(int i, const Eigen::VectorXd& xi, const Eigen::VectorXd& theta) const override {
    const double a = theta[i] * precision_.row(i).dot(xi - mean_);
    const double b = theta[i] * precision_.row(i).dot(theta);
    return zz::AffineRate{a, b};
  }

  std::span<const int> neighborhood(int i) const override { return neighborhoods_[i]; }

 private:
  Eigen::MatrixXd precision_;
  Eigen::VectorXd mean_;
  std::vector<std::vector<int>> neighborhoods_;
};

// Same target driven through the thinning interface: the bound is the exact
// affine rate plus a constant slack, the estimate is the exact rate, so the
// thinning test rejects with probability slack / bound. A negative slack
// instead scales the bound below the true rate, breaking domination on
// purpose.
class GaussianThinnedProvider final : public zz::ThinnedRateProvider {
 public:
  GaussianThinnedProvider(Eigen::MatrixXd precision, Eigen::VectorXd mean, double slack)
      : exact_(std::move(precision), std::move(mean)), slack_(slack) {}

  int dim() const override { return exact_.dim(); }

  zz::RateSpec bound(int i, const Eigen::VectorXd& xi, const Eigen::VectorXd& theta) const override {
    zz::RateSpec spec = exact_.rate(i, xi, theta);
    if (slack_ < 0.0) {
      const auto affine = std::get<zz::AffineRate>(spec.term(0));
      const double shrink = 1.0 + slack_;
      return zz::RateSpec(zz::AffineRate{shrink * affine.a, shrink * affine.b});
    }
    if (slack_ != 0.0) spec.add(zz::AffineRate{slack_, 0.0});
    return spec;
  }

  std::vector<double> draw_subsample(int, zz::RngStream& rng) const override {
    return {rng.uniform()};  // unused by the estimate; keeps stream use uniform
  }

  double rate_estimate(int i, const Eigen::VectorXd& xi, const Eigen::VectorXd& theta,
                       const std::vector<double>&) const override {
    zz::RateSpec spec = exact_.rate(i, xi, theta);
    return spec.value(0.0);
  }

  std::span<const int> bound_neighborhood(int i) const override { return exact_.neighborhood(i); }
  std::span<const int> estimate_neighborhood(int i, const std::vector<double>&) const override {
    return exact_.neighborhood(i);
  }

 private:
  GaussianExactProvider exact_;
  double slack_;
};

inline double mean_of(std::span<const double> xs) {
  double m = 0.0;
  for (double x : xs) m += x;
  return m / static_cast<double>(xs.size());
}

inline double variance_of(std::span<const double> xs) {
  const double m = mean_of(xs);
  double v = 0.0;
  for (double x : xs) v += (x - m) * (x - m);
  return v / static_cast<double>(xs.size() - 1);
}

}  // namespace testsupport
