#include "zigzag/basis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace zz {

DyadicIndex index_to_pair(int n) {
  if (n < 1) throw std::domain_error("index_to_pair: single index must be >= 1");
  int level = 0;
  while ((2 << level) <= n) ++level;  // level = floor(log2 n)
  return DyadicIndex{level, n - (1 << level)};
}

int pair_to_index(int level, int position) {
  if (level < 0 || position < 0 || position >= (1 << level))
    throw std::domain_error("pair_to_index: position must lie in [0, 2^level)");
  return (1 << level) + position;
}

DependencyGraph::DependencyGraph(int levels) {
  if (levels < 0) throw std::domain_error("DependencyGraph: truncation level must be >= 0");
  const int m = (2 << levels) - 1;
  ancestors_.resize(m);
  descendants_.resize(m);
  neighborhood_.resize(m);
  for (int k = 0; k < m; ++k) {
    // ancestors via the parent walk n -> n/2, stored in increasing slot order
    for (int n = k + 1; n >= 1; n /= 2) ancestors_[k].push_back(n - 1);
    std::reverse(ancestors_[k].begin(), ancestors_[k].end());
    // descendants form the complete subtree below k
    std::vector<int> frontier{k + 1};
    while (!frontier.empty()) {
      const int n = frontier.back();
      frontier.pop_back();
      if (n > m) continue;
      descendants_[k].push_back(n - 1);
      frontier.push_back(2 * n);
      frontier.push_back(2 * n + 1);
    }
    std::sort(descendants_[k].begin(), descendants_[k].end());
    std::merge(ancestors_[k].begin(), ancestors_[k].end(), descendants_[k].begin(),
               descendants_[k].end(), std::back_inserter(neighborhood_[k]));
    neighborhood_[k].erase(std::unique(neighborhood_[k].begin(), neighborhood_[k].end()),
                           neighborhood_[k].end());
  }
}

std::vector<int> DependencyGraph::common_ancestors(int k, int l) const {
  std::vector<int> out;
  std::set_intersection(ancestors_[k].begin(), ancestors_[k].end(), ancestors_[l].begin(),
                        ancestors_[l].end(), std::back_inserter(out));
  return out;
}

namespace {

// exact integral of sqrt(t) (c0 + c1 t) over [s0, s1]
double sqrt_linear_integral(double s0, double s1, double c0, double c1) {
  auto prim = [&](double t) {
    const double rt = std::sqrt(t);
    return c0 * (2.0 / 3.0) * t * rt + c1 * (2.0 / 5.0) * t * t * rt;
  };
  return prim(s1) - prim(s0);
}

}  // namespace

BasisContext::BasisContext(int levels, double horizon, double start_value, double end_value)
    : levels_(levels),
      horizon_(horizon),
      start_value_(start_value),
      end_value_(end_value),
      size_((2 << levels) - 1),
      graph_(levels) {
  if (levels < 0) throw std::domain_error("BasisContext: truncation level must be >= 0");
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw std::domain_error("BasisContext: horizon must be positive");

  lo_.resize(size_);
  hi_.resize(size_);
  peak_.resize(size_);
  integral_.resize(size_);
  sqrt_integral_.resize(size_);
  ramp_integral_.resize(size_);
  pair_integrals_.resize(size_);

  for (int k = 0; k < size_; ++k) {
    const DyadicIndex d = index_to_pair(k + 1);
    const double len = std::ldexp(horizon_, -d.level);
    lo_[k] = d.position * len;
    hi_[k] = lo_[k] + len;
    peak_[k] = 0.5 * std::sqrt(len);  // 2^{-i/2} sqrt(T) / 2
    integral_[k] = 0.5 * len * peak_[k];
    ramp_integral_[k] = integral_[k] * (1.0 - support_mid(k) / horizon_);
    const double h = 0.5 * len, p = peak_[k], mid = lo_[k] + h;
    sqrt_integral_[k] = sqrt_linear_integral(lo_[k], mid, -p * lo_[k] / h, p / h) +
                        sqrt_linear_integral(mid, hi_[k], p * hi_[k] / h, -p / h);
  }
  for (int k = 0; k < size_; ++k) {
    const auto nbh = graph_.neighborhood(k);
    pair_integrals_[k].reserve(nbh.size());
    for (int j : nbh) pair_integrals_[k].push_back(pair_overlap(j, k));
  }
}

void BasisContext::check_time(double t) const {
  if (!(t >= 0.0 && t <= horizon_))
    throw std::domain_error("BasisContext: time outside [0, T]");
}

double BasisContext::phi(int k, double t) const {
  check_time(t);
  if (t <= lo_[k] || t >= hi_[k]) return 0.0;
  const double mid = support_mid(k), h = 0.5 * support_len(k);
  return t <= mid ? peak_[k] * (t - lo_[k]) / h : peak_[k] * (hi_[k] - t) / h;
}

double BasisContext::bridge(double t) const {
  check_time(t);
  // sqrt(t/T) v rather than sqrt(t) v / sqrt(T): pins X(T) = v exactly
  return (1.0 - t / horizon_) * start_value_ + std::sqrt(t / horizon_) * end_value_;
}

double BasisContext::hat_sum(const Eigen::VectorXd& xi, double t) const {
  check_time(t);
  double acc = 0.0;
  // one basis function covers t per level
  for (int i = 0; i <= levels_; ++i) {
    const double len = std::ldexp(horizon_, -i);
    int j = static_cast<int>(t / len);
    j = std::min(j, (1 << i) - 1);
    const int k = (1 << i) + j - 1;
    if (t > lo_[k] && t < hi_[k]) {
      const double mid = support_mid(k), h = 0.5 * len;
      acc += xi[k] * (t <= mid ? peak_[k] * (t - lo_[k]) / h : peak_[k] * (hi_[k] - t) / h);
    }
  }
  return acc;
}

double BasisContext::expand(const Eigen::VectorXd& xi, double t) const {
  return bridge(t) + hat_sum(xi, t);
}

Eigen::VectorXd BasisContext::expand_grid(const Eigen::VectorXd& xi) const {
  const int points = grid_size();
  Eigen::VectorXd hats = Eigen::VectorXd::Zero(points);
  // midpoint displacement, coarse to fine: every coarser hat is linear across a
  // finer support, so the hat sum at a support midpoint is the average of the
  // endpoint values plus the peak contribution of its own function
  for (int i = 0; i <= levels_; ++i) {
    const int stride = 1 << (levels_ + 1 - i);
    for (int j = 0; j < (1 << i); ++j) {
      const int k = (1 << i) + j - 1;
      const int m_lo = j * stride, m_hi = m_lo + stride, m_mid = m_lo + stride / 2;
      hats[m_mid] = 0.5 * (hats[m_lo] + hats[m_hi]) + xi[k] * peak_[k];
    }
  }
  Eigen::VectorXd out(points);
  for (int m = 0; m < points; ++m) out[m] = bridge(grid_time(m)) + hats[m];
  return out;
}

int BasisContext::grid_first(int k) const {
  const DyadicIndex d = index_to_pair(k + 1);
  return d.position << (levels_ + 1 - d.level);
}

int BasisContext::grid_last(int k) const {
  const DyadicIndex d = index_to_pair(k + 1);
  return (d.position + 1) << (levels_ + 1 - d.level);
}

double BasisContext::pair_overlap(int a, int b) const {
  if (a == b) return support_len(a) * peak_[a] * peak_[a] / 3.0;
  // order so that b has the finer (contained) support
  if (support_len(a) < support_len(b)) std::swap(a, b);
  if (!(lo_[b] >= lo_[a] && hi_[b] <= hi_[a])) return 0.0;  // disjoint interiors
  // phi_a is linear on each half of supp(phi_b), so the product is quadratic
  // there and Simpson's rule is exact
  double total = 0.0;
  const double mid = support_mid(b);
  for (const auto& [s0, s1] : {std::pair{lo_[b], mid}, std::pair{mid, hi_[b]}}) {
    const double sm = 0.5 * (s0 + s1);
    total += (s1 - s0) / 6.0 *
             (phi(a, s0) * phi(b, s0) + 4.0 * phi(a, sm) * phi(b, sm) + phi(a, s1) * phi(b, s1));
  }
  return total;
}

}  // namespace zz
