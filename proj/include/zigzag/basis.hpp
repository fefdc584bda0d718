#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

namespace zz {

// Level/position address of a basis function. Single indexing n = 2^i + j is
// 1-based; the corresponding storage slot in coefficient vectors is n - 1.
struct DyadicIndex {
  int level = 0;
  int position = 0;

  int single() const { return (1 << level) + position; }
  int slot() const { return single() - 1; }
};

DyadicIndex index_to_pair(int n);
int pair_to_index(int level, int position);

// Ancestor/descendant structure of the truncated basis: h is an ancestor of k
// when supp(phi_k) is contained in supp(phi_h). Every index is its own ancestor
// and descendant; the neighborhood N_k is the union of both sets.
class DependencyGraph {
 public:
  DependencyGraph() = default;
  explicit DependencyGraph(int levels);

  int size() const { return static_cast<int>(neighborhood_.size()); }
  std::span<const int> ancestors(int k) const { return ancestors_[k]; }
  std::span<const int> descendants(int k) const { return descendants_[k]; }
  std::span<const int> neighborhood(int k) const { return neighborhood_[k]; }
  std::vector<int> common_ancestors(int k, int l) const;

 private:
  std::vector<std::vector<int>> ancestors_;
  std::vector<std::vector<int>> descendants_;
  std::vector<std::vector<int>> neighborhood_;
};

// Truncated Faber-Schauder basis on [0,T] with bridge pinning. The expansion of
// a coefficient vector xi of length M = 2^{N+1} - 1 is
//   X(t) = (1 - t/T) u + sqrt(t/T) v + sum_k xi_k phi_k(t),
// so X(0) = u and X(T) = v for every xi. All overlap integrals used by the
// linear model are precomputed exactly at construction.
class BasisContext {
 public:
  BasisContext(int levels, double horizon, double start_value, double end_value);

  int levels() const { return levels_; }
  double horizon() const { return horizon_; }
  double start_value() const { return start_value_; }
  double end_value() const { return end_value_; }
  int size() const { return size_; }  // M = 2^{N+1} - 1

  // geometry of phi_k; k is the 0-based slot
  double support_lo(int k) const { return lo_[k]; }
  double support_hi(int k) const { return hi_[k]; }
  double support_len(int k) const { return hi_[k] - lo_[k]; }
  double support_mid(int k) const { return 0.5 * (lo_[k] + hi_[k]); }
  double peak(int k) const { return peak_[k]; }

  double phi(int k, double t) const;
  double bridge(double t) const;                       // pinned part of the expansion
  double expand(const Eigen::VectorXd& xi, double t) const;
  double hat_sum(const Eigen::VectorXd& xi, double t) const;  // expansion without bridge

  // values of the expansion at the dyadic grid t_m = m T / 2^{N+1}, O(M) total
  Eigen::VectorXd expand_grid(const Eigen::VectorXd& xi) const;
  int grid_size() const { return (size_ + 1) + 1; }  // 2^{N+1} + 1 points
  double grid_time(int m) const { return static_cast<double>(m) * horizon_ / (size_ + 1); }
  int grid_first(int k) const;  // grid index of support_lo(k)
  int grid_last(int k) const;   // grid index of support_hi(k)

  // exact overlap integrals
  double overlap_integral(int k) const { return integral_[k]; }     // int phi_k
  double overlap_sqrt(int k) const { return sqrt_integral_[k]; }    // int sqrt(t) phi_k
  double overlap_ramp(int k) const { return ramp_integral_[k]; }    // int (1 - t/T) phi_k
  // int phi_j phi_k for j in N_k, aligned with graph().neighborhood(k)
  std::span<const double> overlap_pairs(int k) const { return pair_integrals_[k]; }
  double pair_overlap(int a, int b) const;  // any pair; zero for disjoint interiors

  const DependencyGraph& graph() const { return graph_; }

 private:
  void check_time(double t) const;

  int levels_;
  double horizon_;
  double start_value_;
  double end_value_;
  int size_;
  std::vector<double> lo_, hi_, peak_;
  std::vector<double> integral_, sqrt_integral_, ramp_integral_;
  std::vector<std::vector<double>> pair_integrals_;
  DependencyGraph graph_;
};

}  // namespace zz
