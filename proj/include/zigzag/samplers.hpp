#pragma once

#include <Eigen/Dense>
#include <span>
#include <stdexcept>
#include <vector>

#include "zigzag/poisson.hpp"
#include "zigzag/rng.hpp"

namespace zz {

// Thrown when a thinning test observes an acceptance ratio above 1 + 1e-9: the
// dominating-rate invariant is broken and the invariant law is no longer valid.
class BoundViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ReflectionEvent {
  int coordinate;  // 0-based slot
  double time;
  double value;  // position of the flipped coordinate at the event
};

// Event record of one run. Full-state mode stores rows (t, xi) including the
// initial state at t = 0 and the advanced state at tau_final; reflection mode
// stores one tuple per accepted flip plus the same start/end snapshots, which
// is enough to reconstruct every coordinate path by linear interpolation.
struct Skeleton {
  enum class Mode { kFullState, kReflectionTuples };

  Mode mode = Mode::kFullState;
  Eigen::VectorXd times;   // full-state event times, strictly increasing
  Eigen::MatrixXd states;  // d x times.size()
  std::vector<ReflectionEvent> reflections;

  Eigen::VectorXd initial_state;
  Eigen::VectorXd initial_velocity;
  Eigen::VectorXd final_state;  // positions advanced to tau_final
  double tau_final = 0.0;

  long events = 0;     // accepted velocity flips
  long proposals = 0;  // proposed event times that were examined
  bool all_rates_vanished = false;  // run ended early with every clock at +inf

  int dim() const { return static_cast<int>(initial_state.size()); }
};

// Exact per-coordinate event rates: rate(i, xi, theta) must be the rate
// function t -> lambda_i(t; xi, theta) along the linear flow from (xi, theta).
// neighborhood(i) lists the coordinates lambda_i depends on (including i).
class ExactRateProvider {
 public:
  virtual ~ExactRateProvider() = default;
  virtual int dim() const = 0;
  virtual RateSpec rate(int i, const Eigen::VectorXd& xi, const Eigen::VectorXd& theta) const = 0;
  virtual std::span<const int> neighborhood(int i) const = 0;
};

// Subsampled rates: bound(i, xi, theta) dominates the random rate estimate
// along the whole flow started at (xi, theta), i.e.
//   rate_estimate(i, xi + dt theta, theta, U) <= bound(i, xi, theta).value(dt)
// for all dt >= 0 and every subsample draw U. bound_neighborhood(i) lists the
// coordinates the bound reads, estimate_neighborhood(i, U) those the estimate
// reads; both include i.
class ThinnedRateProvider {
 public:
  virtual ~ThinnedRateProvider() = default;
  virtual int dim() const = 0;
  virtual RateSpec bound(int i, const Eigen::VectorXd& xi, const Eigen::VectorXd& theta) const = 0;
  virtual std::vector<double> draw_subsample(int i, RngStream& rng) const = 0;
  virtual double rate_estimate(int i, const Eigen::VectorXd& xi, const Eigen::VectorXd& theta,
                               const std::vector<double>& subsample) const = 0;
  virtual std::span<const int> bound_neighborhood(int i) const = 0;
  virtual std::span<const int> estimate_neighborhood(int i,
                                                     const std::vector<double>& subsample) const = 0;
};

// Algorithm variants. All four advance by linear flow between events, flip one
// velocity per accepted event and stop once the next proposed event would pass
// tau_final. Identical seeds give bit-identical skeletons.
Skeleton zigzag_standard(const ExactRateProvider& provider, double tau_final,
                         const Eigen::VectorXd& xi0, const Eigen::VectorXd& theta0, RunRng& rng);

Skeleton zigzag_local(const ExactRateProvider& provider, double tau_final,
                      const Eigen::VectorXd& xi0, const Eigen::VectorXd& theta0, RunRng& rng);

Skeleton zigzag_subsampled(const ThinnedRateProvider& provider, double tau_final,
                           const Eigen::VectorXd& xi0, const Eigen::VectorXd& theta0, RunRng& rng);

// dense_bookkeeping additionally records a full-state row at every accepted
// flip (same randomness, same trajectory); used to validate tuple replay.
Skeleton zigzag_fully_local(const ThinnedRateProvider& provider, double tau_final,
                            const Eigen::VectorXd& xi0, const Eigen::VectorXd& theta0, RunRng& rng,
                            bool dense_bookkeeping = false);

// Positions at tau_burnin + m delta_tau, m = 1, 2, ... while <= tau_final,
// one column per sample.
Eigen::MatrixXd discretize(const Skeleton& skeleton, double tau_burnin, double delta_tau);

}  // namespace zz
