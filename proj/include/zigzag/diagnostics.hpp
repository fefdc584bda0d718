#pragma once

#include <Eigen/Dense>
#include <functional>
#include <span>

#include "zigzag/basis.hpp"
#include "zigzag/models.hpp"
#include "zigzag/rng.hpp"

namespace zz {

double normal_cdf(double x);
double normal_quantile(double p);

// Batch-means effective sample size: n Var(chain) / asymptotic-variance
// estimate, with equal-length batches and the trailing remainder dropped.
double ess_batch_means(std::span<const double> chain, int batch_count);

struct EssReport {
  Eigen::VectorXd per_coordinate;
  double mean = 0.0;
  double median = 0.0;
  double min = 0.0;
  double wall_seconds = 0.0;
  std::vector<int> clamped;  // coordinates whose estimate exceeded the sample count

  double mean_per_second() const { return mean / wall_seconds; }
  double median_per_second() const { return median / wall_seconds; }
  double min_per_second() const { return min / wall_seconds; }
};

// chain holds one coordinate per row; batch_count 0 selects floor(sqrt(n))
EssReport ess_report(const Eigen::MatrixXd& chain, double wall_seconds, int batch_count = 0);

// two-sample Kolmogorov-Smirnov statistic
double ks_statistic(std::span<const double> a, std::span<const double> b);
// one-sample statistic against a reference CDF
double ks_statistic(std::span<const double> a, const std::function<double(double)>& cdf);

struct QqData {
  Eigen::VectorXd theoretical;  // standard normal quantiles at (k - 0.5) / n
  Eigen::VectorXd empirical;    // order statistics of the chain
  double correlation = 0.0;
};

QqData qq_data(std::span<const double> chain);

struct EulerOracleConfig {
  double step = 1e-3;       // must divide the horizon
  double radius = 0.1;      // endpoint acceptance ball
  long max_attempts = 1000000;
  long target_paths = 1000;
  std::uint64_t seed = 0;
  int stride = 1;           // keep every stride-th grid value
};

struct EulerPaths {
  Eigen::MatrixXd paths;       // one accepted path per column, on the stored grid
  Eigen::VectorXd grid_times;
  double acceptance_rate = 0.0;
  long attempts = 0;
};

// Forward Euler-Maruyama simulation of dX = b(X) dt + dW from u, keeping the
// paths that end within radius of v.
template <class Model>
EulerPaths euler_eball(const Model& model, double u, double v, double horizon,
                       const EulerOracleConfig& cfg);

struct GaussianMarginal {
  double mean = 0.0;
  double variance = 0.0;
};

// Exact bridge marginal of dX = (alpha + beta X) dt + dW at an interior time,
// from the Gaussian transition density conditioned on both endpoints.
GaussianMarginal gaussian_bridge_marginal(const LinearModel& model, double u, double v,
                                          double horizon, double t);

struct MalaOptions {
  long iterations = 10000;
  double target_acceptance = 0.6;
  double warmup_fraction = 0.2;  // step adapted here, frozen afterwards
  double initial_step = 0.1;
  std::uint64_t seed = 0;
};

struct MalaResult {
  Eigen::MatrixXd chain;  // post-warmup states, one per column
  double acceptance_rate = 0.0;  // post-warmup
  double step = 0.0;
};

// Metropolis-adjusted Langevin with Robbins-Monro step adaptation during the
// warmup.
MalaResult mala(const std::function<double(const Eigen::VectorXd&)>& energy,
                const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& gradient,
                const Eigen::VectorXd& initial, const MalaOptions& options);

// Bridge target over the expansion coefficients with the path integrals of the
// energy and its gradient evaluated by an Euler sum over the 2^{N+1} dyadic
// cells.
template <class Model>
MalaResult mala_bridge(const BasisContext& ctx, const Model& model, const MalaOptions& options);

}  // namespace zz
