#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "zigzag/basis.hpp"
#include "zigzag/poisson.hpp"
#include "zigzag/samplers.hpp"

namespace zz {

// drift b(x) = alpha + beta x
struct LinearModel {
  double alpha = 0.0;
  double beta = 0.0;
};

// drift b(x) = alpha sin(x), alpha >= 0
struct SineModel {
  double alpha = 0.0;
};

// dY = r Y (1 - Y/K) dt + beta Y dW in natural coordinates. The sampler works
// on the unit-diffusivity transform x = -log(y)/beta with drift
// b(x) = c1 + c2 e^{-beta x}.
struct LogisticModel {
  LogisticModel(double r, double capacity, double noise);

  double r;
  double capacity;  // K
  double noise;     // beta

  double c1() const { return 0.5 * noise - r / noise; }
  double c2() const { return r / (noise * capacity); }
  double a1() const { return 2.0 * r * r / (noise * capacity); }
  double a2() const { return a1() / capacity; }
  double lamperti(double y) const;
};

double drift(const LinearModel& m, double x);
double drift(const SineModel& m, double x);
double drift(const LogisticModel& m, double x);

// 2 b b' + b'', the integrand of the energy gradient
double gradient_integrand(const LinearModel& m, double x);
double gradient_integrand(const SineModel& m, double x);
double gradient_integrand(const LogisticModel& m, double x);

// b^2 + b', the integrand of the energy itself
double energy_integrand(const LinearModel& m, double x);
double energy_integrand(const SineModel& m, double x);
double energy_integrand(const LogisticModel& m, double x);

// The exact event rate of coordinate k for the linear model along the flow
// from (xi, theta): (theta_k dpsi/dxi_k)(xi + t theta) = theta_k (c0 + c1 t).
AffineRate linear_rate(const BasisContext& ctx, const LinearModel& model, int k,
                       const Eigen::VectorXd& xi, const Eigen::VectorXd& theta);

enum class EstimatorVariant { kSingle, kAveraged, kStratified };

struct EstimatorConfig {
  EstimatorVariant variant = EstimatorVariant::kSingle;
  int replication_cap = 32;

  // number of draws for coordinate k: ceil(|S_k| / (T 2^{-(N+1)})), capped
  int replication(const BasisContext& ctx, int k) const;
  int draws(const BasisContext& ctx, int k) const;  // 1 for the single variant
};

// subsample locations inside supp(phi_k): iid uniforms (single/averaged) or one
// uniform per equal-length stratum (stratified)
std::vector<double> draw_subsample(const BasisContext& ctx, int k, const EstimatorConfig& cfg,
                                   RngStream& rng);

// Unbiased estimate of dpsi/dxi_k from subsample points in supp(phi_k):
//   |S_k| / (2 R) sum_r phi_k(U_r) (2 b b' + b'')(X(U_r)) + xi_k.
template <class Model>
double gradient_estimate(const BasisContext& ctx, const Model& model, int k,
                         const Eigen::VectorXd& xi, std::span<const double> subsample) {
  if (subsample.empty()) throw std::domain_error("gradient_estimate: empty subsample");
  double acc = 0.0;
  for (double u : subsample) {
    if (!(u >= ctx.support_lo(k) && u <= ctx.support_hi(k)))
      throw std::domain_error("gradient_estimate: subsample point outside the support");
    acc += ctx.phi(k, u) * gradient_integrand(model, ctx.expand(xi, u));
  }
  return 0.5 * ctx.support_len(k) * acc / static_cast<double>(subsample.size()) + xi[k];
}

struct Envelope {
  double lower;
  double upper;
};

// Exact extrema over supp(phi_k) of the pinned path bridge(s) + sum phi_j xi_j
// and of the velocity field sum phi_j theta_j. Piecewise minimization over the
// dyadic breakpoints, with the interior critical point of the sqrt bridge term
// handled in closed form.
Envelope path_envelope(const BasisContext& ctx, int k, const Eigen::VectorXd& xi);
Envelope velocity_envelope(const BasisContext& ctx, int k, const Eigen::VectorXd& theta);

// Dominating rates for the subsampled estimators. Each bound is valid along the
// whole linear flow started at (xi, theta).
RateSpec sine_bound(const BasisContext& ctx, const SineModel& model, int k,
                    const Eigen::VectorXd& xi, const Eigen::VectorXd& theta);
RateSpec logistic_bound(const BasisContext& ctx, const LogisticModel& model, int k,
                        const Eigen::VectorXd& xi, const Eigen::VectorXd& theta);
RateSpec linear_bound(const BasisContext& ctx, const LinearModel& model, int k,
                      const Eigen::VectorXd& xi, const Eigen::VectorXd& theta);

// |theta| = magnitude * decay^level, the optional per-level geometric schedule
Eigen::VectorXd level_velocities(const BasisContext& ctx, double magnitude, double level_decay = 1.0);

class LinearExactProvider final : public ExactRateProvider {
 public:
  LinearExactProvider(const BasisContext& ctx, const LinearModel& model);

  int dim() const override { return ctx_->size(); }
  RateSpec rate(int i, const Eigen::VectorXd& xi, const Eigen::VectorXd& theta) const override;
  std::span<const int> neighborhood(int i) const override;

 private:
  const BasisContext* ctx_;
  LinearModel model_;
  std::vector<std::vector<int>> self_;
};

namespace detail {

class BridgeSubsamplingBase : public ThinnedRateProvider {
 public:
  BridgeSubsamplingBase(const BasisContext& ctx, EstimatorConfig cfg);

  int dim() const override { return ctx_->size(); }
  std::vector<double> draw_subsample(int i, RngStream& rng) const override {
    return zz::draw_subsample(*ctx_, i, cfg_, rng);
  }

 protected:
  std::span<const int> self(int i) const { return self_[i]; }

  const BasisContext* ctx_;
  EstimatorConfig cfg_;

 private:
  std::vector<std::vector<int>> self_;
};

}  // namespace detail

class LinearSubsamplingProvider final : public detail::BridgeSubsamplingBase {
 public:
  LinearSubsamplingProvider(const BasisContext& ctx, const LinearModel& model,
                            EstimatorConfig cfg = {});

  RateSpec bound(int i, const Eigen::VectorXd& xi, const Eigen::VectorXd& theta) const override;
  double rate_estimate(int i, const Eigen::VectorXd& xi, const Eigen::VectorXd& theta,
                       const std::vector<double>& subsample) const override;
  std::span<const int> bound_neighborhood(int i) const override;
  std::span<const int> estimate_neighborhood(int i, const std::vector<double>&) const override;

 private:
  LinearModel model_;
};

class SineSubsamplingProvider final : public detail::BridgeSubsamplingBase {
 public:
  SineSubsamplingProvider(const BasisContext& ctx, const SineModel& model,
                          EstimatorConfig cfg = {});

  RateSpec bound(int i, const Eigen::VectorXd& xi, const Eigen::VectorXd& theta) const override;
  double rate_estimate(int i, const Eigen::VectorXd& xi, const Eigen::VectorXd& theta,
                       const std::vector<double>& subsample) const override;
  // the sine bound reads only coordinate i itself
  std::span<const int> bound_neighborhood(int i) const override { return self(i); }
  std::span<const int> estimate_neighborhood(int i, const std::vector<double>&) const override;

 private:
  SineModel model_;
};

class LogisticSubsamplingProvider final : public detail::BridgeSubsamplingBase {
 public:
  LogisticSubsamplingProvider(const BasisContext& ctx, const LogisticModel& model,
                              EstimatorConfig cfg = {});

  RateSpec bound(int i, const Eigen::VectorXd& xi, const Eigen::VectorXd& theta) const override;
  double rate_estimate(int i, const Eigen::VectorXd& xi, const Eigen::VectorXd& theta,
                       const std::vector<double>& subsample) const override;
  std::span<const int> bound_neighborhood(int i) const override {
    return ctx_->graph().neighborhood(i);
  }
  std::span<const int> estimate_neighborhood(int i, const std::vector<double>&) const override {
    return ctx_->graph().neighborhood(i);
  }

 private:
  LogisticModel model_;
};

}  // namespace zz
