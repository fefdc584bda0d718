#include "zigzag/models.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace zz {

LogisticModel::LogisticModel(double r_, double capacity_, double noise_)
    : r(r_), capacity(capacity_), noise(noise_) {
  if (!(r > 0.0) || !(capacity > 0.0) || !(noise > 0.0))
    throw std::domain_error("LogisticModel: r, K and beta must be positive");
}

double LogisticModel::lamperti(double y) const {
  if (!(y > 0.0)) throw std::domain_error("LogisticModel: Lamperti transform needs y > 0");
  return -std::log(y) / noise;
}

double drift(const LinearModel& m, double x) { return m.alpha + m.beta * x; }
double drift(const SineModel& m, double x) { return m.alpha * std::sin(x); }
double drift(const LogisticModel& m, double x) { return m.c1() + m.c2() * std::exp(-m.noise * x); }

double gradient_integrand(const LinearModel& m, double x) {
  return 2.0 * m.beta * (m.alpha + m.beta * x);
}
double gradient_integrand(const SineModel& m, double x) {
  return m.alpha * m.alpha * std::sin(2.0 * x) - m.alpha * std::sin(x);
}
double gradient_integrand(const LogisticModel& m, double x) {
  const double e = std::exp(-m.noise * x);
  return m.a1() * e - m.a2() * e * e;
}

double energy_integrand(const LinearModel& m, double x) {
  const double b = drift(m, x);
  return b * b + m.beta;
}
double energy_integrand(const SineModel& m, double x) {
  const double s = std::sin(x);
  return m.alpha * m.alpha * s * s + m.alpha * std::cos(x);
}
double energy_integrand(const LogisticModel& m, double x) {
  const double b = drift(m, x);
  return b * b - m.noise * m.c2() * std::exp(-m.noise * x);
}

AffineRate linear_rate(const BasisContext& ctx, const LinearModel& model, int k,
                       const Eigen::VectorXd& xi, const Eigen::VectorXd& theta) {
  const double b2 = model.beta * model.beta;
  double dot_xi = 0.0, dot_theta = 0.0;
  const auto nbh = ctx.graph().neighborhood(k);
  const auto overlaps = ctx.overlap_pairs(k);
  for (std::size_t m = 0; m < nbh.size(); ++m) {
    dot_xi += overlaps[m] * xi[nbh[m]];
    dot_theta += overlaps[m] * theta[nbh[m]];
  }
  const double pinned = ctx.overlap_ramp(k) * ctx.start_value() +
                        ctx.overlap_sqrt(k) * ctx.end_value() / std::sqrt(ctx.horizon());
  const double c0 = b2 * (pinned + dot_xi) + model.alpha * model.beta * ctx.overlap_integral(k) + xi[k];
  const double c1 = b2 * dot_theta + theta[k];
  return AffineRate{theta[k] * c0, theta[k] * c1};
}

int EstimatorConfig::replication(const BasisContext& ctx, int k) const {
  const double cell = ctx.horizon() / (ctx.size() + 1);
  const int r = static_cast<int>(std::ceil(ctx.support_len(k) / cell));
  return std::max(1, std::min(r, replication_cap));
}

int EstimatorConfig::draws(const BasisContext& ctx, int k) const {
  return variant == EstimatorVariant::kSingle ? 1 : replication(ctx, k);
}

std::vector<double> draw_subsample(const BasisContext& ctx, int k, const EstimatorConfig& cfg,
                                   RngStream& rng) {
  const int n = cfg.draws(ctx, k);
  const double lo = ctx.support_lo(k), len = ctx.support_len(k);
  std::vector<double> out(n);
  if (cfg.variant == EstimatorVariant::kStratified) {
    for (int r = 0; r < n; ++r) out[r] = lo + (r + rng.uniform()) * len / n;
  } else {
    for (int r = 0; r < n; ++r) out[r] = lo + rng.uniform() * len;
  }
  return out;
}

namespace {

// extrema of g0 + slope (s - s0) + c sqrt(s) on [s0, s1]; the hat part is
// linear there, so the only interior candidate is the critical point of the
// sqrt term
void piece_extrema(double s0, double s1, double g0, double slope, double c, Envelope& env) {
  const double f0 = g0 + c * std::sqrt(s0);
  const double f1 = g0 + slope * (s1 - s0) + c * std::sqrt(s1);
  env.lower = std::min(env.lower, std::min(f0, f1));
  env.upper = std::max(env.upper, std::max(f0, f1));
  if (c != 0.0 && slope != 0.0 && (c > 0.0) != (slope > 0.0)) {
    const double root = -c / (2.0 * slope);  // sqrt(s*) at the stationary point
    const double s = root * root;
    if (s > s0 && s < s1) {
      const double f = g0 + slope * (s - s0) + c * std::sqrt(s);
      env.lower = std::min(env.lower, f);
      env.upper = std::max(env.upper, f);
    }
  }
}

Envelope hat_field_envelope(const BasisContext& ctx, int k, const Eigen::VectorXd& coeff,
                            double ramp_scale, double sqrt_scale) {
  const int first = ctx.grid_first(k), last = ctx.grid_last(k);
  Envelope env{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  double t0 = ctx.grid_time(first);
  double g0 = ramp_scale * (1.0 - t0 / ctx.horizon()) + ctx.hat_sum(coeff, t0);
  for (int m = first; m < last; ++m) {
    const double t1 = ctx.grid_time(m + 1);
    const double g1 = ramp_scale * (1.0 - t1 / ctx.horizon()) + ctx.hat_sum(coeff, t1);
    piece_extrema(t0, t1, g0, (g1 - g0) / (t1 - t0), sqrt_scale, env);
    t0 = t1;
    g0 = g1;
  }
  return env;
}

}  // namespace

Envelope path_envelope(const BasisContext& ctx, int k, const Eigen::VectorXd& xi) {
  return hat_field_envelope(ctx, k, xi, ctx.start_value(),
                            ctx.end_value() / std::sqrt(ctx.horizon()));
}

Envelope velocity_envelope(const BasisContext& ctx, int k, const Eigen::VectorXd& theta) {
  return hat_field_envelope(ctx, k, theta, 0.0, 0.0);
}

RateSpec sine_bound(const BasisContext& ctx, const SineModel& model, int k,
                    const Eigen::VectorXd& xi, const Eigen::VectorXd& theta) {
  const double a1 =
      ctx.peak(k) * ctx.support_len(k) * (model.alpha * model.alpha + model.alpha) / 2.0;
  RateSpec spec(AffineRate{theta[k] * xi[k], theta[k] * theta[k]});
  spec.add(AffineRate{std::abs(theta[k]) * a1, 0.0});
  return spec;
}

RateSpec logistic_bound(const BasisContext& ctx, const LogisticModel& model, int k,
                        const Eigen::VectorXd& xi, const Eigen::VectorXd& theta) {
  const double b1 = path_envelope(ctx, k, xi).lower;
  const double b2 = velocity_envelope(ctx, k, theta).lower;
  const double z1 = model.a1() * std::exp(-model.noise * b1);
  const double z2 = z1 * std::exp(-model.noise * b1);
  const double beta_star = -model.noise * b2;
  const double half = 0.5 * ctx.peak(k) * ctx.support_len(k);
  RateSpec spec(AffineRate{theta[k] * xi[k], theta[k] * theta[k]});
  // envelope of the positive exponential term: e^{-beta X(t)} grows along the
  // flow at most like e^{beta_star t}
  spec.add(ExpRate{theta[k] * half * z1, beta_star});
  spec.add(ExpRate{-theta[k] * half * z2, 2.0 * beta_star});
  return spec;
}

RateSpec linear_bound(const BasisContext& ctx, const LinearModel& model, int k,
                      const Eigen::VectorXd& xi, const Eigen::VectorXd& theta) {
  RateSpec spec(AffineRate{theta[k] * xi[k], theta[k] * theta[k]});
  if (model.beta == 0.0) return spec;
  const double half = 0.5 * ctx.peak(k) * ctx.support_len(k);
  const double mag = std::abs(theta[k]);
  const Envelope path = path_envelope(ctx, k, xi);
  const Envelope vel = velocity_envelope(ctx, k, theta);
  const double scale = 2.0 * mag * half * model.beta * model.beta;
  spec.add(AffineRate{2.0 * mag * half * std::abs(model.alpha * model.beta), 0.0});
  spec.add(AffineRate{scale * path.upper, scale * vel.upper});
  spec.add(AffineRate{-scale * path.lower, -scale * vel.lower});
  return spec;
}

Eigen::VectorXd level_velocities(const BasisContext& ctx, double magnitude, double level_decay) {
  Eigen::VectorXd theta(ctx.size());
  for (int k = 0; k < ctx.size(); ++k)
    theta[k] = magnitude * std::pow(level_decay, index_to_pair(k + 1).level);
  return theta;
}

LinearExactProvider::LinearExactProvider(const BasisContext& ctx, const LinearModel& model)
    : ctx_(&ctx), model_(model) {
  self_.resize(ctx.size());
  for (int i = 0; i < ctx.size(); ++i) self_[i] = {i};
}

RateSpec LinearExactProvider::rate(int i, const Eigen::VectorXd& xi,
                                   const Eigen::VectorXd& theta) const {
  return linear_rate(*ctx_, model_, i, xi, theta);
}

std::span<const int> LinearExactProvider::neighborhood(int i) const {
  return model_.beta == 0.0 ? std::span<const int>(self_[i]) : ctx_->graph().neighborhood(i);
}

namespace detail {

BridgeSubsamplingBase::BridgeSubsamplingBase(const BasisContext& ctx, EstimatorConfig cfg)
    : ctx_(&ctx), cfg_(cfg) {
  self_.resize(ctx.size());
  for (int i = 0; i < ctx.size(); ++i) self_[i] = {i};
}

}  // namespace detail

LinearSubsamplingProvider::LinearSubsamplingProvider(const BasisContext& ctx,
                                                     const LinearModel& model, EstimatorConfig cfg)
    : BridgeSubsamplingBase(ctx, cfg), model_(model) {}

RateSpec LinearSubsamplingProvider::bound(int i, const Eigen::VectorXd& xi,
                                          const Eigen::VectorXd& theta) const {
  return linear_bound(*ctx_, model_, i, xi, theta);
}

double LinearSubsamplingProvider::rate_estimate(int i, const Eigen::VectorXd& xi,
                                                const Eigen::VectorXd& theta,
                                                const std::vector<double>& subsample) const {
  return std::max(0.0, theta[i] * gradient_estimate(*ctx_, model_, i, xi, subsample));
}

std::span<const int> LinearSubsamplingProvider::bound_neighborhood(int i) const {
  return model_.beta == 0.0 ? self(i) : ctx_->graph().neighborhood(i);
}

std::span<const int> LinearSubsamplingProvider::estimate_neighborhood(
    int i, const std::vector<double>&) const {
  return model_.beta == 0.0 ? self(i) : ctx_->graph().neighborhood(i);
}

SineSubsamplingProvider::SineSubsamplingProvider(const BasisContext& ctx, const SineModel& model,
                                                 EstimatorConfig cfg)
    : BridgeSubsamplingBase(ctx, cfg), model_(model) {
  if (model.alpha < 0.0) throw std::domain_error("SineModel: alpha must be >= 0");
}

RateSpec SineSubsamplingProvider::bound(int i, const Eigen::VectorXd& xi,
                                        const Eigen::VectorXd& theta) const {
  return sine_bound(*ctx_, model_, i, xi, theta);
}

double SineSubsamplingProvider::rate_estimate(int i, const Eigen::VectorXd& xi,
                                              const Eigen::VectorXd& theta,
                                              const std::vector<double>& subsample) const {
  return std::max(0.0, theta[i] * gradient_estimate(*ctx_, model_, i, xi, subsample));
}

std::span<const int> SineSubsamplingProvider::estimate_neighborhood(
    int i, const std::vector<double>&) const {
  return model_.alpha == 0.0 ? self(i) : ctx_->graph().neighborhood(i);
}

LogisticSubsamplingProvider::LogisticSubsamplingProvider(const BasisContext& ctx,
                                                         const LogisticModel& model,
                                                         EstimatorConfig cfg)
    : BridgeSubsamplingBase(ctx, cfg), model_(model) {}

RateSpec LogisticSubsamplingProvider::bound(int i, const Eigen::VectorXd& xi,
                                            const Eigen::VectorXd& theta) const {
  return logistic_bound(*ctx_, model_, i, xi, theta);
}

double LogisticSubsamplingProvider::rate_estimate(int i, const Eigen::VectorXd& xi,
                                                  const Eigen::VectorXd& theta,
                                                  const std::vector<double>& subsample) const {
  return std::max(0.0, theta[i] * gradient_estimate(*ctx_, model_, i, xi, subsample));
}

}  // namespace zz
