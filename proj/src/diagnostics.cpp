#include "zigzag/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace zz {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Acklam's rational approximation of the standard normal quantile (|error| ~ 1e-9)
double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal_quantile: p must lie in (0,1)");
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425, phigh = 1.0 - plow;
  double q, r;
  if (p < plow) {
    q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > phigh) {
    q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  q = p - 0.5;
  r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

double ess_batch_means(std::span<const double> chain, int batch_count) {
  if (batch_count < 10) throw std::domain_error("ess_batch_means: need at least 10 batches");
  const auto n = static_cast<long>(chain.size());
  const long batch_size = n / batch_count;
  if (batch_size < 1) throw std::domain_error("ess_batch_means: chain shorter than batch count");
  const long used = batch_size * batch_count;

  double grand = 0.0;
  for (long i = 0; i < used; ++i) grand += chain[i];
  grand /= static_cast<double>(used);

  double variance = 0.0;
  for (long i = 0; i < used; ++i) variance += (chain[i] - grand) * (chain[i] - grand);
  variance /= static_cast<double>(used - 1);
  if (variance == 0.0) throw std::domain_error("ess_batch_means: constant chain");

  double batch_spread = 0.0;
  for (int b = 0; b < batch_count; ++b) {
    double m = 0.0;
    for (long i = b * batch_size; i < (b + 1) * batch_size; ++i) m += chain[i];
    m /= static_cast<double>(batch_size);
    batch_spread += (m - grand) * (m - grand);
  }
  const double asymptotic = static_cast<double>(batch_size) * batch_spread / (batch_count - 1);
  return static_cast<double>(used) * variance / asymptotic;
}

EssReport ess_report(const Eigen::MatrixXd& chain, double wall_seconds, int batch_count) {
  const auto n = chain.cols();
  if (batch_count == 0)
    batch_count = std::max(10, static_cast<int>(std::sqrt(static_cast<double>(n))));
  EssReport report;
  report.wall_seconds = wall_seconds;
  report.per_coordinate.resize(chain.rows());
  std::vector<double> row(n);
  for (Eigen::Index k = 0; k < chain.rows(); ++k) {
    for (Eigen::Index i = 0; i < n; ++i) row[i] = chain(k, i);
    double ess = ess_batch_means(row, batch_count);
    if (ess > static_cast<double>(n)) {
      ess = static_cast<double>(n);
      report.clamped.push_back(static_cast<int>(k));
    }
    report.per_coordinate[k] = ess;
  }
  std::vector<double> sorted(report.per_coordinate.data(),
                             report.per_coordinate.data() + report.per_coordinate.size());
  std::sort(sorted.begin(), sorted.end());
  report.min = sorted.front();
  report.mean = report.per_coordinate.mean();
  const std::size_t h = sorted.size() / 2;
  report.median = sorted.size() % 2 ? sorted[h] : 0.5 * (sorted[h - 1] + sorted[h]);
  return report;
}

double ks_statistic(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::domain_error("ks_statistic: empty sample");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size()), ny = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] <= v) ++i;
    while (j < y.size() && y[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  return d;
}

double ks_statistic(std::span<const double> a, const std::function<double(double)>& cdf) {
  if (a.empty()) throw std::domain_error("ks_statistic: empty sample");
  std::vector<double> x(a.begin(), a.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max(d, std::max((i + 1) / n - f, f - i / n));
  }
  return d;
}

QqData qq_data(std::span<const double> chain) {
  if (chain.size() < 100) throw std::domain_error("qq_data: need at least 100 samples");
  const auto n = static_cast<Eigen::Index>(chain.size());
  QqData out;
  out.empirical = Eigen::Map<const Eigen::VectorXd>(chain.data(), n);
  std::sort(out.empirical.data(), out.empirical.data() + n);
  out.theoretical.resize(n);
  for (Eigen::Index k = 0; k < n; ++k)
    out.theoretical[k] = normal_quantile((k + 0.5) / static_cast<double>(n));
  const Eigen::VectorXd t = out.theoretical.array() - out.theoretical.mean();
  const Eigen::VectorXd e = out.empirical.array() - out.empirical.mean();
  out.correlation = t.dot(e) / std::sqrt(t.squaredNorm() * e.squaredNorm());
  return out;
}

template <class Model>
EulerPaths euler_eball(const Model& model, double u, double v, double horizon,
                       const EulerOracleConfig& cfg) {
  if (!(cfg.step > 0.0) || !(cfg.radius > 0.0))
    throw std::domain_error("euler_eball: step and radius must be positive");
  const long steps = std::lround(horizon / cfg.step);
  if (steps < 1 || std::abs(steps * cfg.step - horizon) > 1e-12 * std::max(1.0, horizon))
    throw std::domain_error("euler_eball: step must divide the horizon");
  if (cfg.target_paths < 1 || cfg.max_attempts < 1)
    throw std::domain_error("euler_eball: need positive path and attempt budgets");

  std::vector<long> stored;
  for (long m = 0; m <= steps; m += std::max(1, cfg.stride)) stored.push_back(m);
  if (stored.back() != steps) stored.push_back(steps);

  EulerPaths out;
  out.grid_times.resize(static_cast<Eigen::Index>(stored.size()));
  for (std::size_t s = 0; s < stored.size(); ++s) out.grid_times[s] = stored[s] * cfg.step;

  RngStream rng(cfg.seed, 7);
  const double root_step = std::sqrt(cfg.step);
  std::vector<double> flat;
  std::vector<double> current(stored.size());
  long accepted = 0;
  while (accepted < cfg.target_paths && out.attempts < cfg.max_attempts) {
    ++out.attempts;
    double x = u;
    std::size_t next_store = 0;
    for (long m = 0; m <= steps; ++m) {
      if (next_store < stored.size() && stored[next_store] == m) current[next_store++] = x;
      if (m < steps) x += drift(model, x) * cfg.step + root_step * rng.normal();
    }
    if (std::abs(x - v) <= cfg.radius) {
      ++accepted;
      flat.insert(flat.end(), current.begin(), current.end());
    }
  }
  out.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(out.attempts);
  if (accepted == 0)
    throw std::runtime_error("euler_eball: no accepted path in " + std::to_string(out.attempts) +
                             " attempts (acceptance rate 0)");
  out.paths = Eigen::Map<const Eigen::MatrixXd>(flat.data(),
                                                static_cast<Eigen::Index>(stored.size()), accepted);
  return out;
}

GaussianMarginal gaussian_bridge_marginal(const LinearModel& model, double u, double v,
                                          double horizon, double t) {
  if (!(t > 0.0 && t < horizon))
    throw std::domain_error("gaussian_bridge_marginal: time must lie strictly inside (0, T)");
  const double alpha = model.alpha, beta = model.beta;
  if (beta == 0.0) {
    // Brownian motion with drift: the bridge law does not depend on the drift
    return GaussianMarginal{u + (v - u) * t / horizon, t * (horizon - t) / horizon};
  }
  const double s = horizon - t;
  const double v1 = std::expm1(2.0 * beta * t) / (2.0 * beta);
  const double v2 = std::expm1(2.0 * beta * s) / (2.0 * beta);
  const double c = std::exp(beta * s);
  const double m1 = u * std::exp(beta * t) + alpha * std::expm1(beta * t) / beta;
  const double shift = alpha * std::expm1(beta * s) / beta;
  const double precision = 1.0 / v1 + c * c / v2;
  const double variance = 1.0 / precision;
  const double mean = variance * (m1 / v1 + c * (v - shift) / v2);
  return GaussianMarginal{mean, variance};
}

MalaResult mala(const std::function<double(const Eigen::VectorXd&)>& energy,
                const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& gradient,
                const Eigen::VectorXd& initial, const MalaOptions& options) {
  const auto d = initial.size();
  MalaResult result;
  result.chain.resize(d, 0);
  if (options.iterations == 0) return result;

  RngStream rng(options.seed, 11);
  Eigen::VectorXd x = initial;
  Eigen::VectorXd grad = gradient(x);
  double e = energy(x);
  if (!grad.allFinite() || !std::isfinite(e))
    throw std::runtime_error("mala: non-finite energy or gradient at the initial point");

  const long warmup = static_cast<long>(options.warmup_fraction * options.iterations);
  double log_step = std::log(options.initial_step);
  const long kept_count = options.iterations - warmup;
  Eigen::MatrixXd kept(d, kept_count);
  long kept_index = 0, accepted_post = 0;
  Eigen::VectorXd noise(d), y(d);

  for (long iter = 1; iter <= options.iterations; ++iter) {
    const double h = std::exp(log_step);
    for (Eigen::Index i = 0; i < d; ++i) noise[i] = rng.normal();
    y = x - 0.5 * h * grad + std::sqrt(h) * noise;
    const double ey = energy(y);
    Eigen::VectorXd grad_y = gradient(y);
    double log_alpha = -std::numeric_limits<double>::infinity();
    if (std::isfinite(ey) && grad_y.allFinite()) {
      const double forward = (y - x + 0.5 * h * grad).squaredNorm();
      const double backward = (x - y + 0.5 * h * grad_y).squaredNorm();
      log_alpha = e - ey + (forward - backward) / (2.0 * h);
    }
    const double accept_prob = std::min(1.0, std::exp(log_alpha));
    if (rng.uniform() <= accept_prob) {
      x = y;
      e = ey;
      grad = std::move(grad_y);
      if (iter > warmup) ++accepted_post;
    }
    if (iter <= warmup) {
      log_step += (accept_prob - options.target_acceptance) / static_cast<double>(iter);
      log_step = std::clamp(log_step, std::log(1e-8), std::log(1e2));
    } else {
      kept.col(kept_index++) = x;
    }
  }
  result.chain = std::move(kept);
  result.acceptance_rate =
      kept_count > 0 ? static_cast<double>(accepted_post) / static_cast<double>(kept_count) : 0.0;
  result.step = std::exp(log_step);
  return result;
}

template <class Model>
MalaResult mala_bridge(const BasisContext& ctx, const Model& model, const MalaOptions& options) {
  const int cells = ctx.size() + 1;  // 2^{N+1} Euler cells
  const double dt = ctx.horizon() / cells;

  // phi_k at the left grid endpoints of its support, fixed across iterations
  auto tables = std::make_shared<std::vector<std::vector<double>>>(ctx.size());
  for (int k = 0; k < ctx.size(); ++k) {
    for (int m = ctx.grid_first(k); m < ctx.grid_last(k); ++m)
      (*tables)[k].push_back(ctx.phi(k, ctx.grid_time(m)));
  }

  auto energy = [&ctx, model, cells, dt](const Eigen::VectorXd& xi) {
    const Eigen::VectorXd grid = ctx.expand_grid(xi);
    double integral = 0.0;
    for (int m = 0; m < cells; ++m) integral += energy_integrand(model, grid[m]);
    return 0.5 * integral * dt + 0.5 * xi.squaredNorm();
  };
  auto gradient = [&ctx, model, cells, dt, tables](const Eigen::VectorXd& xi) {
    const Eigen::VectorXd grid = ctx.expand_grid(xi);
    Eigen::VectorXd g(cells);
    for (int m = 0; m < cells; ++m) g[m] = gradient_integrand(model, grid[m]);
    Eigen::VectorXd out(ctx.size());
    for (int k = 0; k < ctx.size(); ++k) {
      double acc = 0.0;
      const auto& table = (*tables)[k];
      const int first = ctx.grid_first(k);
      for (std::size_t j = 0; j < table.size(); ++j) acc += table[j] * g[first + static_cast<int>(j)];
      out[k] = 0.5 * acc * dt + xi[k];
    }
    return out;
  };
  return mala(energy, gradient, Eigen::VectorXd::Zero(ctx.size()), options);
}

template EulerPaths euler_eball(const LinearModel&, double, double, double,
                                const EulerOracleConfig&);
template EulerPaths euler_eball(const SineModel&, double, double, double,
                                const EulerOracleConfig&);
template EulerPaths euler_eball(const LogisticModel&, double, double, double,
                                const EulerOracleConfig&);

template MalaResult mala_bridge(const BasisContext&, const LinearModel&, const MalaOptions&);
template MalaResult mala_bridge(const BasisContext&, const SineModel&, const MalaOptions&);
template MalaResult mala_bridge(const BasisContext&, const LogisticModel&, const MalaOptions&);

}  // namespace zz
