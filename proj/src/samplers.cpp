#include "zigzag/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>

namespace zz {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRatioSlack = 1e-9;

void validate_run(int d, double tau_final, const Eigen::VectorXd& xi0,
                  const Eigen::VectorXd& theta0) {
  if (!(tau_final > 0.0) || !std::isfinite(tau_final))
    throw std::domain_error("zigzag: tau_final must be positive and finite");
  if (xi0.size() != d || theta0.size() != d)
    throw std::domain_error("zigzag: state and velocity must match the provider dimension");
  for (int i = 0; i < d; ++i)
    if (theta0[i] == 0.0) throw std::domain_error("zigzag: velocities must be nonzero");
}

// accumulates full-state rows, first row at t = 0
class RowRecorder {
 public:
  RowRecorder(double t0, const Eigen::VectorXd& xi) : dim_(xi.size()) { add(t0, xi); }

  void add(double t, const Eigen::VectorXd& xi) {
    times_.push_back(t);
    flat_.insert(flat_.end(), xi.data(), xi.data() + dim_);
  }

  void finish(Skeleton& skeleton) const {
    const auto n = static_cast<Eigen::Index>(times_.size());
    skeleton.times = Eigen::Map<const Eigen::VectorXd>(times_.data(), n);
    skeleton.states = Eigen::Map<const Eigen::MatrixXd>(flat_.data(), dim_, n);
  }

 private:
  Eigen::Index dim_;
  std::vector<double> times_;
  std::vector<double> flat_;
};

// binary heap with lazy invalidation: stale versions are skipped on pop
struct QueueEntry {
  double time;
  int coordinate;
  std::uint64_t version;
  bool operator>(const QueueEntry& o) const {
    return time != o.time ? time > o.time : coordinate > o.coordinate;
  }
};

class EventQueue {
 public:
  explicit EventQueue(int d) : version_(d, 0) {}

  void update(int i, double time) {
    ++version_[i];
    if (std::isfinite(time)) heap_.push(QueueEntry{time, i, version_[i]});
  }

  // next valid entry, or {inf, -1} when every clock is at +inf
  QueueEntry pop() {
    while (!heap_.empty()) {
      QueueEntry top = heap_.top();
      heap_.pop();
      if (top.version == version_[top.coordinate]) return top;
    }
    return QueueEntry{kInf, -1, 0};
  }

 private:
  std::vector<std::uint64_t> version_;
  std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<>> heap_;
};

int argmin_time(const std::vector<double>& tau) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(tau.size()); ++i)
    if (tau[i] < tau[best]) best = i;
  return best;
}

[[noreturn]] void throw_bound_violation(int coordinate, double estimate, double bound) {
  std::ostringstream msg;
  msg << "domination broken for coordinate " << coordinate + 1 << ": rate estimate " << estimate
      << " exceeds bound " << bound;
  throw BoundViolation(msg.str());
}

}  // namespace

Skeleton zigzag_standard(const ExactRateProvider& provider, double tau_final,
                         const Eigen::VectorXd& xi0, const Eigen::VectorXd& theta0, RunRng& rng) {
  const int d = provider.dim();
  validate_run(d, tau_final, xi0, theta0);

  Eigen::VectorXd xi = xi0, theta = theta0;
  double t = 0.0;
  std::vector<double> tau(d);
  for (int j = 0; j < d; ++j) tau[j] = provider.rate(j, xi, theta).first_event(rng.events).time;

  Skeleton skeleton;
  skeleton.initial_state = xi0;
  skeleton.initial_velocity = theta0;
  skeleton.tau_final = tau_final;
  RowRecorder rows(0.0, xi);

  while (true) {
    const int i = argmin_time(tau);
    if (!(tau[i] <= tau_final)) {
      skeleton.all_rates_vanished = !std::isfinite(tau[i]);
      break;
    }
    xi += theta * (tau[i] - t);
    t = tau[i];
    theta[i] = -theta[i];
    rows.add(t, xi);
    ++skeleton.events;
    ++skeleton.proposals;
    for (int j = 0; j < d; ++j) tau[j] = t + provider.rate(j, xi, theta).first_event(rng.events).time;
  }

  skeleton.final_state = xi + theta * (tau_final - t);
  rows.add(tau_final, skeleton.final_state);
  rows.finish(skeleton);
  return skeleton;
}

Skeleton zigzag_local(const ExactRateProvider& provider, double tau_final,
                      const Eigen::VectorXd& xi0, const Eigen::VectorXd& theta0, RunRng& rng) {
  const int d = provider.dim();
  validate_run(d, tau_final, xi0, theta0);

  Eigen::VectorXd xi = xi0, theta = theta0;
  double t = 0.0;
  EventQueue queue(d);
  for (int j = 0; j < d; ++j)
    queue.update(j, provider.rate(j, xi, theta).first_event(rng.events).time);

  Skeleton skeleton;
  skeleton.initial_state = xi0;
  skeleton.initial_velocity = theta0;
  skeleton.tau_final = tau_final;
  RowRecorder rows(0.0, xi);

  while (true) {
    const QueueEntry next = queue.pop();
    if (!(next.time <= tau_final)) {
      skeleton.all_rates_vanished = next.coordinate == -1;
      break;
    }
    const int i = next.coordinate;
    xi += theta * (next.time - t);
    t = next.time;
    theta[i] = -theta[i];
    rows.add(t, xi);
    ++skeleton.events;
    ++skeleton.proposals;
    // waiting times of coordinates outside N_i remain valid after the flip
    for (int j : provider.neighborhood(i))
      queue.update(j, t + provider.rate(j, xi, theta).first_event(rng.events).time);
  }

  skeleton.final_state = xi + theta * (tau_final - t);
  rows.add(tau_final, skeleton.final_state);
  rows.finish(skeleton);
  return skeleton;
}

Skeleton zigzag_subsampled(const ThinnedRateProvider& provider, double tau_final,
                           const Eigen::VectorXd& xi0, const Eigen::VectorXd& theta0, RunRng& rng) {
  const int d = provider.dim();
  validate_run(d, tau_final, xi0, theta0);

  Eigen::VectorXd xi = xi0, theta = theta0;
  double t = 0.0;
  std::vector<RateSpec> bound(d);
  std::vector<double> anchor(d, 0.0), tau(d);
  auto redraw = [&](int j) {
    bound[j] = provider.bound(j, xi, theta);
    anchor[j] = t;
    tau[j] = t + bound[j].first_event(rng.events).time;
  };
  for (int j = 0; j < d; ++j) redraw(j);

  Skeleton skeleton;
  skeleton.initial_state = xi0;
  skeleton.initial_velocity = theta0;
  skeleton.tau_final = tau_final;
  RowRecorder rows(0.0, xi);

  while (true) {
    const int i = argmin_time(tau);
    if (!(tau[i] <= tau_final)) {
      skeleton.all_rates_vanished = !std::isfinite(tau[i]);
      break;
    }
    xi += theta * (tau[i] - t);
    t = tau[i];
    ++skeleton.proposals;

    const std::vector<double> subsample = provider.draw_subsample(i, rng.subsample);
    const double estimate = provider.rate_estimate(i, xi, theta, subsample);
    const double bound_value = bound[i].value(t - anchor[i]);
    if (estimate > bound_value * (1.0 + kRatioSlack)) throw_bound_violation(i, estimate, bound_value);
    const double ratio = bound_value > 0.0 ? estimate / bound_value : 0.0;

    if (rng.thinning.uniform() <= ratio) {
      theta[i] = -theta[i];
      rows.add(t, xi);
      ++skeleton.events;
      for (int j = 0; j < d; ++j) redraw(j);
    } else {
      redraw(i);
    }
  }

  skeleton.final_state = xi + theta * (tau_final - t);
  rows.add(tau_final, skeleton.final_state);
  rows.finish(skeleton);
  return skeleton;
}

Skeleton zigzag_fully_local(const ThinnedRateProvider& provider, double tau_final,
                            const Eigen::VectorXd& xi0, const Eigen::VectorXd& theta0, RunRng& rng,
                            bool dense_bookkeeping) {
  const int d = provider.dim();
  validate_run(d, tau_final, xi0, theta0);

  Eigen::VectorXd xi = xi0, theta = theta0;
  std::vector<double> clock(d, 0.0);  // coordinate j's position is current at clock[j]
  std::vector<RateSpec> bound(d);
  std::vector<double> anchor(d, 0.0), tau(d);
  EventQueue queue(d);
  auto redraw = [&](int j, double now) {
    bound[j] = provider.bound(j, xi, theta);
    anchor[j] = now;
    tau[j] = now + bound[j].first_event(rng.events).time;
    queue.update(j, tau[j]);
  };
  for (int j = 0; j < d; ++j) redraw(j, 0.0);

  auto advance = [&](int j, double now) {
    if (clock[j] < now) {
      xi[j] += theta[j] * (now - clock[j]);
      clock[j] = now;
    }
  };

  Skeleton skeleton;
  skeleton.mode = Skeleton::Mode::kReflectionTuples;
  skeleton.initial_state = xi0;
  skeleton.initial_velocity = theta0;
  skeleton.tau_final = tau_final;
  RowRecorder rows(0.0, xi);

  while (true) {
    const QueueEntry next = queue.pop();
    if (!(next.time <= tau_final)) {
      skeleton.all_rates_vanished = next.coordinate == -1;
      break;
    }
    const int i = next.coordinate;
    const double now = next.time;
    ++skeleton.proposals;

    const std::vector<double> subsample = provider.draw_subsample(i, rng.subsample);
    for (int j : provider.bound_neighborhood(i)) advance(j, now);
    for (int j : provider.estimate_neighborhood(i, subsample)) advance(j, now);

    const double estimate = provider.rate_estimate(i, xi, theta, subsample);
    const double bound_value = bound[i].value(now - anchor[i]);
    if (estimate > bound_value * (1.0 + kRatioSlack)) throw_bound_violation(i, estimate, bound_value);
    const double ratio = bound_value > 0.0 ? estimate / bound_value : 0.0;

    if (rng.thinning.uniform() <= ratio) {
      theta[i] = -theta[i];
      skeleton.reflections.push_back(ReflectionEvent{i, now, xi[i]});
      ++skeleton.events;
      // the refreshed bounds read every coordinate in their own neighborhoods
      for (int j : provider.bound_neighborhood(i))
        for (int n : provider.bound_neighborhood(j)) advance(n, now);
      for (int j : provider.bound_neighborhood(i))
        if (j != i) redraw(j, now);
      if (dense_bookkeeping) {
        for (int j = 0; j < d; ++j) advance(j, now);
        rows.add(now, xi);
      }
    }
    redraw(i, now);
  }

  for (int j = 0; j < d; ++j) advance(j, tau_final);
  skeleton.final_state = xi;
  rows.add(tau_final, xi);
  if (dense_bookkeeping) rows.finish(skeleton);
  return skeleton;
}

Eigen::MatrixXd discretize(const Skeleton& skeleton, double tau_burnin, double delta_tau) {
  if (!(delta_tau > 0.0)) throw std::domain_error("discretize: delta_tau must be positive");
  if (tau_burnin < 0.0) throw std::domain_error("discretize: tau_burnin must be non-negative");
  if (tau_burnin + delta_tau > skeleton.tau_final)
    throw std::domain_error("discretize: tau_burnin + delta_tau exceeds the final clock");
  const int d = skeleton.dim();
  if (d == 0) throw std::domain_error("discretize: empty skeleton");

  const double span = skeleton.tau_final - tau_burnin;
  const auto count = static_cast<Eigen::Index>(span / delta_tau * (1.0 + 1e-12));
  Eigen::MatrixXd samples(d, count);

  if (skeleton.mode == Skeleton::Mode::kFullState) {
    if (skeleton.times.size() < 2) throw std::domain_error("discretize: empty skeleton");
    Eigen::Index row = 1;
    for (Eigen::Index m = 0; m < count; ++m) {
      const double ts = tau_burnin + (m + 1) * delta_tau;
      while (row < skeleton.times.size() - 1 && skeleton.times[row] < ts) ++row;
      const double t0 = skeleton.times[row - 1], t1 = skeleton.times[row];
      const double w = (ts - t0) / (t1 - t0);
      samples.col(m) = skeleton.states.col(row - 1) + w * (skeleton.states.col(row) - skeleton.states.col(row - 1));
    }
    return samples;
  }

  // reflection tuples: each coordinate moves linearly between its own events
  for (int j = 0; j < d; ++j) {
    double t0 = 0.0, x0 = skeleton.initial_state[j];
    std::size_t next = 0;
    auto next_event = [&](double& t1, double& x1) {
      while (next < skeleton.reflections.size() && skeleton.reflections[next].coordinate != j) ++next;
      if (next < skeleton.reflections.size()) {
        t1 = skeleton.reflections[next].time;
        x1 = skeleton.reflections[next].value;
      } else {
        t1 = skeleton.tau_final;
        x1 = skeleton.final_state[j];
      }
    };
    double t1, x1;
    next_event(t1, x1);
    for (Eigen::Index m = 0; m < count; ++m) {
      const double ts = tau_burnin + (m + 1) * delta_tau;
      while (ts > t1 && next < skeleton.reflections.size()) {
        t0 = t1;
        x0 = x1;
        ++next;
        next_event(t1, x1);
      }
      samples(j, m) = t1 > t0 ? x0 + (ts - t0) / (t1 - t0) * (x1 - x0) : x1;
    }
  }
  return samples;
}

}  // namespace zz
