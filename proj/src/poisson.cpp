#include "zigzag/poisson.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace zz {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_deviate(double e) {
  if (!(e > 0.0) || !std::isfinite(e))
    throw std::domain_error("first_event: exponential deviate must be positive and finite");
}

}  // namespace

double AffineRate::value(double t) const { return std::max(0.0, a + b * t); }

double ExpRate::value(double t) const { return std::max(0.0, c * std::exp(g * t)); }

double first_event(const AffineRate& rate, double e) {
  check_deviate(e);
  const double a = rate.a, b = rate.b;
  if (!std::isfinite(a) || !std::isfinite(b))
    throw std::domain_error("first_event: non-finite affine rate");
  if (b == 0.0) return a > 0.0 ? e / a : kInf;
  if (a < 0.0) {
    // rate is zero until s = -a/b; only a rising slope accumulates mass
    if (b < 0.0) return kInf;
    return -a / b + std::sqrt(2.0 * e / b);
  }
  // a >= 0: solve a tau + b tau^2 / 2 = e on the rising or falling branch
  double disc = a * a + 2.0 * b * e;
  if (disc < 0.0) {
    if (disc < -1e-14 * (a * a + 2.0 * std::abs(b) * e)) return kInf;  // mass exhausted
    disc = 0.0;  // roundoff at the mass boundary
  }
  const double denom = a + std::sqrt(disc);
  if (denom <= 0.0) return kInf;  // a = 0 with non-positive slope
  return 2.0 * e / denom;
}

double first_event(const ExpRate& rate, double e) {
  check_deviate(e);
  const double c = rate.c, g = rate.g;
  if (!std::isfinite(c) || !std::isfinite(g))
    throw std::domain_error("first_event: non-finite exponential rate");
  if (c <= 0.0) return kInf;
  if (g == 0.0) return e / c;
  const double arg = g * e / c;
  if (arg <= -1.0) return kInf;  // g < 0 and total mass c/|g| < e
  return std::log1p(arg) / g;
}

double RateSpec::value(double t) const {
  double total = 0.0;
  for (const auto& term : terms_)
    total += std::visit([&](const auto& r) { return r.value(t); }, term);
  return total;
}

RateSpec::Event RateSpec::first_event(RngStream& rng) const {
  std::vector<double> deviates(terms_.size());
  for (auto& e : deviates) e = rng.exponential();
  return first_event(deviates);
}

RateSpec::Event RateSpec::first_event(const std::vector<double>& deviates) const {
  if (terms_.empty()) throw std::domain_error("RateSpec: empty superposition");
  if (deviates.size() != terms_.size())
    throw std::domain_error("RateSpec: one deviate per component required");
  Event best{kInf, -1};
  for (int i = 0; i < components(); ++i) {
    const double t =
        std::visit([&](const auto& r) { return zz::first_event(r, deviates[i]); }, terms_[i]);
    if (t < best.time) best = Event{t, i};
  }
  return best;
}

}  // namespace zz
