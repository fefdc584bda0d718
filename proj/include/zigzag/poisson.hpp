#pragma once

#include <variant>
#include <vector>

#include "zigzag/rng.hpp"

namespace zz {

// lambda(s) = (a + b s)^+
struct AffineRate {
  double a = 0.0;
  double b = 0.0;
  double value(double t) const;
};

// lambda(s) = max(0, c e^{g s})
struct ExpRate {
  double c = 0.0;
  double g = 0.0;
  double value(double t) const;
};

// Smallest tau with int_0^tau lambda = e, or +inf when the total mass falls
// short. Closed-form inversion, no thinning.
double first_event(const AffineRate& rate, double e);
double first_event(const ExpRate& rate, double e);

// Finite superposition of the two families. Its first event is the minimum of
// independent component events; ties break to the lowest component index.
class RateSpec {
 public:
  using Term = std::variant<AffineRate, ExpRate>;

  RateSpec() = default;
  RateSpec(const AffineRate& r) : terms_{r} {}  // NOLINT: implicit by design
  RateSpec(const ExpRate& r) : terms_{r} {}     // NOLINT

  void add(const AffineRate& r) { terms_.push_back(r); }
  void add(const ExpRate& r) { terms_.push_back(r); }
  int components() const { return static_cast<int>(terms_.size()); }
  const Term& term(int i) const { return terms_[i]; }

  double value(double t) const;

  struct Event {
    double time;    // +inf when no component ever fires
    int component;  // -1 when time is +inf
  };
  Event first_event(RngStream& rng) const;
  // deterministic variant taking one exponential deviate per component
  Event first_event(const std::vector<double>& deviates) const;

 private:
  std::vector<Term> terms_;
};

}  // namespace zz
