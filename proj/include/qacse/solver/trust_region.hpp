#pragma once

// Step length along a fixed ansatz direction: a model-trust-region Newton step from a
// quadratic through E(-h), E(0), E(+h). h starts at 1 and shrinks with the radius (h <= radius/2),
// so repeated rejections sample the energy closer to the current point.

#include <cmath>
#include <functional>
#include <map>

#include "qacse/common.hpp"

namespace qacse {

struct TrustRegionConfig {
  double initial_radius = 2.0;
  double max_radius = 8.0;
  double min_radius = 1e-4;
  double fit_point = 1.0;     // largest h
  double min_ratio = 0.1;     // reject when actual/predicted falls below
  double noise_floor = 0.0;   // reject decreases smaller than this
};

struct TrustRegionState {
  double radius = 2.0;
};

struct StepResult {
  double epsilon = 0;
  bool accepted = false;
  double e0 = 0;
  double energy = 0;     // E(epsilon)
  double predicted = 0;  // model decrease (negative is downhill)
  double actual = 0;
  double ratio = 0;
  std::map<double, double> evaluations;
};

/// `energy` may be expensive or noisy; each distinct epsilon is evaluated once. A non-finite
/// value (a failed measurement) rejects the step.
inline StepResult optimize_epsilon(const std::function<double(double)>& energy, TrustRegionState& state,
                                   const TrustRegionConfig& cfg = {}) {
  StepResult r;
  auto eval = [&](double e) {
    auto it = r.evaluations.find(e);
    if (it != r.evaluations.end()) return it->second;
    const double v = energy(e);
    r.evaluations.emplace(e, v);
    return v;
  };
  const double h = std::min(cfg.fit_point, state.radius / 2);
  r.e0 = eval(0.0);
  const double em = eval(-h), ep = eval(h);
  if (!std::isfinite(r.e0) || !std::isfinite(em) || !std::isfinite(ep)) {
    r.energy = r.e0;
    state.radius = std::max(cfg.min_radius, state.radius / 2);
    return r;
  }
  const double a = (ep + em - 2 * r.e0) / (2 * h * h);  // curvature / 2
  const double b = (ep - em) / (2 * h);                 // slope
  const double rad = state.radius;
  double eps;
  if (a > 0) {
    eps = std::clamp(-b / (2 * a), -rad, rad);
  } else if (b != 0) {
    eps = b > 0 ? -rad : rad;
  } else {
    eps = 0;
  }
  r.epsilon = eps;
  r.predicted = b * eps + a * eps * eps;
  if (eps == 0 || r.predicted >= 0) {
    r.energy = r.e0;
    state.radius = std::max(cfg.min_radius, rad / 2);
    return r;
  }
  r.energy = eval(eps);
  r.actual = r.energy - r.e0;
  r.ratio = r.actual / r.predicted;
  r.accepted = r.energy < r.e0 && -r.actual > cfg.noise_floor && r.ratio >= cfg.min_ratio;
  if (!r.accepted)
    state.radius = std::max(cfg.min_radius, rad / 2);
  else if (r.ratio >= 0.75 && r.ratio <= 1.25)
    state.radius = std::min(cfg.max_radius, rad * 2);
  return r;
}

}  // namespace qacse
