// Copyright 2026 The rydchain Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Dormand-Prince 5(4) integrator with FSAL and the 4th-order continuous
// extension for sampling at arbitrary times. State may be any Eigen dense
// type (real vectors for mean-field, complex matrices for density matrices).

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>

#include "rydchain/errors.hpp"

namespace rydchain {

struct OdeOptions {
  double abs_tol = 1e-9;
  double rel_tol = 1e-7;
  double initial_step = 0.0;  // 0 selects a step from the RHS scale
  double max_step = std::numeric_limits<double>::infinity();
  long max_steps = 50'000'000;
};

struct OdeStats {
  long accepted = 0;
  long rejected = 0;
  long rhs_evals = 0;
};

/// Thrown when the step size underflows or the step budget is exhausted.
/// Samples emitted before the failure have already reached the observer.
class IntegrationError : public NumericalError {
 public:
  IntegrationError(const std::string& what, double t_reached)
      : NumericalError(what), t_reached_(t_reached) {}
  double t_reached() const { return t_reached_; }

 private:
  double t_reached_;
};

namespace detail {

template <class State>
double scaled_error(const State& err, const State& y0, const State& y1, double atol,
                    double rtol) {
  auto scale = (y0.cwiseAbs().array().max(y1.cwiseAbs().array()) * rtol + atol);
  return (err.cwiseAbs().array() / scale).maxCoeff();
}

}  // namespace detail

/// Integrates dy/dt = rhs(t, y) from t0 to the last entry of
/// \p sample_times. \p observer(t, y) is called at every sample time (which
/// must be increasing and lie in [t0, t_end]); returning false stops the
/// integration early. \p rhs has signature void(double, const State&, State&).
template <class State, class Rhs, class Observer>
OdeStats integrate_dopri5(Rhs&& rhs, State y, double t0, std::span<const double> sample_times,
                          Observer&& observer, const OdeOptions& opt = {}) {
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                   a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                   a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                   a75 = -2187.0 / 6784, a76 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                   e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
  constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                   d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                   d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

  OdeStats stats;
  if (sample_times.empty()) return stats;
  const double t_end = sample_times.back();
  std::size_t next = 0;

  // Samples at (or before) t0.
  while (next < sample_times.size() && sample_times[next] <= t0) {
    if (!observer(sample_times[next], y)) return stats;
    ++next;
  }
  if (next == sample_times.size()) return stats;

  State k1 = y, k2 = y, k3 = y, k4 = y, k5 = y, k6 = y, k7 = y, y1 = y, ytmp = y, err = y;
  rhs(t0, y, k1);
  ++stats.rhs_evals;

  double t = t0;
  double h = opt.initial_step;
  if (h <= 0.0) {
    const double d0 = y.cwiseAbs().maxCoeff();
    const double d1n = k1.cwiseAbs().maxCoeff();
    h = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
    h = std::min(h, 0.01 * (t_end - t0));
  }
  h = std::min(h, opt.max_step);

  const double uround = std::numeric_limits<double>::epsilon();
  while (t < t_end) {
    if (stats.accepted + stats.rejected >= opt.max_steps) {
      throw IntegrationError("integrator: step budget exhausted", t);
    }
    if (h < 10.0 * uround * std::max(1.0, std::abs(t))) {
      throw IntegrationError("integrator: step size underflow", t);
    }
    bool last = false;
    if (t + h >= t_end) {
      h = t_end - t;
      last = true;
    }

    ytmp = y + h * (a21 * k1);
    rhs(t + c2 * h, ytmp, k2);
    ytmp = y + h * (a31 * k1 + a32 * k2);
    rhs(t + c3 * h, ytmp, k3);
    ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    rhs(t + c4 * h, ytmp, k4);
    ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    rhs(t + c5 * h, ytmp, k5);
    ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    rhs(t + h, ytmp, k6);
    y1 = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    rhs(t + h, y1, k7);
    stats.rhs_evals += 6;

    err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double e = detail::scaled_error(err, y, y1, opt.abs_tol, opt.rel_tol);

    if (!(e <= 1.0)) {
      ++stats.rejected;
      const double fac = std::isfinite(e) ? std::max(0.2, 0.9 * std::pow(e, -0.2)) : 0.2;
      h *= std::min(1.0, fac);
      continue;
    }

    ++stats.accepted;
    const double t_new = last ? t_end : t + h;
    // Dense output on (t, t_new].
    if (next < sample_times.size() && sample_times[next] <= t_new) {
      const State r2 = y1 - y;
      const State r3 = h * k1 - r2;
      const State r4 = r2 - h * k7 - r3;
      const State r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
      while (next < sample_times.size() && sample_times[next] <= t_new) {
        const double ts = sample_times[next];
        bool keep_going;
        if (ts == t_new) {
          keep_going = observer(ts, y1);
        } else {
          const double th = (ts - t) / h;
          const double th1 = 1.0 - th;
          ytmp = y + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)));
          keep_going = observer(ts, ytmp);
        }
        ++next;
        if (!keep_going) return stats;
      }
    }

    y.swap(y1);
    k1.swap(k7);
    t = t_new;

    const double fac = e > 0.0 ? 0.9 * std::pow(e, -0.2) : 10.0;
    h = std::min(opt.max_step, h * std::clamp(fac, 0.2, 10.0));
  }
  return stats;
}

}  // namespace rydchain
