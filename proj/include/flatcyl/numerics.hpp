#pragma once

// Thin wrappers over Boost: Gauss-Kronrod quadrature that refuses to return
// an unconverged value, and a Dormand-Prince flow with terminal event location.

#include <array>
#include <cmath>
#include <cstddef>
#include <queue>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>

#include "flatcyl/errors.hpp"

namespace flatcyl {

struct quad_result {
  double value;
  double error;
};

// Globally adaptive G7/K15 on [a, b] (QAG-style: always bisect the interval
// with the largest error); relative tolerance against the L1 norm. Boost's
// own recursion halves an absolute tolerance per level and chases roundoff.
template <class F>
quad_result integrate_gk(F&& f, double a, double b, double rel_tol, const char* what, unsigned max_depth = 15) {
  if (!(b > a)) return {0.0, 0.0};
  using gk = boost::math::quadrature::gauss_kronrod<double, 15>;
  struct piece {
    double a, b, value, error, l1;
    unsigned depth;
    bool operator<(const piece& o) const { return error < o.error; }
  };
  auto rule = [&](double lo, double hi, unsigned depth) {
    piece p{lo, hi, 0.0, 0.0, 0.0, depth};
    p.value = gk::integrate(f, lo, hi, 0, 0.0, &p.error, &p.l1);
    return p;
  };
  std::priority_queue<piece> heap;
  heap.push(rule(a, b, 0));
  double value = heap.top().value, err = heap.top().error, l1 = heap.top().l1;
  const std::size_t max_pieces = std::size_t{1} << 12;
  while (!(err <= rel_tol * l1) && err > 1e-300) {
    const piece top = heap.top();
    if (top.depth >= max_depth || heap.size() >= max_pieces || !std::isfinite(value)) {
      throw quadrature_error(std::string(what) + ": tolerance not met (error " + std::to_string(err) + ", |I| " +
                             std::to_string(l1) + ")");
    }
    heap.pop();
    const double mid = 0.5 * (top.a + top.b);
    const piece lo = rule(top.a, mid, top.depth + 1), hi = rule(mid, top.b, top.depth + 1);
    value += lo.value + hi.value - top.value;
    err += lo.error + hi.error - top.error;
    l1 += lo.l1 + hi.l1 - top.l1;
    heap.push(lo);
    heap.push(hi);
  }
  if (!std::isfinite(value)) throw quadrature_error(std::string(what) + ": non-finite integrand");
  return {value, err};
}

// Sum over consecutive breakpoints; each piece must converge on its own.
template <class F, class Cuts>
quad_result integrate_pieces(F&& f, const Cuts& cuts, double rel_tol, const char* what) {
  quad_result total{0.0, 0.0};
  for (std::size_t i = 0; i + 1 < std::size(cuts); ++i) {
    auto q = integrate_gk(f, cuts[i], cuts[i + 1], rel_tol, what);
    total.value += q.value;
    total.error += q.error;
  }
  return total;
}

template <std::size_t N>
using vec = std::array<double, N>;

struct ode_options {
  double abs_tol = 1e-12;
  double rel_tol = 1e-12;
  double h0 = 1e-3;
  double h_min = 1e-13;  // relative to max(1, t)
  std::size_t max_steps = 20'000'000;
};

template <std::size_t N>
struct flow_end {
  vec<N> x;
  double t;
  bool event;
  std::size_t steps;
};

struct no_event {
  template <class X>
  double operator()(const X&) const { return -1.0; }
};

struct no_observer {
  template <class X>
  void operator()(double, const X&) const {}
};

struct no_break {
  template <class X>
  double operator()(const X&) const { return 1.0; }
};

// Integrates x' = sys(x) on [0, t_end]. Stops early, exactly, where event(x)
// first moves from negative to nonnegative. on_step sees every accepted point.
// Sign changes of brk(x) mark where sys loses smoothness: steps are cut there
// and restarted from h0, so no step straddles a kink.
template <std::size_t N, class Sys, class Event = no_event, class Obs = no_observer, class Break = no_break>
flow_end<N> flow(Sys&& sys, vec<N> x, double t_end, const ode_options& o, Event&& event = {}, Obs&& on_step = {},
                 Break&& brk = {}) {
  namespace odeint = boost::numeric::odeint;
  using stepper_t = odeint::runge_kutta_dopri5<vec<N>>;
  auto rhs = [&](const vec<N>& y, vec<N>& dy, double) { dy = sys(y); };
  auto ctrl = odeint::make_controlled<stepper_t>(o.abs_tol, o.rel_tol);
  stepper_t one_step;

  double t = 0.0, h = o.h0;
  double g = event(x);
  double b = brk(x);
  bool armed = g < 0.0;
  std::size_t steps = 0;
  while (t < t_end) {
    if (t + h > t_end) h = t_end - t;
    const vec<N> x0 = x;
    const double t0 = t;
    if (ctrl.try_step(rhs, x, t, h) == odeint::fail) {
      if (h < o.h_min * std::max(1.0, std::fabs(t))) throw tangency_error("flow: step size underflow");
      continue;
    }
    if (++steps > o.max_steps) throw convergence_error("flow: step budget exhausted");
    vec<N> dx0;
    rhs(x0, dx0, t0);
    auto state_at = [&](double tau) {
      vec<N> out, dout;
      one_step.do_step(rhs, x0, dx0, t0, out, dout, tau);
      return out;
    };
    auto root = [&](auto&& f, double f0, double f1) {
      std::uintmax_t iters = 64;
      return boost::math::tools::toms748_solve(f, 0.0, t - t0, f0, f1, boost::math::tools::eps_tolerance<double>(52),
                                               iters)
          .second;  // upper bracket: past the crossing
    };
    const double b1 = brk(x);
    if ((b < 0.0) != (b1 < 0.0)) {
      const double tau = root([&](double s) { return s <= 0.0 ? b : brk(state_at(s)); }, b, b1);
      x = state_at(tau);
      t = t0 + tau;
      h = o.h0;
      ctrl.reset();  // drop the cached derivative of the discarded endpoint
    }
    b = b1;  // side reached, even when x sits exactly on the kink
    const double g1 = event(x);
    if (armed && g1 >= 0.0) {
      const double tau = root([&](double s) { return s <= 0.0 ? g : event(state_at(s)); }, g, g1);
      return {state_at(tau), t0 + tau, true, steps};
    }
    g = g1;
    if (g < 0.0) armed = true;
    on_step(t, x);
  }
  return {x, t, false, steps};
}

}  // namespace flatcyl
