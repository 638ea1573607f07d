#pragma once

#include <vector>

#include "fcarab/acp.hpp"
#include "fcarab/coupling.hpp"
#include "fcarab/geometry.hpp"
#include "fcarab/signals.hpp"

namespace fcarab {

struct SolverConfig {
  /// Barrier weights, strictly decreasing and positive.
  std::vector<double> barrier_schedule;
  double tau_x = 0.01;  // mm
  double tau_y = 0.1;   // mm
  double tau_e = 0.1;
  int max_outer = 10;  // D
  int max_newton = 50;
  double gradient_tol = 1e-6;
  double armijo = 1e-4;
  double shrink = 0.5;
  int max_backtracks = 30;
  /// Central-difference step for the Hessian, relative to each bound.
  double hessian_step = 1e-4;
  /// Bound on ||e_perp||; non-positive selects 0.3 sqrt(S).
  double mismatch_bound = 0.0;

  /// Ten weights uniformly spaced from 100 down to 1.
  static SolverConfig defaults();
  void validate() const;
  double mismatch_bound_for(Eigen::Index size) const;
};

/// Orthogonal mismatch step: minimize (a + e)^H R (a + e) over e with
/// e^H a = 0, solved in closed form through the projected normal equations
/// e = -P pinv(P R P) P R a, P = I - a a^H / ||a||^2. When ||e|| exceeds
/// `mismatch_bound` it is rescaled onto that sphere. Throws DomainError for
/// a zero `a_bar` and std::logic_error if the solution fails to improve on e = 0.
ComplexVector solve_p1(const ComplexVector& a_bar, const ComplexMatrix& r_check,
                       double mismatch_bound);

/// Penalized objective of the ACP step for a fixed orthogonal mismatch e.
/// With a = a_pr .* alpha(theta, x, y) and weight w:
///
///   f = a^H R a + 2 Re{e^H R a} + w |a^H e|^2
///       - w ln(l1^2 - x^2) - w ln(l2^2 - y^2)
///       - w ln(-2 Re{e^H R a} - e^H R e).
///
/// The last log keeps (a + e)^H R (a + e) <= a^H R a. It is dropped when e = 0
/// (the inequality then holds with equality everywhere); a zero bound freezes
/// its coordinate at 0 and drops its box term.
struct BarrierProblem {
  ComplexVector e_perp;
  ComplexVector a_pr;      // presumed SV at (r1_bar, r2_bar)
  ComplexMatrix r_check;   // C^H R^-1 C
  double l1 = 0.0;
  double l2 = 0.0;
  double theta_deg = 0.0;
  NominalGeometry geometry;
  double weight = 1.0;
};

/// Throws DomainError outside the interior of the barrier domain.
double barrier_value(const BarrierProblem& problem, double x, double y);
Eigen::Vector2d barrier_gradient(const BarrierProblem& problem, double x, double y);

struct NewtonStep {
  double weight;
  double f_before;
  double f_after;
  bool gradient_fallback;
};

struct P2Result {
  double x = 0.0;
  double y = 0.0;
  ComplexVector a_bar;  // a_pr .* alpha(theta, x, y)
  std::vector<NewtonStep> steps;
};

/// ACP step: damped Newton on the barrier objective for each weight of the
/// schedule, warm-started from `start`. Hessians come from central
/// differences of the analytic gradient; backtracking keeps every iterate
/// interior and f non-increasing.
P2Result solve_p2(const ComplexVector& e_perp, const ComplexVector& a_pr,
                  const ComplexMatrix& r_check, const SolverConfig& config, double l1, double l2,
                  double theta_deg, const NominalGeometry& geom,
                  const Eigen::Vector2d& start = Eigen::Vector2d::Zero());

struct SVEstimate {
  ComplexVector a_bar;   // presumed SV at the optimized ACPs
  ComplexVector e_perp;  // orthogonal mismatch, e^H a_bar = 0
  double x = 0.0;        // optimized r1 - r1_bar, mm
  double y = 0.0;        // optimized r2 - r2_bar, mm
  int iterations = 0;
  bool converged = false;
  /// (a + e)^H R (a + e) after every half-step, starting with the initial point.
  std::vector<double> objective_trace;
  /// |a^H e| / (||a|| ||e||) after every p1 half-step.
  std::vector<double> orthogonality_trace;

  ComplexVector combined() const { return a_bar + e_perp; }
};

/// Alternates solve_p1 and solve_p2 from a_bar = a(theta, r1_bar, r2_bar),
/// (x, y) = 0, e = 0 until the changes in x, y and e fall below the
/// tolerances or max_outer iterations run out. A closing p1 step at the
/// final ACPs makes the returned pair exactly orthogonal. Only the presumed
/// fields of `acp` are read.
SVEstimate estimate_sv(const CovMatrix& r_sample, const CouplingMatrix& coupling, double theta_deg,
                       const ACPState& acp, const SolverConfig& config,
                       const NominalGeometry& geom);

/// C^H R^-1 C with the noise-floor regularized inverse of R.
ComplexMatrix whitened_gram(const CovMatrix& r_sample, const CouplingMatrix& coupling);

}  // namespace fcarab
