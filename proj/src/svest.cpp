#include "fcarab/svest.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include "fcarab/linalg.hpp"

namespace fcarab {

SolverConfig SolverConfig::defaults() {
  SolverConfig c;
  for (int i = 0; i < 10; ++i) c.barrier_schedule.push_back(100.0 - 11.0 * i);
  return c;
}

void SolverConfig::validate() const {
  if (barrier_schedule.empty()) throw ConfigError("barrier schedule is empty");
  for (std::size_t i = 0; i < barrier_schedule.size(); ++i) {
    if (!(barrier_schedule[i] > 0.0)) throw ConfigError("barrier weights must be positive");
    if (i > 0 && !(barrier_schedule[i] < barrier_schedule[i - 1])) {
      throw ConfigError("barrier schedule must be strictly decreasing");
    }
  }
  if (!(tau_x > 0.0) || !(tau_y > 0.0) || !(tau_e > 0.0) || !(gradient_tol > 0.0)) {
    throw ConfigError("solver tolerances must be positive");
  }
  if (max_outer < 1 || max_newton < 1 || max_backtracks < 1) {
    throw ConfigError("solver iteration limits must be positive");
  }
  if (!(armijo > 0.0 && armijo < 1.0) || !(shrink > 0.0 && shrink < 1.0)) {
    throw ConfigError("line-search constants must lie in (0, 1)");
  }
  if (!(hessian_step > 0.0)) throw ConfigError("Hessian step must be positive");
}

double SolverConfig::mismatch_bound_for(Eigen::Index size) const {
  return mismatch_bound > 0.0 ? mismatch_bound : 0.3 * std::sqrt(static_cast<double>(size));
}

ComplexVector solve_p1(const ComplexVector& a_bar, const ComplexMatrix& r_check,
                       double mismatch_bound) {
  const Eigen::Index s = a_bar.size();
  const double norm2 = a_bar.squaredNorm();
  if (!(norm2 > 0.0)) throw DomainError("solve_p1: presumed steering vector is zero");
  if (r_check.rows() != s || r_check.cols() != s) {
    throw DomainError("solve_p1: dimension mismatch");
  }

  const ComplexMatrix proj = ComplexMatrix::Identity(s, s) - a_bar * a_bar.adjoint() / norm2;
  const ComplexMatrix reduced = hermitian_part(proj * r_check * proj);
  const auto eig = hermitian_eigen(reduced);
  const double top = eig.values.cwiseAbs().maxCoeff();
  RealVector inv_values = RealVector::Zero(s);
  for (Eigen::Index i = 0; i < s; ++i) {
    if (eig.values[i] > 1e-10 * top) inv_values[i] = 1.0 / eig.values[i];
  }
  const ComplexMatrix pinv = eig.vectors * inv_values.asDiagonal() * eig.vectors.adjoint();
  ComplexVector e = -(proj * (pinv * (proj * (r_check * a_bar))));
  e = proj * e;

  const double base = quadratic_form(r_check, a_bar);
  const double value = quadratic_form(r_check, a_bar + e);
  if (value > base + 1e-10 * (std::abs(base) + 1e-300)) {
    throw std::logic_error("solve_p1: solution violates the quadratic inequality");
  }
  const double norm_e = e.norm();
  if (norm_e > mismatch_bound) e *= mismatch_bound / norm_e;
  return e;
}

namespace {

// Barrier objective with everything that does not depend on (x, y) cached.
class BarrierModel {
 public:
  explicit BarrierModel(const BarrierProblem& p)
      : p_(p),
        basis_(projected_basis(p.geometry, p.theta_deg)),
        k_(p.geometry.wavenumber),
        re_(p.r_check * p.e_perp),
        ere_(p.e_perp.dot(re_).real()),
        ineq_active_(p.e_perp.norm() > 1e-12 * p.a_pr.norm()) {
    const Eigen::Index s = p.a_pr.size();
    if (p.e_perp.size() != s || p.r_check.rows() != s || p.r_check.cols() != s ||
        p.geometry.size() != s) {
      throw DomainError("barrier problem dimensions are inconsistent");
    }
    if (!(p.l1 >= 0.0) || !(p.l2 >= 0.0)) throw DomainError("ACP bounds must be non-negative");
  }

  bool x_free() const { return p_.l1 > 0.0; }
  bool y_free() const { return p_.l2 > 0.0; }
  void set_weight(double w) { p_.weight = w; }
  double l1() const { return p_.l1; }
  double l2() const { return p_.l2; }

  ComplexVector steering(double x, double y) const {
    const Eigen::Index s = p_.a_pr.size();
    ComplexVector a(s);
    for (Eigen::Index i = 0; i < s; ++i) {
      const double phase = k_ * (x * basis_.mu[i] + y * basis_.nu[i]);
      a[i] = p_.a_pr[i] * cplx(std::cos(phase), std::sin(phase));
    }
    return a;
  }

  std::optional<double> value(double x, double y) const {
    if (!in_box(x, y)) return std::nullopt;
    const ComplexVector a = steering(x, y);
    const double w = p_.weight;
    const double quad = a.dot(p_.r_check * a).real();
    const double cross = 2.0 * re_.dot(a).real();
    const double pen = std::norm(a.dot(p_.e_perp));
    double f = quad + cross + w * pen;
    if (x_free()) f -= w * std::log(p_.l1 * p_.l1 - x * x);
    if (y_free()) f -= w * std::log(p_.l2 * p_.l2 - y * y);
    if (ineq_active_) {
      const double gap = -cross - ere_;
      if (!(gap > 0.0)) return std::nullopt;
      f -= w * std::log(gap);
    }
    if (!std::isfinite(f)) return std::nullopt;
    return f;
  }

  std::optional<Eigen::Vector2d> gradient(double x, double y) const {
    if (!in_box(x, y)) return std::nullopt;
    const ComplexVector a = steering(x, y);
    const double w = p_.weight;
    const ComplexVector ra = p_.r_check * a;
    const cplx ae = a.dot(p_.e_perp);  // a^H e
    const double cross = 2.0 * re_.dot(a).real();
    const double gap = -cross - ere_;
    if (ineq_active_ && !(gap > 0.0)) return std::nullopt;

    const cplx jk(0.0, k_);
    Eigen::Vector2d g = Eigen::Vector2d::Zero();
    for (int axis = 0; axis < 2; ++axis) {
      const RealVector& proj = axis == 0 ? basis_.mu : basis_.nu;
      const ComplexVector da = jk * proj.cast<cplx>().cwiseProduct(a);
      const double d_quad = 2.0 * da.dot(ra).real();
      const double d_cross = 2.0 * re_.dot(da).real();
      const double d_pen = 2.0 * (std::conj(ae) * da.dot(p_.e_perp)).real();
      double d = d_quad + d_cross + w * d_pen;
      if (ineq_active_) d += w * d_cross / gap;
      g[axis] = d;
    }
    if (x_free()) {
      g[0] += w * 2.0 * x / (p_.l1 * p_.l1 - x * x);
    } else {
      g[0] = 0.0;
    }
    if (y_free()) {
      g[1] += w * 2.0 * y / (p_.l2 * p_.l2 - y * y);
    } else {
      g[1] = 0.0;
    }
    return g;
  }

 private:
  bool in_box(double x, double y) const {
    if (!std::isfinite(x) || !std::isfinite(y)) return false;
    const bool xo = x_free() ? std::abs(x) < p_.l1 : x == 0.0;
    const bool yo = y_free() ? std::abs(y) < p_.l2 : y == 0.0;
    return xo && yo;
  }

  BarrierProblem p_;
  ProjectedBasis basis_;
  double k_;
  ComplexVector re_;  // R e
  double ere_;        // e^H R e
  bool ineq_active_;
};

}  // namespace

double barrier_value(const BarrierProblem& problem, double x, double y) {
  BarrierModel model(problem);
  const auto f = model.value(x, y);
  if (!f) throw DomainError("barrier_value: point is outside the barrier interior");
  return *f;
}

Eigen::Vector2d barrier_gradient(const BarrierProblem& problem, double x, double y) {
  BarrierModel model(problem);
  const auto g = model.gradient(x, y);
  if (!g) throw DomainError("barrier_gradient: point is outside the barrier interior");
  return *g;
}

namespace {

// Central differences of the analytic gradient; steps shrink near the box
// edge so both probes stay interior. Empty when a probe leaves the domain.
std::optional<Eigen::Matrix2d> fd_hessian(const BarrierModel& model, const Eigen::Vector2d& p,
                                          double rel_step) {
  Eigen::Matrix2d h = Eigen::Matrix2d::Zero();
  const bool free[2] = {model.x_free(), model.y_free()};
  const double bound[2] = {model.l1(), model.l2()};
  for (int i = 0; i < 2; ++i) {
    if (!free[i]) continue;
    double step = rel_step * bound[i];
    step = std::min(step, 0.5 * (bound[i] - std::abs(p[i])));
    if (!(step > 0.0)) return std::nullopt;
    Eigen::Vector2d plus = p, minus = p;
    plus[i] += step;
    minus[i] -= step;
    const auto gp = model.gradient(plus[0], plus[1]);
    const auto gm = model.gradient(minus[0], minus[1]);
    if (!gp || !gm) return std::nullopt;
    h.col(i) = (*gp - *gm) / (2.0 * step);
  }
  h = 0.5 * (h + h.transpose()).eval();
  if (!free[0]) h.row(0).setZero(), h.col(0).setZero();
  if (!free[1]) h.row(1).setZero(), h.col(1).setZero();
  return h;
}

// Newton direction when the (reduced) Hessian is positive definite.
std::optional<Eigen::Vector2d> newton_direction(const Eigen::Matrix2d& h, const Eigen::Vector2d& g,
                                                bool x_free, bool y_free) {
  Eigen::Vector2d d = Eigen::Vector2d::Zero();
  if (x_free && y_free) {
    const double det = h(0, 0) * h(1, 1) - h(0, 1) * h(1, 0);
    if (!(h(0, 0) > 0.0) || !(det > 1e-14 * std::abs(h(0, 0) * h(1, 1)))) return std::nullopt;
    d = -h.ldlt().solve(g);
  } else if (x_free) {
    if (!(h(0, 0) > 0.0)) return std::nullopt;
    d[0] = -g[0] / h(0, 0);
  } else if (y_free) {
    if (!(h(1, 1) > 0.0)) return std::nullopt;
    d[1] = -g[1] / h(1, 1);
  }
  if (!d.allFinite() || !(g.dot(d) < 0.0)) return std::nullopt;
  return d;
}

}  // namespace

P2Result solve_p2(const ComplexVector& e_perp, const ComplexVector& a_pr,
                  const ComplexMatrix& r_check, const SolverConfig& config, double l1, double l2,
                  double theta_deg, const NominalGeometry& geom, const Eigen::Vector2d& start) {
  config.validate();
  BarrierProblem problem{e_perp, a_pr, r_check, l1, l2, theta_deg, geom,
                         config.barrier_schedule.front()};
  BarrierModel model(problem);
  Eigen::Vector2d p = start;
  if (!model.x_free()) p[0] = 0.0;
  if (!model.y_free()) p[1] = 0.0;
  if (!model.value(p[0], p[1])) {
    throw DomainError("solve_p2: initial point is not interior");
  }

  P2Result result;
  for (double weight : config.barrier_schedule) {
    model.set_weight(weight);
    auto f = model.value(p[0], p[1]);
    if (!f) break;
    double fp = *f;
    for (int it = 0; it < config.max_newton; ++it) {
      const auto g = model.gradient(p[0], p[1]);
      if (!g || g->norm() < config.gradient_tol) break;

      std::optional<Eigen::Vector2d> dir;
      if (const auto h = fd_hessian(model, p, config.hessian_step)) {
        dir = newton_direction(*h, *g, model.x_free(), model.y_free());
      }
      bool fallback = !dir.has_value();
      bool accepted = false;
      for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
        const Eigen::Vector2d d = fallback ? Eigen::Vector2d(-*g) : *dir;
        const double slope = g->dot(d);
        double t = 1.0;
        for (int bt = 0; bt < config.max_backtracks; ++bt, t *= config.shrink) {
          const Eigen::Vector2d trial = p + t * d;
          const auto ft = model.value(trial[0], trial[1]);
          if (ft && *ft <= fp + config.armijo * t * slope) {
            result.steps.push_back({weight, fp, *ft, fallback});
            p = trial;
            fp = *ft;
            accepted = true;
            break;
          }
        }
        if (!accepted && !fallback) {
          fallback = true;
        } else {
          break;
        }
      }
      if (!accepted) break;
    }
  }
  result.x = p[0];
  result.y = p[1];
  result.a_bar = model.steering(p[0], p[1]);
  return result;
}

ComplexMatrix whitened_gram(const CovMatrix& r_sample, const CouplingMatrix& coupling) {
  const double floor = noise_power_estimate(r_sample);
  const ComplexMatrix r_inv = hermitian_inverse(r_sample.value, floor);
  return hermitian_part(coupling.entries.adjoint() * r_inv * coupling.entries);
}

SVEstimate estimate_sv(const CovMatrix& r_sample, const CouplingMatrix& coupling, double theta_deg,
                       const ACPState& acp, const SolverConfig& config,
                       const NominalGeometry& geom) {
  config.validate();
  if (r_sample.size() != geom.size() || coupling.size() != geom.size()) {
    throw DomainError("estimate_sv: dimension mismatch");
  }
  const ComplexMatrix r_check = whitened_gram(r_sample, coupling);
  const ComplexVector a_pr = steering_vector(geom, theta_deg, acp.r1_bar, acp.r2_bar).entries;
  const double bound = config.mismatch_bound_for(geom.size());

  SVEstimate est;
  est.a_bar = a_pr;
  est.e_perp = ComplexVector::Zero(geom.size());
  est.objective_trace.push_back(quadratic_form(r_check, a_pr));

  auto orthogonality = [](const ComplexVector& a, const ComplexVector& e) {
    const double denom = a.norm() * e.norm();
    return denom > 0.0 ? std::abs(a.dot(e)) / denom : 0.0;
  };

  for (int m = 1; m <= config.max_outer; ++m) {
    est.iterations = m;
    const ComplexVector e = solve_p1(est.a_bar, r_check, bound);
    est.orthogonality_trace.push_back(orthogonality(est.a_bar, e));
    est.objective_trace.push_back(quadratic_form(r_check, est.a_bar + e));

    double x = est.x, y = est.y;
    ComplexVector a = est.a_bar;
    try {
      auto p2 = solve_p2(e, a_pr, r_check, config, acp.l1, acp.l2, theta_deg, geom,
                         Eigen::Vector2d(est.x, est.y));
      x = p2.x;
      y = p2.y;
      a = std::move(p2.a_bar);
    } catch (const DomainError&) {
      // The mismatch leaves no interior slack at the current ACPs; keep them.
    }
    est.objective_trace.push_back(quadratic_form(r_check, a + e));

    const bool small_change = std::abs(x - est.x) <= config.tau_x &&
                              std::abs(y - est.y) <= config.tau_y &&
                              (e - est.e_perp).norm() <= config.tau_e;
    est.x = x;
    est.y = y;
    est.a_bar = std::move(a);
    est.e_perp = e;
    if (small_change) {
      est.converged = true;
      break;
    }
  }

  est.e_perp = solve_p1(est.a_bar, r_check, bound);
  est.orthogonality_trace.push_back(orthogonality(est.a_bar, est.e_perp));
  est.objective_trace.push_back(quadratic_form(r_check, est.combined()));
  return est;
}

}  // namespace fcarab
