#include "ccpower/llbcp.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "ccpower/errors.hpp"

namespace ccpower {

std::size_t Polytope::lower_bound_row() const {
  for (std::size_t j = 0; j < tag.size(); ++j)
    if (tag[j] == RowTag::LowerBound) return j;
  throw std::logic_error("polytope has no lower-bound row");
}

std::size_t Polytope::count(RowTag t) const { return static_cast<std::size_t>(std::count(tag.begin(), tag.end(), t)); }

InitialPolytope init_polytope(std::size_t n, double epsilon) {
  if (n == 0) throw std::invalid_argument("polytope dimension must be positive");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1)");
  const auto N = static_cast<Eigen::Index>(2 * n + 1);
  const auto ni = static_cast<Eigen::Index>(n);
  const double big = 1.0 / epsilon;
  const double root_n = std::sqrt(static_cast<double>(n));

  InitialPolytope out;
  Polytope& P = out.polytope;
  P.n = n;
  P.A = Eigen::MatrixXd::Zero(N, ni);
  P.A.topRows(ni).setIdentity();
  P.A.middleRows(ni, ni) = -Eigen::MatrixXd::Identity(ni, ni);
  P.A.row(2 * ni).setOnes();
  P.c = vec::Constant(N, -big);
  P.c[2 * ni] = -root_n * big;
  P.pi = vec::Constant(N, big);
  P.pi[2 * ni] = root_n * big;
  P.tag.assign(2 * n, RowTag::Box);
  P.tag.push_back(RowTag::LowerBound);
  P.owner.assign(2 * n + 1, -1);
  P.pi_pending.assign(2 * n + 1, false);
  out.p0 = vec::Zero(ni);
  out.tau0 = big;
  return out;
}

void SolverConfig::validate(std::size_t n) const {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("solver epsilon must lie in (0, 1)");
  if (!(theta > 0.5 && theta < 1.0)) throw std::invalid_argument("solver theta must lie in (0.5, 1)");
  if (!(newton_tol > 0.0)) throw std::invalid_argument("newton_tol must be positive");
  if (max_newton == 0) throw std::invalid_argument("max_newton must be positive");
  if (objective.size() != 0 && objective.size() != static_cast<Eigen::Index>(n))
    throw std::invalid_argument("objective has wrong dimension");
}

vec SolverConfig::objective_or_ones(std::size_t n) const {
  return objective.size() == 0 ? vec::Ones(static_cast<Eigen::Index>(n)) : objective;
}

namespace {

// Cholesky-like factor of the barrier Hessian Aᵀ S⁻² A, from a QR of S⁻¹A so
// that widely spread slacks do not square the condition number.
struct HessianFactor {
  Eigen::MatrixXd R;  // upper triangular, H = RᵀR

  HessianFactor(const Eigen::MatrixXd& A, const vec& s) {
    const Eigen::MatrixXd J = s.cwiseInverse().asDiagonal() * A;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(J);
    const auto n = A.cols();
    R = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
    const vec d = R.diagonal().cwiseAbs();
    // Columns can differ in scale by many orders of magnitude (a variable
    // touched only by far box rows next to one pinned by tight cuts), so
    // only exact rank loss counts as singular.
    if (!(d.minCoeff() > 0.0) || !d.allFinite()) throw DegeneratePolytope("barrier Hessian is singular");
  }
  // R⁻ᵀ x
  vec half_solve(const vec& x) const { return R.transpose().triangularView<Eigen::Lower>().solve(x); }
  Eigen::MatrixXd half_solve(const Eigen::MatrixXd& x) const {
    return R.transpose().triangularView<Eigen::Lower>().solve(x);
  }
  // R⁻¹ y
  vec back_solve(const vec& y) const { return R.triangularView<Eigen::Upper>().solve(y); }
};

double barrier(const vec& obj, double tau, const vec& p, const vec& s) {
  return obj.dot(p) / tau - s.array().log().sum();
}

}  // namespace

vec tau_center(const Polytope& poly, double tau, const vec& p_start, const SolverConfig& config,
               CenteringStats* stats) {
  const vec obj = config.objective_or_ones(poly.n);
  vec p = p_start;
  vec s = poly.slacks(p);
  if (!(s.minCoeff() > 0.0)) throw std::invalid_argument("centering start is not strictly interior");
  double f = barrier(obj, tau, p, s);
  vec best = p;
  double best_f = f;
  CenteringStats local;

  for (std::size_t it = 0; it < config.max_newton; ++it) {
    const vec grad = obj / tau - poly.A.transpose() * s.cwiseInverse();
    const HessianFactor H(poly.A, s);
    const vec y = H.half_solve(grad);
    const double decrement = y.norm();
    local.decrement = decrement;
    if (decrement <= config.newton_tol) {
      if (stats) *stats = local;
      return p;
    }
    const vec dx = -H.back_solve(y);
    ++local.newton_steps;

    double step = decrement > 0.25 ? 1.0 / (1.0 + decrement) : 1.0;
    const vec Adx = poly.A * dx;
    for (Eigen::Index i = 0; i < Adx.size(); ++i)
      if (Adx[i] < 0.0) step = std::min(step, 0.99 * s[i] / -Adx[i]);

    // Inside the quadratic region the full step stays within the Dikin
    // ellipsoid, and the decrease is below what f can resolve in floating
    // point, so only interiority is checked there.
    const bool quadratic = decrement <= 0.25;
    const double slope = grad.dot(dx);
    bool moved = false;
    for (int halvings = 0; halvings < 60; ++halvings, step *= 0.5) {
      const vec p_new = p + step * dx;
      const vec s_new = poly.slacks(p_new);
      if (!(s_new.minCoeff() > 0.0)) continue;
      const double f_new = barrier(obj, tau, p_new, s_new);
      if (quadratic || f_new <= f + 1e-4 * step * slope + 1e-13 * (1.0 + std::abs(f))) {
        p = p_new;
        s = s_new;
        f = f_new;
        moved = true;
        break;
      }
    }
    if (f < best_f) {
      best_f = f;
      best = p;
    }
    if (!moved) break;
  }
  if (stats) *stats = local;
  throw CenteringFailure("tau-centering did not reach the Newton-decrement tolerance", best);
}

vec variational_quantities(const Polytope& poly, const vec& p) {
  const vec s = poly.slacks(p);
  if (!(s.minCoeff() > 0.0)) throw std::invalid_argument("point is not strictly interior");
  const HessianFactor H(poly.A, s);
  const Eigen::MatrixXd Z = H.half_solve(Eigen::MatrixXd((s.cwiseInverse().asDiagonal() * poly.A).transpose()));
  return Z.colwise().squaredNorm().transpose();
}

double variational_quantity(const Polytope& poly, const vec& p, double /*tau*/, std::size_t j) {
  if (j >= poly.rows()) throw std::out_of_range("row index out of range");
  return variational_quantities(poly, p)[static_cast<Eigen::Index>(j)];
}

std::size_t add_cut(Polytope& poly, const vec& normal, const vec& through_point, int owner, double provisional_pi) {
  const double norm = normal.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) throw std::invalid_argument("cut normal must be finite and nonzero");
  const vec a = -normal / norm;
  const auto N = poly.A.rows();
  poly.A.conservativeResize(N + 1, Eigen::NoChange);
  poly.A.row(N) = a.transpose();
  poly.c.conservativeResize(N + 1);
  poly.c[N] = a.dot(through_point);
  poly.pi.conservativeResize(N + 1);
  poly.pi[N] = provisional_pi;
  poly.tag.push_back(RowTag::Cut);
  poly.owner.push_back(owner);
  poly.pi_pending.push_back(true);
  return static_cast<std::size_t>(N);
}

void drop_constraint(Polytope& poly, std::size_t j) {
  if (j >= poly.rows()) throw std::out_of_range("row index out of range");
  if (poly.tag[j] != RowTag::Cut) throw ProtectedRow("box and lower-bound rows cannot be dropped");
  const auto N = poly.A.rows();
  const auto jj = static_cast<Eigen::Index>(j);
  const auto tail = N - jj - 1;
  poly.A.middleRows(jj, tail) = poly.A.bottomRows(tail).eval();
  poly.A.conservativeResize(N - 1, Eigen::NoChange);
  poly.c.segment(jj, tail) = poly.c.tail(tail).eval();
  poly.c.conservativeResize(N - 1);
  poly.pi.segment(jj, tail) = poly.pi.tail(tail).eval();
  poly.pi.conservativeResize(N - 1);
  poly.tag.erase(poly.tag.begin() + jj);
  poly.owner.erase(poly.owner.begin() + jj);
  poly.pi_pending.erase(poly.pi_pending.begin() + jj);
}

Bounds Bounds::nonnegative(std::size_t n) {
  const auto ni = static_cast<Eigen::Index>(n);
  return Bounds{vec::Zero(ni), vec::Constant(ni, std::numeric_limits<double>::infinity()), {}};
}

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::InfeasibleOrUnbounded: return "InfeasibleOrUnbounded";
    case SolveStatus::IterationCap: return "IterationCap";
  }
  return "?";
}

std::string to_string(ExitTest e) {
  switch (e) {
    case ExitTest::None: return "none";
    case ExitTest::T1: return "T1";
    case ExitTest::T2: return "T2";
    case ExitTest::T3: return "T3";
  }
  return "?";
}

TraceSink csv_trace(std::ostream& out) {
  out << "iter,N,tau,case,lower_bound,objective,min_slack\n";
  return [&out](const TraceRecord& r) {
    out << r.iter << ',' << r.N << ',' << r.tau << ',' << r.step << ',' << r.lower_bound << ',' << r.objective
        << ',' << r.min_slack << '\n';
  };
}

namespace {

// Moves p (on the boundary of the freshly added rows `fresh`) back into the
// interior. Picks d = H⁻¹ A_freshᵀ w with w minimizing ½wᵀ(A_f H⁻¹ A_fᵀ)w -
// Σ log w, which makes every fresh row's slope along d positive, and steps
// half a Dikin radius so the old rows keep at least half their slack.
std::optional<vec> restore_interior(const Polytope& poly, const vec& p, const std::vector<std::size_t>& fresh) {
  const auto n = static_cast<Eigen::Index>(poly.n);
  std::vector<Eigen::Index> old_rows;
  for (std::size_t j = 0; j < poly.rows(); ++j)
    if (std::find(fresh.begin(), fresh.end(), j) == fresh.end()) old_rows.push_back(static_cast<Eigen::Index>(j));
  Eigen::MatrixXd A_old(static_cast<Eigen::Index>(old_rows.size()), n);
  for (std::size_t i = 0; i < old_rows.size(); ++i) A_old.row(static_cast<Eigen::Index>(i)) = poly.A.row(old_rows[i]);
  const vec s_old = A_old * p - poly.c(old_rows);
  if (!(s_old.minCoeff() > 0.0)) return std::nullopt;

  const auto m = static_cast<Eigen::Index>(fresh.size());
  Eigen::MatrixXd A_new(m, n);
  for (Eigen::Index i = 0; i < m; ++i) A_new.row(i) = poly.A.row(static_cast<Eigen::Index>(fresh[i]));

  const HessianFactor H(A_old, s_old);
  const Eigen::MatrixXd Z = H.half_solve(Eigen::MatrixXd(A_new.transpose()));  // n x m
  const Eigen::MatrixXd Gm = Z.transpose() * Z;
  if (!(Gm.diagonal().minCoeff() > 0.0)) return std::nullopt;

  // Damped Newton; the objective is self-concordant, so the 1/(1+λ) step
  // keeps w positive without a function-value line search.
  vec w = Gm.diagonal().cwiseSqrt().cwiseInverse();
  const double w_scale = w.maxCoeff();
  double dec2 = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 200 && dec2 > 1e-20; ++it) {
    const vec grad = Gm * w - w.cwiseInverse();
    const Eigen::MatrixXd hess = Gm + w.array().square().inverse().matrix().asDiagonal().toDenseMatrix();
    Eigen::LLT<Eigen::MatrixXd> llt(hess);
    if (llt.info() != Eigen::Success) return std::nullopt;
    const vec dw = -llt.solve(grad);
    dec2 = -grad.dot(dw);
    const double lambda = std::sqrt(std::max(dec2, 0.0));
    double step = lambda > 0.25 ? 1.0 / (1.0 + lambda) : 1.0;
    while (!((w + step * dw).array() > 0.0).all()) step *= 0.5;
    w += step * dw;
    // Unbounded below along w >= 0 means the fresh normals are positively
    // dependent: the new half-spaces share no interior.
    if (w.maxCoeff() > 1e12 * w_scale) return std::nullopt;
  }
  // Only the sign of A_fresh d matters; the slack check below confirms it.
  if (!(dec2 < 1e-8)) return std::nullopt;

  const vec y = Z * w;
  const double ynorm = y.norm();
  if (!(ynorm > 0.0)) return std::nullopt;
  const vec d = H.back_solve(y / ynorm);
  const vec p_new = p + 0.5 * d;
  if (!(poly.slacks(p_new).minCoeff() > 0.0)) return std::nullopt;
  return p_new;
}

}  // namespace

SolveOutcome solve(const std::vector<std::shared_ptr<const ConstraintOracle>>& oracles, const Bounds& bounds,
                   const SolverConfig& config, std::optional<vec> start, const TraceSink& trace) {
  if (oracles.empty()) throw std::invalid_argument("solve needs at least one oracle");
  const std::size_t n = static_cast<std::size_t>(bounds.lower.size());
  const auto ni = static_cast<Eigen::Index>(n);
  if (bounds.upper.size() != ni) throw std::invalid_argument("bounds have inconsistent dimensions");
  for (const auto& o : oracles)
    if (!o || o->dimension() != n) throw std::invalid_argument("oracle dimension does not match the bounds");
  config.validate(n);

  const vec obj = config.objective_or_ones(n);
  const double eps = config.epsilon;
  const double big = 1.0 / eps;

  InitialPolytope init = init_polytope(n, eps);
  Polytope& poly = init.polytope;
  const std::size_t lb_row = 2 * n;
  poly.A.row(static_cast<Eigen::Index>(lb_row)) = obj.transpose();

  vec lo(ni), hi(ni);
  for (Eigen::Index i = 0; i < ni; ++i) {
    lo[i] = std::max(bounds.lower[i], -big);
    hi[i] = std::min(bounds.upper[i], big);
    if (!(lo[i] < hi[i])) throw std::invalid_argument("empty box in solve bounds");
    poly.c[i] = lo[i];
    poly.c[ni + i] = -hi[i];
  }
  for (const auto& row : bounds.rows) {
    if (row.normal.size() != ni) throw std::invalid_argument("linear row has wrong dimension");
    const auto N = poly.A.rows();
    poly.A.conservativeResize(N + 1, Eigen::NoChange);
    poly.A.row(N) = row.normal.transpose();
    poly.c.conservativeResize(N + 1);
    poly.c[N] = row.rhs;
    poly.pi.conservativeResize(N + 1);
    poly.tag.push_back(RowTag::Box);
    poly.owner.push_back(-1);
    poly.pi_pending.push_back(false);
  }

  vec p = start ? *start : vec(0.5 * (lo + hi));
  if (p.size() != ni) throw std::invalid_argument("start point has wrong dimension");
  double lower = std::min(-obj.norm() * big, obj.dot(p) - obj.norm() * big);
  poly.c[static_cast<Eigen::Index>(lb_row)] = lower;
  {
    const vec s0 = poly.slacks(p);
    if (!(s0.minCoeff() > 0.0)) throw std::invalid_argument("start point is not strictly inside the bounds");
    poly.pi = s0;
    poly.pi[static_cast<Eigen::Index>(lb_row)] = 1.0;
  }

  SolveOutcome out;
  double tau = init.tau0;
  CenteringStats cs;
  // A stall on a localization set whose slacks are down at roundoff level
  // relative to p is the set collapsing onto an empty feasible region; it is
  // reported through T2. Stalls anywhere else propagate.
  bool collapsed = false;
  auto center = [&](const vec& from) -> vec {
    try {
      vec c = tau_center(poly, tau, from, config, &cs);
      out.newton_steps += cs.newton_steps;
      return c;
    } catch (const CenteringFailure& e) {
      out.newton_steps += cs.newton_steps;
      const vec& b = e.best_iterate();
      if (!(poly.slacks(b).minCoeff() <= 1e-6 * (1.0 + b.lpNorm<Eigen::Infinity>()))) throw;
      collapsed = true;
      return b;
    }
  };
  p = center(p);

  const std::size_t row_limit = t1_row_limit(n, eps);
  const double slack_limit = t2_slack_limit(n, eps);
  std::vector<std::optional<double>> hints(oracles.size());
  double best_value = std::numeric_limits<double>::infinity();

  auto finish = [&](ExitTest test) {
    out.exit_test = test;
    if (test == ExitTest::None)
      out.status = SolveStatus::IterationCap;
    else
      out.status = out.p_best ? SolveStatus::Optimal : SolveStatus::InfeasibleOrUnbounded;
    out.objective_value = best_value;
    out.lower_bound = lower;
    out.rows = poly.rows();
    out.final_tau = tau;
    return out;
  };

  for (std::size_t iter = 1; iter <= config.max_iterations; ++iter) {
    out.iterations = iter;
    const vec s = poly.slacks(p);
    for (std::size_t j = 0; j < poly.rows(); ++j) {
      if (!poly.pi_pending[j]) continue;
      poly.pi[static_cast<Eigen::Index>(j)] = s[static_cast<Eigen::Index>(j)];
      poly.pi_pending[j] = false;
    }
    const std::size_t N = poly.rows();
    const double min_slack = s.minCoeff();
    TraceRecord rec{iter, N, tau, "", lower, obj.dot(p), min_slack};
    auto emit = [&](const std::string& step) {
      rec.step += rec.step.empty() ? step : "+" + step;
      if (trace) trace(rec);
    };

    if (collapsed) {
      out.note = "centering stalled on a collapsed localization set";
      return finish(ExitTest::T2);
    }
    if (N >= row_limit) return finish(ExitTest::T1);
    if (min_slack < slack_limit) return finish(ExitTest::T2);
    if (!(min_slack > 1e-15 * (1.0 + p.lpNorm<Eigen::Infinity>()))) {
      out.note = "slack collapsed below floating-point resolution";
      return finish(ExitTest::T2);
    }

    vec omega = s.cwiseQuotient(poly.pi);
    omega[static_cast<Eigen::Index>(lb_row)] = 1.0;
    if (omega.maxCoeff() > 2.0) {
      const vec varpi = variational_quantities(poly, p);
      std::optional<std::size_t> drop;
      for (std::size_t j = 0; j < N; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        if (poly.tag[j] != RowTag::Cut || !(omega[jj] > 2.0) || !(varpi[jj] < 0.04)) continue;
        if (!drop || varpi[jj] < varpi[static_cast<Eigen::Index>(*drop)]) drop = j;
      }
      if (drop) {
        drop_constraint(poly, *drop);
        ++out.cuts_dropped;
        rec.step = "drop";
        if (trace) trace(rec);
        p = center(p);
        continue;
      }
      for (std::size_t j = 0; j < N; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        if (j != lb_row && omega[jj] > 2.0) poly.pi[jj] = s[jj];
      }
      rec.step = "reset";
    }

    struct Violation {
      std::size_t k;
      vec normal;
    };
    std::vector<Violation> violated;
    for (std::size_t k = 0; k < oracles.size(); ++k) {
      const InnerMinResult r = minimize_over_t(*oracles[k], p, InnerMode::FeasibilityCheck, hints[k]);
      hints[k] = r.t_star;
      if (r.feasible || within_feasibility_tolerance(r.g_value)) continue;
      violated.push_back({k, oracles[k]->gradient(p, r.t_star)});
    }

    if (!violated.empty()) {
      std::vector<std::size_t> fresh;
      for (const auto& v : violated) {
        if (!(v.normal.norm() > 0.0) || !v.normal.allFinite()) {
          out.note = "violated constraint has no usable subgradient";
          emit("cut");
          return finish(ExitTest::T2);
        }
        const std::size_t row = add_cut(poly, v.normal, p, static_cast<int>(v.k), config.newton_tol);
        fresh.push_back(row);
        out.cut_log.push_back({poly.A.row(static_cast<Eigen::Index>(row)).transpose(), poly.c[static_cast<Eigen::Index>(row)]});
        ++out.cuts_added;
      }
      emit("cut");
      const std::optional<vec> restored = restore_interior(poly, p, fresh);
      if (!restored) {
        out.note = "cuts leave the localization set without interior";
        return finish(ExitTest::T2);
      }
      p = center(*restored);
      continue;
    }

    const double value = obj.dot(p);
    if (value < best_value) {
      best_value = value;
      out.p_best = p;
    }
    const double gap = 1.25 * static_cast<double>(N) * tau;
    if (gap < eps) {
      emit("optimal");
      return finish(ExitTest::T3);
    }
    if (value - gap > lower) {
      lower = value - gap;
      poly.c[static_cast<Eigen::Index>(lb_row)] = lower;
      rec.lower_bound = lower;
    }
    emit("shrink");
    tau *= config.theta;
    p = center(p);
  }
  return finish(ExitTest::None);
}

}  // namespace ccpower
