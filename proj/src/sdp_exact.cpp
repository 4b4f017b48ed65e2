#include "chdisguise/sdp_exact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "chdisguise/disguise.hpp"
#include "chdisguise/errors.hpp"

namespace chdisguise {

namespace {

constexpr double kScaleTol = 1e-9;
constexpr double kVanishTol = 1e-6;
constexpr double kIdentityTol = 1e-7;

struct Problem {
  Eigen::Index n = 0;
  Eigen::Index big = 0;  // n^2
  ComplexMatrix dp;
  ComplexMatrix dm;
  ComplexMatrix d;
  double beta = 0.0;
  AlphaBounds bounds;
  const ComplexMatrix* c_e = nullptr;
};

Problem make_problem(const ComplexMatrix& dp, const ComplexMatrix& dm, double beta,
                     const ComplexMatrix* c_e) {
  if (!(beta > 0.0)) throw ValidationError("sdp: beta must be positive");
  if (dp.rows() != dp.cols() || dm.rows() != dm.cols() || dp.rows() != dm.rows()) {
    throw ValidationError("sdp: Delta_+ and Delta_- must be square of equal size");
  }
  Problem pr;
  pr.big = dp.rows();
  pr.n = dim_from_choi_size(pr.big);
  pr.dp = hermitian_part(dp);
  pr.dm = hermitian_part(dm);
  pr.d = pr.dp - pr.dm;
  pr.beta = beta;
  pr.bounds = alpha_bounds(pr.dp, pr.n);
  pr.c_e = c_e;
  return pr;
}

// M^T (x) I_n, the adjoint of the channel-sum map; T(lift(M)) = n M.
ComplexMatrix lift(const ComplexMatrix& m, Eigen::Index n) {
  ComplexMatrix out = ComplexMatrix::Zero(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const Complex v = m(j, i);
      if (v == Complex(0.0)) continue;
      for (Eigen::Index k = 0; k < n; ++k) out(i * n + k, j * n + k) = v;
    }
  }
  return out;
}

double alpha_of(const ComplexMatrix& y, Eigen::Index n) {
  return y.trace().real() / static_cast<double>(n);
}

ComplexMatrix affine_project(const ComplexMatrix& y, Eigen::Index n, double alpha) {
  const ComplexMatrix r = alpha * identity(n) - channel_sum(y);
  return y + lift(r, n) / static_cast<double>(n);
}

double violation(const ComplexMatrix& y, const Problem& pr, double alpha) {
  const double affine = max_abs(channel_sum(y) - alpha * identity(pr.n));
  return std::max({0.0, -min_eigenvalue(y), -min_eigenvalue(y - pr.d), affine});
}

struct Certificate {
  ComplexMatrix y;
  double alpha = 0.0;
};

// Hermitian, on the affine set, then shifted by eps I until both cone
// constraints hold; the shift raises alpha by n * eps.
Certificate repair(const ComplexMatrix& y_in, const Problem& pr) {
  Certificate c;
  c.y = hermitian_part(y_in);
  c.alpha = alpha_of(c.y, pr.n);
  c.y = hermitian_part(affine_project(c.y, pr.n, c.alpha));
  const double eps = std::max({0.0, -min_eigenvalue(c.y), -min_eigenvalue(c.y - pr.d)});
  if (eps > 0.0) {
    c.y += eps * identity(pr.big);
    c.alpha += static_cast<double>(pr.n) * eps;
  }
  return c;
}

// The feasible points used in the upper-bound proofs: Y = Delta_+ + |D0><D0|
// with D0 = vec(sqrt(u I - T(Delta_+))), u = ||T(Delta_+)||, or Y = C_E
// (alpha = 1) when u exceeds 1 and C_E is known.
Certificate constructive(const Problem& pr) {
  const ComplexMatrix t = hermitian_part(channel_sum(pr.dp));
  const double u = spectral_norm(t);
  if (u > 1.0 && pr.c_e != nullptr) return repair(*pr.c_e, pr);
  const ComplexMatrix gap = u * identity(pr.n) - t;
  const ComplexMatrix root = spectral_map(gap, [](double x) { return std::sqrt(std::max(x, 0.0)); });
  const ComplexVector v = vec(root);
  return repair(pr.dp + v * v.adjoint(), pr);
}

// ---- log-det barrier -------------------------------------------------------

std::optional<double> log_det_pd(const ComplexMatrix& m) {
  Eigen::LLT<ComplexMatrix> llt(m);
  if (llt.info() != Eigen::Success) return std::nullopt;
  const ComplexVector diag = llt.matrixLLT().diagonal();
  double s = 0.0;
  for (Eigen::Index i = 0; i < diag.size(); ++i) {
    const double v = diag(i).real();
    if (!(v > 0.0)) return std::nullopt;
    s += 2.0 * std::log(v);
  }
  return s;
}

// Rows encode T(dY) = c I for some c: off-diagonal entries of T(dY) vanish
// and all diagonal entries equal the last one. Columns index vec(dY).
Eigen::MatrixXd affine_constraints(Eigen::Index n) {
  const Eigen::Index big = n * n;
  const auto idx = [big](Eigen::Index r, Eigen::Index c) { return c * big + r; };
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n * n - 1, big * big);
  Eigen::Index row = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      for (Eigen::Index k = 0; k < n; ++k) a(row, idx(j * n + k, i * n + k)) = 1.0;
      ++row;
    }
  }
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    for (Eigen::Index k = 0; k < n; ++k) {
      a(row, idx(i * n + k, i * n + k)) = 1.0;
      a(row, idx((n - 1) * n + k, (n - 1) * n + k)) = -1.0;
    }
    ++row;
  }
  return a;
}

// conj(A) (x) A + conj(B) (x) B: the Hessian of -logdet on vec coordinates.
ComplexMatrix barrier_hessian(const ComplexMatrix& a, const ComplexMatrix& b) {
  const Eigen::Index m = a.rows();
  ComplexMatrix h(m * m, m * m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      h.block(i * m, j * m, m, m) = std::conj(a(i, j)) * a + std::conj(b(i, j)) * b;
    }
  }
  return h;
}

struct BarrierOutcome {
  ComplexMatrix y;
  int newton_steps = 0;
};

class Barrier {
 public:
  Barrier(const Problem& pr, const SolverOptions& opts)
      : pr_(pr), opts_(opts), a_(affine_constraints(pr.n).cast<Complex>()) {
    const Eigen::MatrixXd a = affine_constraints(pr.n);
    const Eigen::Index k = a.rows();
    const Eigen::Index cols = a.cols();
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a.transpose());
    const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(cols, cols);
    null_ = q.rightCols(cols - k).cast<Complex>();
    a_pinv_ = (a.transpose() * (a * a.transpose()).inverse()).cast<Complex>();
  }

  BarrierOutcome run(ComplexMatrix y) {
    const double m = 2.0 * static_cast<double>(pr_.big);  // barrier parameter
    double t = m / std::max(alpha_of(y, pr_.n) - pr_.bounds.lower, opts_.tol);
    constexpr double kGrowth = 10.0;
    while (true) {
      center(y, t);
      if (m / t <= opts_.tol) break;
      t *= kGrowth;
    }
    return {std::move(y), steps_};
  }

 private:
  // -log det Y - log det (Y - D); the linear term t Tr(Y) / n is handled
  // separately so that changes in it stay exact when t is large.
  std::optional<double> log_barrier(const ComplexMatrix& y) const {
    const auto ly = log_det_pd(y);
    if (!ly) return std::nullopt;
    const auto ls = log_det_pd(y - pr_.d);
    if (!ls) return std::nullopt;
    return -*ly - *ls;
  }

  void center(ComplexMatrix& y, double t) {
    const Eigen::Index big = pr_.big;
    const ComplexMatrix eye = identity(big);
    auto f = log_barrier(y);
    if (!f) throw NumericalError("sdp: barrier iterate left the interior");

    while (true) {
      if (steps_ >= opts_.max_newton) {
        std::ostringstream msg;
        msg << "sdp: Newton budget of " << opts_.max_newton << " steps exhausted (decrement "
            << last_decrement_ << ")";
        throw NumericalError(msg.str(), last_decrement_);
      }
      ++steps_;

      const ComplexMatrix yi = hermitian_part(Eigen::LLT<ComplexMatrix>(y).solve(eye));
      const ComplexMatrix si = hermitian_part(Eigen::LLT<ComplexMatrix>(y - pr_.d).solve(eye));
      const ComplexMatrix g = (t / static_cast<double>(pr_.n)) * eye - yi - si;
      const ComplexVector gv = vec(g);
      const ComplexMatrix h = barrier_hessian(yi, si);

      // Equality-constrained Newton step in the null space of A. Working in
      // a fixed orthonormal basis avoids the Schur complement A H^-1 A^H,
      // which loses all precision once t is large. The particular part of
      // the step cancels the rounding drift r = A vec(Y).
      const ComplexVector drift = -(a_pinv_ * (a_ * vec(y)));
      const ComplexMatrix reduced = null_.adjoint() * h * null_;
      const ComplexVector rhs = -(null_.adjoint() * (gv + h * drift));
      ComplexVector z;
      Eigen::LDLT<ComplexMatrix> ldlt(reduced);
      if (ldlt.info() == Eigen::Success) {
        z = ldlt.solve(rhs);
      } else {
        z = reduced.fullPivLu().solve(rhs);
      }
      const ComplexVector step = null_ * z + drift;
      const double slope = gv.dot(step).real();  // directional derivative, < 0
      last_decrement_ = -slope;
      if (!(-slope > 0.0) || -slope / 2.0 <= kNewtonTol) return;

      const ComplexMatrix dy = hermitian_part(unvec(step, big));
      const double linear = t * dy.trace().real() / static_cast<double>(pr_.n);
      double s = 1.0;
      bool moved = false;
      while (s > 1e-14) {
        const ComplexMatrix trial = y + s * dy;
        const auto ft = log_barrier(trial);
        if (ft && s * linear + (*ft - *f) <= 0.25 * s * slope) {
          y = trial;
          f = ft;
          moved = true;
          break;
        }
        s *= 0.5;
      }
      if (!moved) return;  // no further progress possible at this precision
      // Near the center full steps are accepted; a damped step with a small
      // decrement means rounding, not distance, is limiting progress.
      if (s < 1.0 && -slope <= kStallDecrement) return;
    }
  }

  static constexpr double kNewtonTol = 1e-7;
  static constexpr double kStallDecrement = 1e-4;

  const Problem& pr_;
  const SolverOptions& opts_;
  ComplexMatrix a_;
  ComplexMatrix null_;    // orthonormal basis of ker A
  ComplexMatrix a_pinv_;  // A^+ = A^T (A A^T)^-1
  int steps_ = 0;
  double last_decrement_ = std::numeric_limits<double>::infinity();
};

ExactSolution solve(const Problem& pr, const SolverOptions& opts) {
  if (!(opts.tol > 0.0)) throw ValidationError("sdp: tolerance must be positive");
  ExactSolution sol;
  sol.alpha_lower = pr.bounds.lower;
  sol.alpha_upper = pr.bounds.upper;

  Certificate best = constructive(pr);
  if (best.alpha - pr.bounds.lower > opts.tol) {
    ComplexMatrix start;
    if (opts.warm_start == WarmStart::Auto) {
      start = best.y + 1e-2 * identity(pr.big);
    } else {
      const double top = std::max(0.0, hermitian_eig(pr.d).eigenvalues(0));
      start = (top + 1.0) * identity(pr.big);
    }
    Barrier barrier(pr, opts);
    BarrierOutcome out = barrier.run(std::move(start));
    sol.iterations = out.newton_steps;
    Certificate c = repair(out.y, pr);
    if (c.alpha < best.alpha) best = std::move(c);
  }

  sol.alpha_hat = best.alpha;
  sol.Y = best.y;
  sol.X = best.y - pr.dp;
  sol.residual = violation(best.y, pr, best.alpha);

  Harmonizers h = recover_harmonizers(sol.Y, pr.dp, pr.dm, sol.alpha_hat, pr.beta);
  sol.choi_FDelta = std::move(h.choi_FDelta);
  sol.choi_EDelta = std::move(h.choi_EDelta);
  sol.p = h.p;
  sol.q = h.q;
  return sol;
}

}  // namespace

ExactSolution solve_alpha(const ComplexMatrix& delta_plus, const ComplexMatrix& delta_minus,
                          double beta, const SolverOptions& opts) {
  return solve(make_problem(delta_plus, delta_minus, beta, nullptr), opts);
}

ExactSolution solve_alpha(const ChoiRep& c_e, const ChoiRep& c_f, double beta,
                          const SolverOptions& opts) {
  const PosNegSplit split = delta_split(c_e, c_f, beta);
  return solve(make_problem(split.plus, split.minus, beta, &c_e.matrix), opts);
}

FeasibilityResult feasibility(const ComplexMatrix& delta_plus, const ComplexMatrix& delta_minus,
                              double beta, double alpha, const SolverOptions& opts) {
  if (!(alpha >= 0.0)) throw ValidationError("feasibility: alpha must be non-negative");
  const Problem pr = make_problem(delta_plus, delta_minus, beta, nullptr);
  FeasibilityResult out;

  const Certificate cert = constructive(pr);
  if (alpha >= cert.alpha) {
    out.feasible = true;
    out.Y = cert.y + ((alpha - cert.alpha) / static_cast<double>(pr.n)) * identity(pr.big);
    out.residual = violation(out.Y, pr, alpha);
    return out;
  }
  if (alpha < pr.bounds.lower) {
    out.feasible = false;
    out.residual = pr.bounds.lower - alpha;
    return out;
  }

  // Dykstra's method over the PSD cone, the cone shifted by D and the
  // affine set {T(Y) = alpha I}; p1..p3 are the correction terms.
  ComplexMatrix y = opts.warm_start == WarmStart::Auto
                        ? affine_project(cert.y, pr.n, alpha)
                        : ComplexMatrix(ComplexMatrix::Zero(pr.big, pr.big));
  ComplexMatrix p1 = ComplexMatrix::Zero(pr.big, pr.big);
  ComplexMatrix p2 = p1;
  ComplexMatrix p3 = p1;

  constexpr int kCheckEvery = 10;
  constexpr int kPlateauWindow = 500;
  constexpr double kPlateauRel = 1e-12;
  double window_start = std::numeric_limits<double>::infinity();
  double residual = std::numeric_limits<double>::infinity();

  for (int it = 1; it <= opts.max_iter; ++it) {
    ComplexMatrix z = y + p1;
    const ComplexMatrix y1 = project_psd(z);
    p1 = z - y1;

    z = y1 + p2;
    const ComplexMatrix y2 = pr.d + project_psd(z - pr.d);
    p2 = z - y2;

    z = y2 + p3;
    y = hermitian_part(affine_project(z, pr.n, alpha));
    p3 = z - y;

    if (it % kCheckEvery != 0) continue;
    residual = std::max({0.0, -min_eigenvalue(y), -min_eigenvalue(y - pr.d)});
    out.iterations = it;
    if (residual <= opts.feas_tol) {
      out.feasible = true;
      out.Y = y;
      out.residual = residual;
      return out;
    }
    if (it % kPlateauWindow == 0) {
      if (std::isfinite(window_start) && (window_start - residual) <= kPlateauRel * window_start) {
        out.feasible = false;
        out.Y = y;
        out.residual = residual;
        return out;
      }
      window_start = residual;
    }
  }
  std::ostringstream msg;
  msg << "feasibility: inconclusive after " << opts.max_iter << " iterations at alpha = " << alpha
      << " (residual " << residual << ")";
  throw NumericalError(msg.str(), residual);
}

Harmonizers recover_harmonizers(const ComplexMatrix& y, const ComplexMatrix& delta_plus,
                                const ComplexMatrix& delta_minus, double alpha, double beta) {
  const Problem pr = make_problem(delta_plus, delta_minus, beta, nullptr);
  if (y.rows() != pr.big || y.cols() != pr.big) {
    throw ValidationError("recover_harmonizers: Y has the wrong size");
  }
  const ComplexMatrix yh = hermitian_part(y);
  const ComplexMatrix shifted = yh - pr.d;  // Delta_- + X
  const double a = std::max(alpha, 0.0);
  const double scale_e = a + beta - 1.0;
  const double sum = a + beta;

  Harmonizers h;
  const TradeoffPoint pq = alpha_to_pq(a, beta);
  h.p = pq.p;
  h.q = pq.q;

  if (a > kScaleTol) {
    h.choi_FDelta = ChoiRep::from_matrix(yh / a);
  } else if (max_abs(yh) > kVanishTol) {
    throw NumericalError("recover_harmonizers: alpha vanishes but Delta_+ + X does not",
                         max_abs(yh));
  }
  if (scale_e > kScaleTol) {
    h.choi_EDelta = ChoiRep::from_matrix(shifted / scale_e);
  } else if (max_abs(shifted) > kVanishTol) {
    throw NumericalError("recover_harmonizers: alpha + beta - 1 vanishes but Delta_- + X does not",
                         max_abs(shifted));
  }

  // (1-p) C_E + p C_EDelta - (1-q) C_F - q C_FDelta, with (1-q) = beta (1-p).
  const ComplexMatrix p_term = h.choi_EDelta ? ComplexMatrix(h.p * h.choi_EDelta->matrix)
                                             : ComplexMatrix(shifted / sum);
  const ComplexMatrix q_term = h.choi_FDelta ? ComplexMatrix(h.q * h.choi_FDelta->matrix)
                                             : ComplexMatrix(yh / sum);
  const double gap = max_abs((1.0 - h.p) * pr.d + p_term - q_term);
  const double scale = std::max({1.0, max_abs(pr.d), max_abs(yh)});
  if (gap > kIdentityTol * scale) {
    throw NumericalError("recover_harmonizers: disguising identity violated", gap);
  }
  return h;
}

}  // namespace chdisguise
