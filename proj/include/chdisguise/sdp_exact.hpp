#pragma once

// Exact optimum of the reduced disguising problem at a fixed beta:
//
//     minimize alpha  over Hermitian X
//     subject to  Delta_+ + X >= 0,  Delta_- + X >= 0,  T(Delta_+ + X) = alpha I.
//
// Everything is expressed in Y = Delta_+ + X, so the constraints read
// Y >= 0, Y >= D with D = Delta_+ - Delta_-, and T(Y) = alpha I, and
// alpha = Tr(Y) / n.
//
// solve_alpha runs a log-det barrier method on this set and returns a point
// that is exactly feasible after a final repair step (so alpha_hat is an
// upper bound on the true optimum, above it by at most opts.tol).
// feasibility decides a single alpha with Dykstra's alternating projections.

#include <optional>

#include "chdisguise/channels.hpp"

namespace chdisguise {

enum class WarmStart { Auto, None };

struct SolverOptions {
  /// Target accuracy on alpha (barrier duality gap).
  double tol = 1e-6;
  /// Feasibility residual: largest violation of Y >= 0, Y >= D in spectral norm.
  double feas_tol = 1e-8;
  /// Dykstra iteration cap for feasibility().
  int max_iter = 20000;
  /// Newton-step cap for solve_alpha().
  int max_newton = 400;
  WarmStart warm_start = WarmStart::Auto;
};

struct Harmonizers {
  /// (Delta_+ + X) / alpha; absent when alpha is zero (q = 0).
  std::optional<ChoiRep> choi_FDelta;
  /// (Delta_- + X) / (alpha + beta - 1); absent when that scale is zero (p = 0).
  std::optional<ChoiRep> choi_EDelta;
  double p = 0.0;
  double q = 0.0;
};

struct ExactSolution {
  double alpha_hat = 0.0;
  double alpha_lower = 0.0;
  double alpha_upper = 0.0;
  /// X = Y - Delta_+.
  ComplexMatrix X;
  /// Y = Delta_+ + X.
  ComplexMatrix Y;
  std::optional<ChoiRep> choi_FDelta;
  std::optional<ChoiRep> choi_EDelta;
  /// Largest constraint violation of the returned point.
  double residual = 0.0;
  /// Newton steps taken (0 when the bounds already meet).
  int iterations = 0;
  double p = 0.0;
  double q = 0.0;
};

struct FeasibilityResult {
  bool feasible = false;
  ComplexMatrix Y;
  double residual = 0.0;
  int iterations = 0;
};

/// Throws ValidationError on shape mismatch or beta <= 0 and NumericalError
/// (carrying the last Newton decrement) when the Newton budget runs out.
ExactSolution solve_alpha(const ComplexMatrix& delta_plus, const ComplexMatrix& delta_minus,
                          double beta, const SolverOptions& opts = {});

/// Same problem built from the two channels; C_E additionally provides the
/// alpha = 1 starting point.
ExactSolution solve_alpha(const ChoiRep& c_e, const ChoiRep& c_f, double beta,
                          const SolverOptions& opts = {});

/// Decides whether some Y satisfies the constraints at this alpha.
/// alpha >= min(||T(Delta_+)||, 1) is answered with the constructive point,
/// alpha below Tr T(Delta_+) / n is infeasible outright. In between, Dykstra
/// runs until the residual drops to feas_tol (feasible) or stalls, meaning a
/// relative decrease below 1e-12 over 500 iterations (infeasible). Running
/// out of iterations while still improving throws NumericalError.
FeasibilityResult feasibility(const ComplexMatrix& delta_plus, const ComplexMatrix& delta_minus,
                              double beta, double alpha, const SolverOptions& opts = {});

/// Harmonizing channels and (p, q) for a feasible Y. Throws NumericalError
/// if alpha + beta - 1 vanishes while Y - D does not, or if the disguising
/// identity fails by more than 1e-7.
Harmonizers recover_harmonizers(const ComplexMatrix& y, const ComplexMatrix& delta_plus,
                                const ComplexMatrix& delta_minus, double alpha, double beta);

}  // namespace chdisguise
