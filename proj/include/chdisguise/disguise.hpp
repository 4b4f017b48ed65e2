#pragma once

// Mixing-probability trade-off between two channels.
//
// For a ratio beta = (1 - q) / (1 - p) the Choi difference C_E - beta C_F is
// split into orthogonal PSD parts Delta_+ - Delta_-. The optimal scaled cost
// alpha = q / (1 - p) satisfies
//     Tr T(Delta_+) / n  <=  alpha  <=  min(||T(Delta_+)||, 1)
// and maps back to probabilities through
//     p = 1 - 1 / (alpha + beta),   q = alpha / (alpha + beta).
// Sweeping beta traces lower and upper trade-off curves.

#include <cstddef>
#include <span>
#include <vector>

#include "chdisguise/channels.hpp"

namespace chdisguise {

struct TradeoffPoint {
  double p = 0.0;
  double q = 0.0;
};

struct AlphaBounds {
  double lower = 0.0;
  double upper = 0.0;
  bool tight = false;
};

struct BetaSample {
  double beta = 0.0;
  double alpha_lower = 0.0;
  double alpha_upper = 0.0;
  bool tight = false;
};

struct ProfileCurve {
  std::vector<BetaSample> samples;
  /// One point per sample, in grid order.
  std::vector<TradeoffPoint> raw_lower;
  std::vector<TradeoffPoint> raw_upper;
  /// Sorted by p; for equal p only the smallest q is kept.
  std::vector<TradeoffPoint> lower_points;
  std::vector<TradeoffPoint> upper_points;
  /// Lower convex hull of upper_points together with (0, 1) and (1, 0).
  std::vector<TradeoffPoint> upper_hull_points;
};

inline constexpr double kTightTol = 1e-8;
inline constexpr double kCuspRelTol = 1e-10;

/// Delta_+ - Delta_- = C_E - beta C_F.
PosNegSplit delta_split(const ChoiRep& c_e, const ChoiRep& c_f, double beta,
                        double zero_tol = kDefaultZeroTol);

/// Bounds on the optimal alpha given Delta_+ (size n^2).
AlphaBounds alpha_bounds(const ComplexMatrix& delta_plus, Eigen::Index n);

/// alpha + beta < 1 is clamped to p = 0, q = 1 - beta.
TradeoffPoint alpha_to_pq(double alpha, double beta);

/// `count` log-spaced values on [lo, hi], endpoints included.
std::vector<double> log_beta_grid(double lo = 1e-2, double hi = 1e2, std::size_t count = 400);

BetaSample sample_beta(const ChoiRep& c_e, const ChoiRep& c_f, double beta);

/// Evaluates the bounds on every grid point. Samples are independent; with
/// jobs > 1 they are split across that many threads and merged in grid order.
ProfileCurve trace_profile(const KrausChannel& e, const KrausChannel& f,
                           std::span<const double> beta_grid, unsigned jobs = 1);

/// Lower-left convex boundary of `points` joined with (0, 1) and (1, 0),
/// ordered by increasing p. Throws ValidationError on empty input.
std::vector<TradeoffPoint> upper_hull(std::span<const TradeoffPoint> points);

/// Piecewise-linear height of a curve given by vertices sorted in p; clamps
/// outside the covered range to the end values.
double curve_q_at(std::span<const TradeoffPoint> vertices, double p);

/// Closed-form optimal trade-off between a bit flip with probability a and a
/// phase flip with probability b: p = b (1 - q) while 1 - a - beta + b beta >= 0,
/// q = a (1 - p) afterwards.
struct FlipProfile {
  double a = 0.0;
  double b = 0.0;
  TradeoffPoint cusp;
  /// True unless a or b is 0 or 1; then one branch degenerates to a point or
  /// an axis segment.
  bool two_branches = true;

  /// Ratio at which the cusp occurs, (1 - a) / (1 - b); infinite for b = 1.
  double cusp_beta() const;
  /// Whether beta falls on the p = b (1 - q) branch.
  bool first_branch(double beta) const;
  /// Signed violation of the branch equation valid at `beta`.
  double branch_residual(double beta, TradeoffPoint pt) const;
  /// Smallest achievable q at mixing probability p on E.
  double q_of_p(double p) const;
};

/// Throws ValidationError unless 0 <= a, b <= 1.
FlipProfile analytic_flip_profile(double a, double b);

struct Cusp {
  /// Ratio where the eigenvalue crosses zero (bisection-refined).
  double beta = 0.0;
  /// Index (descending order) of the eigenvalue that leaves the positive
  /// part: the k-th cusp from the left with k positive eigenvalues before it
  /// has index k - 1.
  Eigen::Index eigen_index = 0;
  TradeoffPoint lower_point;
};

/// Slope discontinuities of the trade-off curves: drops in the number of
/// eigenvalues of C_E - beta C_F above kCuspRelTol * ||C_E - beta C_F||
/// between neighbouring grid points, each refined by bisection on beta.
/// Sorted by beta.
std::vector<Cusp> detect_cusps(const ChoiRep& c_e, const ChoiRep& c_f,
                               std::span<const double> beta_grid);

struct PlateauExtents {
  /// p-range covered by points with q <= tol.
  double q_zero_p_extent = 0.0;
  /// q-range covered by points with p <= tol.
  double p_zero_q_extent = 0.0;
};

PlateauExtents plateau_extents(std::span<const TradeoffPoint> points, double tol);

}  // namespace chdisguise
