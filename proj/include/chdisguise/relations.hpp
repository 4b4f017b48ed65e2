#pragma once

// Relations derived from disguising profiles: containment, the triangle
// rule, composition, the diamond-norm bracket and the key-rate bound.

#include <optional>
#include <vector>

#include "chdisguise/channels.hpp"
#include "chdisguise/disguise.hpp"

namespace chdisguise {

struct ContainmentResult {
  /// Smallest q with C_E - (1 - q) C_F >= 0, i.e. E = (1 - q) F + q F_Delta.
  double q_min = 1.0;
  /// (C_E - (1 - q_min) C_F) / q_min, absent when q_min = 0.
  std::optional<ChoiRep> harmonizer;
  /// True when the eigenvalue formula was used, false for bisection.
  bool closed_form = false;
};

/// Invertible C_F: 1 - q = lambda_min(C_F^{-1/2} C_E C_F^{-1/2}) clamped to
/// [0, 1]. When lambda_min(C_F) < 1e-8 ||C_F|| the answer comes from 60
/// bisection steps on q with a PSD test at tolerance 1e-10.
ContainmentResult containment_min_q(const KrausChannel& e, const KrausChannel& f);

/// Chains an (E, F) pair (p, q) with an (F, G) pair (p', q'). In the primed
/// pair q' is the weight on the F side and p' the weight on the G side:
///   (1 - q') F + q' F'_Delta = (1 - p') G + p' G_Delta.
/// The result is an achievable pair for (E, G):
///   p'' = (p (1 - q') + (1 - q) q') / (1 - q q')
///   q'' = (p' (1 - q) + (1 - q') q) / (1 - q q').
/// Throws ValidationError when q = q' = 1 or an input leaves [0, 1].
TradeoffPoint triangle_combine(TradeoffPoint pq_ef, TradeoffPoint pq_fg);

struct TriangleRegion {
  std::vector<TradeoffPoint> points;
  /// Lower-left convex boundary of `points` (see upper_hull).
  std::vector<TradeoffPoint> boundary;
};

/// Combines points of trace_profile(E, F) with points of trace_profile(F, G).
/// Each input contributes its hull vertices plus every stride-th raw upper
/// point (stride 1 uses all of them). Points of the (F, G) profile are read
/// as (p_F, q_G) and swapped into the primed convention of triangle_combine.
/// Pairs with q = q' = 1 are skipped.
TriangleRegion triangle_region(const ProfileCurve& profile_ef, const ProfileCurve& profile_fg,
                               std::size_t stride = 5);

/// Same, for explicit point lists already in triangle_combine's convention.
TriangleRegion triangle_region(const std::vector<TradeoffPoint>& ef,
                               const std::vector<TradeoffPoint>& fg_primed);

enum class ComposeMode { Product, Sum };

/// Product: p1 + p2 - p1 p2 (same for q). Sum: min(p1 + p2, 1).
TradeoffPoint compose_mixing(TradeoffPoint pq1, TradeoffPoint pq2, ComposeMode mode);

struct DiamondBracket {
  double lower = 0.0;
  double upper = 0.0;
};

/// p / (n^2 (1 - p)) <= ||E - F||_diamond <= min(4 p, 2) for the smallest
/// equal mixing probability p (beta = 1). Requires 0 <= p <= 1/2, n >= 2.
DiamondBracket diamond_bracket(double p_eq, Eigen::Index n);

/// p log2(n) bits per signal.
double qkd_rate_bound(double p, Eigen::Index n);

/// A disguising pair written out with its harmonizers:
///   (1 - p) E + p E_Delta = (1 - q) F + q F_Delta.
struct DisguiseWitness {
  KrausChannel e;
  KrausChannel f;
  KrausChannel e_delta;
  KrausChannel f_delta;
  double p = 0.0;
  double q = 0.0;
};

/// Witness for (E2 o E1, F2 o F1) at p = p1 + p2 - p1 p2, q likewise, built by
/// expanding the product of the two mixtures.
DisguiseWitness compose_disguise(const DisguiseWitness& first, const DisguiseWitness& second);

}  // namespace chdisguise
