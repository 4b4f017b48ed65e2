#include "chdisguise/relations.hpp"

#include <algorithm>
#include <cmath>

#include "chdisguise/errors.hpp"

namespace chdisguise {

namespace {

constexpr double kSingularRel = 1e-8;
constexpr double kPsdTol = 1e-10;
constexpr int kBisectionSteps = 60;

void check_unit(double x, const char* what) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw ValidationError(std::string(what) + " must lie in [0, 1]");
  }
}

void check_point(TradeoffPoint pt, const char* what) {
  check_unit(pt.p, what);
  check_unit(pt.q, what);
}

bool dominates(const ComplexMatrix& c_e, const ComplexMatrix& c_f, double q, double scale) {
  return min_eigenvalue(c_e - (1.0 - q) * c_f) >= -kPsdTol * scale;
}

// Kraus set of sum_k w_k A_k for channels A_k and weights w_k > 0 summing to 1.
KrausChannel weighted_union(const std::vector<std::pair<double, KrausChannel>>& parts) {
  std::vector<ComplexMatrix> ops;
  for (const auto& [w, ch] : parts) {
    if (w <= 0.0) continue;
    for (const auto& k : ch.kraus_ops()) ops.push_back(std::sqrt(w) * k);
  }
  return KrausChannel(std::move(ops));
}

std::vector<TradeoffPoint> sampled(const ProfileCurve& c, std::size_t stride) {
  std::vector<TradeoffPoint> pts = c.upper_hull_points;
  for (std::size_t i = 0; i < c.upper_points.size(); i += stride) pts.push_back(c.upper_points[i]);
  return pts;
}

}  // namespace

ContainmentResult containment_min_q(const KrausChannel& e, const KrausChannel& f) {
  if (e.dim() != f.dim()) throw ValidationError("containment: channel dimensions differ");
  const ComplexMatrix c_e = choi_from_kraus(e).matrix;
  const ComplexMatrix c_f = choi_from_kraus(f).matrix;
  const EigenSystem fs = hermitian_eig(c_f);
  const double f_norm = fs.eigenvalues(0);
  const double f_min = fs.eigenvalues(fs.eigenvalues.size() - 1);

  ContainmentResult out;
  if (f_min >= kSingularRel * f_norm) {
    const RealVector inv_sqrt = fs.eigenvalues.cwiseSqrt().cwiseInverse();
    const ComplexMatrix w = fs.eigenvectors * inv_sqrt.asDiagonal() * fs.eigenvectors.adjoint();
    const double lambda = min_eigenvalue(hermitian_part(w * c_e * w));
    out.q_min = 1.0 - std::clamp(lambda, 0.0, 1.0);
    out.closed_form = true;
  } else {
    const double scale = std::max(1.0, spectral_norm(c_e));
    if (dominates(c_e, c_f, 0.0, scale)) {
      out.q_min = 0.0;
    } else {
      double lo = 0.0;  // infeasible
      double hi = 1.0;  // always feasible: C_E >= 0
      for (int i = 0; i < kBisectionSteps; ++i) {
        const double mid = 0.5 * (lo + hi);
        (dominates(c_e, c_f, mid, scale) ? hi : lo) = mid;
      }
      out.q_min = hi;
    }
  }
  if (out.q_min > 0.0) {
    out.harmonizer = ChoiRep::from_matrix(hermitian_part(c_e - (1.0 - out.q_min) * c_f) / out.q_min);
  }
  return out;
}

TradeoffPoint triangle_combine(TradeoffPoint pq_ef, TradeoffPoint pq_fg) {
  check_point(pq_ef, "triangle: (p, q)");
  check_point(pq_fg, "triangle: (p', q')");
  const double p = pq_ef.p;
  const double q = pq_ef.q;
  const double pp = pq_fg.p;
  const double qp = pq_fg.q;
  const double denom = 1.0 - q * qp;
  if (denom <= 0.0) throw ValidationError("triangle: q and q' are both 1; combination undefined");
  return {(p * (1.0 - qp) + (1.0 - q) * qp) / denom, (pp * (1.0 - q) + (1.0 - qp) * q) / denom};
}

TriangleRegion triangle_region(const std::vector<TradeoffPoint>& ef,
                               const std::vector<TradeoffPoint>& fg_primed) {
  if (ef.empty() || fg_primed.empty()) throw ValidationError("triangle: empty profile");
  TriangleRegion region;
  region.points.reserve(ef.size() * fg_primed.size());
  for (const auto& a : ef) {
    for (const auto& b : fg_primed) {
      if (a.q * b.q >= 1.0) continue;
      region.points.push_back(triangle_combine(a, b));
    }
  }
  if (region.points.empty()) throw ValidationError("triangle: every pair has q = q' = 1");
  region.boundary = upper_hull(region.points);
  return region;
}

TriangleRegion triangle_region(const ProfileCurve& profile_ef, const ProfileCurve& profile_fg,
                               std::size_t stride) {
  if (stride == 0) throw ValidationError("triangle: stride must be positive");
  std::vector<TradeoffPoint> fg = sampled(profile_fg, stride);
  for (auto& pt : fg) std::swap(pt.p, pt.q);
  return triangle_region(sampled(profile_ef, stride), fg);
}

TradeoffPoint compose_mixing(TradeoffPoint pq1, TradeoffPoint pq2, ComposeMode mode) {
  check_point(pq1, "compose: (p1, q1)");
  check_point(pq2, "compose: (p2, q2)");
  if (mode == ComposeMode::Sum) {
    return {std::min(pq1.p + pq2.p, 1.0), std::min(pq1.q + pq2.q, 1.0)};
  }
  return {pq1.p + pq2.p - pq1.p * pq2.p, pq1.q + pq2.q - pq1.q * pq2.q};
}

DiamondBracket diamond_bracket(double p_eq, Eigen::Index n) {
  if (!(p_eq >= 0.0 && p_eq <= 0.5)) {
    throw ValidationError("diamond: the equal mixing probability must lie in [0, 1/2]");
  }
  if (n < 2) throw ValidationError("diamond: dimension must be at least 2");
  const double nn = static_cast<double>(n * n);
  return {p_eq / (nn * (1.0 - p_eq)), std::min(4.0 * p_eq, 2.0)};
}

double qkd_rate_bound(double p, Eigen::Index n) {
  check_unit(p, "qkd: p");
  if (n < 2) throw ValidationError("qkd: dimension must be at least 2");
  return p * std::log2(static_cast<double>(n));
}

DisguiseWitness compose_disguise(const DisguiseWitness& first, const DisguiseWitness& second) {
  const double p1 = first.p;
  const double p2 = second.p;
  const double q1 = first.q;
  const double q2 = second.q;
  check_unit(p1, "compose: p1");
  check_unit(p2, "compose: p2");
  check_unit(q1, "compose: q1");
  check_unit(q2, "compose: q2");

  // ((1-p2) E2 + p2 E2d) o ((1-p1) E1 + p1 E1d): the E2 o E1 term keeps weight
  // (1-p1)(1-p2) = 1 - p, the other three form the harmonizer.
  const auto side = [](const KrausChannel& a1, const KrausChannel& d1, const KrausChannel& a2,
                       const KrausChannel& d2, double w1, double w2) {
    const double w = w1 + w2 - w1 * w2;
    if (w <= 0.0) return compose(a2, a1);
    return weighted_union({{w1 * (1.0 - w2) / w, compose(a2, d1)},
                           {(1.0 - w1) * w2 / w, compose(d2, a1)},
                           {w1 * w2 / w, compose(d2, d1)}});
  };

  return DisguiseWitness{
      compose(second.e, first.e),
      compose(second.f, first.f),
      side(first.e, first.e_delta, second.e, second.e_delta, p1, p2),
      side(first.f, first.f_delta, second.f, second.f_delta, q1, q2),
      p1 + p2 - p1 * p2,
      q1 + q2 - q1 * q2,
  };
}

}  // namespace chdisguise
