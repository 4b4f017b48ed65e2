#include "chdisguise/disguise.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <sstream>
#include <thread>

#include "chdisguise/errors.hpp"

namespace chdisguise {

namespace {

double cross(const TradeoffPoint& o, const TradeoffPoint& a, const TradeoffPoint& b) {
  return (a.p - o.p) * (b.q - o.q) - (a.q - o.q) * (b.p - o.p);
}

std::vector<TradeoffPoint> sort_dedup(std::vector<TradeoffPoint> pts) {
  std::sort(pts.begin(), pts.end(), [](const TradeoffPoint& x, const TradeoffPoint& y) {
    return x.p < y.p || (x.p == y.p && x.q < y.q);
  });
  std::vector<TradeoffPoint> out;
  out.reserve(pts.size());
  for (const auto& pt : pts) {
    if (out.empty() || out.back().p != pt.p) out.push_back(pt);
  }
  return out;
}

ComplexMatrix choi_difference(const ChoiRep& c_e, const ChoiRep& c_f, double beta) {
  if (c_e.dim != c_f.dim) throw ValidationError("channel dimensions differ");
  if (!(beta > 0.0)) throw ValidationError("beta must be positive");
  return c_e.matrix - beta * c_f.matrix;
}

int positive_count(const ChoiRep& c_e, const ChoiRep& c_f, double beta) {
  const RealVector lambda = hermitian_eig(choi_difference(c_e, c_f, beta)).eigenvalues;
  const double cut = kCuspRelTol * lambda.cwiseAbs().maxCoeff();
  return static_cast<int>((lambda.array() > cut).count());
}

}  // namespace

PosNegSplit delta_split(const ChoiRep& c_e, const ChoiRep& c_f, double beta, double zero_tol) {
  return split_pos_neg(choi_difference(c_e, c_f, beta), zero_tol);
}

AlphaBounds alpha_bounds(const ComplexMatrix& delta_plus, Eigen::Index n) {
  if (delta_plus.rows() != n * n || delta_plus.cols() != n * n) {
    throw ValidationError("alpha_bounds: Delta_+ must be n^2 x n^2");
  }
  const ComplexMatrix t = hermitian_part(channel_sum(delta_plus));
  const double mean = std::max(t.trace().real() / static_cast<double>(n), 0.0);
  AlphaBounds out;
  out.lower = mean;
  out.tight = spectral_norm(t - mean * identity(n)) <= kTightTol;
  out.upper = out.tight ? mean : std::min(spectral_norm(t), 1.0);
  return out;
}

TradeoffPoint alpha_to_pq(double alpha, double beta) {
  if (!(beta > 0.0)) throw ValidationError("alpha_to_pq: beta must be positive");
  if (!(alpha >= 0.0)) throw ValidationError("alpha_to_pq: alpha must be non-negative");
  const double s = alpha + beta;
  if (s < 1.0) return {0.0, 1.0 - beta};
  return {1.0 - 1.0 / s, alpha / s};
}

std::vector<double> log_beta_grid(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0) || !(hi >= lo)) throw ValidationError("beta grid needs 0 < lo <= hi");
  if (count == 0) throw ValidationError("beta grid needs at least one point");
  std::vector<double> grid(count);
  if (count == 1) {
    grid[0] = lo;
    return grid;
  }
  const double l0 = std::log(lo);
  const double step = (std::log(hi) - l0) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) grid[i] = std::exp(l0 + step * static_cast<double>(i));
  grid.front() = lo;
  grid.back() = hi;
  return grid;
}

BetaSample sample_beta(const ChoiRep& c_e, const ChoiRep& c_f, double beta) {
  const PosNegSplit split = delta_split(c_e, c_f, beta);
  const AlphaBounds b = alpha_bounds(split.plus, c_e.dim);
  return {beta, b.lower, b.upper, b.tight};
}

ProfileCurve trace_profile(const KrausChannel& e, const KrausChannel& f,
                           std::span<const double> beta_grid, unsigned jobs) {
  if (e.dim() != f.dim()) throw ValidationError("trace_profile: channel dimensions differ");
  for (double beta : beta_grid) {
    if (!(beta > 0.0)) throw ValidationError("trace_profile: every beta must be positive");
  }
  const ChoiRep c_e = choi_from_kraus(e);
  const ChoiRep c_f = choi_from_kraus(f);

  ProfileCurve curve;
  curve.samples.resize(beta_grid.size());

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      try {
        curve.samples[i] = sample_beta(c_e, c_f, beta_grid[i]);
      } catch (const NumericalError& err) {
        std::ostringstream msg;
        msg << "beta sample " << i << " (beta = " << beta_grid[i] << "): " << err.what();
        throw NumericalError(msg.str(), err.residual());
      }
    }
  };

  const std::size_t total = beta_grid.size();
  const std::size_t workers = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(total, 1));
  if (workers == 1) {
    work(0, total);
  } else {
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(workers);
    const std::size_t chunk = (total + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = std::min(total, w * chunk);
      const std::size_t end = std::min(total, begin + chunk);
      threads.emplace_back([&, w, begin, end] {
        try {
          work(begin, end);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : threads) t.join();
    for (const auto& err : errors) {
      if (err) std::rethrow_exception(err);
    }
  }

  curve.raw_lower.reserve(total);
  curve.raw_upper.reserve(total);
  for (const auto& s : curve.samples) {
    curve.raw_lower.push_back(alpha_to_pq(s.alpha_lower, s.beta));
    curve.raw_upper.push_back(alpha_to_pq(s.alpha_upper, s.beta));
  }
  curve.lower_points = sort_dedup(curve.raw_lower);
  curve.upper_points = sort_dedup(curve.raw_upper);
  if (!curve.upper_points.empty()) curve.upper_hull_points = upper_hull(curve.upper_points);
  return curve;
}

std::vector<TradeoffPoint> upper_hull(std::span<const TradeoffPoint> points) {
  if (points.empty()) throw ValidationError("upper_hull: no points");
  std::vector<TradeoffPoint> pts(points.begin(), points.end());
  pts.push_back({0.0, 1.0});
  pts.push_back({1.0, 0.0});
  pts = sort_dedup(std::move(pts));

  // Andrew's monotone chain, lower half; collinear interior points dropped.
  constexpr double kCollinearTol = 1e-14;
  std::vector<TradeoffPoint> hull;
  for (const auto& pt : pts) {
    while (hull.size() >= 2 && cross(hull[hull.size() - 2], hull.back(), pt) <= kCollinearTol) {
      hull.pop_back();
    }
    hull.push_back(pt);
  }
  return hull;
}

double curve_q_at(std::span<const TradeoffPoint> vertices, double p) {
  if (vertices.empty()) throw ValidationError("curve_q_at: empty curve");
  if (p <= vertices.front().p) return vertices.front().q;
  if (p >= vertices.back().p) return vertices.back().q;
  const auto it = std::upper_bound(vertices.begin(), vertices.end(), p,
                                   [](double x, const TradeoffPoint& v) { return x < v.p; });
  const TradeoffPoint& right = *it;
  const TradeoffPoint& left = *(it - 1);
  const double t = (p - left.p) / (right.p - left.p);
  return left.q + t * (right.q - left.q);
}

double FlipProfile::cusp_beta() const {
  if (b >= 1.0) return std::numeric_limits<double>::infinity();
  return (1.0 - a) / (1.0 - b);
}

bool FlipProfile::first_branch(double beta) const { return 1.0 - a - beta + b * beta >= 0.0; }

double FlipProfile::branch_residual(double beta, TradeoffPoint pt) const {
  if (first_branch(beta)) return pt.p - b * (1.0 - pt.q);
  return pt.q - a * (1.0 - pt.p);
}

double FlipProfile::q_of_p(double p) const {
  if (p < cusp.p) return b > 0.0 ? 1.0 - p / b : 1.0;
  return a * (1.0 - p);
}

FlipProfile analytic_flip_profile(double a, double b) {
  if (!(a >= 0.0 && a <= 1.0) || !(b >= 0.0 && b <= 1.0)) {
    throw ValidationError("analytic_flip_profile: flip probabilities must lie in [0, 1]");
  }
  FlipProfile out;
  out.a = a;
  out.b = b;
  out.two_branches = a > 0.0 && a < 1.0 && b > 0.0 && b < 1.0;
  const double denom = 1.0 - a * b;
  if (denom <= 0.0) {
    out.cusp = {0.0, 1.0};  // a = b = 1: orthogonal channels, the chord q = 1 - p
  } else {
    out.cusp = {b * (1.0 - a) / denom, a * (1.0 - b) / denom};
  }
  return out;
}

std::vector<Cusp> detect_cusps(const ChoiRep& c_e, const ChoiRep& c_f,
                               std::span<const double> beta_grid) {
  if (c_e.dim != c_f.dim) throw ValidationError("detect_cusps: channel dimensions differ");
  std::vector<Cusp> cusps;
  if (beta_grid.empty()) return cusps;

  // Eigenvalues of C_E - beta C_F never increase with beta, so the number
  // of positive ones (the rank of Delta_+) only drops; each unit drop is one
  // eigenvalue crossing zero.
  double prev_beta = beta_grid.front();
  int prev = positive_count(c_e, c_f, prev_beta);
  for (double beta : beta_grid.subspan(1)) {
    const int now = positive_count(c_e, c_f, beta);
    for (int k = prev; k > now; --k) {
      double lo = prev_beta;  // count >= k
      double hi = beta;       // count < k
      for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = std::sqrt(lo * hi);
        (positive_count(c_e, c_f, mid) >= k ? lo : hi) = mid;
      }
      Cusp c;
      c.beta = 0.5 * (lo + hi);
      c.eigen_index = k - 1;
      const BetaSample s = sample_beta(c_e, c_f, c.beta);
      c.lower_point = alpha_to_pq(s.alpha_lower, c.beta);
      cusps.push_back(c);
    }
    prev = now;
    prev_beta = beta;
  }
  return cusps;
}

PlateauExtents plateau_extents(std::span<const TradeoffPoint> points, double tol) {
  double qz_min = std::numeric_limits<double>::infinity();
  double qz_max = -qz_min;
  double pz_min = qz_min;
  double pz_max = -qz_min;
  for (const auto& pt : points) {
    if (pt.q <= tol) {
      qz_min = std::min(qz_min, pt.p);
      qz_max = std::max(qz_max, pt.p);
    }
    if (pt.p <= tol) {
      pz_min = std::min(pz_min, pt.q);
      pz_max = std::max(pz_max, pt.q);
    }
  }
  PlateauExtents out;
  if (qz_max > qz_min) out.q_zero_p_extent = qz_max - qz_min;
  if (pz_max > pz_min) out.p_zero_q_extent = pz_max - pz_min;
  return out;
}

}  // namespace chdisguise
