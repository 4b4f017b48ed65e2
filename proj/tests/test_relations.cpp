#include <doctest.h>

#include "chdisguise/disguise.hpp"
#include "chdisguise/errors.hpp"
#include "chdisguise/relations.hpp"
#include "chdisguise/sdp_exact.hpp"
#include "oracles.hpp"

using namespace chdisguise;

TEST_CASE("containment: bit flip contains the identity channel") {
  for (double a : {0.1, 0.2, 0.5, 0.9}) {
    const ContainmentResult r = containment_min_q(bit_flip(a), identity_channel(2));
    CHECK(r.q_min == doctest::Approx(a).epsilon(1e-9));
    CHECK_FALSE(r.closed_form);  // the identity channel has a rank-one Choi matrix
    REQUIRE(r.harmonizer);
    // (C_E - (1 - a) C_I) / a is the X channel.
    CHECK(max_abs(r.harmonizer->matrix - oracle::choi(bit_flip(1.0))) < 1e-8);
  }
}

TEST_CASE("containment: self and non-containment") {
  const KrausChannel e = random_channel(2, 4, 3);
  const ContainmentResult self = containment_min_q(e, e);
  CHECK(self.closed_form);
  CHECK(self.q_min == doctest::Approx(0.0).epsilon(1e-9));

  const ContainmentResult none = containment_min_q(bit_flip(0.2), phase_flip(0.2));
  CHECK(none.q_min == doctest::Approx(1.0).epsilon(1e-9));
  CHECK_THROWS_AS(containment_min_q(bit_flip(0.2), random_channel(3, 1, 1)), ValidationError);
}

TEST_CASE("containment: closed form agrees with a PSD scan") {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const KrausChannel e = random_channel(2, 4, seed);
    const KrausChannel f = random_channel(2, 4, seed + 40);
    const ContainmentResult r = containment_min_q(e, f);
    REQUIRE(r.closed_form);
    const ComplexMatrix ce = oracle::choi(e);
    const ComplexMatrix cf = oracle::choi(f);
    if (r.q_min < 1.0) {
      CHECK(oracle::min_eig(ce - (1.0 - r.q_min) * cf) >= -1e-9);
      CHECK(oracle::min_eig(r.harmonizer->matrix) >= -1e-9);
      CHECK(max_abs(oracle::channel_sum(r.harmonizer->matrix) - identity(2)) < 1e-9);
    }
    if (r.q_min > 1e-6) CHECK(oracle::min_eig(ce - (1.0 - r.q_min + 1e-6) * cf) < 0.0);
  }
}

TEST_CASE("containment shows up as a p = 0 point of the profile") {
  const KrausChannel e = random_channel(2, 4, 12);
  const KrausChannel f = random_channel(2, 4, 13);
  const ContainmentResult r = containment_min_q(e, f);
  REQUIRE(r.q_min < 1.0);
  // beta = 1 - q* is where the profile meets p = 0 with q = q*.
  const double beta = 1.0 - r.q_min;
  const BetaSample s = sample_beta(choi_from_kraus(e), choi_from_kraus(f), beta);
  const TradeoffPoint pt = alpha_to_pq(s.alpha_lower, beta);
  CHECK(pt.p == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(pt.q == doctest::Approx(r.q_min).epsilon(1e-6));
  CHECK(s.tight);
}

TEST_CASE("triangle_combine examples") {
  const TradeoffPoint r = triangle_combine({1.0 / 6, 1.0 / 6}, {1.0 / 6, 1.0 / 6});
  CHECK(r.p == doctest::Approx(2.0 / 7.0).epsilon(1e-14));
  CHECK(r.q == doctest::Approx(2.0 / 7.0).epsilon(1e-14));

  const TradeoffPoint end = triangle_combine({0.0, 1.0}, {0.4, 0.3});
  CHECK(end.p == doctest::Approx(0.0));
  CHECK(end.q == doctest::Approx(1.0));

  // E = F hands back the (F, G) pair with its roles swapped.
  const TradeoffPoint same = triangle_combine({0.0, 0.0}, {0.3, 0.1});
  CHECK(same.p == doctest::Approx(0.1));
  CHECK(same.q == doctest::Approx(0.3));

  CHECK_THROWS_AS(triangle_combine({0.2, 1.0}, {0.1, 1.0}), ValidationError);
  CHECK_THROWS_AS(triangle_combine({1.2, 0.1}, {0.1, 0.1}), ValidationError);
}

TEST_CASE("triangle_combine yields an actual disguise for the chained channels") {
  // E = (1 - q) F + q D1 and G = (1 - q') F + q' D2. Mixing E with D2 and G
  // with D1 at the combined weights makes the two sides equal.
  const KrausChannel f = random_channel(2, 2, 1);
  const KrausChannel d1 = random_channel(2, 2, 3);
  const KrausChannel d2 = random_channel(2, 2, 5);
  const double q = 0.3;
  const double q_primed = 0.25;
  const KrausChannel e = mix(f, d1, q);
  const KrausChannel g = mix(f, d2, q_primed);
  const TradeoffPoint pq = triangle_combine({0.0, q}, {0.0, q_primed});
  const ComplexMatrix lhs = (1.0 - pq.p) * oracle::choi(e) + pq.p * oracle::choi(d2);
  const ComplexMatrix rhs = (1.0 - pq.q) * oracle::choi(g) + pq.q * oracle::choi(d1);
  CHECK(max_abs(lhs - rhs) < 1e-12);
}

TEST_CASE("scalar triangle inequalities over a sweep") {
  for (int i = 0; i < 20; ++i) {
    for (int j = 0; j < 20; ++j) {
      const double p0 = 0.5 * i / 19.0;
      const double p1 = 0.5 * j / 19.0;
      const TradeoffPoint eq = triangle_combine({p0, p0}, {p1, p1});
      CHECK(eq.p == doctest::Approx(eq.q).epsilon(1e-14));
      CHECK(eq.p <= p0 + p1 + 1e-14);

      const TradeoffPoint a{0.9 * i / 19.0, 0.6 * (19 - i) / 19.0};
      const TradeoffPoint b{0.7 * (19 - j) / 19.0, 0.95 * j / 19.0};
      if (a.q * b.q >= 1.0) continue;
      const TradeoffPoint r = triangle_combine(a, b);
      CHECK(r.p + r.q <= a.p + a.q + b.p + b.q + 1e-14);
    }
  }
}

TEST_CASE("triangle_region with trivial profiles") {
  const TriangleRegion r = triangle_region(std::vector<TradeoffPoint>{{0.0, 0.0}},
                                           std::vector<TradeoffPoint>{{0.0, 0.0}});
  REQUIRE(r.points.size() == 1);
  CHECK(r.points[0].p == 0.0);
  CHECK(r.points[0].q == 0.0);
  // The boundary's only interior vertex is the origin.
  CHECK(curve_q_at(r.boundary, 0.0) == 0.0);

  const std::vector<TradeoffPoint> corners{{0.0, 1.0}, {1.0, 0.0}};
  const std::vector<TradeoffPoint> corners_primed{{1.0, 0.0}, {0.0, 1.0}};
  const TriangleRegion c = triangle_region(corners, corners_primed);
  bool has_top = false;
  bool has_right = false;
  for (const auto& pt : c.points) {
    has_top |= pt.p == 0.0 && pt.q == 1.0;
    has_right |= pt.p == 1.0 && pt.q == 0.0;
  }
  CHECK(has_top);
  CHECK(has_right);
  CHECK_THROWS_AS(triangle_region(std::vector<TradeoffPoint>{}, corners), ValidationError);
}

TEST_CASE("triangle_region of flip channels stays above the optimal curve") {
  const auto grid = log_beta_grid(1e-2, 1e2, 120);
  const ProfileCurve ef = trace_profile(bit_flip(0.2), phase_flip(0.2), grid);
  const ProfileCurve fg = trace_profile(phase_flip(0.2), xz_flip(0.2), grid);
  const TriangleRegion r = triangle_region(ef, fg);
  for (const auto& pt : r.boundary) CHECK(pt.q - oracle::flip_q_of_p(0.2, 0.2, pt.p) >= -1e-8);
  CHECK_THROWS_AS(triangle_region(ef, fg, 0), ValidationError);
}

TEST_CASE("compose_mixing") {
  const TradeoffPoint prod = compose_mixing({0.2, 0.2}, {0.2, 0.2}, ComposeMode::Product);
  CHECK(prod.p == doctest::Approx(0.36));
  CHECK(prod.q == doctest::Approx(0.36));
  const TradeoffPoint sum = compose_mixing({0.2, 0.2}, {0.2, 0.2}, ComposeMode::Sum);
  CHECK(sum.p == doctest::Approx(0.4));
  CHECK(sum.q == doctest::Approx(0.4));
  for (auto mode : {ComposeMode::Product, ComposeMode::Sum}) {
    const TradeoffPoint id = compose_mixing({0.0, 0.0}, {0.3, 0.1}, mode);
    CHECK(id.p == doctest::Approx(0.3));
    CHECK(id.q == doctest::Approx(0.1));
  }
  CHECK(compose_mixing({0.7, 0.1}, {0.6, 0.1}, ComposeMode::Sum).p == 1.0);
  CHECK_THROWS_AS(compose_mixing({-0.1, 0.0}, {0.0, 0.0}, ComposeMode::Sum), ValidationError);
}

TEST_CASE("compose_disguise yields equal composite mixtures") {
  auto witness = [](const KrausChannel& e, const KrausChannel& f, double beta) {
    const ExactSolution s = solve_alpha(choi_from_kraus(e), choi_from_kraus(f), beta);
    const KrausChannel ed = s.choi_EDelta ? kraus_from_choi(*s.choi_EDelta) : e;
    const KrausChannel fd = s.choi_FDelta ? kraus_from_choi(*s.choi_FDelta) : f;
    return DisguiseWitness{e, f, ed, fd, s.p, s.q};
  };
  const DisguiseWitness w1 = witness(random_channel(2, 2, 1), random_channel(2, 3, 2), 1.0);
  const DisguiseWitness w2 = witness(random_channel(2, 2, 3), random_channel(2, 1, 4), 0.7);
  for (const DisguiseWitness* w : {&w1, &w2}) {
    const ComplexMatrix l = oracle::choi(mix(w->e, w->e_delta, w->p));
    const ComplexMatrix r = oracle::choi(mix(w->f, w->f_delta, w->q));
    CHECK(max_abs(l - r) < 1e-6);
  }
  const DisguiseWitness c = compose_disguise(w1, w2);
  CHECK(c.p == doctest::Approx(w1.p + w2.p - w1.p * w2.p));
  CHECK(c.q == doctest::Approx(w1.q + w2.q - w1.q * w2.q));
  CHECK(c.e_delta.is_trace_preserving(1e-6));
  const ComplexMatrix lhs = oracle::choi(mix(c.e, c.e_delta, c.p));
  const ComplexMatrix rhs = oracle::choi(mix(c.f, c.f_delta, c.q));
  // Both sides equal the composition of the two disguised pairs.
  const ComplexMatrix direct = oracle::choi(compose(mix(w2.e, w2.e_delta, w2.p), mix(w1.e, w1.e_delta, w1.p)));
  CHECK(max_abs(lhs - direct) < 1e-12);
  CHECK(max_abs(lhs - rhs) < 1e-6);
}

TEST_CASE("compose_disguise with exact witnesses is exact") {
  // Flip pairs at beta = 1 have closed-form harmonizers.
  const DisguiseWitness w{bit_flip(0.2), phase_flip(0.2), phase_flip(1.0), bit_flip(1.0), 1.0 / 6, 1.0 / 6};
  const ComplexMatrix l = oracle::choi(mix(w.e, w.e_delta, w.p));
  const ComplexMatrix r = oracle::choi(mix(w.f, w.f_delta, w.q));
  REQUIRE(max_abs(l - r) < 1e-12);
  const DisguiseWitness c = compose_disguise(w, w);
  CHECK(max_abs(oracle::choi(mix(c.e, c.e_delta, c.p)) - oracle::choi(mix(c.f, c.f_delta, c.q))) < 1e-7);
}

TEST_CASE("diamond_bracket") {
  const DiamondBracket zero = diamond_bracket(0.0, 2);
  CHECK(zero.lower == 0.0);
  CHECK(zero.upper == 0.0);
  const DiamondBracket half = diamond_bracket(0.5, 2);
  CHECK(half.lower == doctest::Approx(0.25));
  CHECK(half.upper == doctest::Approx(2.0));
  const DiamondBracket sixth = diamond_bracket(1.0 / 6, 2);
  CHECK(sixth.lower == doctest::Approx(0.05));
  CHECK(sixth.upper == doctest::Approx(2.0 / 3));
  for (int i = 0; i <= 50; ++i) {
    for (Eigen::Index n : {2, 3, 8}) {
      const DiamondBracket b = diamond_bracket(0.5 * i / 50.0, n);
      CHECK(b.lower <= b.upper);
    }
  }
  CHECK_THROWS_AS(diamond_bracket(0.6, 2), ValidationError);
  CHECK_THROWS_AS(diamond_bracket(0.2, 1), ValidationError);
}

TEST_CASE("qkd_rate_bound") {
  CHECK(qkd_rate_bound(0.0, 2) == 0.0);
  CHECK(qkd_rate_bound(0.1, 2) == doctest::Approx(0.1));
  CHECK(qkd_rate_bound(1.0, 4) == doctest::Approx(2.0));
  CHECK_THROWS_AS(qkd_rate_bound(1.5, 2), ValidationError);
  CHECK_THROWS_AS(qkd_rate_bound(0.5, 1), ValidationError);
}
