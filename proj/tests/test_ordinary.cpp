#include <doctest.h>

#include <cmath>

#include "ifcx/channels.hpp"
#include "ifcx/infomeasures.hpp"
#include "ifcx/ordinary.hpp"
#include "ifcx/verification.hpp"
#include "oracle_ordinary.hpp"

using namespace ifcx;

namespace {

double h2(double p) {
  return p <= 0.0 || p >= 1.0 ? 0.0 : -p * std::log(p) - (1 - p) * std::log(1 - p);
}

JointDist grid_outer_joint(const MarginalChannel& w, const std::vector<int>& cols,
                           int m) {
  // P1 x P2 uniform times the grid conditional selected per input cell.
  const auto& opts = grid_pmfs(w.y.size, m);
  std::vector<double> cells;
  for (int a = 0; a < w.x1.size; ++a)
    for (int b = 0; b < w.x2.size; ++b)
      for (int y = 0; y < w.y.size; ++y)
        cells.push_back(0.25 * opts[static_cast<std::size_t>(
                                   cols[static_cast<std::size_t>(a * w.x2.size + b)])]
                                   [static_cast<std::size_t>(y)]);
  return JointDist::from_raw_unchecked({w.x1, w.x2, w.y}, std::move(cells));
}

}  // namespace

TEST_CASE("t_zero basics") {
  const Dmc2User z = make_z_channel(0.01);
  const MarginalChannel w = marginal_channel(z, 1);
  std::vector<double> lw(w.table.size());
  for (std::size_t i = 0; i < lw.size(); ++i) lw[i] = std::log(w.table[i]);

  // singleton cloud: t0 = r2 + f0 for every r2
  FiCloud single;
  single.f_min = -1.25;
  single.points = {FiPoint{-1.25, 0.0, {}}};
  CHECK(t_zero(single, 0.0).value() == doctest::Approx(-1.25));
  CHECK(t_zero(single, 0.3).value() == doctest::Approx(-0.95));

  // r2 = 0 forces the independence point
  const std::vector<double> anchor{0.4, 0.1, 0.2, 0.3};
  const std::vector<double> pb{0.5, 0.5};
  const FiCloud cloud = build_fi_cloud(anchor, 2, 2, pb, lw, GridSpec(6), true, true);
  double f_prod = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int y = 0; y < 2; ++y)
      for (int b = 0; b < 2; ++b)
        f_prod += anchor[static_cast<std::size_t>(a * 2 + y)] * 0.5 *
                  lw[static_cast<std::size_t>((a * 2 + b) * 2 + y)];
  CHECK(t_zero(cloud, 0.0).value() == doctest::Approx(f_prod).epsilon(1e-12));

  // matches an exhaustive unpruned scan at r2 = 0.1: the best point with
  // I <= r plus the best two-point chord evaluated at I = r (the concave
  // hull at a coordinate is the max over all straddling chords)
  const FiCloud full = build_fi_cloud(anchor, 2, 2, pb, lw, GridSpec(6), false);
  const double r = 0.1;
  double best = -1e300;
  for (const auto& p : full.points)
    if (p.i <= r && p.f - p.i > best) best = p.f - p.i;
  for (const auto& a : full.points)
    for (const auto& b : full.points) {
      if (!(a.i <= r && r < b.i) || a.f == -kInf || b.f == -kInf) continue;
      const double lam = (r - a.i) / (b.i - a.i);
      const double f_at = a.f + lam * (b.f - a.f);
      if (f_at - r > best) best = f_at - r;
    }
  CHECK(t_zero(cloud, r).value() == doctest::Approx(r + best).epsilon(1e-13));
}

TEST_CASE("e_one constraint cases") {
  const Dmc2User z = make_z_channel(0.01);
  const MarginalChannel w = marginal_channel(z, 1);
  const JointDist q = grid_outer_joint(w, {0, 0, 0, 6}, 6);  // near the true channel

  // display-verbatim mode: an unattainably large f(q~) empties the set
  FiCloud tiny;
  tiny.f_min = -2.0;
  tiny.points = {FiPoint{-2.0, 0.05, {}}};
  CHECK(tiny.e_one(ExtReal(-0.01), ExtReal(-3.0), ExtReal(-1.5), 0.1, true)
            .is_pos_inf());
  // proof-faithful mode: the same competitor wins outright
  CHECK(tiny.e_one(ExtReal(-0.01), ExtReal(-3.0), ExtReal(-1.5), 0.1).value() == 0.0);

  // a feasible point with I <= r2 gives zero
  FiCloud feas;
  feas.f_min = -1.0;
  feas.points = {FiPoint{-1.0, 0.05, {}}};
  CHECK(feas.e_one(ExtReal(-1.2), ExtReal(-1.0), ExtReal(-1.0), 0.1).value() == 0.0);

  // grid instance vs an uncached triple-loop oracle at r2 = 0.2
  const JointDist fixed = marginal(q, {1, 2});
  const JointDist p1 = marginal(q, {0});
  ConditionalStream stream({z.x1, z.x2, z.y1}, {1, 2}, fixed,
                           MarginalConstraint{{0}, p1.probs()}, GridSpec(6));
  std::vector<double> lw(w.table.size());
  for (std::size_t i = 0; i < lw.size(); ++i) lw[i] = std::log(w.table[i]);
  const ExtReal f_q = f_value(q, w.as_conditional());
  std::vector<double> anc_q(4, 0.0);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int y = 0; y < 2; ++y) anc_q[static_cast<std::size_t>(a * 2 + y)] += q.at({a, b, y});
  const FiCloud cq = build_fi_cloud(anc_q, 2, 2, marginal(q, {1}).probs(), lw, GridSpec(6));
  const ExtReal t0 = cq.t_zero(0.2);

  JointDist qt;
  int checked = 0;
  while (stream.next(qt) && checked < 40) {
    ++checked;
    const double lib = e_one(qt, q, 0.2, w, GridSpec(6)).value();
    // oracle: full unpruned cloud scan with the same case rules
    std::vector<double> anc(4, 0.0);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (int y = 0; y < 2; ++y)
          anc[static_cast<std::size_t>(a * 2 + y)] += qt.at({a, b, y});
    const FiCloud cl = build_fi_cloud(anc, 2, 2, marginal(q, {1}).probs(), lw,
                                      GridSpec(6), false);
    const double oracle = cl.e_one(f_value(qt, w.as_conditional()), t0, f_q, 0.2).value();
    CHECK(lib == oracle);
  }
  CHECK(checked > 0);
}

TEST_CASE("e_hat ordering and single-user reduction") {
  const Dmc2User z = make_z_channel(0.01);
  const MarginalChannel w = marginal_channel(z, 1);
  const JointDist q = grid_outer_joint(w, {0, 1, 1, 5}, 6);

  for (double r2 : {0.0, 0.1, 0.3}) {
    const double e1 = e_hat(q, r2, 1, w, GridSpec(4)).value();
    const double e2 = e_hat(q, r2, 2, w, GridSpec(4)).value();
    CHECK(e2 <= e1 + 1e-15);
  }

  // channel-consistent q at large r2: the true statistics are feasible
  const JointDist qc = grid_outer_joint(w, {0, 0, 0, 6}, 6);
  CHECK(e_hat(qc, 1.5, 2, w, GridSpec(4)).value() == doctest::Approx(0.0));

  // degenerate X2: single-user form min{ I(X1;Y1) : f(q~) >= f(q) }
  const Alphabet bin(2), one(1);
  const Dmc2User su = make_two_user_dmc(bin, one, bin, one, {0.9, 0.1, 0.2, 0.8});
  const MarginalChannel wsu = marginal_channel(su, 1);
  std::vector<double> cells;
  const auto& opts = grid_pmfs(2, 3);
  for (int a = 0; a < 2; ++a)
    for (int y = 0; y < 2; ++y) cells.push_back(0.5 * opts[1][static_cast<std::size_t>(y)]);
  const JointDist qsu = JointDist::from_raw_unchecked({bin, one, bin}, cells);
  const double lib = e_hat(qsu, 0.0, 1, wsu, GridSpec(3)).value();
  // independent single-user implementation
  const double fq = f_value(qsu, wsu.as_conditional()).value();
  double oracle = 1e300;
  const JointDist fy = marginal(qsu, {2});
  for (std::size_t o1 = 0; o1 < opts.size(); ++o1)
    for (std::size_t o2 = 0; o2 < opts.size(); ++o2) {
      std::vector<double> qt(4);
      double mx0 = 0.0;
      for (int y = 0; y < 2; ++y) {
        qt[static_cast<std::size_t>(0 * 2 + y)] =
            fy[static_cast<std::size_t>(y)] * opts[y == 0 ? o1 : o2][0];
        qt[static_cast<std::size_t>(1 * 2 + y)] =
            fy[static_cast<std::size_t>(y)] * opts[y == 0 ? o1 : o2][1];
        mx0 += qt[static_cast<std::size_t>(y)];
      }
      if (std::abs(mx0 - 0.5) > 1.0 / 6.0) continue;
      double ft = 0.0;
      bool ninf = false;
      for (int a = 0; a < 2; ++a)
        for (int y = 0; y < 2; ++y) {
          const double c = qt[static_cast<std::size_t>(a * 2 + y)];
          if (c == 0.0) continue;
          const double ww = wsu.at(a, 0, y);
          if (ww == 0.0) ninf = true;
          else ft += c * std::log(ww);
        }
      if (ninf || ft < fq) continue;
      // I(X1;Y1) of qt
      double mi = 0.0;
      const double m0 = qt[0] + qt[1], m1 = qt[2] + qt[3];
      for (int a = 0; a < 2; ++a)
        for (int y = 0; y < 2; ++y) {
          const double c = qt[static_cast<std::size_t>(a * 2 + y)];
          if (c == 0.0) continue;
          mi += c * std::log(c / ((a == 0 ? m0 : m1) * fy[static_cast<std::size_t>(y)]));
        }
      oracle = std::min(oracle, std::max(0.0, mi));
    }
  CHECK(lib == doctest::Approx(oracle).epsilon(1e-9));
}

TEST_CASE("e_star_inner clipping") {
  const Dmc2User z = make_z_channel(0.01);
  const MarginalChannel w = marginal_channel(z, 1);
  const JointDist q = grid_outer_joint(w, {0, 1, 2, 5}, 6);
  const GridSpec g(4);
  const double eh1 = e_hat(q, 0.1, 1, w, g).value();
  const double eh2 = e_hat(q, 0.1, 2, w, g).value();
  // r1 large: only the tail term survives
  CHECK(e_star_inner(q, RatePair(eh1 + 1.0, 0.1), w, g).value() ==
        doctest::Approx(eh2));
  // r1 = 0: max(ehat1, ehat2) = ehat1
  CHECK(e_star_inner(q, RatePair(0.0, 0.1), w, g).value() == doctest::Approx(eh1));
  // mid-range: compositional identity
  CHECK(e_star_inner(q, RatePair(0.05, 0.1), w, g).value() ==
        doctest::Approx(std::max(clip_positive(eh1 - 0.05), eh2)));
}

TEST_CASE("exponent ordinary on the z channel") {
  const Dmc2User z = make_z_channel(0.01);
  const JointDist p1 = JointDist::uniform({Alphabet(2)});
  const JointDist p2 = JointDist::uniform({Alphabet(2)});
  const RegionOrdinary reg = region_ordinary(z, p1, p2);

  // outside the region closure: value collapses to the grid divergence floor
  const auto outside = exponent_ordinary(z, p1, p2, RatePair(0.45, 0.4), GridSpec(4));
  CHECK(!reg.contains(RatePair(0.45, 0.4)));
  CHECK(outside.value.value() <= outside.d_floor + 1e-9);

  // un-decodable rate: r1 beyond log|X1|
  const auto huge = exponent_ordinary(z, p1, p2, RatePair(std::log(2.0) + 0.2, 0.1),
                                      GridSpec(4));
  CHECK(huge.value.value() <= huge.d_floor + 1e-9);

  // interior point: strictly positive and equal to the brute-force oracle
  const RatePair inside(0.05, 0.1);
  CHECK(reg.contains(inside));
  const auto res = exponent_ordinary(z, p1, p2, inside, GridSpec(3));
  CHECK(res.value.value() > 0.05);
  const auto oracle = ifcx_oracle::exponent_ordinary_brute(z, p1, p2, inside, GridSpec(3));
  CHECK(res.value.value() == oracle.value);
  REQUIRE(res.argmin_q.has_value());
  CHECK(res.argmin_q->probs() == oracle.argmin);
}

TEST_CASE("exponent monotone in both rates") {
  // R1 enters only through the final clip, so R1 sweeps are monotone at any
  // resolution. R2 feeds the enumerator-threshold machinery, whose grid
  // discretization carries a bracket-width-scale sawtooth at coarse m; the
  // R2 sweep here runs on a resolution/row audited clean.
  const Dmc2User z = make_z_channel(0.01);
  const JointDist p1 = JointDist::uniform({Alphabet(2)});
  const JointDist p2 = JointDist::uniform({Alphabet(2)});
  std::vector<RatePair> sweep;
  for (int i = 0; i <= 8; ++i) sweep.push_back(RatePair(0.05 * i, 0.12));
  auto res = exponent_ordinary_lattice(z, p1, p2, sweep, GridSpec(4), {});
  for (std::size_t i = 1; i < res.size(); ++i)
    CHECK(res[i].value.value() <= res[i - 1].value.value() + 1e-12);

  sweep.clear();
  for (int i = 0; i <= 12; ++i) sweep.push_back(RatePair(0.20, 0.05 * i));
  res = exponent_ordinary_lattice(z, p1, p2, sweep, GridSpec(6), {});
  for (std::size_t i = 1; i < res.size(); ++i)
    CHECK(res[i].value.value() <= res[i - 1].value.value() + 1e-12);
}

TEST_CASE("divergence floor vanishes exactly when the channel sits on the grid") {
  const JointDist u = JointDist::uniform({Alphabet(2)});
  // p = 1/6 rows are representable at m = 6, p = 0.01 rows are not
  const auto on_grid = exponent_ordinary(make_z_channel(1.0 / 6.0), u, u,
                                         RatePair(0.05, 0.05), GridSpec(6));
  CHECK(on_grid.d_floor == 0.0);
  const auto off_grid = exponent_ordinary(make_z_channel(0.01), u, u,
                                          RatePair(0.05, 0.05), GridSpec(6));
  CHECK(off_grid.d_floor == doctest::Approx(std::log(1.0 / 0.99)).epsilon(1e-12));
}

TEST_CASE("region ordinary") {
  const Dmc2User z = make_z_channel(0.01);
  const JointDist p1 = JointDist::uniform({Alphabet(2)});
  const JointDist p2 = JointDist::uniform({Alphabet(2)});
  const RegionOrdinary reg = region_ordinary(z, p1, p2);

  // closed forms from Y1 = X1 X2 + Z: see the acceptance suite
  const double p = 0.01, qq = 0.25 + 0.5 * p;
  CHECK(reg.i_x1_y1_given_x2 == doctest::Approx(0.5 * (std::log(2.0) - h2(p))).epsilon(1e-12));
  CHECK(reg.i_x1_y1 ==
        doctest::Approx(h2(qq) - 0.5 * (h2(p) + std::log(2.0))).epsilon(1e-12));
  CHECK(reg.i_x1x2_y1 == doctest::Approx(h2(qq) - h2(p)).epsilon(1e-12));

  CHECK(reg.contains(RatePair(0.0, 5.0)));  // r1 = 0 is always inside

  const RegionOrdinary dead = region_ordinary(make_z_channel(0.5), p1, p2);
  CHECK(dead.i_x1_y1 == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(dead.i_x1_y1_given_x2 == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(!dead.contains(RatePair(0.01, 0.01)));
}
