#include <doctest.h>

#include <cmath>

#include "ifcx/infomeasures.hpp"
#include "ifcx/verification.hpp"

using namespace ifcx;

namespace {

JointDist random_joint(Rng& rng, std::vector<Alphabet> axes) {
  std::size_t n = 1;
  for (const auto& a : axes) n *= static_cast<std::size_t>(a.size);
  std::vector<double> p(n);
  double s = 0.0;
  for (auto& x : p) {
    x = 0.01 + rng.next_double();
    s += x;
  }
  for (auto& x : p) x /= s;
  return JointDist(std::move(axes), std::move(p));
}

double h2(double p) { return p <= 0.0 || p >= 1.0 ? 0.0 : -p * std::log(p) - (1 - p) * std::log(1 - p); }

}  // namespace

TEST_CASE("entropy basics") {
  CHECK(entropy(JointDist::unit_mass({Alphabet(3)}, {1})) == doctest::Approx(0.0));
  CHECK(entropy(JointDist::uniform({Alphabet(2)})) == doctest::Approx(std::log(2.0)));
  // Bernoulli(0.01), closed form
  JointDist bern({Alphabet(2)}, {0.99, 0.01});
  const double expect = -0.01 * std::log(0.01) - 0.99 * std::log(0.99);
  CHECK(entropy(bern) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(expect == doctest::Approx(0.0560020).epsilon(1e-5));
}

TEST_CASE("marginal against direct summation") {
  // product distribution marginalizes to its factor
  JointDist px({Alphabet(2)}, {0.3, 0.7});
  JointDist py({Alphabet(3)}, {0.2, 0.5, 0.3});
  std::vector<double> prod;
  for (double a : px.probs())
    for (double b : py.probs()) prod.push_back(a * b);
  JointDist joint({Alphabet(2), Alphabet(3)}, prod);
  const JointDist m0 = marginal(joint, {0});
  for (int i = 0; i < 2; ++i)
    CHECK(m0[static_cast<std::size_t>(i)] ==
          doctest::Approx(px[static_cast<std::size_t>(i)]).epsilon(1e-14));

  const JointDist u = marginal(JointDist::uniform({Alphabet(2), Alphabet(2)}), {1});
  CHECK(u[0] == doctest::Approx(0.5));

  Rng rng(42);
  for (int t = 0; t < 20; ++t) {
    JointDist q = random_joint(rng, {Alphabet(2), Alphabet(2), Alphabet(2)});
    JointDist m = marginal(q, {0, 2});
    for (int a = 0; a < 2; ++a)
      for (int y = 0; y < 2; ++y) {
        double direct = 0.0;
        for (int b = 0; b < 2; ++b) direct += q.at({a, b, y});
        CHECK(m.at({a, y}) == doctest::Approx(direct).epsilon(1e-15));
      }
  }
  CHECK_THROWS_AS(marginal(JointDist::uniform({Alphabet(2)}), {}), Error);
}

TEST_CASE("mutual information") {
  // product -> 0
  JointDist prod({Alphabet(2), Alphabet(2)}, {0.06, 0.14, 0.24, 0.56});
  CHECK(mutual_information(prod, {0}, {1}) == doctest::Approx(0.0).epsilon(1e-12));
  // identity coupling -> ln 2
  JointDist corr({Alphabet(2), Alphabet(2)}, {0.5, 0.0, 0.0, 0.5});
  CHECK(mutual_information(corr, {0}, {1}) == doctest::Approx(std::log(2.0)));
  // BSC(0.01) with uniform input, against the definition-level sum
  const double eps = 0.01;
  JointDist bsc({Alphabet(2), Alphabet(2)},
                {0.5 * (1 - eps), 0.5 * eps, 0.5 * eps, 0.5 * (1 - eps)});
  double direct = 0.0;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) {
      const double pxy = bsc.at({x, y});
      direct += pxy * std::log(pxy / (0.5 * 0.5));  // both marginals uniform
    }
  CHECK(mutual_information(bsc, {0}, {1}) == doctest::Approx(direct).epsilon(1e-12));
  CHECK(mutual_information(bsc, {0}, {1}) ==
        doctest::Approx(std::log(2.0) - h2(eps)).epsilon(1e-12));
  CHECK(std::log(2.0) - h2(eps) == doctest::Approx(0.637145).epsilon(1e-5));
  CHECK_THROWS_AS(mutual_information(bsc, {0}, {0}), Error);
}

TEST_CASE("conditional mutual information") {
  Rng rng(7);
  // C independent of (A,B): I(A;B|C) == I(A;B)
  JointDist ab = random_joint(rng, {Alphabet(2), Alphabet(2)});
  std::vector<double> cells;
  for (double p : ab.probs()) {
    cells.push_back(p * 0.4);
    cells.push_back(p * 0.6);
  }
  JointDist abc({Alphabet(2), Alphabet(2), Alphabet(2)}, cells);
  CHECK(conditional_mutual_information(abc, {0}, {1}, {2}) ==
        doctest::Approx(mutual_information(abc, {0}, {1})).epsilon(1e-12));

  // A = B deterministic given C -> I(A;B|C) ... equals H(A|C), 0 when A fixed by C
  JointDist det({Alphabet(2), Alphabet(2), Alphabet(2)},
                {0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.5});
  CHECK(conditional_mutual_information(det, {0}, {1}, {2}) ==
        doctest::Approx(0.0).epsilon(1e-12));

  // random joint against per-slice oracle
  for (int t = 0; t < 20; ++t) {
    JointDist q = random_joint(rng, {Alphabet(2), Alphabet(2), Alphabet(2)});
    double oracle = 0.0;
    for (int c = 0; c < 2; ++c) {
      double pc = 0.0;
      double slice[2][2];
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          slice[a][b] = q.at({a, b, c});
          pc += slice[a][b];
        }
      if (pc == 0.0) continue;
      double mi = 0.0;
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          const double pab = slice[a][b] / pc;
          if (pab == 0.0) continue;
          const double pa = (slice[a][0] + slice[a][1]) / pc;
          const double pb = (slice[0][b] + slice[1][b]) / pc;
          mi += pab * std::log(pab / (pa * pb));
        }
      oracle += pc * mi;
    }
    CHECK(conditional_mutual_information(q, {0}, {1}, {2}) ==
          doctest::Approx(oracle).epsilon(1e-10));
  }
}

TEST_CASE("kl divergence") {
  JointDist p({Alphabet(2)}, {0.5, 0.5});
  CHECK(kl_divergence(p, p).value() == doctest::Approx(0.0));
  JointDist q2({Alphabet(2)}, {0.25, 0.75});
  const double expect = 0.5 * std::log(2.0) + 0.5 * std::log(2.0 / 3.0);
  CHECK(kl_divergence(p, q2).value() == doctest::Approx(expect).epsilon(1e-12));
  CHECK(expect == doctest::Approx(0.143841).epsilon(1e-5));
  JointDist spiked({Alphabet(2)}, {1.0, 0.0});
  JointDist other({Alphabet(2)}, {0.0, 1.0});
  CHECK(kl_divergence(spiked, other).is_pos_inf());
  CHECK_THROWS_AS(kl_divergence(p, JointDist::uniform({Alphabet(3)})), Error);
}

TEST_CASE("weighted divergence") {
  Conditional q{2, 2, {0.9, 0.1, 0.2, 0.8}};
  JointDist px({Alphabet(2)}, {0.3, 0.7});
  CHECK(weighted_divergence(q, q, px).value() == doctest::Approx(0.0));

  // unit-mass weight reduces to the KL of that row
  Conditional p{2, 2, {0.5, 0.5, 0.5, 0.5}};
  JointDist unit = JointDist::unit_mass({Alphabet(2)}, {1});
  JointDist row_q({Alphabet(2)}, {0.2, 0.8});
  JointDist row_p({Alphabet(2)}, {0.5, 0.5});
  CHECK(weighted_divergence(q, p, unit).value() ==
        doctest::Approx(kl_divergence(row_q, row_p).value()).epsilon(1e-12));

  // chain-rule identity: D(q_ch || p_ch | p_x) = D(p_x x q_ch || p_x x p_ch)
  Rng rng(11);
  for (int t = 0; t < 10; ++t) {
    JointDist w = random_joint(rng, {Alphabet(2)});
    Conditional qc{2, 2, {}}, pc{2, 2, {}};
    for (int r = 0; r < 2; ++r) {
      const double a = 0.1 + 0.8 * rng.next_double();
      const double b = 0.1 + 0.8 * rng.next_double();
      qc.p.insert(qc.p.end(), {a, 1 - a});
      pc.p.insert(pc.p.end(), {b, 1 - b});
    }
    std::vector<double> jq, jp;
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) {
        jq.push_back(w[static_cast<std::size_t>(r)] * qc.at(r, c));
        jp.push_back(w[static_cast<std::size_t>(r)] * pc.at(r, c));
      }
    JointDist Jq({Alphabet(2), Alphabet(2)}, jq), Jp({Alphabet(2), Alphabet(2)}, jp);
    CHECK(weighted_divergence(qc, pc, w).value() ==
          doctest::Approx(kl_divergence(Jq, Jp).value()).epsilon(1e-10));
  }
}

TEST_CASE("f value") {
  // channel-consistent joint: f = -H(Y|X)
  Conditional w{2, 2, {0.9, 0.1, 0.3, 0.7}};
  std::vector<double> cells;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) cells.push_back(0.5 * w.at(x, y));
  JointDist q({Alphabet(2), Alphabet(2)}, cells);
  double hcond = 0.0;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) hcond -= 0.5 * w.at(x, y) * std::log(w.at(x, y));
  CHECK(f_value(q, w).value() == doctest::Approx(-hcond).epsilon(1e-12));

  // mass on a channel zero -> -inf
  Conditional wz{2, 2, {1.0, 0.0, 0.5, 0.5}};
  JointDist bad({Alphabet(2), Alphabet(2)}, {0.0, 0.5, 0.25, 0.25});
  CHECK(f_value(bad, wz).is_neg_inf());

  // uniform joint over the Z-channel marginal, against a direct cell sum
  Conditional zw{4, 2, {0.99, 0.01, 0.99, 0.01, 0.99, 0.01, 0.01, 0.99}};
  JointDist u = JointDist::uniform({Alphabet(2), Alphabet(2), Alphabet(2)});
  double direct = 0.0;
  for (std::size_t i = 0; i < 8; ++i) direct += 0.125 * std::log(zw.p[i]);
  CHECK(f_value(u, zw).value() == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("information identities hold on random joints") {
  Rng rng(1234);
  for (int t = 0; t < 50; ++t) {
    JointDist q = random_joint(rng, {Alphabet(2), Alphabet(3), Alphabet(2)});
    // I(A;B) = D(q_AB || q_A x q_B)
    JointDist qab = marginal(q, {0, 1});
    JointDist qa = marginal(q, {0});
    JointDist qb = marginal(q, {1});
    std::vector<double> prod;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 3; ++b)
        prod.push_back(qa[static_cast<std::size_t>(a)] * qb[static_cast<std::size_t>(b)]);
    JointDist ref({Alphabet(2), Alphabet(3)}, prod);
    CHECK(mutual_information(q, {0}, {1}) ==
          doctest::Approx(kl_divergence(qab, ref).value()).epsilon(1e-10));
    // chain rule I(A;B,C) = I(A;C) + I(A;B|C)
    CHECK(mutual_information(q, {0}, {1, 2}) ==
          doctest::Approx(mutual_information(q, {0}, {2}) +
                          conditional_mutual_information(q, {0}, {1}, {2}))
              .epsilon(1e-10));
    CHECK(kl_divergence(q, random_joint(rng, q.axes())).value() >= 0.0);
  }
}

TEST_CASE("f value is linear in the joint") {
  Rng rng(5);
  Conditional w{4, 2, {0.9, 0.1, 0.6, 0.4, 0.3, 0.7, 0.2, 0.8}};
  for (int t = 0; t < 20; ++t) {
    JointDist a = random_joint(rng, {Alphabet(2), Alphabet(2), Alphabet(2)});
    JointDist b = random_joint(rng, {Alphabet(2), Alphabet(2), Alphabet(2)});
    const double lam = rng.next_double();
    std::vector<double> mix;
    for (std::size_t i = 0; i < a.cells(); ++i)
      mix.push_back(lam * a[i] + (1 - lam) * b[i]);
    JointDist m({Alphabet(2), Alphabet(2), Alphabet(2)}, mix);
    CHECK(f_value(m, w).value() ==
          doctest::Approx(lam * f_value(a, w).value() +
                          (1 - lam) * f_value(b, w).value())
              .epsilon(1e-10));
  }
}
