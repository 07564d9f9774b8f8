#include <doctest.h>

#include <cmath>

#include "ifcx/channels.hpp"
#include "ifcx/verification.hpp"

using namespace ifcx;

namespace {

Dmc2User random_dmc(Rng& rng) {
  const Alphabet bin(2);
  std::vector<double> table;
  for (int row = 0; row < 4; ++row) {
    double cells[4], s = 0.0;
    for (double& c : cells) {
      c = 0.05 + rng.next_double();
      s += c;
    }
    for (double c : cells) table.push_back(c / s);
  }
  return make_two_user_dmc(bin, bin, bin, bin, std::move(table));
}

}  // namespace

TEST_CASE("make_two_user_dmc validation") {
  const Alphabet bin(2);
  // product of two identity channels
  std::vector<double> table(16, 0.0);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      table[static_cast<std::size_t>((a * 2 + b) * 4 + a * 2 + b)] = 1.0;
  CHECK_NOTHROW(make_two_user_dmc(bin, bin, bin, bin, table));

  auto bad = table;
  bad[0] = 0.98;  // row sums to 0.98
  bad[1] = 0.0;
  try {
    make_two_user_dmc(bin, bin, bin, bin, bad);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kRowSum);
  }

  try {
    make_two_user_dmc(bin, bin, bin, bin, std::vector<double>(12, 0.1));
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDimensionMismatch);
  }

  auto neg = table;
  neg[0] = -0.5;
  neg[1] = 1.5;
  CHECK_THROWS_AS(make_two_user_dmc(bin, bin, bin, bin, neg), Error);

  // z-channel table round-trips through the constructor
  const Dmc2User z = make_z_channel(0.01);
  CHECK_NOTHROW(make_two_user_dmc(z.x1, z.x2, z.y1, z.y2, z.table));
}

TEST_CASE("z channel law") {
  CHECK_THROWS_AS(make_z_channel(-0.1), Error);
  CHECK_THROWS_AS(make_z_channel(1.1), Error);

  const Dmc2User z0 = make_z_channel(0.0);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      CHECK(z0.at(a, b, a * b, b) == doctest::Approx(1.0));

  const Dmc2User z = make_z_channel(0.01);
  const MarginalChannel w = marginal_channel(z, 1);
  CHECK(w.at(0, 0, 0) == doctest::Approx(0.99));
  CHECK(w.at(0, 1, 0) == doctest::Approx(0.99));
  CHECK(w.at(1, 0, 0) == doctest::Approx(0.99));
  CHECK(w.at(1, 1, 1) == doctest::Approx(0.99));
  const MarginalChannel w2 = marginal_channel(z, 2);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) CHECK(w2.at(a, b, b) == doctest::Approx(1.0));

  const Dmc2User zh = make_z_channel(0.5);
  const MarginalChannel wh = marginal_channel(zh, 1);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) CHECK(wh.at(a, b, 0) == doctest::Approx(0.5));
}

TEST_CASE("marginal channel sums an independent axis exactly") {
  // Y2 independent of everything: marginal over receiver 1 recovers the Y1 part.
  const Alphabet bin(2);
  std::vector<double> y1part = {0.8, 0.2, 0.6, 0.4, 0.3, 0.7, 0.1, 0.9};
  std::vector<double> table;
  for (int row = 0; row < 4; ++row)
    for (int c1 = 0; c1 < 2; ++c1)
      for (int c2 = 0; c2 < 2; ++c2)
        table.push_back(y1part[static_cast<std::size_t>(row * 2 + c1)] * 0.5);
  const Dmc2User dmc = make_two_user_dmc(bin, bin, bin, bin, std::move(table));
  const MarginalChannel w = marginal_channel(dmc, 1);
  for (std::size_t i = 0; i < y1part.size(); ++i)
    CHECK(w.table[i] == doctest::Approx(y1part[i]).epsilon(1e-14));

  Rng rng(3);
  for (int t = 0; t < 10; ++t) {
    const MarginalChannel m = marginal_channel(random_dmc(rng), 1);
    for (int row = 0; row < 4; ++row) {
      double s = 0.0;
      for (int y = 0; y < 2; ++y) s += m.table[static_cast<std::size_t>(row * 2 + y)];
      CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("marginal channel commutes with channel mixtures") {
  Rng rng(9);
  for (int t = 0; t < 10; ++t) {
    const Dmc2User a = random_dmc(rng), b = random_dmc(rng);
    const double lam = rng.next_double();
    std::vector<double> mix(a.table.size());
    for (std::size_t i = 0; i < mix.size(); ++i)
      mix[i] = lam * a.table[i] + (1 - lam) * b.table[i];
    const Dmc2User m = make_two_user_dmc(a.x1, a.x2, a.y1, a.y2, mix);
    const MarginalChannel wm = marginal_channel(m, 1);
    const MarginalChannel wa = marginal_channel(a, 1);
    const MarginalChannel wb = marginal_channel(b, 1);
    for (std::size_t i = 0; i < wm.table.size(); ++i)
      CHECK(wm.table[i] ==
            doctest::Approx(lam * wa.table[i] + (1 - lam) * wb.table[i]).epsilon(1e-12));
  }
}

TEST_CASE("hk virtual channel") {
  const Dmc2User z = make_z_channel(0.01);
  const MarginalChannel w = marginal_channel(z, 1);

  // projections onto the first argument ignore z2 and z4
  HkMaps proj{Alphabet(2), Alphabet(2), Alphabet(2), Alphabet(2),
              {0, 0, 1, 1}, {0, 0, 1, 1}};
  const VirtualChannel vp = make_hk_virtual_channel(w, proj);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d)
          for (int y = 0; y < 2; ++y)
            CHECK(vp.at(a, b, c, d, y) == doctest::Approx(w.at(a, c, y)));

  // xor and and maps, rows sum to one and match hand composition
  HkMaps maps{Alphabet(2), Alphabet(2), Alphabet(2), Alphabet(2),
              {0, 1, 1, 0}, {0, 0, 0, 1}};
  const VirtualChannel v = make_hk_virtual_channel(w, maps);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d) {
          double s = 0.0;
          for (int y = 0; y < 2; ++y) {
            CHECK(v.at(a, b, c, d, y) == doctest::Approx(w.at(a ^ b, c & d, y)));
            s += v.at(a, b, c, d, y);
          }
          CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
        }

  // singleton second inputs collapse onto the marginal channel
  HkMaps ident{Alphabet(2), Alphabet(1), Alphabet(2), Alphabet(1), {0, 1}, {0, 1}};
  const VirtualChannel vi = make_hk_virtual_channel(w, ident);
  for (int a = 0; a < 2; ++a)
    for (int c = 0; c < 2; ++c)
      for (int y = 0; y < 2; ++y)
        CHECK(vi.at(a, 0, c, 0, y) == doctest::Approx(w.at(a, c, y)));

  HkMaps bad{Alphabet(2), Alphabet(2), Alphabet(2), Alphabet(2),
             {0, 1, 2, 0}, {0, 0, 0, 1}};
  CHECK_THROWS_AS(make_hk_virtual_channel(w, bad), Error);
}

TEST_CASE("swap roles") {
  Rng rng(17);
  for (int t = 0; t < 10; ++t) {
    const Dmc2User dmc = random_dmc(rng);
    const Dmc2User twice = swap_roles(swap_roles(dmc));
    for (std::size_t i = 0; i < dmc.table.size(); ++i)
      CHECK(twice.table[i] == dmc.table[i]);  // exact involution
  }

  // receiver-1 marginal of the swapped z channel is the original Y2 law
  const Dmc2User z = make_z_channel(0.01);
  const Dmc2User s = swap_roles(z);
  const MarginalChannel m = marginal_channel(s, 1);
  for (int a = 0; a < 2; ++a)     // swapped x1 = original x2
    for (int b = 0; b < 2; ++b) {
      double direct[2] = {0.0, 0.0};
      for (int y1 = 0; y1 < 2; ++y1)
        for (int y2 = 0; y2 < 2; ++y2) direct[y2] += z.at(b, a, y1, y2);
      for (int y = 0; y < 2; ++y) CHECK(m.at(a, b, y) == doctest::Approx(direct[y]));
    }
}
