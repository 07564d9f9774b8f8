#pragma once

#include <vector>

#include "ifcx/joint_dist.hpp"

namespace ifcx {

// Two-user DMC W(y1,y2 | x1,x2). Table layout is row-major over
// (x1, x2, y1, y2): each (x1,x2) row is a pmf over (y1,y2).
struct Dmc2User {
  Alphabet x1, x2, y1, y2;
  std::vector<double> table;

  std::size_t row_cells() const {
    return static_cast<std::size_t>(y1.size) * static_cast<std::size_t>(y2.size);
  }
  double at(int a1, int a2, int b1, int b2) const {
    const std::size_t row =
        static_cast<std::size_t>(a1) * static_cast<std::size_t>(x2.size) +
        static_cast<std::size_t>(a2);
    return table[row * row_cells() +
                 static_cast<std::size_t>(b1) * static_cast<std::size_t>(y2.size) +
                 static_cast<std::size_t>(b2)];
  }
};

// Single-receiver channel p(y | x1, x2), rows indexed by (x1, x2).
struct MarginalChannel {
  Alphabet x1, x2, y;
  std::vector<double> table;  // ((x1*|X2|)+x2)*|Y| + y

  double at(int a1, int a2, int b) const {
    const std::size_t row =
        static_cast<std::size_t>(a1) * static_cast<std::size_t>(x2.size) +
        static_cast<std::size_t>(a2);
    return table[row * static_cast<std::size_t>(y.size) + static_cast<std::size_t>(b)];
  }
  Conditional as_conditional() const {
    return Conditional{x1.size * x2.size, y.size, table};
  }
};

// Deterministic Han-Kobayashi maps g1: Z11 x Z12 -> X1, g2: Z21 x Z22 -> X2.
struct HkMaps {
  Alphabet z11, z12, z21, z22;
  std::vector<int> g1;  // z11 * |Z12| + z12 -> x1
  std::vector<int> g2;  // z21 * |Z22| + z22 -> x2

  int map1(int a, int b) const {
    return g1[static_cast<std::size_t>(a) * static_cast<std::size_t>(z12.size) +
              static_cast<std::size_t>(b)];
  }
  int map2(int a, int b) const {
    return g2[static_cast<std::size_t>(a) * static_cast<std::size_t>(z22.size) +
              static_cast<std::size_t>(b)];
  }
};

// Four-sender virtual channel p(y1 | z11, z12, z21, z22) obtained by
// composing the deterministic maps with a receiver-1 marginal channel.
struct VirtualChannel {
  HkMaps maps;
  MarginalChannel base;
  std::vector<double> table;  // (((z11*|Z12|+z12)*|Z21|+z21)*|Z22|+z22)*|Y|+y

  int rows() const {
    return maps.z11.size * maps.z12.size * maps.z21.size * maps.z22.size;
  }
  double at(int a, int b, int c, int d, int yy) const {
    std::size_t row = static_cast<std::size_t>(a);
    row = row * static_cast<std::size_t>(maps.z12.size) + static_cast<std::size_t>(b);
    row = row * static_cast<std::size_t>(maps.z21.size) + static_cast<std::size_t>(c);
    row = row * static_cast<std::size_t>(maps.z22.size) + static_cast<std::size_t>(d);
    return table[row * static_cast<std::size_t>(base.y.size) +
                 static_cast<std::size_t>(yy)];
  }
  Conditional as_conditional() const { return Conditional{rows(), base.y.size, table}; }
};

// Validates dimensions, nonnegativity and row sums (tolerance 1e-9, rows
// renormalized exactly once).
Dmc2User make_two_user_dmc(Alphabet x1, Alphabet x2, Alphabet y1, Alphabet y2,
                           std::vector<double> table);

// receiver 1 sums out y2; receiver 2 sums out y1 (output is then y2).
MarginalChannel marginal_channel(const Dmc2User& dmc, int receiver);

// Binary Z-channel: Y1 = X1*X2 xor Z with Z ~ Bern(p), Y2 = X2.
Dmc2User make_z_channel(double p);

VirtualChannel make_hk_virtual_channel(const MarginalChannel& m, HkMaps maps);

// Exchanges users: X1<->X2, Y1<->Y2.
Dmc2User swap_roles(const Dmc2User& dmc);

}  // namespace ifcx
