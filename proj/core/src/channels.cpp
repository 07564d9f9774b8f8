#include "ifcx/channels.hpp"

#include <cmath>

namespace ifcx {

namespace {

// Validate and renormalize each conditional row once.
void validate_rows(std::vector<double>& table, std::size_t rows, std::size_t cols,
                   const char* what) {
  for (std::size_t r = 0; r < rows; ++r) {
    double total = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      const double p = table[r * cols + c];
      if (p < 0.0) fail(ErrorCode::kNegativeProbability, what);
      total += p;
    }
    if (std::abs(total - 1.0) > kPmfTolerance)
      fail(ErrorCode::kRowSum, what);
    if (total != 1.0 && total > 0.0)
      for (std::size_t c = 0; c < cols; ++c) table[r * cols + c] /= total;
  }
}

}  // namespace

Dmc2User make_two_user_dmc(Alphabet x1, Alphabet x2, Alphabet y1, Alphabet y2,
                           std::vector<double> table) {
  const std::size_t rows =
      static_cast<std::size_t>(x1.size) * static_cast<std::size_t>(x2.size);
  const std::size_t cols =
      static_cast<std::size_t>(y1.size) * static_cast<std::size_t>(y2.size);
  if (table.size() != rows * cols)
    fail(ErrorCode::kDimensionMismatch, "dmc table size does not match alphabets");
  validate_rows(table, rows, cols, "dmc row invalid");
  return Dmc2User{x1, x2, y1, y2, std::move(table)};
}

MarginalChannel marginal_channel(const Dmc2User& dmc, int receiver) {
  if (receiver != 1 && receiver != 2)
    fail(ErrorCode::kInvalidArgument, "receiver must be 1 or 2");
  const int ny = receiver == 1 ? dmc.y1.size : dmc.y2.size;
  MarginalChannel m{dmc.x1, dmc.x2, Alphabet(ny), {}};
  m.table.assign(static_cast<std::size_t>(dmc.x1.size) *
                     static_cast<std::size_t>(dmc.x2.size) *
                     static_cast<std::size_t>(ny),
                 0.0);
  for (int a = 0; a < dmc.x1.size; ++a)
    for (int b = 0; b < dmc.x2.size; ++b)
      for (int c1 = 0; c1 < dmc.y1.size; ++c1)
        for (int c2 = 0; c2 < dmc.y2.size; ++c2) {
          const int out = receiver == 1 ? c1 : c2;
          const std::size_t row =
              static_cast<std::size_t>(a) * static_cast<std::size_t>(dmc.x2.size) +
              static_cast<std::size_t>(b);
          m.table[row * static_cast<std::size_t>(ny) + static_cast<std::size_t>(out)] +=
              dmc.at(a, b, c1, c2);
        }
  return m;
}

Dmc2User make_z_channel(double p) {
  if (p < 0.0 || p > 1.0)
    fail(ErrorCode::kPOutOfRange, "z-channel crossover must lie in [0,1]");
  const Alphabet bin(2);
  std::vector<double> table(16, 0.0);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c1 = 0; c1 < 2; ++c1)
        for (int c2 = 0; c2 < 2; ++c2) {
          if (c2 != b) continue;  // Y2 = X2
          const int noiseless = a * b;
          const double pr = (c1 == noiseless) ? 1.0 - p : p;
          table[(static_cast<std::size_t>(a) * 2 + static_cast<std::size_t>(b)) * 4 +
                static_cast<std::size_t>(c1) * 2 + static_cast<std::size_t>(c2)] = pr;
        }
  return make_two_user_dmc(bin, bin, bin, bin, std::move(table));
}

VirtualChannel make_hk_virtual_channel(const MarginalChannel& m, HkMaps maps) {
  const std::size_t g1_cells =
      static_cast<std::size_t>(maps.z11.size) * static_cast<std::size_t>(maps.z12.size);
  const std::size_t g2_cells =
      static_cast<std::size_t>(maps.z21.size) * static_cast<std::size_t>(maps.z22.size);
  if (maps.g1.size() != g1_cells || maps.g2.size() != g2_cells)
    fail(ErrorCode::kDimensionMismatch, "hk map table size mismatch");
  for (int v : maps.g1)
    if (v < 0 || v >= m.x1.size)
      fail(ErrorCode::kMapRangeMismatch, "g1 output outside channel input alphabet");
  for (int v : maps.g2)
    if (v < 0 || v >= m.x2.size)
      fail(ErrorCode::kMapRangeMismatch, "g2 output outside channel input alphabet");

  VirtualChannel vch{maps, m, {}};
  vch.table.assign(static_cast<std::size_t>(vch.rows()) *
                       static_cast<std::size_t>(m.y.size),
                   0.0);
  std::size_t row = 0;
  for (int a = 0; a < maps.z11.size; ++a)
    for (int b = 0; b < maps.z12.size; ++b)
      for (int c = 0; c < maps.z21.size; ++c)
        for (int d = 0; d < maps.z22.size; ++d, ++row) {
          const int xa = vch.maps.map1(a, b);
          const int xb = vch.maps.map2(c, d);
          for (int yy = 0; yy < m.y.size; ++yy)
            vch.table[row * static_cast<std::size_t>(m.y.size) +
                      static_cast<std::size_t>(yy)] = m.at(xa, xb, yy);
        }
  return vch;
}

Dmc2User swap_roles(const Dmc2User& dmc) {
  Dmc2User out{dmc.x2, dmc.x1, dmc.y2, dmc.y1, {}};
  out.table.assign(dmc.table.size(), 0.0);
  for (int a = 0; a < dmc.x1.size; ++a)
    for (int b = 0; b < dmc.x2.size; ++b)
      for (int c1 = 0; c1 < dmc.y1.size; ++c1)
        for (int c2 = 0; c2 < dmc.y2.size; ++c2) {
          const std::size_t row =
              static_cast<std::size_t>(b) * static_cast<std::size_t>(out.x2.size) +
              static_cast<std::size_t>(a);
          out.table[row * out.row_cells() +
                    static_cast<std::size_t>(c2) * static_cast<std::size_t>(out.y2.size) +
                    static_cast<std::size_t>(c1)] = dmc.at(a, b, c1, c2);
        }
  return out;
}

}  // namespace ifcx
