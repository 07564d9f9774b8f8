#pragma once

#include <array>
#include <vector>

#include "ifcx/channels.hpp"
#include "ifcx/ordinary.hpp"

namespace ifcx {

// Rate split of the two users into private/common parts:
// R1 = R11 + R12 (user 1 private + common), R2 = R21 + R22 (user 2 common +
// private). Receiver 1 decodes (M11, M12, M21) and averages over M22.
struct HkRates {
  double r11 = 0.0, r12 = 0.0, r21 = 0.0, r22 = 0.0;

  HkRates() = default;
  HkRates(double a, double b, double c, double d) : r11(a), r12(b), r21(c), r22(d) {
    for (double v : {a, b, c, d})
      if (!(v >= 0.0) || !std::isfinite(v))
        fail(ErrorCode::kInvalidArgument, "rates must be finite and >= 0");
  }
  double r1() const { return r11 + r12; }
  double r2() const { return r21 + r22; }
};

// The seven clip constants, one per nonempty subset of the decoded
// coordinates (Z1, Z2, Z3) in u order 1..7.
struct RateSums {
  std::array<double, 7> sums{};
  double operator[](int u) const { return sums[static_cast<std::size_t>(u - 1)]; }
};

RateSums rate_sums(const HkRates& rates);

constexpr int kTailU = 8;

ExtReal r_zero(const FiCloud& cloud, double r22);

// Inner minimization over the cloud anchored at q_tilde's (Z1..Z3, Y1)
// marginal, constrained to the set D(q_tilde, q). The interferer composition
// is read off q's Z4 marginal.
ExtReal e_one_hk(const JointDist& q_tilde, const JointDist& q, double r22,
                 const VirtualChannel& vch, GridSpec grid);

// Ehat_u^(v): v in 1..7 picks the error pattern (which of Z1..Z3 are
// redrawn), u picks the clip subset (must be a nonempty subset of the
// redrawn coordinates) or kTailU for the tail term without the MI part.
ExtReal e_hat_family(const JointDist& q, int v, int u, double r22,
                     const VirtualChannel& vch, GridSpec grid);

// E_HK^(v) = max{ max_u [Ehat_u^(v) - RS_u]_+ , Ehat_tail^(v) }.
ExtReal e_hk_u(const JointDist& q, int v, const HkRates& rates,
               const VirtualChannel& vch, GridSpec grid);

ExponentResult exponent_hk(const VirtualChannel& vch,
                           const std::vector<JointDist>& p_z, const HkRates& rates,
                           GridSpec grid, const ExponentOptions& opts = {});

std::vector<ExponentResult> exponent_hk_lattice(const VirtualChannel& vch,
                                                const std::vector<JointDist>& p_z,
                                                const std::vector<HkRates>& rates,
                                                GridSpec grid,
                                                const ExponentOptions& opts = {});

struct RegionHk {
  // Conditional MI bounds in u order: R11, R12, R21, R11+R12, R11+R21,
  // R12+R21, R11+R12+R21.
  std::array<double, 7> bounds{};

  bool contains(const HkRates& r) const {
    const RateSums rs = rate_sums(r);
    for (int u = 1; u <= 7; ++u)
      if (!(rs[u] < bounds[static_cast<std::size_t>(u - 1)])) return false;
    return true;
  }
};

RegionHk region_hk(const VirtualChannel& vch, const std::vector<JointDist>& p_z);

}  // namespace ifcx
