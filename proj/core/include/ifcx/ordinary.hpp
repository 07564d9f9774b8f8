#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "ifcx/channels.hpp"
#include "ifcx/exponent_engine.hpp"
#include "ifcx/simplexopt.hpp"

namespace ifcx {

struct RatePair {
  double r1 = 0.0;  // nats per channel use
  double r2 = 0.0;

  RatePair() = default;
  RatePair(double a, double b) : r1(a), r2(b) {
    if (!(r1 >= 0.0) || !(r2 >= 0.0) || !std::isfinite(r1) || !std::isfinite(r2))
      fail(ErrorCode::kInvalidArgument, "rates must be finite and >= 0");
  }
};

struct ExponentResult {
  ExtReal value = ExtReal(0.0);
  std::optional<JointDist> argmin_q;       // present iff value is finite
  GridSpec grid;
  std::pair<double, double> bracket{0.0, 0.0};  // (coarser-grid value, value)
  double d_floor = 0.0;  // smallest divergence any outer grid point attains
  std::vector<double> pattern_values;      // per error pattern at the argmin

  double bracket_width() const {
    if (!std::isfinite(bracket.first) || !std::isfinite(bracket.second)) return 0.0;
    return std::abs(bracket.first - bracket.second);
  }
};

struct RegionOrdinary {
  double i_x1_y1 = 0.0;
  double i_x1_y1_given_x2 = 0.0;
  double i_x1x2_y1 = 0.0;

  bool contains(const RatePair& r) const {
    return r.r1 < i_x1_y1 ||
           (r.r1 + r.r2 < i_x1x2_y1 && r.r1 < i_x1_y1_given_x2);
  }
};

struct ExponentOptions {
  int threads = 1;
  bool t0_unconstrained_x2 = false;   // drop the X2 pin inside t0's cloud
  bool l_display_verbatim = false;    // suppress the probability-one rule in e_one
};

// t0(Q_{X1Y1}) = r2 + max{f - I : I <= r2} over the cloud.
ExtReal t_zero(const FiCloud& cloud, double r2);

// Inner minimization over the cloud anchored at q_tilde's (X1,Y1) marginal,
// constrained to the set L(q_tilde, q); +inf when the set is empty. The
// interferer composition is read off q's X2 marginal.
ExtReal e_one(const JointDist& q_tilde, const JointDist& q, double r2,
              const MarginalChannel& w, GridSpec grid,
              bool l_display_verbatim = false);

// which = 1 adds the I(X1; X2,Y1) term, which = 2 omits it.
ExtReal e_hat(const JointDist& q, double r2, int which, const MarginalChannel& w,
              GridSpec grid);

ExtReal e_star_inner(const JointDist& q, const RatePair& rates,
                     const MarginalChannel& w, GridSpec grid);

ExponentResult exponent_ordinary(const Dmc2User& dmc, const JointDist& p_x1,
                                 const JointDist& p_x2, const RatePair& rates,
                                 GridSpec grid, const ExponentOptions& opts = {});

// One outer-grid pass shared by every rate point; clouds and scans are not
// repeated per point.
std::vector<ExponentResult> exponent_ordinary_lattice(
    const Dmc2User& dmc, const JointDist& p_x1, const JointDist& p_x2,
    const std::vector<RatePair>& rates, GridSpec grid,
    const ExponentOptions& opts = {});

RegionOrdinary region_ordinary(const Dmc2User& dmc, const JointDist& p_x1,
                               const JointDist& p_x2);

}  // namespace ifcx
