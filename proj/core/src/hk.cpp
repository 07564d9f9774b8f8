#include "ifcx/hk.hpp"

#include <algorithm>
#include <cmath>

#include "ifcx/infomeasures.hpp"

namespace ifcx {

namespace {

std::vector<double> log_table(const std::vector<double>& w) {
  std::vector<double> lw(w.size());
  for (std::size_t i = 0; i < w.size(); ++i)
    lw[i] = w[i] > 0.0 ? std::log(w[i]) : -kInf;
  return lw;
}

void check_hk_joint(const JointDist& q, const VirtualChannel& vch) {
  if (q.rank() != 5 || q.axis_size(0) != vch.maps.z11.size ||
      q.axis_size(1) != vch.maps.z12.size || q.axis_size(2) != vch.maps.z21.size ||
      q.axis_size(3) != vch.maps.z22.size || q.axis_size(4) != vch.base.y.size)
    fail(ErrorCode::kShapeMismatch, "joint does not match the virtual channel");
}

// (z1,z2,z3,y) anchor of a joint over (z1,z2,z3,z4,y).
std::vector<double> anchor_z123y(const JointDist& q) {
  const int n1 = q.axis_size(0), n2 = q.axis_size(1), n3 = q.axis_size(2),
            n4 = q.axis_size(3), ny = q.axis_size(4);
  std::vector<double> a(
      static_cast<std::size_t>(n1) * static_cast<std::size_t>(n2) *
          static_cast<std::size_t>(n3) * static_cast<std::size_t>(ny),
      0.0);
  std::size_t idx = 0;
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n2; ++j)
      for (int k = 0; k < n3; ++k)
        for (int l = 0; l < n4; ++l)
          for (int y = 0; y < ny; ++y, ++idx) {
            const std::size_t slot =
                ((static_cast<std::size_t>(i) * static_cast<std::size_t>(n2) +
                  static_cast<std::size_t>(j)) *
                     static_cast<std::size_t>(n3) +
                 static_cast<std::size_t>(k)) *
                    static_cast<std::size_t>(ny) +
                static_cast<std::size_t>(y);
            a[slot] += q[idx];
          }
  return a;
}

ExponentEngine make_hk_engine(const JointDist& q, const VirtualChannel& vch,
                              GridSpec grid) {
  std::vector<JointDist> pz;
  for (int axis = 0; axis < 4; ++axis) pz.push_back(marginal(q, {axis}));
  EngineProblem prob = EngineProblem::from_hk(vch, pz);
  return ExponentEngine(std::move(prob), hk_patterns(), grid);
}

int u_position(int v, int u) {
  const auto& subs = u_subsets();
  const auto& redrawn = subs[static_cast<std::size_t>(v - 1)];
  int pos = 0;
  for (std::size_t uu = 0; uu < subs.size(); ++uu) {
    bool contained = true;
    for (int c : subs[uu])
      if (std::find(redrawn.begin(), redrawn.end(), c) == redrawn.end()) {
        contained = false;
        break;
      }
    if (!contained) continue;
    if (static_cast<int>(uu) == u - 1) return pos;
    ++pos;
  }
  return -1;
}

}  // namespace

RateSums rate_sums(const HkRates& r) {
  RateSums rs;
  rs.sums = {r.r11,
             r.r12,
             r.r21,
             r.r11 + r.r12,
             r.r11 + r.r21,
             r.r12 + r.r21,
             r.r11 + r.r12 + r.r21};
  return rs;
}

ExtReal r_zero(const FiCloud& cloud, double r22) { return cloud.t_zero(r22); }

ExtReal e_one_hk(const JointDist& q_tilde, const JointDist& q, double r22,
                 const VirtualChannel& vch, GridSpec grid) {
  check_hk_joint(q_tilde, vch);
  check_hk_joint(q, vch);
  const std::vector<double> lw = log_table(vch.table);
  const JointDist p_z4 = marginal(q, {3});
  const int a_comp = vch.maps.z11.size * vch.maps.z12.size * vch.maps.z21.size;

  const ExtReal f_t = f_value(q_tilde, vch.as_conditional());
  const ExtReal f_q = f_value(q, vch.as_conditional());

  const FiCloud cloud_q = build_fi_cloud(anchor_z123y(q), a_comp, vch.base.y.size,
                                         p_z4.probs(), lw, grid);
  const ExtReal r0 = cloud_q.t_zero(r22);

  const FiCloud cloud = build_fi_cloud(anchor_z123y(q_tilde), a_comp,
                                       vch.base.y.size, p_z4.probs(), lw, grid);
  return cloud.e_one(f_t, r0, f_q, r22);
}

ExtReal e_hat_family(const JointDist& q, int v, int u, double r22,
                     const VirtualChannel& vch, GridSpec grid) {
  check_hk_joint(q, vch);
  if (v < 1 || v > 7) fail(ErrorCode::kIllegalUvPair, "v must lie in 1..7");
  int pos = -1;
  if (u != kTailU) {
    pos = u_position(v, u);
    if (pos < 0)
      fail(ErrorCode::kIllegalUvPair,
           "u must name a nonempty subset of the redrawn coordinates");
  }
  ExponentEngine engine = make_hk_engine(q, vch, grid);
  const auto mins = engine.inner_mins(q.probs(), static_cast<std::size_t>(v - 1), r22);
  return ExtReal(u == kTailU ? mins.tail_min : mins.u_min[static_cast<std::size_t>(pos)]);
}

ExtReal e_hk_u(const JointDist& q, int v, const HkRates& rates,
               const VirtualChannel& vch, GridSpec grid) {
  check_hk_joint(q, vch);
  if (v < 1 || v > 7) fail(ErrorCode::kIllegalUvPair, "v must lie in 1..7");
  ExponentEngine engine = make_hk_engine(q, vch, grid);
  const auto mins =
      engine.inner_mins(q.probs(), static_cast<std::size_t>(v - 1), rates.r22);
  const RateSums rs = rate_sums(rates);

  const auto& pats = hk_patterns();
  const auto& legal = pats[static_cast<std::size_t>(v - 1)].legal_u;
  double best = mins.tail_min;
  for (std::size_t i = 0; i < legal.size(); ++i) {
    const double clipped = clip_positive(mins.u_min[i] - rs[legal[i] + 1]);
    if (clipped > best) best = clipped;
  }
  return ExtReal(best);
}

std::vector<ExponentResult> exponent_hk_lattice(const VirtualChannel& vch,
                                                const std::vector<JointDist>& p_z,
                                                const std::vector<HkRates>& rates,
                                                GridSpec grid,
                                                const ExponentOptions& opts) {
  const std::vector<Alphabet> axes{vch.maps.z11, vch.maps.z12, vch.maps.z21,
                                   vch.maps.z22, vch.base.y};
  std::vector<RateRow> rows;
  rows.reserve(rates.size());
  for (const auto& r : rates) {
    const RateSums rs = rate_sums(r);
    rows.push_back(RateRow{r.r22, std::vector<double>(rs.sums.begin(), rs.sums.end())});
  }

  const GridSpec main_grid = grid.refine ? GridSpec(2 * grid.m, false)
                                         : GridSpec(grid.m, false);
  const GridSpec other_grid =
      grid.refine ? GridSpec(grid.m, false) : GridSpec(std::max(2, grid.m / 2), false);

  EngineProblem prob = EngineProblem::from_hk(vch, p_z);
  ExponentEngine main_engine(prob, hk_patterns(), main_grid,
                             opts.t0_unconstrained_x2, opts.threads,
                             opts.l_display_verbatim);
  const auto main_res = main_engine.evaluate(rows);

  std::vector<EngineResult> other_res;
  if (other_grid.m != main_grid.m) {
    ExponentEngine other_engine(prob, hk_patterns(), other_grid,
                                opts.t0_unconstrained_x2, opts.threads,
                                opts.l_display_verbatim);
    other_res = other_engine.evaluate(rows);
  } else {
    other_res = main_res;
  }

  std::vector<ExponentResult> out;
  out.reserve(rates.size());
  for (std::size_t i = 0; i < rates.size(); ++i) {
    ExponentResult res;
    res.grid = main_grid;
    res.value = main_res[i].value;
    res.d_floor = main_res[i].d_floor;
    if (!main_res[i].argmin_joint.empty())
      res.argmin_q = JointDist::from_raw_unchecked(axes, main_res[i].argmin_joint);
    for (const auto& pv : main_res[i].pattern_values)
      res.pattern_values.push_back(pv.value());
    res.bracket = {other_res[i].value.value(), main_res[i].value.value()};
    out.push_back(std::move(res));
  }
  return out;
}

ExponentResult exponent_hk(const VirtualChannel& vch,
                           const std::vector<JointDist>& p_z, const HkRates& rates,
                           GridSpec grid, const ExponentOptions& opts) {
  return exponent_hk_lattice(vch, p_z, {rates}, grid, opts)[0];
}

RegionHk region_hk(const VirtualChannel& vch, const std::vector<JointDist>& p_z) {
  if (p_z.size() != 4) fail(ErrorCode::kDimensionMismatch, "need four z pmfs");
  const int n1 = vch.maps.z11.size, n2 = vch.maps.z12.size, n3 = vch.maps.z21.size,
            n4 = vch.maps.z22.size, ny = vch.base.y.size;
  std::vector<double> probs;
  probs.reserve(static_cast<std::size_t>(n1 * n2 * n3 * n4 * ny));
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n2; ++j)
      for (int k = 0; k < n3; ++k)
        for (int l = 0; l < n4; ++l)
          for (int y = 0; y < ny; ++y)
            probs.push_back(p_z[0][static_cast<std::size_t>(i)] *
                            p_z[1][static_cast<std::size_t>(j)] *
                            p_z[2][static_cast<std::size_t>(k)] *
                            p_z[3][static_cast<std::size_t>(l)] * vch.at(i, j, k, l, y));
  const JointDist q = JointDist::from_raw_unchecked(
      {vch.maps.z11, vch.maps.z12, vch.maps.z21, vch.maps.z22, vch.base.y},
      std::move(probs));

  RegionHk reg;
  const auto& subs = u_subsets();
  for (std::size_t u = 0; u < subs.size(); ++u) {
    std::vector<int> cond;
    for (int c = 0; c < 3; ++c)
      if (std::find(subs[u].begin(), subs[u].end(), c) == subs[u].end())
        cond.push_back(c);
    reg.bounds[u] = conditional_mutual_information(q, subs[u], {4}, cond);
  }
  return reg;
}

}  // namespace ifcx
