#include "ifcx/ordinary.hpp"

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

// (x1, y1) anchor of a joint over (x1, x2, y1).
std::vector<double> anchor_x1y1(const JointDist& q) {
  const int nx1 = q.axis_size(0), nx2 = q.axis_size(1), ny = q.axis_size(2);
  std::vector<double> a(static_cast<std::size_t>(nx1) * static_cast<std::size_t>(ny), 0.0);
  std::size_t idx = 0;
  for (int i = 0; i < nx1; ++i)
    for (int j = 0; j < nx2; ++j)
      for (int y = 0; y < ny; ++y, ++idx)
        a[static_cast<std::size_t>(i) * static_cast<std::size_t>(ny) +
          static_cast<std::size_t>(y)] += q[idx];
  return a;
}

GridSpec lower_grid(GridSpec g) {
  return GridSpec(std::max(2, g.m / 2), false);
}

ExponentResult assemble(const EngineResult& main, const EngineResult& other,
                        GridSpec grid, const std::vector<Alphabet>& axes) {
  ExponentResult res;
  res.grid = grid;
  res.value = main.value;
  res.d_floor = main.d_floor;
  if (!main.argmin_joint.empty())
    res.argmin_q = JointDist::from_raw_unchecked(axes, main.argmin_joint);
  for (const auto& pv : main.pattern_values) res.pattern_values.push_back(pv.value());
  res.bracket = {other.value.value(), main.value.value()};
  return res;
}

}  // namespace

ExtReal t_zero(const FiCloud& cloud, double r2) { return cloud.t_zero(r2); }

ExtReal e_one(const JointDist& q_tilde, const JointDist& q, double r2,
              const MarginalChannel& w, GridSpec grid, bool l_display_verbatim) {
  if (q_tilde.rank() != 3 || q.rank() != 3 || q_tilde.axes() != q.axes())
    fail(ErrorCode::kShapeMismatch, "e_one expects matching (X1,X2,Y1) joints");
  const std::vector<double> lw = log_table(w.table);
  const JointDist p_x2 = marginal(q, {1});

  const ExtReal f_t = f_value(q_tilde, w.as_conditional());
  const ExtReal f_q = f_value(q, w.as_conditional());

  const FiCloud cloud_q = build_fi_cloud(anchor_x1y1(q), w.x1.size, w.y.size,
                                         p_x2.probs(), lw, grid);
  const ExtReal t0 = cloud_q.t_zero(r2);

  const FiCloud cloud = build_fi_cloud(anchor_x1y1(q_tilde), w.x1.size, w.y.size,
                                       p_x2.probs(), lw, grid);
  return cloud.e_one(f_t, t0, f_q, r2, l_display_verbatim);
}

ExtReal e_hat(const JointDist& q, double r2, int which, const MarginalChannel& w,
              GridSpec grid) {
  if (which != 1 && which != 2)
    fail(ErrorCode::kInvalidArgument, "e_hat: which must be 1 or 2");
  const JointDist p1 = marginal(q, {0});
  const JointDist p2 = marginal(q, {1});
  EngineProblem prob = EngineProblem::from_ordinary(w, p1, p2);
  ExponentEngine engine(std::move(prob), ordinary_patterns(), grid);
  const auto mins = engine.inner_mins(q.probs(), 0, r2);
  return ExtReal(which == 1 ? mins.u_min[0] : mins.tail_min);
}

ExtReal e_star_inner(const JointDist& q, const RatePair& rates,
                     const MarginalChannel& w, GridSpec grid) {
  const JointDist p1 = marginal(q, {0});
  const JointDist p2 = marginal(q, {1});
  EngineProblem prob = EngineProblem::from_ordinary(w, p1, p2);
  ExponentEngine engine(std::move(prob), ordinary_patterns(), grid);
  const auto mins = engine.inner_mins(q.probs(), 0, rates.r2);
  const double ehat1 = mins.u_min[0];
  const double ehat2 = mins.tail_min;
  return ExtReal(std::max(clip_positive(ehat1 - rates.r1), ehat2));
}

std::vector<ExponentResult> exponent_ordinary_lattice(
    const Dmc2User& dmc, const JointDist& p_x1, const JointDist& p_x2,
    const std::vector<RatePair>& rates, GridSpec grid, const ExponentOptions& opts) {
  const MarginalChannel w = marginal_channel(dmc, 1);
  const std::vector<Alphabet> axes{dmc.x1, dmc.x2, dmc.y1};

  std::vector<RateRow> rows;
  rows.reserve(rates.size());
  for (const auto& r : rates) rows.push_back(RateRow{r.r2, {r.r1}});

  const GridSpec main_grid = grid.refine ? GridSpec(2 * grid.m, false)
                                         : GridSpec(grid.m, false);
  const GridSpec other_grid = grid.refine ? GridSpec(grid.m, false) : lower_grid(grid);

  EngineProblem prob = EngineProblem::from_ordinary(w, p_x1, p_x2);
  ExponentEngine main_engine(prob, ordinary_patterns(), main_grid,
                             opts.t0_unconstrained_x2, opts.threads,
                             opts.l_display_verbatim);
  const auto main_res = main_engine.evaluate(rows);

  std::vector<EngineResult> other_res;
  if (other_grid.m != main_grid.m) {
    ExponentEngine other_engine(prob, ordinary_patterns(), other_grid,
                                opts.t0_unconstrained_x2, opts.threads,
                                opts.l_display_verbatim);
    other_res = other_engine.evaluate(rows);
  } else {
    other_res = main_res;
  }

  std::vector<ExponentResult> out;
  out.reserve(rates.size());
  for (std::size_t i = 0; i < rates.size(); ++i)
    out.push_back(assemble(main_res[i], other_res[i], main_grid, axes));
  return out;
}

ExponentResult exponent_ordinary(const Dmc2User& dmc, const JointDist& p_x1,
                                 const JointDist& p_x2, const RatePair& rates,
                                 GridSpec grid, const ExponentOptions& opts) {
  return exponent_ordinary_lattice(dmc, p_x1, p_x2, {rates}, grid, opts)[0];
}

RegionOrdinary region_ordinary(const Dmc2User& dmc, const JointDist& p_x1,
                               const JointDist& p_x2) {
  const MarginalChannel w = marginal_channel(dmc, 1);
  // Joint P_{X1} x P_{X2} x W over (x1, x2, y1).
  std::vector<double> probs;
  probs.reserve(static_cast<std::size_t>(w.x1.size) *
                static_cast<std::size_t>(w.x2.size) * static_cast<std::size_t>(w.y.size));
  for (int i = 0; i < w.x1.size; ++i)
    for (int j = 0; j < w.x2.size; ++j)
      for (int y = 0; y < w.y.size; ++y)
        probs.push_back(p_x1[static_cast<std::size_t>(i)] *
                        p_x2[static_cast<std::size_t>(j)] * w.at(i, j, y));
  const JointDist q = JointDist::from_raw_unchecked({dmc.x1, dmc.x2, dmc.y1},
                                                    std::move(probs));
  RegionOrdinary reg;
  reg.i_x1_y1 = mutual_information(q, {0}, {2});
  reg.i_x1_y1_given_x2 = conditional_mutual_information(q, {0}, {2}, {1});
  reg.i_x1x2_y1 = mutual_information(q, {0, 1}, {2});
  return reg;
}

}  // namespace ifcx
