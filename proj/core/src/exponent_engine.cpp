#include "ifcx/exponent_engine.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <thread>

#include "ifcx/infomeasures.hpp"

namespace ifcx {

namespace {

// Marginalization descriptor: joint cell -> slot of the kept-axes marginal.
struct MarginalMap {
  std::vector<std::uint32_t> slot;
  std::size_t slots = 1;
};

MarginalMap build_marginal_map(const std::vector<int>& sizes,
                               const std::vector<int>& keep) {
  const int rank = static_cast<int>(sizes.size());
  std::vector<std::size_t> stride(static_cast<std::size_t>(rank), 1);
  for (int i = rank - 2; i >= 0; --i)
    stride[static_cast<std::size_t>(i)] =
        stride[static_cast<std::size_t>(i + 1)] *
        static_cast<std::size_t>(sizes[static_cast<std::size_t>(i + 1)]);
  std::size_t cells = 1;
  for (int s : sizes) cells *= static_cast<std::size_t>(s);

  MarginalMap m;
  m.slot.assign(cells, 0);
  m.slots = 1;
  for (int a : keep) m.slots *= static_cast<std::size_t>(sizes[static_cast<std::size_t>(a)]);
  for (std::size_t idx = 0; idx < cells; ++idx) {
    std::size_t out = 0;
    for (int a : keep) {
      const std::size_t coord = (idx / stride[static_cast<std::size_t>(a)]) %
                                static_cast<std::size_t>(sizes[static_cast<std::size_t>(a)]);
      out = out * static_cast<std::size_t>(sizes[static_cast<std::size_t>(a)]) + coord;
    }
    m.slot[idx] = static_cast<std::uint32_t>(out);
  }
  return m;
}

double entropy_of(const MarginalMap& m, std::span<const double> joint,
                  std::vector<double>& scratch) {
  if (m.slots == 1) return 0.0;  // H over an empty axis set
  scratch.assign(m.slots, 0.0);
  for (std::size_t i = 0; i < joint.size(); ++i) scratch[m.slot[i]] += joint[i];
  return entropy_span(scratch);
}

}  // namespace

std::vector<double> EngineProblem::pa_joint() const {
  std::vector<double> out{1.0};
  for (const auto& p : pa) {
    std::vector<double> next(out.size() * p.size());
    for (std::size_t i = 0; i < out.size(); ++i)
      for (std::size_t j = 0; j < p.size(); ++j) next[i * p.size() + j] = out[i] * p[j];
    out = std::move(next);
  }
  return out;
}

std::vector<int> EngineProblem::axis_sizes() const {
  std::vector<int> s = a_sizes;
  s.push_back(b_size);
  s.push_back(y_size);
  return s;
}

EngineProblem EngineProblem::from_ordinary(const MarginalChannel& w,
                                           const JointDist& p1, const JointDist& p2) {
  EngineProblem prob;
  prob.a_sizes = {w.x1.size};
  prob.b_size = w.x2.size;
  prob.y_size = w.y.size;
  prob.pa = {p1.probs()};
  prob.pb = p2.probs();
  prob.w = w.table;
  prob.log_w.resize(prob.w.size());
  for (std::size_t i = 0; i < prob.w.size(); ++i)
    prob.log_w[i] = prob.w[i] > 0.0 ? std::log(prob.w[i]) : -kInf;
  if (p1.cells() != static_cast<std::size_t>(w.x1.size) ||
      p2.cells() != static_cast<std::size_t>(w.x2.size))
    fail(ErrorCode::kDimensionMismatch, "input pmf does not match channel alphabet");
  return prob;
}

EngineProblem EngineProblem::from_hk(const VirtualChannel& vch,
                                     const std::vector<JointDist>& pz) {
  if (pz.size() != 4)
    fail(ErrorCode::kDimensionMismatch, "hk problem needs four input pmfs");
  EngineProblem prob;
  prob.a_sizes = {vch.maps.z11.size, vch.maps.z12.size, vch.maps.z21.size};
  prob.b_size = vch.maps.z22.size;
  prob.y_size = vch.base.y.size;
  prob.pa = {pz[0].probs(), pz[1].probs(), pz[2].probs()};
  prob.pb = pz[3].probs();
  const int sizes[4] = {vch.maps.z11.size, vch.maps.z12.size, vch.maps.z21.size,
                        vch.maps.z22.size};
  for (int k = 0; k < 4; ++k)
    if (pz[static_cast<std::size_t>(k)].cells() != static_cast<std::size_t>(sizes[k]))
      fail(ErrorCode::kDimensionMismatch, "input pmf does not match z alphabet");
  prob.w = vch.table;
  prob.log_w.resize(prob.w.size());
  for (std::size_t i = 0; i < prob.w.size(); ++i)
    prob.log_w[i] = prob.w[i] > 0.0 ? std::log(prob.w[i]) : -kInf;
  return prob;
}

const std::vector<std::vector<int>>& u_subsets() {
  static const std::vector<std::vector<int>> subsets = {
      {0}, {1}, {2}, {0, 1}, {0, 2}, {1, 2}, {0, 1, 2}};
  return subsets;
}

std::vector<ErrorPattern> ordinary_patterns() {
  // Single pattern: the competitor redraws the lone first-user coordinate.
  return {ErrorPattern{{0}, {0}}};
}

std::vector<ErrorPattern> hk_patterns() {
  // v = 1..7 in subset order; legal u are the nonempty subsets of the
  // redrawn coordinates.
  std::vector<ErrorPattern> pats;
  const auto& subs = u_subsets();
  for (std::size_t v = 0; v < subs.size(); ++v) {
    ErrorPattern p;
    p.redrawn = subs[v];
    for (std::size_t u = 0; u < subs.size(); ++u) {
      bool contained = true;
      for (int c : subs[u])
        if (std::find(p.redrawn.begin(), p.redrawn.end(), c) == p.redrawn.end()) {
          contained = false;
          break;
        }
      if (contained) p.legal_u.push_back(static_cast<int>(u));
    }
    pats.push_back(std::move(p));
  }
  return pats;
}

struct ExponentEngine::PatternPlan {
  ErrorPattern spec;
  bool vacuous = false;
  std::vector<int> fixed_axes;                 // complement coords + b + y
  MarginalMap fixed_map;                       // joint -> fixed marginal
  std::vector<MarginalConstraint> extra;       // one per redrawn coordinate
  MarginalMap redrawn_map;                     // joint -> Z_V marginal
  std::vector<MarginalMap> comp_map;           // per legal u: Z_{V \ U}
  std::vector<MarginalMap> not_u_map;          // per legal u: everything but Z_U
};

ExponentEngine::ExponentEngine(EngineProblem problem,
                               std::vector<ErrorPattern> patterns, GridSpec grid,
                               bool t0_unconstrained_b, int threads,
                               bool l_display_verbatim)
    : problem_(std::move(problem)),
      patterns_(std::move(patterns)),
      grid_(grid),
      t0_unconstrained_b_(t0_unconstrained_b),
      threads_(std::max(1, threads)),
      l_display_verbatim_(l_display_verbatim) {
  const std::vector<int> sizes = problem_.axis_sizes();
  const int n_a = static_cast<int>(problem_.a_sizes.size());
  const int b_axis = n_a;
  const int y_axis = n_a + 1;
  const auto& subs = u_subsets();

  for (const auto& pat : patterns_) {
    auto plan = std::make_shared<PatternPlan>();
    plan->spec = pat;
    for (int c : pat.redrawn)
      if (problem_.a_sizes[static_cast<std::size_t>(c)] == 1) plan->vacuous = true;

    std::vector<bool> redrawn(static_cast<std::size_t>(n_a), false);
    for (int c : pat.redrawn) redrawn[static_cast<std::size_t>(c)] = true;
    for (int c = 0; c < n_a; ++c)
      if (!redrawn[static_cast<std::size_t>(c)]) plan->fixed_axes.push_back(c);
    plan->fixed_axes.push_back(b_axis);
    plan->fixed_axes.push_back(y_axis);
    plan->fixed_map = build_marginal_map(sizes, plan->fixed_axes);

    for (int c : pat.redrawn)
      plan->extra.push_back(MarginalConstraint{{c}, problem_.pa[static_cast<std::size_t>(c)]});

    plan->redrawn_map = build_marginal_map(sizes, pat.redrawn);
    for (int u : pat.legal_u) {
      std::vector<int> comp;
      for (int c : pat.redrawn)
        if (std::find(subs[static_cast<std::size_t>(u)].begin(),
                      subs[static_cast<std::size_t>(u)].end(),
                      c) == subs[static_cast<std::size_t>(u)].end())
          comp.push_back(c);
      std::vector<int> not_u;
      for (int c = 0; c < n_a; ++c)
        if (std::find(subs[static_cast<std::size_t>(u)].begin(),
                      subs[static_cast<std::size_t>(u)].end(),
                      c) == subs[static_cast<std::size_t>(u)].end())
          not_u.push_back(c);
      not_u.push_back(b_axis);
      not_u.push_back(y_axis);
      plan->comp_map.push_back(build_marginal_map(sizes, comp));
      plan->not_u_map.push_back(build_marginal_map(sizes, not_u));
    }
    plans_.push_back(std::move(plan));
  }
}

// Shared per-outer-point preamble: f(Q), the t0 thresholds per interferer
// rate, and a cloud store scoped to this outer point.
struct ExponentEngine::OuterContext {
  MarginalMap anchor_map;
  ExtReal f_q = ExtReal(0.0);
  std::vector<ExtReal> t0;
  std::unique_ptr<CloudStore> store;
};

ExponentEngine::OuterContext ExponentEngine::make_context(
    const std::vector<double>& joint, const std::vector<double>& rb_values) const {
  const std::vector<int> sizes = problem_.axis_sizes();
  const int n_a = static_cast<int>(problem_.a_sizes.size());
  const int a_comp = problem_.a_comp();

  OuterContext ctx;
  std::vector<int> anchor_axes(static_cast<std::size_t>(n_a));
  for (int i = 0; i < n_a; ++i) anchor_axes[static_cast<std::size_t>(i)] = i;
  anchor_axes.push_back(n_a + 1);  // y axis
  ctx.anchor_map = build_marginal_map(sizes, anchor_axes);

  ctx.f_q = f_value_span(joint, problem_.log_w);

  // t0 anchored at the true joint's (A, Y) marginal; the interferer pin on
  // its cloud is dropped when t0_unconstrained_b_ is set.
  std::vector<double> anchor_q(ctx.anchor_map.slots, 0.0);
  for (std::size_t i = 0; i < joint.size(); ++i)
    anchor_q[ctx.anchor_map.slot[i]] += joint[i];
  const FiCloud cloud_q =
      build_fi_cloud(anchor_q, a_comp, problem_.y_size, problem_.pb, problem_.log_w,
                     grid_, true, false, !t0_unconstrained_b_);
  ctx.t0.reserve(rb_values.size());
  for (double rb : rb_values) ctx.t0.push_back(cloud_q.t_zero(rb));

  ctx.store = std::make_unique<CloudStore>(a_comp, problem_.y_size, problem_.pb,
                                           problem_.log_w, grid_);
  return ctx;
}

void ExponentEngine::eval_pattern(const std::vector<double>& joint,
                                  const PatternPlan& plan, OuterContext& ctx,
                                  const std::vector<double>& rb_values,
                                  std::vector<std::vector<double>>& umin_p,
                                  std::vector<double>& tailmin_p) const {
  const std::vector<int> sizes = problem_.axis_sizes();
  const std::size_t n_rb = rb_values.size();
  const std::size_t n_u = plan.spec.legal_u.size();

  // Fixed marginal of this pattern under the current outer joint.
  std::vector<double> fixed(plan.fixed_map.slots, 0.0);
  for (std::size_t i = 0; i < joint.size(); ++i)
    fixed[plan.fixed_map.slot[i]] += joint[i];

  RawConditionalScan scan(sizes, plan.fixed_axes, fixed, plan.extra, grid_);

  // Phase A: one cheap pass computing f and the MI terms of every
  // candidate, no clouds. Candidates are then visited in ascending order of
  // their smallest MI term. Since E1 >= 0, a candidate whose smallest MI
  // already reaches every current minimum can never improve one, so once
  // the tail minima have hit zero the walk can stop early without changing
  // any computed value.
  struct Cand {
    double sort_key;
    std::size_t index;  // unfiltered odometer index
    double f_t;
  };
  std::vector<Cand> cands;
  std::vector<double> mi_flat;  // n_u entries per candidate

  std::vector<double> scratch;
  scan.for_each([&](std::span<const double> q_tilde, std::size_t index) {
    const ExtReal f_t = f_value_span(q_tilde, problem_.log_w);
    const double h_all = entropy_span(q_tilde);
    const double h_v = entropy_of(plan.redrawn_map, q_tilde, scratch);
    double key = kInf;
    for (std::size_t u = 0; u < n_u; ++u) {
      const double h_not_u = entropy_of(plan.not_u_map[u], q_tilde, scratch);
      const double h_comp = entropy_of(plan.comp_map[u], q_tilde, scratch);
      const double mi = clip_positive(h_v + h_not_u - h_comp - h_all);
      mi_flat.push_back(mi);
      if (mi < key) key = mi;
    }
    cands.push_back(Cand{key, index, f_t.value()});
  });

  std::vector<std::size_t> order(cands.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (cands[a].sort_key != cands[b].sort_key)
      return cands[a].sort_key < cands[b].sort_key;
    return cands[a].index < cands[b].index;
  });

  // Phase B: clouds only for candidates that can still matter.
  std::vector<double> q_buf;
  std::vector<double> anchor(ctx.anchor_map.slots);
  std::vector<double> e1(n_rb);

  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const Cand& c = cands[order[pos]];

    bool tails_done = true;
    for (std::size_t r = 0; r < n_rb; ++r)
      if (tailmin_p[r] > 0.0) {
        tails_done = false;
        break;
      }
    if (tails_done) {
      double ceiling = 0.0;
      for (std::size_t u = 0; u < n_u; ++u)
        for (std::size_t r = 0; r < n_rb; ++r)
          ceiling = std::max(ceiling, umin_p[u][r]);
      if (c.sort_key >= ceiling) break;
    }

    scan.emit_at(c.index, q_buf);
    std::fill(anchor.begin(), anchor.end(), 0.0);
    for (std::size_t i = 0; i < q_buf.size(); ++i)
      anchor[ctx.anchor_map.slot[i]] += q_buf[i];
    const auto cloud = ctx.store->get_or_build(anchor);

    const ExtReal f_t(c.f_t);
    bool any_finite = false;
    for (std::size_t r = 0; r < n_rb; ++r) {
      e1[r] = cloud->e_one(f_t, ctx.t0[r], ctx.f_q, rb_values[r], l_display_verbatim_)
                  .value();
      if (e1[r] < kInf) any_finite = true;
      if (e1[r] < tailmin_p[r]) tailmin_p[r] = e1[r];
    }
    if (!any_finite) continue;
    const double* mi = &mi_flat[order[pos] * n_u];
    for (std::size_t u = 0; u < n_u; ++u)
      for (std::size_t r = 0; r < n_rb; ++r) {
        const double cand = mi[u] + e1[r];
        if (cand < umin_p[u][r]) umin_p[u][r] = cand;
      }
  }
}

void ExponentEngine::eval_outer_point(
    const std::vector<double>& joint, const std::vector<double>& rb_values,
    std::vector<std::vector<std::vector<double>>>& umin,
    std::vector<std::vector<double>>& tailmin) const {
  OuterContext ctx = make_context(joint, rb_values);
  for (std::size_t p = 0; p < plans_.size(); ++p) {
    if (plans_[p]->vacuous) continue;
    eval_pattern(joint, *plans_[p], ctx, rb_values, umin[p], tailmin[p]);
  }
}

ExponentEngine::InnerMins ExponentEngine::inner_mins(
    const std::vector<double>& joint, std::size_t pattern, double rb) const {
  if (pattern >= plans_.size())
    fail(ErrorCode::kInvalidArgument, "pattern index out of range");
  const std::vector<double> rb_values{rb};
  OuterContext ctx = make_context(joint, rb_values);
  std::vector<std::vector<double>> umin_p(plans_[pattern]->spec.legal_u.size(),
                                          std::vector<double>(1, kInf));
  std::vector<double> tailmin_p(1, kInf);
  eval_pattern(joint, *plans_[pattern], ctx, rb_values, umin_p, tailmin_p);
  InnerMins out;
  out.u_min.reserve(umin_p.size());
  for (const auto& u : umin_p) out.u_min.push_back(u[0]);
  out.tail_min = tailmin_p[0];
  return out;
}

std::vector<EngineResult> ExponentEngine::evaluate(
    const std::vector<RateRow>& rows) const {
  const std::vector<int> sizes = problem_.axis_sizes();
  const int n_a = static_cast<int>(problem_.a_sizes.size());
  const int a_comp = problem_.a_comp();

  // Outer scan: grid conditionals of Y given the full input block, with the
  // input joint pinned to the product of compositions.
  std::vector<int> input_axes(static_cast<std::size_t>(n_a + 1));
  for (int i = 0; i <= n_a; ++i) input_axes[static_cast<std::size_t>(i)] = i;
  std::vector<double> weights;  // (a, b) product weights
  {
    const auto paj = problem_.pa_joint();
    weights.reserve(static_cast<std::size_t>(a_comp) *
                    static_cast<std::size_t>(problem_.b_size));
    for (int a = 0; a < a_comp; ++a)
      for (int b = 0; b < problem_.b_size; ++b)
        weights.push_back(paj[static_cast<std::size_t>(a)] *
                          problem_.pb[static_cast<std::size_t>(b)]);
  }
  RawConditionalScan outer(sizes, input_axes, weights, {}, grid_);

  // Pass 1: divergence of every outer point, then process in ascending
  // order. The inner term is nonnegative, so any point whose divergence
  // already exceeds the worst current best can be skipped; the first
  // canonical achiever of the final minimum is never skipped.
  const double n_outer_d = outer.unfiltered_count();
  if (n_outer_d > 2e7)
    fail(ErrorCode::kSpaceTooLarge, "outer conditional grid too large to enumerate");
  const std::size_t n_outer = static_cast<std::size_t>(n_outer_d);

  std::vector<double> d_of(n_outer, 0.0);
  {
    std::size_t idx = 0;
    outer.for_each([&](std::span<const double> joint, std::size_t) {
      double d = 0.0;
      for (std::size_t i = 0; i < joint.size(); ++i) {
        const double q = joint[i];
        if (q == 0.0) continue;
        const double ww = problem_.w[i];
        if (ww == 0.0) {
          d = kInf;
          break;
        }
        const double wgt = weights[i / static_cast<std::size_t>(problem_.y_size)];
        d += q * std::log(q / (wgt * ww));
      }
      d_of[idx++] = d < 0.0 && d > -1e-12 ? 0.0 : d;
    });
  }
  std::vector<std::size_t> order(n_outer);
  for (std::size_t i = 0; i < n_outer; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (d_of[x] != d_of[y]) return d_of[x] < d_of[y];
    return x < y;
  });
  double d_floor = n_outer ? d_of[order[0]] : kInf;

  // Distinct interferer rates, first-occurrence order.
  std::vector<double> rb_values;
  std::vector<std::size_t> row_rb(rows.size(), 0);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    auto it = std::find(rb_values.begin(), rb_values.end(), rows[r].rb);
    if (it == rb_values.end()) {
      row_rb[r] = rb_values.size();
      rb_values.push_back(rows[r].rb);
    } else {
      row_rb[r] = static_cast<std::size_t>(it - rb_values.begin());
    }
  }

  struct RowBest {
    double value = kInf;
    std::vector<double> witness;
    double d_term = 0.0;
    std::vector<double> pattern_values;
  };
  std::vector<RowBest> best(rows.size());
  std::mutex best_mu;
  std::atomic<double> cap{kInf};
  std::atomic<std::size_t> cursor{0};
  std::atomic<bool> done{false};

  auto worker = [&]() {
    std::vector<double> joint;
    std::vector<std::vector<std::vector<double>>> umin(plans_.size());
    std::vector<std::vector<double>> tailmin(plans_.size());
    for (std::size_t p = 0; p < plans_.size(); ++p) {
      umin[p].assign(plans_[p]->spec.legal_u.size(),
                     std::vector<double>(rb_values.size(), kInf));
      tailmin[p].assign(rb_values.size(), kInf);
    }
    std::vector<double> pat_vals(plans_.size(), kInf);

    while (!done.load(std::memory_order_relaxed)) {
      const std::size_t k = cursor.fetch_add(1);
      if (k >= n_outer) break;
      const std::size_t idx = order[k];
      const double d = d_of[idx];
      if (d > cap.load(std::memory_order_relaxed)) {
        done.store(true, std::memory_order_relaxed);
        break;
      }
      outer.emit_at(idx, joint);

      for (std::size_t p = 0; p < plans_.size(); ++p) {
        for (auto& uu : umin[p]) std::fill(uu.begin(), uu.end(), kInf);
        std::fill(tailmin[p].begin(), tailmin[p].end(), kInf);
      }
      eval_outer_point(joint, rb_values, umin, tailmin);

      std::lock_guard<std::mutex> lk(best_mu);
      for (std::size_t r = 0; r < rows.size(); ++r) {
        const std::size_t rb = row_rb[r];
        double inner = kInf;
        for (std::size_t p = 0; p < plans_.size(); ++p) {
          double ev;
          if (plans_[p]->vacuous) {
            ev = kInf;
          } else {
            ev = tailmin[p][rb];
            for (std::size_t u = 0; u < plans_[p]->spec.legal_u.size(); ++u) {
              const int uid = plans_[p]->spec.legal_u[u];
              const double clipped = clip_positive(
                  umin[p][u][rb] - rows[r].rate_sums[static_cast<std::size_t>(uid)]);
              if (clipped > ev) ev = clipped;
            }
          }
          pat_vals[p] = ev;
          if (ev < inner) inner = ev;
        }
        const double total = d + inner;
        RowBest& rb_best = best[r];
        const bool better =
            total < rb_best.value ||
            (total == rb_best.value && !rb_best.witness.empty() &&
             std::lexicographical_compare(joint.begin(), joint.end(),
                                          rb_best.witness.begin(),
                                          rb_best.witness.end()));
        if (better) {
          rb_best.value = total;
          rb_best.witness = joint;
          rb_best.d_term = d;
          rb_best.pattern_values = pat_vals;
        }
      }
      double worst = 0.0;
      for (const auto& b : best) worst = std::max(worst, b.value);
      cap.store(worst, std::memory_order_relaxed);
    }
  };

  if (threads_ <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads_; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::vector<EngineResult> out(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    EngineResult res;
    res.d_floor = d_floor;
    if (best[r].value < kInf) {
      res.value = ExtReal(best[r].value);
      res.argmin_joint = best[r].witness;
      res.d_term = best[r].d_term;
      for (double pv : best[r].pattern_values) res.pattern_values.push_back(ExtReal(pv));
    } else {
      res.value = ExtReal::pos_inf();
    }
    out[r] = std::move(res);
  }
  return out;
}

}  // namespace ifcx
