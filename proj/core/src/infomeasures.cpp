#include "ifcx/infomeasures.hpp"

#include <algorithm>
#include <cmath>

namespace ifcx {

namespace {

void check_groups_disjoint(const std::vector<int>& a, const std::vector<int>& b) {
  for (int i : a)
    for (int j : b)
      if (i == j) fail(ErrorCode::kOverlappingGroups, "axis groups overlap");
}

std::vector<int> concat(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

}  // namespace

JointDist marginal(const JointDist& q, const std::vector<int>& keep) {
  if (keep.empty()) fail(ErrorCode::kEmptyAxes, "marginal over empty axis set");
  for (int k : keep)
    if (k < 0 || k >= q.rank())
      fail(ErrorCode::kInvalidArgument, "marginal axis out of range");

  std::vector<Alphabet> out_axes;
  out_axes.reserve(keep.size());
  for (int k : keep) out_axes.push_back(q.axes()[static_cast<std::size_t>(k)]);

  // Strides of each kept axis in the source layout.
  std::vector<std::size_t> stride(static_cast<std::size_t>(q.rank()), 1);
  for (int i = q.rank() - 2; i >= 0; --i)
    stride[static_cast<std::size_t>(i)] =
        stride[static_cast<std::size_t>(i + 1)] *
        static_cast<std::size_t>(q.axis_size(i + 1));

  std::size_t out_cells = 1;
  for (const auto& a : out_axes) out_cells *= static_cast<std::size_t>(a.size);
  std::vector<double> out(out_cells, 0.0);

  std::vector<int> coords(static_cast<std::size_t>(q.rank()), 0);
  for (std::size_t idx = 0; idx < q.cells(); ++idx) {
    std::size_t rem = idx;
    for (int i = 0; i < q.rank(); ++i) {
      coords[static_cast<std::size_t>(i)] =
          static_cast<int>(rem / stride[static_cast<std::size_t>(i)]);
      rem %= stride[static_cast<std::size_t>(i)];
    }
    std::size_t out_idx = 0;
    for (std::size_t j = 0; j < keep.size(); ++j)
      out_idx = out_idx * static_cast<std::size_t>(out_axes[j].size) +
                static_cast<std::size_t>(coords[static_cast<std::size_t>(keep[j])]);
    out[out_idx] += q[idx];
  }

  // No renormalization: marginals must equal plain summation bit for bit.
  return JointDist::from_raw_unchecked(std::move(out_axes), std::move(out));
}

double entropy_span(std::span<const double> p) {
  double h = 0.0;
  for (double x : p) {
    if (x > 0.0) h -= x * std::log(x);
  }
  return h;
}

double entropy(const JointDist& q) { return entropy_span(q.probs()); }

double mutual_information(const JointDist& q, const std::vector<int>& group_a,
                          const std::vector<int>& group_b) {
  if (group_a.empty() || group_b.empty())
    fail(ErrorCode::kEmptyAxes, "mutual information over empty group");
  check_groups_disjoint(group_a, group_b);
  const double h_a = entropy(marginal(q, group_a));
  const double h_b = entropy(marginal(q, group_b));
  const double h_ab = entropy(marginal(q, concat(group_a, group_b)));
  return clip_positive(h_a + h_b - h_ab);
}

double conditional_mutual_information(const JointDist& q,
                                      const std::vector<int>& group_a,
                                      const std::vector<int>& group_b,
                                      const std::vector<int>& group_c) {
  check_groups_disjoint(group_a, group_b);
  check_groups_disjoint(group_a, group_c);
  check_groups_disjoint(group_b, group_c);
  if (group_c.empty()) return mutual_information(q, group_a, group_b);
  const double h_ac = entropy(marginal(q, concat(group_a, group_c)));
  const double h_bc = entropy(marginal(q, concat(group_b, group_c)));
  const double h_c = entropy(marginal(q, group_c));
  const double h_abc = entropy(marginal(q, concat(concat(group_a, group_b), group_c)));
  return clip_positive(h_ac + h_bc - h_c - h_abc);
}

ExtReal kl_divergence(const JointDist& q, const JointDist& p) {
  if (q.axes() != p.axes())
    fail(ErrorCode::kAxesMismatch, "kl_divergence: axes mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < q.cells(); ++i) {
    const double qi = q[i];
    if (qi == 0.0) continue;
    if (p[i] == 0.0) return ExtReal::pos_inf();
    d += qi * std::log(qi / p[i]);
  }
  return ExtReal(clip_positive(d));
}

ExtReal weighted_divergence(const Conditional& q_ch, const Conditional& p_ch,
                            const JointDist& p_x) {
  if (q_ch.rows != p_ch.rows || q_ch.cols != p_ch.cols ||
      static_cast<std::size_t>(q_ch.rows) != p_x.cells())
    fail(ErrorCode::kShapeMismatch, "weighted_divergence: shape mismatch");
  double d = 0.0;
  for (int x = 0; x < q_ch.rows; ++x) {
    const double wx = p_x[static_cast<std::size_t>(x)];
    if (wx == 0.0) continue;
    for (int y = 0; y < q_ch.cols; ++y) {
      const double qy = q_ch.at(x, y);
      if (qy == 0.0) continue;
      if (p_ch.at(x, y) == 0.0) return ExtReal::pos_inf();
      d += wx * qy * std::log(qy / p_ch.at(x, y));
    }
  }
  return ExtReal(clip_positive(d));
}

ExtReal f_value_span(std::span<const double> joint, std::span<const double> log_w) {
  double f = 0.0;
  for (std::size_t i = 0; i < joint.size(); ++i) {
    const double qi = joint[i];
    if (qi == 0.0) continue;
    const double l = log_w[i];
    if (l == -kInf) return ExtReal::neg_inf();
    f += qi * l;
  }
  return ExtReal(f);
}

ExtReal f_value(const JointDist& q, const Conditional& w) {
  std::size_t in_cells = 1;
  for (int i = 0; i + 1 < q.rank(); ++i)
    in_cells *= static_cast<std::size_t>(q.axis_size(i));
  if (static_cast<std::size_t>(w.rows) != in_cells ||
      w.cols != q.axis_size(q.rank() - 1))
    fail(ErrorCode::kShapeMismatch, "f_value: joint does not match channel shape");
  double f = 0.0;
  for (std::size_t i = 0; i < q.cells(); ++i) {
    const double qi = q[i];
    if (qi == 0.0) continue;
    if (w.p[i] == 0.0) return ExtReal::neg_inf();
    f += qi * std::log(w.p[i]);
  }
  return ExtReal(f);
}

}  // namespace ifcx
