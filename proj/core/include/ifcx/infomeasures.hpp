#pragma once

#include <span>
#include <vector>

#include "ifcx/extreal.hpp"
#include "ifcx/joint_dist.hpp"

namespace ifcx {

// All information measures are in nats. Zero-mass cells are skipped before
// any log is taken, implementing 0*log(0) = 0 and 0*log(0/0) = 0.

// Sums out every axis not listed in `keep`; the result's axes follow the
// order given in `keep`.
JointDist marginal(const JointDist& q, const std::vector<int>& keep);

double entropy(const JointDist& q);

// I(A;B) with any remaining axes marginalized out first.
double mutual_information(const JointDist& q, const std::vector<int>& group_a,
                          const std::vector<int>& group_b);

// I(A;B|C) = H(A,C) + H(B,C) - H(C) - H(A,B,C)
double conditional_mutual_information(const JointDist& q,
                                      const std::vector<int>& group_a,
                                      const std::vector<int>& group_b,
                                      const std::vector<int>& group_c);

// D(q || p); +inf iff q puts mass where p has none.
ExtReal kl_divergence(const JointDist& q, const JointDist& p);

// Weighted divergence between channels q(y|x) and p(y|x) under weight p_x.
ExtReal weighted_divergence(const Conditional& q_ch, const Conditional& p_ch,
                            const JointDist& p_x);

// f(q) = E_q[log w(Y|cell)] where the last axis of q is the channel output
// and the leading axes flatten to w's conditioning cell. -inf iff q puts
// mass on a zero of w; never +inf.
ExtReal f_value(const JointDist& q, const Conditional& w);

// Raw-buffer versions used by the optimization engine. f_value_span takes
// the channel in log domain (-inf marking zeros), aligned with the joint.
double entropy_span(std::span<const double> p);
ExtReal f_value_span(std::span<const double> joint, std::span<const double> log_w);

}  // namespace ifcx
