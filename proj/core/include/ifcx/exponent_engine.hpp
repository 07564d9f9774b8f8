#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <vector>

#include "ifcx/channels.hpp"
#include "ifcx/extreal.hpp"
#include "ifcx/simplexopt.hpp"

namespace ifcx {

// Both exponent computations share one shape: a block of first-user
// coordinates A = (A_1..A_k) whose messages the receiver decodes, one
// interferer coordinate B whose codebook the decoder averages over, and the
// output Y. The ordinary ensemble is k = 1 (A = X1, B = X2); the
// Han-Kobayashi ensemble is k = 3 (A = (Z1,Z2,Z3), B = Z4).
struct EngineProblem {
  std::vector<int> a_sizes;
  int b_size = 0;
  int y_size = 0;
  std::vector<std::vector<double>> pa;  // composition of each A coordinate
  std::vector<double> pb;
  std::vector<double> w;      // channel, layout (a_composite, b, y)
  std::vector<double> log_w;  // ln w with -inf on zeros

  int a_comp() const {
    int n = 1;
    for (int s : a_sizes) n *= s;
    return n;
  }
  std::vector<double> pa_joint() const;  // product over the A coordinates
  std::vector<int> axis_sizes() const;   // (a_1..a_k, b, y)

  static EngineProblem from_ordinary(const MarginalChannel& w, const JointDist& p1,
                                     const JointDist& p2);
  static EngineProblem from_hk(const VirtualChannel& vch,
                               const std::vector<JointDist>& pz);
};

// One error pattern: the subset of A coordinates that a competitor redraws,
// and the legal clip indices u (each u names a nonempty subset of the
// redrawn coordinates; its rate sum is subtracted before clipping).
struct ErrorPattern {
  std::vector<int> redrawn;           // A-coordinate ids
  std::vector<int> legal_u;           // ids into RateRow::rate_sums
};

// Subsets of {0,1,2} in the fixed u order 1..7.
const std::vector<std::vector<int>>& u_subsets();

std::vector<ErrorPattern> ordinary_patterns();
std::vector<ErrorPattern> hk_patterns();

// One rate point to evaluate: the interferer rate rb plus the clip constants
// for every u id. Exponents are nonincreasing in every entry.
struct RateRow {
  double rb = 0.0;
  std::vector<double> rate_sums;
};

struct EngineResult {
  ExtReal value = ExtReal::pos_inf();
  std::vector<double> argmin_joint;      // (a,b,y) flattening; empty if +inf
  double d_term = 0.0;                   // divergence part at the argmin
  std::vector<ExtReal> pattern_values;   // per pattern at the argmin
  double d_floor = 0.0;                  // min divergence over the outer grid
};

class ExponentEngine {
 public:
  ExponentEngine(EngineProblem problem, std::vector<ErrorPattern> patterns,
                 GridSpec grid, bool t0_unconstrained_b = false, int threads = 1,
                 bool l_display_verbatim = false);

  // Evaluates every rate row over one shared pass of the outer grid.
  std::vector<EngineResult> evaluate(const std::vector<RateRow>& rows) const;

  // Inner minimizations for one outer joint and one pattern: the per-u
  // minima of MI + E1 and the tail minimum of E1 alone.
  struct InnerMins {
    std::vector<double> u_min;
    double tail_min = 0.0;
  };
  InnerMins inner_mins(const std::vector<double>& joint, std::size_t pattern,
                       double rb) const;

  const EngineProblem& problem() const { return problem_; }
  const GridSpec& grid() const { return grid_; }

 private:
  struct PatternPlan;
  struct OuterContext;

  OuterContext make_context(const std::vector<double>& joint,
                            const std::vector<double>& rb_values) const;
  void eval_pattern(const std::vector<double>& joint, const PatternPlan& plan,
                    OuterContext& ctx, const std::vector<double>& rb_values,
                    std::vector<std::vector<double>>& umin_p,
                    std::vector<double>& tailmin_p) const;
  void eval_outer_point(const std::vector<double>& joint,
                        const std::vector<double>& rb_values,
                        std::vector<std::vector<std::vector<double>>>& umin,
                        std::vector<std::vector<double>>& tailmin) const;

  EngineProblem problem_;
  std::vector<ErrorPattern> patterns_;
  GridSpec grid_;
  bool t0_unconstrained_b_;
  int threads_;
  bool l_display_verbatim_;
  std::vector<std::shared_ptr<PatternPlan>> plans_;
};

}  // namespace ifcx
