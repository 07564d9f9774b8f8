#pragma once

#include <cstring>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ifcx/extreal.hpp"
#include "ifcx/infomeasures.hpp"
#include "ifcx/joint_dist.hpp"

namespace ifcx {

struct GridSpec {
  int m = 4;        // conditional probabilities are multiples of 1/m
  bool refine = false;

  GridSpec() = default;
  GridSpec(int m_, bool refine_ = false) : m(m_), refine(refine_) {
    if (m < 2) fail(ErrorCode::kInvalidArgument, "grid resolution must be >= 2");
  }
};

// All pmfs over `symbols` cells on the 1/m grid, in descending-lex count
// order. The last entry of each pmf is the complement of the others so the
// cells sum to 1.0 exactly; tables are built once and shared.
const std::vector<std::vector<double>>& grid_pmfs(int symbols, int m);

struct MarginalConstraint {
  std::vector<int> axes;   // axes of the full space the constraint marginalizes to
  std::vector<double> pmf; // expected marginal, row-major over those axes
};

// Streams every joint of the form fixed_marginal x conditional over a full
// product space, where each conditional column (one per nonzero fixed cell)
// is a grid pmf over the redrawn axes. Columns on zero-mass fixed cells are
// pinned to uniform and never filtered. Joints failing any extra-marginal
// constraint by more than 1/(2m) in any cell are skipped.
class RawConditionalScan {
 public:
  RawConditionalScan(std::vector<int> axis_sizes, std::vector<int> fixed_axes,
                     std::vector<double> fixed_marginal,
                     std::vector<MarginalConstraint> extra, GridSpec grid);

  std::size_t joint_cells() const { return joint_cells_; }
  // Upper bound on stream size before extra-marginal filtering.
  double unfiltered_count() const;

  // Random access by unfiltered odometer index (extra constraints ignored;
  // used by the outer grid which carries none).
  void emit_at(std::size_t unfiltered_index, std::vector<double>& joint) const;
  bool passes(const std::vector<double>& joint) const { return passes_extra(joint); }

  // Visits each admissible joint in canonical odometer order (last active
  // column cycles fastest) along with its unfiltered odometer index. The
  // span is reused between calls.
  template <class F>
  void for_each(F&& f) const {
    std::vector<double> joint(joint_cells_, 0.0);
    const std::size_t n_active = active_cells_.size();
    if (n_active == 0) {
      // Fully deterministic fixed side: single degenerate joint.
      write_base(joint);
      if (passes_extra(joint)) f(std::span<const double>(joint), std::size_t{0});
      return;
    }
    std::vector<std::size_t> odo(n_active, 0);
    const auto& opts = *options_;
    std::size_t index = 0;
    while (true) {
      write_base(joint);
      for (std::size_t c = 0; c < n_active; ++c) write_column(joint, c, opts[odo[c]]);
      if (passes_extra(joint)) f(std::span<const double>(joint), index);
      ++index;
      std::size_t k = n_active;
      while (k > 0) {
        --k;
        if (++odo[k] < opts.size()) break;
        odo[k] = 0;
        if (k == 0) return;
      }
    }
  }

 private:
  void write_base(std::vector<double>& joint) const;
  void write_column(std::vector<double>& joint, std::size_t active_idx,
                    const std::vector<double>& pmf) const;
  bool passes_extra(const std::vector<double>& joint) const;

  std::vector<int> axis_sizes_;
  std::vector<int> fixed_axes_;
  std::vector<double> fixed_marginal_;
  std::vector<MarginalConstraint> extra_;
  GridSpec grid_;
  std::size_t joint_cells_ = 0;
  std::size_t redrawn_cells_ = 0;
  double tolerance_ = 0.0;
  const std::vector<std::vector<double>>* options_ = nullptr;
  std::vector<std::size_t> active_cells_;            // fixed-cell ids with mass > 0
  std::vector<double> active_mass_;                  // their fixed-marginal mass
  std::vector<std::vector<std::size_t>> cell_index_; // [active][redrawn] -> joint idx
  std::vector<std::vector<std::uint16_t>> extra_slot_;  // per constraint, cell -> slot
};

// Spec-level stream of JointDists, built on RawConditionalScan.
class ConditionalStream {
 public:
  ConditionalStream(std::vector<Alphabet> space, std::vector<int> fixed_axes,
                    const JointDist& fixed_marginal,
                    std::optional<MarginalConstraint> extra, GridSpec grid);
  bool next(JointDist& out);
  bool exhausted_without_yield() const { return done_ && count_ == 0; }

 private:
  std::vector<Alphabet> space_;
  std::vector<JointDist> buffered_;
  std::size_t pos_ = 0;
  std::size_t count_ = 0;
  bool done_ = false;
};

// One attainable (f, I) pair: f = E[log w] of the witness joint, I = mutual
// information between the redrawn coordinate and the anchored block.
struct FiPoint {
  double f = 0.0;  // -inf allowed
  double i = 0.0;
  std::vector<double> witness;  // empty when the cloud drops witnesses
};

// Attainable (f, I) pairs over conditionals with a fixed (A,Y) anchor and a
// pinned B-marginal. When pruned, only the frontier maximizing f and
// minimizing I survives; both downstream queries (t0's max of f - I over
// {I <= r} and the constrained min of [I - r]_+) are preserved because
// raising f can only loosen the feasibility tests max(f,A) >= f_tilde and
// max(f,A) - f <= [r - I]_+ while lowering I never hurts either side.
struct FiCloud {
  std::vector<double> anchor;  // (a, y) row-major, a = composite first block
  std::vector<double> pb;
  int b_size = 0;
  int y_size = 0;
  GridSpec grid;
  bool pruned = false;
  double f_min = kInf;          // smallest f over the full point set, pre-pruning
  std::vector<FiPoint> points;  // Pareto frontier when pruned (f rises with I)
  // Upper concave envelope of the frontier in the (I, f) plane. Mixing two
  // attainable conditionals keeps both marginals, is exactly linear in f and
  // convex in I, so every envelope point is dominated by an attainable one;
  // queries over the envelope track the continuous optimization the grid
  // samples and vary continuously in the rate, where the raw point set
  // moves in steps.
  std::vector<std::pair<double, double>> hull;  // (I, f), I strictly increasing

  double nu(double r) const;      // max{f - I : I <= r} over the envelope
  double mu(double theta) const;  // min{I : f >= theta} over the envelope

  ExtReal t_zero(double r) const;
  // Constrained minimum of [I - r]_+ over the cloud, for a competitor with
  // log-likelihood slope f_tilde against a transmitted joint with slope f_q
  // and enumerator threshold t0. Case structure of the underlying union
  // event:
  //   f_tilde > max(t0, f_q)   -> the competitor's own likelihood clears
  //                               every threshold, value 0;
  //   f_tilde >= f_q           -> the true-codeword terms cancel, the gap
  //                               condition tests against t0 alone;
  //   f_tilde <  f_q           -> gap condition against max(t0, f_q).
  // display_verbatim instead applies the two displayed L conditions
  // literally, with +inf on an empty set.
  ExtReal e_one(ExtReal f_tilde, ExtReal t0, ExtReal f_q, double r,
                bool display_verbatim = false) const;
};

// Builds the cloud for anchor Q_{A,Y} under channel w (layout (a,b,y) -> p)
// with the B-marginal pinned to pb (omit the pin via constrain_b = false).
// The exact product point anchor x pb is always included with I = 0.
FiCloud build_fi_cloud(const std::vector<double>& anchor, int a_cells, int y_size,
                       const std::vector<double>& pb,
                       const std::vector<double>& log_w, GridSpec grid,
                       bool prune = true, bool keep_witnesses = false,
                       bool constrain_b = true);

// Memoized cloud store keyed on the exact bit patterns of the anchor cells;
// concurrent inserts of the same key are idempotent (first build wins).
class CloudStore {
 public:
  CloudStore(int a_cells, int y_size, std::vector<double> pb,
             std::vector<double> log_w, GridSpec grid, bool constrain_b = true);

  std::shared_ptr<const FiCloud> get_or_build(const std::vector<double>& anchor);
  std::size_t size() const;

 private:
  int a_cells_;
  int y_size_;
  std::vector<double> pb_;
  std::vector<double> log_w_;
  GridSpec grid_;
  bool constrain_b_;
  mutable std::mutex mu_;
  std::unordered_map<std::string, std::shared_ptr<const FiCloud>> memo_;
};

// Deterministic greedy polish: probability-mass transfers between cells that
// agree on every constrained axis, with a halving step schedule. Returns a
// feasible point whose objective is <= the start's.
JointDist refine_local(const JointDist& start,
                       const std::function<double(const JointDist&)>& objective,
                       const std::vector<std::vector<int>>& equality_axes,
                       int steps);

}  // namespace ifcx
