#include "ifcx/simplexopt.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace ifcx {

namespace {

void compositions_rec(int remaining, int slot, std::vector<int>& counts,
                      std::vector<std::vector<int>>& out) {
  const int slots = static_cast<int>(counts.size());
  if (slot == slots - 1) {
    counts[static_cast<std::size_t>(slot)] = remaining;
    out.push_back(counts);
    return;
  }
  for (int c = remaining; c >= 0; --c) {
    counts[static_cast<std::size_t>(slot)] = c;
    compositions_rec(remaining - c, slot + 1, counts, out);
  }
}

std::mutex g_pmf_mu;
std::map<std::pair<int, int>, std::vector<std::vector<double>>> g_pmf_cache;

}  // namespace

const std::vector<std::vector<double>>& grid_pmfs(int symbols, int m) {
  std::lock_guard<std::mutex> lk(g_pmf_mu);
  auto key = std::make_pair(symbols, m);
  auto it = g_pmf_cache.find(key);
  if (it != g_pmf_cache.end()) return it->second;

  std::vector<std::vector<int>> counts_list;
  std::vector<int> counts(static_cast<std::size_t>(symbols), 0);
  compositions_rec(m, 0, counts, counts_list);

  std::vector<std::vector<double>> pmfs;
  pmfs.reserve(counts_list.size());
  for (const auto& c : counts_list) {
    std::vector<double> p(static_cast<std::size_t>(symbols), 0.0);
    double head = 0.0;
    for (int j = 0; j + 1 < symbols; ++j) {
      p[static_cast<std::size_t>(j)] = double(c[static_cast<std::size_t>(j)]) / double(m);
      head += p[static_cast<std::size_t>(j)];
    }
    // Complement the last cell so every pmf sums to exactly 1.0.
    p[static_cast<std::size_t>(symbols - 1)] = 1.0 - head;
    pmfs.push_back(std::move(p));
  }
  auto [ins, ok] = g_pmf_cache.emplace(key, std::move(pmfs));
  (void)ok;
  return ins->second;
}

RawConditionalScan::RawConditionalScan(std::vector<int> axis_sizes,
                                       std::vector<int> fixed_axes,
                                       std::vector<double> fixed_marginal,
                                       std::vector<MarginalConstraint> extra,
                                       GridSpec grid)
    : axis_sizes_(std::move(axis_sizes)),
      fixed_axes_(std::move(fixed_axes)),
      fixed_marginal_(std::move(fixed_marginal)),
      extra_(std::move(extra)),
      grid_(grid) {
  const int rank = static_cast<int>(axis_sizes_.size());
  std::vector<bool> is_fixed(static_cast<std::size_t>(rank), false);
  for (int a : fixed_axes_) {
    if (a < 0 || a >= rank) fail(ErrorCode::kInvalidArgument, "fixed axis out of range");
    is_fixed[static_cast<std::size_t>(a)] = true;
  }
  std::vector<int> redrawn;
  for (int a = 0; a < rank; ++a)
    if (!is_fixed[static_cast<std::size_t>(a)]) redrawn.push_back(a);
  if (redrawn.empty())
    fail(ErrorCode::kEmptyAxes, "conditional scan needs at least one redrawn axis");

  joint_cells_ = 1;
  for (int s : axis_sizes_) joint_cells_ *= static_cast<std::size_t>(s);
  std::size_t fixed_cells = 1;
  for (int a : fixed_axes_) fixed_cells *= static_cast<std::size_t>(axis_sizes_[static_cast<std::size_t>(a)]);
  redrawn_cells_ = 1;
  for (int a : redrawn) redrawn_cells_ *= static_cast<std::size_t>(axis_sizes_[static_cast<std::size_t>(a)]);
  if (fixed_marginal_.size() != fixed_cells)
    fail(ErrorCode::kDimensionMismatch, "fixed marginal does not match fixed axes");

  tolerance_ = 1.0 / (2.0 * double(grid_.m));
  options_ = &grid_pmfs(static_cast<int>(redrawn_cells_), grid_.m);

  // Joint index of each (fixed cell, redrawn cell) pair.
  std::vector<std::size_t> stride(static_cast<std::size_t>(rank), 1);
  for (int i = rank - 2; i >= 0; --i)
    stride[static_cast<std::size_t>(i)] = stride[static_cast<std::size_t>(i + 1)] *
                                          static_cast<std::size_t>(axis_sizes_[static_cast<std::size_t>(i + 1)]);

  for (std::size_t fc = 0; fc < fixed_cells; ++fc) {
    if (fixed_marginal_[fc] <= 0.0) continue;
    active_cells_.push_back(fc);
    active_mass_.push_back(fixed_marginal_[fc]);
    std::vector<std::size_t> row(redrawn_cells_, 0);
    for (std::size_t rc = 0; rc < redrawn_cells_; ++rc) {
      std::size_t idx = 0;
      std::size_t frem = fc;
      // decode fixed coords (row-major over fixed_axes_)
      std::vector<std::size_t> fsizes;
      for (int a : fixed_axes_) fsizes.push_back(static_cast<std::size_t>(axis_sizes_[static_cast<std::size_t>(a)]));
      std::vector<std::size_t> fcoord(fixed_axes_.size(), 0);
      for (std::size_t k = fixed_axes_.size(); k-- > 0;) {
        fcoord[k] = frem % fsizes[k];
        frem /= fsizes[k];
      }
      std::size_t rrem = rc;
      std::vector<std::size_t> rcoord(redrawn.size(), 0);
      for (std::size_t k = redrawn.size(); k-- > 0;) {
        rcoord[k] = rrem % static_cast<std::size_t>(axis_sizes_[static_cast<std::size_t>(redrawn[k])]);
        rrem /= static_cast<std::size_t>(axis_sizes_[static_cast<std::size_t>(redrawn[k])]);
      }
      for (std::size_t k = 0; k < fixed_axes_.size(); ++k)
        idx += fcoord[k] * stride[static_cast<std::size_t>(fixed_axes_[k])];
      for (std::size_t k = 0; k < redrawn.size(); ++k)
        idx += rcoord[k] * stride[static_cast<std::size_t>(redrawn[k])];
      row[rc] = idx;
    }
    cell_index_.push_back(std::move(row));
  }

  // Slot map per extra constraint: joint cell -> marginal cell.
  for (const auto& con : extra_) {
    if (con.pmf.size() > 64)
      fail(ErrorCode::kSpaceTooLarge, "marginal constraint too wide");
    std::vector<std::uint16_t> slot(joint_cells_, 0);
    for (std::size_t idx = 0; idx < joint_cells_; ++idx) {
      std::size_t out = 0;
      for (int a : con.axes) {
        const std::size_t coord =
            (idx / stride[static_cast<std::size_t>(a)]) %
            static_cast<std::size_t>(axis_sizes_[static_cast<std::size_t>(a)]);
        out = out * static_cast<std::size_t>(axis_sizes_[static_cast<std::size_t>(a)]) + coord;
      }
      slot[idx] = static_cast<std::uint16_t>(out);
    }
    extra_slot_.push_back(std::move(slot));
  }
}

void RawConditionalScan::emit_at(std::size_t unfiltered_index,
                                 std::vector<double>& joint) const {
  joint.assign(joint_cells_, 0.0);
  const std::size_t n_opts = options_->size();
  std::size_t rem = unfiltered_index;
  for (std::size_t c = active_cells_.size(); c-- > 0;) {
    const std::size_t o = rem % n_opts;
    rem /= n_opts;
    write_column(joint, c, (*options_)[o]);
  }
}

double RawConditionalScan::unfiltered_count() const {
  return std::pow(double(options_->size()), double(active_cells_.size()));
}

void RawConditionalScan::write_base(std::vector<double>& joint) const {
  std::fill(joint.begin(), joint.end(), 0.0);
}

void RawConditionalScan::write_column(std::vector<double>& joint, std::size_t c,
                                      const std::vector<double>& pmf) const {
  const double mass = active_mass_[c];
  const auto& row = cell_index_[c];
  for (std::size_t rc = 0; rc < redrawn_cells_; ++rc)
    joint[row[rc]] = mass * pmf[rc];
}

bool RawConditionalScan::passes_extra(const std::vector<double>& joint) const {
  double acc[64];
  for (std::size_t e = 0; e < extra_.size(); ++e) {
    const auto& con = extra_[e];
    const auto& slot = extra_slot_[e];
    const std::size_t cells = con.pmf.size();
    std::fill(acc, acc + cells, 0.0);
    for (std::size_t idx = 0; idx < joint.size(); ++idx) acc[slot[idx]] += joint[idx];
    for (std::size_t k = 0; k < cells; ++k)
      if (std::abs(acc[k] - con.pmf[k]) > tolerance_) return false;
  }
  return true;
}

ConditionalStream::ConditionalStream(std::vector<Alphabet> space,
                                     std::vector<int> fixed_axes,
                                     const JointDist& fixed_marginal,
                                     std::optional<MarginalConstraint> extra,
                                     GridSpec grid)
    : space_(std::move(space)) {
  std::vector<int> sizes;
  for (const auto& a : space_) sizes.push_back(a.size);
  std::vector<MarginalConstraint> cons;
  if (extra) cons.push_back(std::move(*extra));
  RawConditionalScan scan(sizes, std::move(fixed_axes), fixed_marginal.probs(),
                          std::move(cons), grid);
  scan.for_each([&](std::span<const double> joint, std::size_t) {
    buffered_.push_back(JointDist::from_raw_unchecked(
        space_, std::vector<double>(joint.begin(), joint.end())));
  });
  done_ = true;
  count_ = buffered_.size();
}

bool ConditionalStream::next(JointDist& out) {
  if (pos_ >= buffered_.size()) return false;
  out = buffered_[pos_++];
  return true;
}

// max{f - I : I <= r} over the envelope: the best point plus, when a hull
// segment straddles r, the interpolated value at I = r.
double FiCloud::nu(double r) const {
  double best = -kInf;
  for (const auto& p : points) {
    if (p.i > r) continue;
    const double v = p.f - p.i;  // f may be -inf; -inf - finite stays -inf
    if (v > best) best = v;
  }
  for (std::size_t k = 0; k + 1 < hull.size(); ++k) {
    if (hull[k].first <= r && r < hull[k + 1].first) {
      const double lam = (r - hull[k].first) / (hull[k + 1].first - hull[k].first);
      const double f_at = hull[k].second + lam * (hull[k + 1].second - hull[k].second);
      if (f_at - r > best) best = f_at - r;
      break;
    }
  }
  return best;
}

// min{I : f >= theta} over the envelope.
double FiCloud::mu(double theta) const {
  double best = kInf;
  for (const auto& p : points)
    if (p.f >= theta && p.i < best) best = p.i;
  for (std::size_t k = 0; k + 1 < hull.size(); ++k) {
    if (hull[k].second < theta && theta <= hull[k + 1].second) {
      const double lam = (theta - hull[k].second) / (hull[k + 1].second - hull[k].second);
      const double i_at = hull[k].first + lam * (hull[k + 1].first - hull[k].first);
      if (i_at < best) best = i_at;
      break;
    }
  }
  return best;
}

ExtReal FiCloud::t_zero(double r) const { return ExtReal(r + nu(r)); }

ExtReal FiCloud::e_one(ExtReal f_tilde, ExtReal t0, ExtReal f_q, double r,
                       bool display_verbatim) const {
  double best = kInf;
  const double ft = f_tilde.value();
  const double a = ext_max(t0, f_q).value();

  if (!display_verbatim) {
    if (ft > a && ft > f_min) return ExtReal(0.0);
    // Exact cancellation of the true-codeword likelihood when ft >= f_q.
    // A candidate reaches the enumerator threshold T iff f + [r - I]_+ >= T:
    // for I <= r that is f - I >= T - r, covered by nu; for I > r it needs
    // f >= T outright, covered by mu.
    const double thresh = ft >= f_q.value() ? t0.value() : a;
    if (thresh == -kInf) return ExtReal(0.0);
    if (nu(r) >= thresh - r) return ExtReal(0.0);
    const double m_t = mu(thresh);
    return ExtReal(m_t == kInf ? kInf : clip_positive(m_t - r));
  }

  for (const auto& p : points) {
    const double m = p.f > a ? p.f : a;
    if (!(ft <= m)) continue;  // (a) f(q~) <= max[f, t0, f(q)]
    double gap;
    if (p.f == -kInf) {
      gap = (m == -kInf) ? 0.0 : kInf;
    } else {
      gap = m - p.f;
    }
    if (!(gap <= clip_positive(r - p.i))) continue;  // (b) gap condition
    const double obj = clip_positive(p.i - r);
    if (obj < best) best = obj;
  }
  return ExtReal(best);
}

FiCloud build_fi_cloud(const std::vector<double>& anchor, int a_cells, int y_size,
                       const std::vector<double>& pb,
                       const std::vector<double>& log_w, GridSpec grid, bool prune,
                       bool keep_witnesses, bool constrain_b) {
  const int b_size = static_cast<int>(pb.size());
  const std::size_t anchor_cells = static_cast<std::size_t>(a_cells) *
                                   static_cast<std::size_t>(y_size);
  if (anchor.size() != anchor_cells)
    fail(ErrorCode::kDimensionMismatch, "cloud anchor size mismatch");
  if (log_w.size() != anchor_cells * static_cast<std::size_t>(b_size))
    fail(ErrorCode::kDimensionMismatch, "cloud channel size mismatch");

  FiCloud cloud;
  cloud.anchor = anchor;
  cloud.pb = pb;
  cloud.b_size = b_size;
  cloud.y_size = y_size;
  cloud.grid = grid;
  cloud.pruned = prune;

  // log_w layout is (a, b, y); anchor is (a, y). Precompute per anchor cell
  // the b-strided log row.
  const auto lw = [&](std::size_t a, std::size_t y, std::size_t b) {
    return log_w[(a * static_cast<std::size_t>(b_size) + b) *
                     static_cast<std::size_t>(y_size) +
                 y];
  };

  std::vector<std::size_t> active;
  for (std::size_t c = 0; c < anchor_cells; ++c)
    if (anchor[c] > 0.0) active.push_back(c);

  const auto& opts = grid_pmfs(b_size, grid.m);
  const std::size_t n_opts = opts.size();
  const double tol = 1.0 / (2.0 * double(grid.m));

  // Per-option tables: sum_b p(b) ln p(b) and, per active cell, the dot
  // product with the cell's log-channel row (-inf when the option touches a
  // channel zero). Keeps the combo loop free of log calls except H(margB).
  std::vector<double> opt_plogp(n_opts, 0.0);
  for (std::size_t o = 0; o < n_opts; ++o) {
    double s = 0.0;
    for (int b = 0; b < b_size; ++b) {
      const double p = opts[o][static_cast<std::size_t>(b)];
      if (p > 0.0) s += p * std::log(p);
    }
    opt_plogp[o] = s;
  }
  std::vector<double> fdot(active.size() * n_opts, 0.0);
  for (std::size_t c = 0; c < active.size(); ++c) {
    const std::size_t cell = active[c];
    const std::size_t a = cell / static_cast<std::size_t>(y_size);
    const std::size_t y = cell % static_cast<std::size_t>(y_size);
    for (std::size_t o = 0; o < n_opts; ++o) {
      double s = 0.0;
      for (int b = 0; b < b_size; ++b) {
        const double p = opts[o][static_cast<std::size_t>(b)];
        if (p == 0.0) continue;
        const double l = lw(a, y, static_cast<std::size_t>(b));
        if (l == -kInf) {
          s = -kInf;
          break;
        }
        s += p * l;
      }
      fdot[c * n_opts + o] = s;
    }
  }

  std::vector<FiPoint> raw;
  std::vector<std::size_t> odo(active.size(), 0);
  std::vector<double> witness;
  const std::size_t joint_cells = anchor_cells * static_cast<std::size_t>(b_size);

  if (!active.empty()) {
    double mb_arr[64];
    while (true) {
      std::fill(mb_arr, mb_arr + b_size, 0.0);
      for (std::size_t c = 0; c < active.size(); ++c) {
        const double mass = anchor[active[c]];
        const auto& pmf = opts[odo[c]];
        for (int b = 0; b < b_size; ++b)
          mb_arr[b] += mass * pmf[static_cast<std::size_t>(b)];
      }
      bool ok = true;
      if (constrain_b) {
        for (int b = 0; b < b_size; ++b)
          if (std::abs(mb_arr[b] - pb[static_cast<std::size_t>(b)]) > tol) {
            ok = false;
            break;
          }
      }
      if (ok) {
        double f = 0.0;
        double plogp = 0.0;
        for (std::size_t c = 0; c < active.size(); ++c) {
          const double mass = anchor[active[c]];
          f += mass * fdot[c * n_opts + odo[c]];
          plogp += mass * opt_plogp[odo[c]];
        }
        double h_mb = 0.0;
        for (int b = 0; b < b_size; ++b)
          if (mb_arr[b] > 0.0) h_mb -= mb_arr[b] * std::log(mb_arr[b]);
        FiPoint pt;
        pt.f = f;  // -inf propagates through mass * (-inf), mass > 0
        pt.i = clip_positive(plogp + h_mb);
        if (keep_witnesses) {
          witness.assign(joint_cells, 0.0);
          for (std::size_t c = 0; c < active.size(); ++c) {
            const std::size_t cell = active[c];
            const std::size_t a = cell / static_cast<std::size_t>(y_size);
            const std::size_t y = cell % static_cast<std::size_t>(y_size);
            for (int b = 0; b < b_size; ++b)
              witness[(a * static_cast<std::size_t>(b_size) + static_cast<std::size_t>(b)) *
                          static_cast<std::size_t>(y_size) +
                      y] = anchor[cell] * opts[odo[c]][static_cast<std::size_t>(b)];
          }
          pt.witness = witness;
        }
        raw.push_back(std::move(pt));
      }
      std::size_t k = active.size();
      bool done = true;
      while (k > 0) {
        --k;
        if (++odo[k] < n_opts) {
          done = false;
          break;
        }
        odo[k] = 0;
      }
      if (done) break;
    }
  }

  // The exact product point anchor x pb, with I pinned to 0. It satisfies
  // both marginal constraints exactly whether or not pb is on the grid, and
  // keeps t_zero's feasible set nonempty at r = 0.
  {
    FiPoint pt;
    double f = 0.0;
    bool f_ninf = false;
    for (std::size_t cell = 0; cell < anchor_cells; ++cell) {
      if (anchor[cell] == 0.0) continue;
      const std::size_t a = cell / static_cast<std::size_t>(y_size);
      const std::size_t y = cell % static_cast<std::size_t>(y_size);
      for (int b = 0; b < b_size; ++b) {
        const double cellp = anchor[cell] * pb[static_cast<std::size_t>(b)];
        if (cellp == 0.0) continue;
        const double l = lw(a, y, static_cast<std::size_t>(b));
        if (l == -kInf) {
          f_ninf = true;
        } else {
          f += cellp * l;
        }
      }
    }
    pt.f = f_ninf ? -kInf : f;
    pt.i = 0.0;
    if (keep_witnesses) {
      pt.witness.assign(joint_cells, 0.0);
      for (std::size_t cell = 0; cell < anchor_cells; ++cell) {
        const std::size_t a = cell / static_cast<std::size_t>(y_size);
        const std::size_t y = cell % static_cast<std::size_t>(y_size);
        for (int b = 0; b < b_size; ++b)
          pt.witness[(a * static_cast<std::size_t>(b_size) + static_cast<std::size_t>(b)) *
                         static_cast<std::size_t>(y_size) +
                     y] = anchor[cell] * pb[static_cast<std::size_t>(b)];
      }
    }
    raw.push_back(std::move(pt));
  }

  cloud.f_min = kInf;
  for (const auto& p : raw)
    if (p.f < cloud.f_min) cloud.f_min = p.f;

  // Pareto frontier: sort by (I asc, f desc, witness lex), then keep points
  // whose f strictly exceeds everything already kept.
  std::vector<FiPoint> frontier = raw;
  std::sort(frontier.begin(), frontier.end(), [](const FiPoint& x, const FiPoint& y) {
    if (x.i != y.i) return x.i < y.i;
    if (x.f != y.f) return x.f > y.f;
    return x.witness < y.witness;
  });
  {
    std::size_t kept = 0;
    double best_f = -kInf;
    bool have_any = false;
    for (std::size_t k = 0; k < frontier.size(); ++k) {
      if (!have_any || frontier[k].f > best_f) {
        best_f = frontier[k].f;
        have_any = true;
        if (kept != k) frontier[kept] = std::move(frontier[k]);
        ++kept;
      }
    }
    frontier.resize(kept);
  }

  // Upper concave envelope of the frontier (finite f only): slopes of
  // consecutive hull segments strictly decrease.
  for (const auto& p : frontier) {
    if (p.f == -kInf) continue;
    while (cloud.hull.size() >= 2) {
      const auto& a = cloud.hull[cloud.hull.size() - 2];
      const auto& b = cloud.hull[cloud.hull.size() - 1];
      const double s_ab = (b.second - a.second) / (b.first - a.first);
      const double s_bp = (p.f - b.second) / (p.i - b.first);
      if (s_ab <= s_bp)
        cloud.hull.pop_back();
      else
        break;
    }
    cloud.hull.emplace_back(p.i, p.f);
  }

  cloud.points = prune ? std::move(frontier) : std::move(raw);
  return cloud;
}

CloudStore::CloudStore(int a_cells, int y_size, std::vector<double> pb,
                       std::vector<double> log_w, GridSpec grid, bool constrain_b)
    : a_cells_(a_cells),
      y_size_(y_size),
      pb_(std::move(pb)),
      log_w_(std::move(log_w)),
      grid_(grid),
      constrain_b_(constrain_b) {}

std::shared_ptr<const FiCloud> CloudStore::get_or_build(
    const std::vector<double>& anchor) {
  std::string key(reinterpret_cast<const char*>(anchor.data()),
                  anchor.size() * sizeof(double));
  {
    std::lock_guard<std::mutex> lk(mu_);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
  }
  auto cloud = std::make_shared<FiCloud>(build_fi_cloud(
      anchor, a_cells_, y_size_, pb_, log_w_, grid_, /*prune=*/true,
      /*keep_witnesses=*/false, constrain_b_));
  std::lock_guard<std::mutex> lk(mu_);
  auto [it, inserted] = memo_.emplace(std::move(key), std::move(cloud));
  (void)inserted;  // losing the race is fine, the winner's cloud is identical
  return it->second;
}

std::size_t CloudStore::size() const {
  std::lock_guard<std::mutex> lk(mu_);
  return memo_.size();
}

JointDist refine_local(const JointDist& start,
                       const std::function<double(const JointDist&)>& objective,
                       const std::vector<std::vector<int>>& equality_axes,
                       int steps) {
  const int rank = start.rank();
  std::vector<std::size_t> stride(static_cast<std::size_t>(rank), 1);
  for (int i = rank - 2; i >= 0; --i)
    stride[static_cast<std::size_t>(i)] =
        stride[static_cast<std::size_t>(i + 1)] *
        static_cast<std::size_t>(start.axis_size(i + 1));

  // Cells may exchange mass only when they agree on every constrained axis.
  std::vector<int> constrained;
  for (const auto& g : equality_axes)
    for (int a : g) constrained.push_back(a);

  auto group_id = [&](std::size_t idx) {
    std::size_t gid = 0;
    for (int a : constrained) {
      const std::size_t coord = (idx / stride[static_cast<std::size_t>(a)]) %
                                static_cast<std::size_t>(start.axis_size(a));
      gid = gid * static_cast<std::size_t>(start.axis_size(a)) + coord;
    }
    return gid;
  };

  std::vector<double> probs = start.probs();
  auto make = [&]() {
    return JointDist::from_raw_unchecked(start.axes(), probs);
  };
  double best = objective(make());

  double step = 0.5;
  int used = 0;
  while (step > 1e-9 && used < steps) {
    bool improved_at_this_step = false;
    for (std::size_t i = 0; i < probs.size() && used < steps; ++i) {
      for (std::size_t j = 0; j < probs.size() && used < steps; ++j) {
        if (i == j || probs[i] <= 0.0) continue;
        if (group_id(i) != group_id(j)) continue;
        const double delta = std::min(step, probs[i]);
        probs[i] -= delta;
        probs[j] += delta;
        const double cand = objective(make());
        ++used;
        if (cand < best) {
          best = cand;
          improved_at_this_step = true;
        } else {
          probs[i] += delta;
          probs[j] -= delta;
        }
      }
    }
    if (!improved_at_this_step) step *= 0.5;
  }
  return make();
}

}  // namespace ifcx
