#include "ifcx/verification.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "ifcx/infomeasures.hpp"

namespace ifcx {

namespace {

constexpr double kAtomGuard = 1e7;

// Mixed-radix odometer over `digits` positions of radix `radix[i]`.
template <class F>
void enumerate_assignments(const std::vector<int>& radix, F&& f) {
  std::vector<int> v(radix.size(), 0);
  while (true) {
    f(v);
    std::size_t k = radix.size();
    while (k > 0) {
      --k;
      if (++v[k] < radix[k]) break;
      v[k] = 0;
      if (k == 0) return;
    }
    if (radix.empty()) return;
  }
}

double space_size(const std::vector<int>& radix) {
  double s = 1.0;
  for (int r : radix) s *= double(r);
  return s;
}

}  // namespace

std::vector<int> nearest_composition(const std::vector<double>& p, int n) {
  const std::size_t k = p.size();
  std::vector<int> counts(k, 0);
  std::vector<double> frac(k, 0.0);
  int assigned = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double target = p[i] * double(n);
    counts[i] = static_cast<int>(std::floor(target));
    frac[i] = target - std::floor(target);
    assigned += counts[i];
  }
  std::vector<std::size_t> order(k);
  for (std::size_t i = 0; i < k; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (frac[a] != frac[b]) return frac[a] > frac[b];
    return a < b;
  });
  for (int r = 0; r < n - assigned; ++r) counts[order[static_cast<std::size_t>(r)]]++;
  return counts;
}

std::pair<double, double> wilson_interval(double p_hat, double trials, double z) {
  if (trials <= 0.0) return {0.0, 1.0};
  const double z2 = z * z;
  const double denom = 1.0 + z2 / trials;
  const double center = (p_hat + z2 / (2.0 * trials)) / denom;
  const double half =
      z * std::sqrt(p_hat * (1.0 - p_hat) / trials + z2 / (4.0 * trials * trials)) /
      denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

// ---------------------------------------------------------------------------
// Union-bound lemmas
// ---------------------------------------------------------------------------

namespace {

// Event row test for Lemma-3-shaped instances.
bool row_holds(const LemmaInstance& inst, int l, int v1, const std::vector<int>& block) {
  if (!inst.a0[static_cast<std::size_t>(l)][static_cast<std::size_t>(v1)]) return false;
  const int km1 = inst.k_vars() - 1;
  for (int k = 0; k < km1; ++k) {
    const int vk = block[static_cast<std::size_t>(k)];
    const int nk = inst.sizes[static_cast<std::size_t>(k + 1)];
    if (!inst.a[static_cast<std::size_t>(l)][static_cast<std::size_t>(k)]
               [static_cast<std::size_t>(v1 * nk + vk)])
      return false;
    if (!inst.g[static_cast<std::size_t>(l)][static_cast<std::size_t>(k)]
               [static_cast<std::size_t>(vk)])
      return false;
  }
  return true;
}

bool any_row_holds(const LemmaInstance& inst, int v1, const std::vector<int>& block) {
  for (int l = 0; l < inst.n_events(); ++l)
    if (row_holds(inst, l, v1, block)) return true;
  return false;
}

std::vector<int> block_sizes(const LemmaInstance& inst) {
  return {inst.sizes.begin() + 1, inst.sizes.end()};
}

double block_prob(const LemmaInstance& inst, const std::vector<int>& block) {
  double p = 1.0;
  for (std::size_t k = 0; k < block.size(); ++k)
    p *= inst.pmfs[k + 1][static_cast<std::size_t>(block[k])];
  return p;
}

}  // namespace

double exact_union_probability(const LemmaInstance& inst) {
  const int n_v1 = inst.sizes[0];
  std::vector<int> radix;
  for (int i = 0; i < inst.l1; ++i) radix.push_back(n_v1);
  const auto bsizes = block_sizes(inst);
  for (int j = 0; j < inst.l2; ++j)
    for (int s : bsizes) radix.push_back(s);
  if (space_size(radix) > kAtomGuard)
    fail(ErrorCode::kSpaceTooLarge, "joint assignment space exceeds the guard");

  const int km1 = inst.k_vars() - 1;
  double total = 0.0;
  enumerate_assignments(radix, [&](const std::vector<int>& v) {
    double p = 1.0;
    for (int i = 0; i < inst.l1; ++i)
      p *= inst.pmfs[0][static_cast<std::size_t>(v[static_cast<std::size_t>(i)])];
    for (int j = 0; j < inst.l2; ++j)
      for (int k = 0; k < km1; ++k)
        p *= inst.pmfs[static_cast<std::size_t>(k + 1)][static_cast<std::size_t>(
            v[static_cast<std::size_t>(inst.l1 + j * km1 + k)])];
    bool hit = false;
    std::vector<int> block(static_cast<std::size_t>(km1), 0);
    for (int i = 0; i < inst.l1 && !hit; ++i)
      for (int j = 0; j < inst.l2 && !hit; ++j) {
        for (int k = 0; k < km1; ++k)
          block[static_cast<std::size_t>(k)] =
              v[static_cast<std::size_t>(inst.l1 + j * km1 + k)];
        if (any_row_holds(inst, v[static_cast<std::size_t>(i)], block)) hit = true;
      }
    if (hit) total += p;
  });
  return total;
}

LemmaBounds lemma3_bounds(const LemmaInstance& inst) {
  const int n_v1 = inst.sizes[0];
  const auto bsizes = block_sizes(inst);
  const int n_events = inst.n_events();

  // B_{l,1} and B_{l,2} by enumeration of the complementary side.
  std::vector<std::vector<std::uint8_t>> b1(
      static_cast<std::size_t>(n_events),
      std::vector<std::uint8_t>(static_cast<std::size_t>(n_v1), 0));
  std::size_t n_blocks = 1;
  for (int s : bsizes) n_blocks *= static_cast<std::size_t>(s);
  std::vector<std::vector<std::uint8_t>> b2(
      static_cast<std::size_t>(n_events), std::vector<std::uint8_t>(n_blocks, 0));

  std::size_t bidx = 0;
  enumerate_assignments(bsizes, [&](const std::vector<int>& block) {
    for (int v1 = 0; v1 < n_v1; ++v1)
      for (int l = 0; l < n_events; ++l)
        if (row_holds(inst, l, v1, block)) {
          b1[static_cast<std::size_t>(l)][static_cast<std::size_t>(v1)] = 1;
          b2[static_cast<std::size_t>(l)][bidx] = 1;
        }
    ++bidx;
  });

  // P(V1 in union of B_{l,1})
  double p_b1 = 0.0;
  for (int v1 = 0; v1 < n_v1; ++v1) {
    bool in_any = false;
    for (int l = 0; l < n_events && !in_any; ++l)
      in_any = b1[static_cast<std::size_t>(l)][static_cast<std::size_t>(v1)];
    if (in_any) p_b1 += inst.pmfs[0][static_cast<std::size_t>(v1)];
  }
  // P(block in union of B_{l,2}) and P(joint union for one (i,j) pair)
  double p_b2 = 0.0;
  double p_joint = 0.0;
  bidx = 0;
  enumerate_assignments(bsizes, [&](const std::vector<int>& block) {
    const double pb = block_prob(inst, block);
    bool in_any = false;
    for (int l = 0; l < n_events && !in_any; ++l)
      in_any = b2[static_cast<std::size_t>(l)][bidx];
    if (in_any) p_b2 += pb;
    for (int v1 = 0; v1 < n_v1; ++v1)
      if (any_row_holds(inst, v1, block))
        p_joint += pb * inst.pmfs[0][static_cast<std::size_t>(v1)];
    ++bidx;
  });

  const double l1 = double(inst.l1);
  const double l2 = double(inst.l2);
  const double m = std::min(
      {1.0, l1 * p_b1, l2 * p_b2, l1 * l2 * p_joint});

  LemmaBounds out;
  out.upper = m;
  out.lower = 0.25 * m;

  // Constancy checks: P(any row | V1 = v1) identical within each B_{l,1},
  // and P(any row | block) identical within each B_{l,2}.
  bool hold = true;
  {
    std::vector<double> cond_v1(static_cast<std::size_t>(n_v1), 0.0);
    for (int v1 = 0; v1 < n_v1; ++v1) {
      double s = 0.0;
      enumerate_assignments(bsizes, [&](const std::vector<int>& block) {
        if (any_row_holds(inst, v1, block)) s += block_prob(inst, block);
      });
      cond_v1[static_cast<std::size_t>(v1)] = s;
    }
    for (int l = 0; l < n_events && hold; ++l) {
      double ref = -1.0;
      for (int v1 = 0; v1 < n_v1; ++v1) {
        if (!b1[static_cast<std::size_t>(l)][static_cast<std::size_t>(v1)]) continue;
        if (ref < 0.0)
          ref = cond_v1[static_cast<std::size_t>(v1)];
        else if (std::abs(ref - cond_v1[static_cast<std::size_t>(v1)]) > 1e-12)
          hold = false;
      }
    }
    std::vector<double> cond_block(n_blocks, 0.0);
    bidx = 0;
    enumerate_assignments(bsizes, [&](const std::vector<int>& block) {
      double s = 0.0;
      for (int v1 = 0; v1 < n_v1; ++v1)
        if (any_row_holds(inst, v1, block))
          s += inst.pmfs[0][static_cast<std::size_t>(v1)];
      cond_block[bidx++] = s;
    });
    for (int l = 0; l < n_events && hold; ++l) {
      double ref = -1.0;
      for (std::size_t b = 0; b < n_blocks; ++b) {
        if (!b2[static_cast<std::size_t>(l)][b]) continue;
        if (ref < 0.0)
          ref = cond_block[b];
        else if (std::abs(ref - cond_block[b]) > 1e-12)
          hold = false;
      }
    }
  }
  out.conditions_hold = hold;
  return out;
}

// ---------------------------------------------------------------------------
// Multi-index union bounds
// ---------------------------------------------------------------------------

namespace {

int z_composite(const Lemma4Instance& inst, const std::vector<int>& zs) {
  int c = 0;
  for (std::size_t j = 0; j < zs.size(); ++j)
    c = c * inst.z_sizes[j] + zs[j];
  return c;
}

bool row_holds4(const Lemma4Instance& inst, int l, int zc, const std::vector<int>& vs) {
  if (!inst.a0[static_cast<std::size_t>(l)][static_cast<std::size_t>(zc)]) return false;
  for (int k = 0; k < inst.k_vars(); ++k) {
    const int nk = inst.v_sizes[static_cast<std::size_t>(k)];
    const int vk = vs[static_cast<std::size_t>(k)];
    if (!inst.a[static_cast<std::size_t>(l)][static_cast<std::size_t>(k)]
               [static_cast<std::size_t>(zc * nk + vk)])
      return false;
    if (!inst.g[static_cast<std::size_t>(l)][static_cast<std::size_t>(k)]
               [static_cast<std::size_t>(vk)])
      return false;
  }
  return true;
}

}  // namespace

double exact_union_probability4(const Lemma4Instance& inst) {
  const int j_groups = inst.j_groups();
  const int k_vars = inst.k_vars();
  std::vector<int> radix;
  for (int j = 0; j < j_groups; ++j)
    for (int c = 0; c < inst.counts[static_cast<std::size_t>(j)]; ++c)
      radix.push_back(inst.z_sizes[static_cast<std::size_t>(j)]);
  for (int b = 0; b < inst.n_block; ++b)
    for (int k = 0; k < k_vars; ++k) radix.push_back(inst.v_sizes[static_cast<std::size_t>(k)]);
  if (space_size(radix) > kAtomGuard)
    fail(ErrorCode::kSpaceTooLarge, "joint assignment space exceeds the guard");

  // Offsets into the assignment vector.
  std::vector<int> z_off(static_cast<std::size_t>(j_groups), 0);
  int off = 0;
  for (int j = 0; j < j_groups; ++j) {
    z_off[static_cast<std::size_t>(j)] = off;
    off += inst.counts[static_cast<std::size_t>(j)];
  }
  const int v_off = off;

  double total = 0.0;
  enumerate_assignments(radix, [&](const std::vector<int>& v) {
    double p = 1.0;
    for (int j = 0; j < j_groups; ++j)
      for (int c = 0; c < inst.counts[static_cast<std::size_t>(j)]; ++c)
        p *= inst.z_pmfs[static_cast<std::size_t>(j)][static_cast<std::size_t>(
            v[static_cast<std::size_t>(z_off[static_cast<std::size_t>(j)] + c)])];
    for (int b = 0; b < inst.n_block; ++b)
      for (int k = 0; k < k_vars; ++k)
        p *= inst.v_pmfs[static_cast<std::size_t>(k)][static_cast<std::size_t>(
            v[static_cast<std::size_t>(v_off + b * k_vars + k)])];

    // Union over all index tuples (i_1..i_J, j_block, l).
    std::vector<int> zi(static_cast<std::size_t>(j_groups), 0);
    std::vector<int> zsym(static_cast<std::size_t>(j_groups), 0);
    std::vector<int> vs(static_cast<std::size_t>(k_vars), 0);
    bool hit = false;
    std::vector<int> idx_radix(static_cast<std::size_t>(j_groups), 0);
    for (int j = 0; j < j_groups; ++j)
      idx_radix[static_cast<std::size_t>(j)] = inst.counts[static_cast<std::size_t>(j)];
    enumerate_assignments(idx_radix, [&](const std::vector<int>& pick) {
      if (hit) return;
      for (int j = 0; j < j_groups; ++j)
        zsym[static_cast<std::size_t>(j)] =
            v[static_cast<std::size_t>(z_off[static_cast<std::size_t>(j)] +
                                       pick[static_cast<std::size_t>(j)])];
      const int zc = z_composite(inst, zsym);
      for (int b = 0; b < inst.n_block && !hit; ++b) {
        for (int k = 0; k < k_vars; ++k)
          vs[static_cast<std::size_t>(k)] =
              v[static_cast<std::size_t>(v_off + b * k_vars + k)];
        for (int l = 0; l < inst.n_events() && !hit; ++l)
          if (row_holds4(inst, l, zc, vs)) hit = true;
      }
    });
    if (hit) total += p;
  });
  return total;
}

LemmaBounds lemma4_bounds(const Lemma4Instance& inst) {
  const int j_groups = inst.j_groups();
  const int k_vars = inst.k_vars();
  const int n_events = inst.n_events();
  const int j_plus_1 = j_groups + 1;

  // Enumerate the per-draw space (one z per group, one v block) once and
  // tabulate which event rows hold.
  std::vector<int> draw_radix;
  for (int j = 0; j < j_groups; ++j) draw_radix.push_back(inst.z_sizes[static_cast<std::size_t>(j)]);
  for (int k = 0; k < k_vars; ++k) draw_radix.push_back(inst.v_sizes[static_cast<std::size_t>(k)]);
  if (space_size(draw_radix) > kAtomGuard)
    fail(ErrorCode::kSpaceTooLarge, "per-draw space exceeds the guard");

  struct DrawAtom {
    std::vector<int> assign;  // z symbols then v symbols
    double prob;
    std::vector<std::uint8_t> rows;
  };
  std::vector<DrawAtom> atoms;
  enumerate_assignments(draw_radix, [&](const std::vector<int>& v) {
    DrawAtom at;
    at.assign = v;
    at.prob = 1.0;
    std::vector<int> zsym(static_cast<std::size_t>(j_groups));
    for (int j = 0; j < j_groups; ++j) {
      zsym[static_cast<std::size_t>(j)] = v[static_cast<std::size_t>(j)];
      at.prob *= inst.z_pmfs[static_cast<std::size_t>(j)]
                            [static_cast<std::size_t>(v[static_cast<std::size_t>(j)])];
    }
    std::vector<int> vs(static_cast<std::size_t>(k_vars));
    for (int k = 0; k < k_vars; ++k) {
      vs[static_cast<std::size_t>(k)] = v[static_cast<std::size_t>(j_groups + k)];
      at.prob *= inst.v_pmfs[static_cast<std::size_t>(k)]
                            [static_cast<std::size_t>(vs[static_cast<std::size_t>(k)])];
    }
    const int zc = z_composite(inst, zsym);
    at.rows.assign(static_cast<std::size_t>(n_events), 0);
    for (int l = 0; l < n_events; ++l)
      at.rows[static_cast<std::size_t>(l)] = row_holds4(inst, l, zc, vs) ? 1 : 0;
    atoms.push_back(std::move(at));
  });

  double best = 1.0;
  // All nonempty subsets of {0..J} where index J means the v block.
  for (int mask = 1; mask < (1 << j_plus_1); ++mask) {
    double mult = 1.0;
    for (int j = 0; j < j_groups; ++j)
      if (mask & (1 << j)) mult *= double(inst.counts[static_cast<std::size_t>(j)]);
    if (mask & (1 << j_groups)) mult *= double(inst.n_block);

    // P(U_J in union of B_{l,J}): a projected value lies in B_{l,J} when
    // some completion makes row l hold.
    double p_union = 0.0;
    // For each distinct projected value, probability = product of pmfs on
    // subset coords; membership = exists completion with any row holding.
    // Enumerate projected space directly.
    std::vector<int> proj_radix;
    std::vector<int> proj_pos;  // positions in the draw assignment
    for (int j = 0; j < j_groups; ++j)
      if (mask & (1 << j)) {
        proj_radix.push_back(inst.z_sizes[static_cast<std::size_t>(j)]);
        proj_pos.push_back(j);
      }
    if (mask & (1 << j_groups))
      for (int k = 0; k < k_vars; ++k) {
        proj_radix.push_back(inst.v_sizes[static_cast<std::size_t>(k)]);
        proj_pos.push_back(j_groups + k);
      }
    enumerate_assignments(proj_radix, [&](const std::vector<int>& pv) {
      double pp = 1.0;
      for (std::size_t t = 0; t < pv.size(); ++t) {
        const int pos = proj_pos[t];
        if (pos < j_groups)
          pp *= inst.z_pmfs[static_cast<std::size_t>(pos)]
                           [static_cast<std::size_t>(pv[t])];
        else
          pp *= inst.v_pmfs[static_cast<std::size_t>(pos - j_groups)]
                           [static_cast<std::size_t>(pv[t])];
      }
      bool member = false;
      for (const auto& at : atoms) {
        bool matches = true;
        for (std::size_t t = 0; t < pv.size(); ++t)
          if (at.assign[static_cast<std::size_t>(proj_pos[t])] != pv[t]) {
            matches = false;
            break;
          }
        if (!matches) continue;
        for (int l = 0; l < n_events; ++l)
          if (at.rows[static_cast<std::size_t>(l)]) {
            member = true;
            break;
          }
        if (member) break;
      }
      if (member) p_union += pp;
    });
    best = std::min(best, mult * p_union);
  }

  LemmaBounds out;
  out.upper = std::min(1.0, best);
  out.lower = std::pow(2.0, -double(j_plus_1)) * out.upper;

  // Constancy: for each subset and each row l, P(any row | projection) must
  // be constant over the projections belonging to B_{l,J}. Verified per
  // subset by direct computation.
  bool hold = true;
  for (int mask = 1; mask < (1 << j_plus_1) && hold; ++mask) {
    std::vector<int> proj_pos;
    for (int j = 0; j < j_groups; ++j)
      if (mask & (1 << j)) proj_pos.push_back(j);
    if (mask & (1 << j_groups))
      for (int k = 0; k < k_vars; ++k) proj_pos.push_back(j_groups + k);

    // Conditional probability of the union given the projected coordinates.
    // Key projections by composite index.
    std::vector<double> cond;
    std::vector<std::vector<std::uint8_t>> in_bl;  // [l][proj composite]
    std::size_t n_proj = 1;
    for (int pos : proj_pos)
      n_proj *= static_cast<std::size_t>(pos < j_groups
                                             ? inst.z_sizes[static_cast<std::size_t>(pos)]
                                             : inst.v_sizes[static_cast<std::size_t>(pos - j_groups)]);
    cond.assign(n_proj, 0.0);
    in_bl.assign(static_cast<std::size_t>(n_events), std::vector<std::uint8_t>(n_proj, 0));
    auto proj_of = [&](const std::vector<int>& assign) {
      std::size_t c = 0;
      for (int pos : proj_pos) {
        const int sz = pos < j_groups
                           ? inst.z_sizes[static_cast<std::size_t>(pos)]
                           : inst.v_sizes[static_cast<std::size_t>(pos - j_groups)];
        c = c * static_cast<std::size_t>(sz) +
            static_cast<std::size_t>(assign[static_cast<std::size_t>(pos)]);
      }
      return c;
    };
    for (const auto& at : atoms) {
      const std::size_t pc = proj_of(at.assign);
      double comp_prob = 1.0;
      for (int pos = 0; pos < j_groups + k_vars; ++pos) {
        if (std::find(proj_pos.begin(), proj_pos.end(), pos) != proj_pos.end()) continue;
        comp_prob *= pos < j_groups
                         ? inst.z_pmfs[static_cast<std::size_t>(pos)][static_cast<std::size_t>(
                               at.assign[static_cast<std::size_t>(pos)])]
                         : inst.v_pmfs[static_cast<std::size_t>(pos - j_groups)]
                                      [static_cast<std::size_t>(
                                          at.assign[static_cast<std::size_t>(pos)])];
      }
      bool any = false;
      for (int l = 0; l < n_events; ++l)
        if (at.rows[static_cast<std::size_t>(l)]) {
          in_bl[static_cast<std::size_t>(l)][pc] = 1;
          any = true;
        }
      if (any) cond[pc] += comp_prob;
    }
    for (int l = 0; l < n_events && hold; ++l) {
      double ref = -1.0;
      for (std::size_t pc = 0; pc < n_proj; ++pc) {
        if (!in_bl[static_cast<std::size_t>(l)][pc]) continue;
        if (ref < 0.0)
          ref = cond[pc];
        else if (std::abs(ref - cond[pc]) > 1e-12)
          hold = false;
      }
    }
  }
  out.conditions_hold = hold;
  return out;
}

double decaen_lower_bound(const std::vector<std::vector<std::uint8_t>>& events,
                          const std::vector<double>& atom_pmf) {
  const std::size_t n = events.size();
  std::vector<double> p(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (events[i].size() != atom_pmf.size())
      fail(ErrorCode::kDimensionMismatch, "event table does not match atom space");
    for (std::size_t a = 0; a < atom_pmf.size(); ++a)
      if (events[i][a]) p[i] += atom_pmf[a];
  }
  double bound = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (p[i] == 0.0) continue;  // zero events contribute zero, not NaN
    double inter = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      double pij = 0.0;
      for (std::size_t a = 0; a < atom_pmf.size(); ++a)
        if (events[i][a] && events[j][a]) pij += atom_pmf[a];
      inter += pij;
    }
    bound += p[i] * p[i] / inter;
  }
  return bound;
}

// ---------------------------------------------------------------------------
// Simulators
// ---------------------------------------------------------------------------

namespace {

// Codeword drawn uniformly from the type class of `composition`.
std::vector<int> sample_from_type(const std::vector<int>& composition, int n, Rng& rng) {
  std::vector<int> word;
  word.reserve(static_cast<std::size_t>(n));
  for (std::size_t s = 0; s < composition.size(); ++s)
    for (int c = 0; c < composition[s]; ++c) word.push_back(static_cast<int>(s));
  for (int i = n - 1; i > 0; --i) {
    const int j = rng.next_int(i + 1);
    std::swap(word[static_cast<std::size_t>(i)], word[static_cast<std::size_t>(j)]);
  }
  return word;
}

std::uint64_t message_count(double rate, int n) {
  const double m = std::exp(double(n) * rate);
  return static_cast<std::uint64_t>(std::ceil(m - 1e-9));
}

double kahan_sum(const std::vector<double>& xs) {
  double s = 0.0, c = 0.0;
  for (double x : xs) {
    const double y = x - c;
    const double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return s;
}

template <class TrialFn>
void run_trials(std::uint64_t trials, int threads, std::vector<double>& out,
                TrialFn&& fn) {
  out.assign(trials, 0.0);
  if (threads <= 1) {
    for (std::uint64_t t = 0; t < trials; ++t) out[t] = fn(t);
    return;
  }
  std::atomic<std::uint64_t> cursor{0};
  auto worker = [&]() {
    while (true) {
      const std::uint64_t t = cursor.fetch_add(1);
      if (t >= trials) break;
      out[t] = fn(t);
    }
  };
  std::vector<std::thread> pool;
  for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

}  // namespace

SimReport simulate_ordinary(const Dmc2User& dmc, const JointDist& p_x1,
                            const JointDist& p_x2, const RatePair& rates, int n,
                            std::uint64_t trials, std::uint64_t seed,
                            const SimOptions& opts) {
  const MarginalChannel w = marginal_channel(dmc, 1);
  const std::uint64_t m1 = message_count(rates.r1, n);
  const std::uint64_t m2 = message_count(rates.r2, n);
  if (m1 * m2 > opts.messages_limit)
    fail(ErrorCode::kGuardExceeded, "message product exceeds the compute guard");
  double y_space = 1.0;
  for (int k = 0; k < n; ++k) y_space *= double(w.y.size);
  const bool exact_y = y_space <= double(opts.exact_y_limit);

  const std::vector<int> comp1 = nearest_composition(p_x1.probs(), n);
  const std::vector<int> comp2 = nearest_composition(p_x2.probs(), n);

  std::atomic<std::uint64_t> ties{0};

  auto trial = [&](std::uint64_t t) -> double {
    Rng rng = Rng::stream(seed, t);
    std::vector<std::vector<int>> cb1, cb2;
    cb1.reserve(m1);
    cb2.reserve(m2);
    for (std::uint64_t i = 0; i < m1; ++i) cb1.push_back(sample_from_type(comp1, n, rng));
    for (std::uint64_t j = 0; j < m2; ++j) cb2.push_back(sample_from_type(comp2, n, rng));

    auto score = [&](const std::vector<int>& y, std::uint64_t i) {
      double s = 0.0;
      for (std::uint64_t j = 0; j < m2; ++j) {
        double p = 1.0;
        for (int k = 0; k < n; ++k)
          p *= w.at(cb1[i][static_cast<std::size_t>(k)],
                    cb2[j][static_cast<std::size_t>(k)], y[static_cast<std::size_t>(k)]);
        s += p;
      }
      return s;
    };

    if (exact_y) {
      double pe = 0.0;
      std::vector<int> radix(static_cast<std::size_t>(n), w.y.size);
      std::uint64_t local_ties = 0;
      enumerate_assignments(radix, [&](const std::vector<int>& y) {
        double py = 1.0;
        for (int k = 0; k < n; ++k)
          py *= w.at(cb1[0][static_cast<std::size_t>(k)], cb2[0][static_cast<std::size_t>(k)],
                     y[static_cast<std::size_t>(k)]);
        if (py == 0.0) return;
        const double s0 = score(y, 0);
        double smax = -1.0;
        for (std::uint64_t i = 1; i < m1; ++i) smax = std::max(smax, score(y, i));
        if (m1 > 1 && smax >= s0) {
          pe += py;
          if (smax == s0) ++local_ties;
        }
      });
      ties.fetch_add(local_ties);
      return pe;
    }
    // Sampled y: one Bernoulli error indicator per trial.
    std::vector<int> y(static_cast<std::size_t>(n), 0);
    for (int k = 0; k < n; ++k) {
      const double u = rng.next_double();
      double acc = 0.0;
      int sym = w.y.size - 1;
      for (int yy = 0; yy < w.y.size; ++yy) {
        acc += w.at(cb1[0][static_cast<std::size_t>(k)], cb2[0][static_cast<std::size_t>(k)], yy);
        if (u < acc) {
          sym = yy;
          break;
        }
      }
      y[static_cast<std::size_t>(k)] = sym;
    }
    const double s0 = score(y, 0);
    double smax = -1.0;
    for (std::uint64_t i = 1; i < m1; ++i) smax = std::max(smax, score(y, i));
    if (m1 > 1 && smax >= s0) {
      if (smax == s0) ties.fetch_add(1);
      return 1.0;
    }
    return 0.0;
  };

  std::vector<double> per_trial;
  run_trials(trials, opts.threads, per_trial, trial);

  SimReport rep;
  rep.n = n;
  rep.trials = trials;
  rep.pe_hat = trials ? kahan_sum(per_trial) / double(trials) : 0.0;
  auto [lo, hi] = wilson_interval(rep.pe_hat, double(trials));
  rep.wilson_lo = lo;
  rep.wilson_hi = hi;
  rep.tie_events = ties.load();
  rep.exact_y = exact_y;
  rep.seed = seed;
  rep.compositions = {comp1, comp2};
  return rep;
}

SimReport simulate_hk(const VirtualChannel& vch, const std::vector<JointDist>& p_z,
                      const HkSimRates& rates, int n, std::uint64_t trials,
                      std::uint64_t seed, const SimOptions& opts) {
  if (p_z.size() != 4) fail(ErrorCode::kDimensionMismatch, "need four z pmfs");
  const std::uint64_t m11 = message_count(rates.r11, n);
  const std::uint64_t m12 = message_count(rates.r12, n);
  const std::uint64_t m21 = message_count(rates.r21, n);
  const std::uint64_t m22 = message_count(rates.r22, n);
  if (m11 * m12 * m21 * m22 > opts.messages_limit)
    fail(ErrorCode::kGuardExceeded, "message product exceeds the compute guard");
  double y_space = 1.0;
  for (int k = 0; k < n; ++k) y_space *= double(vch.base.y.size);
  const bool exact_y = y_space <= double(opts.exact_y_limit);

  std::vector<std::vector<int>> comps = {
      nearest_composition(p_z[0].probs(), n), nearest_composition(p_z[1].probs(), n),
      nearest_composition(p_z[2].probs(), n), nearest_composition(p_z[3].probs(), n)};

  std::atomic<std::uint64_t> ties{0};

  auto trial = [&](std::uint64_t t) -> double {
    Rng rng = Rng::stream(seed, t);
    std::vector<std::vector<int>> cb11, cb12, cb21, cb22;
    for (std::uint64_t i = 0; i < m11; ++i) cb11.push_back(sample_from_type(comps[0], n, rng));
    for (std::uint64_t i = 0; i < m12; ++i) cb12.push_back(sample_from_type(comps[1], n, rng));
    for (std::uint64_t i = 0; i < m21; ++i) cb21.push_back(sample_from_type(comps[2], n, rng));
    for (std::uint64_t i = 0; i < m22; ++i) cb22.push_back(sample_from_type(comps[3], n, rng));

    auto score = [&](const std::vector<int>& y, std::uint64_t i, std::uint64_t j,
                     std::uint64_t k) {
      double s = 0.0;
      for (std::uint64_t l = 0; l < m22; ++l) {
        double p = 1.0;
        for (int kk = 0; kk < n; ++kk)
          p *= vch.at(cb11[i][static_cast<std::size_t>(kk)],
                      cb12[j][static_cast<std::size_t>(kk)],
                      cb21[k][static_cast<std::size_t>(kk)],
                      cb22[l][static_cast<std::size_t>(kk)],
                      y[static_cast<std::size_t>(kk)]);
        s += p;
      }
      return s;
    };
    auto max_wrong = [&](const std::vector<int>& y) {
      double smax = -1.0;
      for (std::uint64_t i = 0; i < m11; ++i)
        for (std::uint64_t j = 0; j < m12; ++j)
          for (std::uint64_t k = 0; k < m21; ++k) {
            if (i == 0 && j == 0 && k == 0) continue;
            smax = std::max(smax, score(y, i, j, k));
          }
      return smax;
    };

    if (exact_y) {
      double pe = 0.0;
      std::uint64_t local_ties = 0;
      std::vector<int> radix(static_cast<std::size_t>(n), vch.base.y.size);
      enumerate_assignments(radix, [&](const std::vector<int>& y) {
        double py = 1.0;
        for (int kk = 0; kk < n; ++kk)
          py *= vch.at(cb11[0][static_cast<std::size_t>(kk)],
                       cb12[0][static_cast<std::size_t>(kk)],
                       cb21[0][static_cast<std::size_t>(kk)],
                       cb22[0][static_cast<std::size_t>(kk)],
                       y[static_cast<std::size_t>(kk)]);
        if (py == 0.0) return;
        if (m11 * m12 * m21 == 1) return;
        const double s0 = score(y, 0, 0, 0);
        const double smax = max_wrong(y);
        if (smax >= s0) {
          pe += py;
          if (smax == s0) ++local_ties;
        }
      });
      ties.fetch_add(local_ties);
      return pe;
    }
    std::vector<int> y(static_cast<std::size_t>(n), 0);
    for (int kk = 0; kk < n; ++kk) {
      const double u = rng.next_double();
      double acc = 0.0;
      int sym = vch.base.y.size - 1;
      for (int yy = 0; yy < vch.base.y.size; ++yy) {
        acc += vch.at(cb11[0][static_cast<std::size_t>(kk)],
                      cb12[0][static_cast<std::size_t>(kk)],
                      cb21[0][static_cast<std::size_t>(kk)],
                      cb22[0][static_cast<std::size_t>(kk)], yy);
        if (u < acc) {
          sym = yy;
          break;
        }
      }
      y[static_cast<std::size_t>(kk)] = sym;
    }
    if (m11 * m12 * m21 == 1) return 0.0;
    const double s0 = score(y, 0, 0, 0);
    const double smax = max_wrong(y);
    if (smax >= s0) {
      if (smax == s0) ties.fetch_add(1);
      return 1.0;
    }
    return 0.0;
  };

  std::vector<double> per_trial;
  run_trials(trials, opts.threads, per_trial, trial);

  SimReport rep;
  rep.n = n;
  rep.trials = trials;
  rep.pe_hat = trials ? kahan_sum(per_trial) / double(trials) : 0.0;
  auto [lo, hi] = wilson_interval(rep.pe_hat, double(trials));
  rep.wilson_lo = lo;
  rep.wilson_hi = hi;
  rep.tie_events = ties.load();
  rep.exact_y = exact_y;
  rep.seed = seed;
  rep.compositions = comps;
  return rep;
}

EnumeratorStats enumerator_threshold_check(const Dmc2User& dmc, const JointDist& p_x1,
                                           const JointDist& p_x2, double r2, int n,
                                           std::uint64_t trials, std::uint64_t seed,
                                           GridSpec grid, const SimOptions& opts) {
  const MarginalChannel w = marginal_channel(dmc, 1);
  const std::uint64_t m2 = message_count(r2, n);
  if (m2 < 2)
    fail(ErrorCode::kInvalidArgument, "threshold check needs at least two messages");
  if (m2 > opts.messages_limit)
    fail(ErrorCode::kGuardExceeded, "message count exceeds the compute guard");

  // Channel-true (X1, Y1) anchor: P1(x) * sum_x2 P2(x2) w(y|x,x2).
  std::vector<double> anchor(static_cast<std::size_t>(w.x1.size) *
                                 static_cast<std::size_t>(w.y.size),
                             0.0);
  for (int x = 0; x < w.x1.size; ++x)
    for (int y = 0; y < w.y.size; ++y) {
      double s = 0.0;
      for (int b = 0; b < w.x2.size; ++b)
        s += p_x2[static_cast<std::size_t>(b)] * w.at(x, b, y);
      anchor[static_cast<std::size_t>(x) * static_cast<std::size_t>(w.y.size) +
             static_cast<std::size_t>(y)] = p_x1[static_cast<std::size_t>(x)] * s;
    }
  std::vector<double> lw(w.table.size());
  for (std::size_t i = 0; i < lw.size(); ++i)
    lw[i] = w.table[i] > 0.0 ? std::log(w.table[i]) : -kInf;
  const FiCloud cloud = build_fi_cloud(anchor, w.x1.size, w.y.size, p_x2.probs(), lw,
                                       grid, true, true);
  const double t0 = cloud.t_zero(r2).value();

  // The (f - I)-maximizing witness identifies the dominant conditional type.
  std::vector<double> witness;
  {
    double best = -kInf;
    for (const auto& pt : cloud.points) {
      if (pt.i > r2) continue;
      if (pt.f - pt.i > best) {
        best = pt.f - pt.i;
        witness = pt.witness;
      }
    }
  }

  const std::vector<int> comp1 = nearest_composition(p_x1.probs(), n);
  const std::vector<int> comp2 = nearest_composition(p_x2.probs(), n);

  std::vector<double> s_vals(trials, 0.0);
  std::vector<std::uint32_t> dom_counts(trials, 0);
  const double tv_ball = 1.0 / (2.0 * double(grid.m));

  auto trial = [&](std::uint64_t t) {
    Rng rng = Rng::stream(seed, t);
    const std::vector<int> x1 = sample_from_type(comp1, n, rng);
    std::vector<std::vector<int>> cb2;
    for (std::uint64_t j = 0; j < m2; ++j) cb2.push_back(sample_from_type(comp2, n, rng));
    // y drawn given (x1, x2_0) through the receiver-1 marginal.
    std::vector<int> y(static_cast<std::size_t>(n), 0);
    for (int k = 0; k < n; ++k) {
      const double u = rng.next_double();
      double acc = 0.0;
      int sym = w.y.size - 1;
      for (int yy = 0; yy < w.y.size; ++yy) {
        acc += w.at(x1[static_cast<std::size_t>(k)], cb2[0][static_cast<std::size_t>(k)], yy);
        if (u < acc) {
          sym = yy;
          break;
        }
      }
      y[static_cast<std::size_t>(k)] = sym;
    }
    // Interfering likelihood sum, excluding the transmitted codeword.
    double sum = 0.0;
    std::uint32_t dom = 0;
    for (std::uint64_t j = 1; j < m2; ++j) {
      double p = 1.0;
      for (int k = 0; k < n; ++k)
        p *= w.at(x1[static_cast<std::size_t>(k)], cb2[j][static_cast<std::size_t>(k)],
                  y[static_cast<std::size_t>(k)]);
      sum += p;
      if (!witness.empty()) {
        // Empirical joint type of (x1, x2_j, y) vs the witness, layout (a,b,y).
        std::vector<double> type(witness.size(), 0.0);
        for (int k = 0; k < n; ++k) {
          const std::size_t cell =
              (static_cast<std::size_t>(x1[static_cast<std::size_t>(k)]) *
                   static_cast<std::size_t>(w.x2.size) +
               static_cast<std::size_t>(cb2[j][static_cast<std::size_t>(k)])) *
                  static_cast<std::size_t>(w.y.size) +
              static_cast<std::size_t>(y[static_cast<std::size_t>(k)]);
          type[cell] += 1.0 / double(n);
        }
        double tv = 0.0;
        for (std::size_t c = 0; c < type.size(); ++c)
          tv += std::abs(type[c] - witness[c]);
        if (0.5 * tv <= tv_ball) ++dom;
      }
    }
    s_vals[t] = sum > 0.0 ? std::log(sum) / double(n) : -kInf;
    dom_counts[t] = dom;
  };

  if (opts.threads <= 1) {
    for (std::uint64_t t = 0; t < trials; ++t) trial(t);
  } else {
    std::atomic<std::uint64_t> cursor{0};
    auto worker = [&]() {
      while (true) {
        const std::uint64_t t = cursor.fetch_add(1);
        if (t >= trials) break;
        trial(t);
      }
    };
    std::vector<std::thread> pool;
    for (int i = 0; i < opts.threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  EnumeratorStats stats;
  stats.n = n;
  stats.trials = trials;
  stats.analytic_t0 = t0;
  stats.dominant_type_counts = dom_counts;

  std::vector<double> sorted = s_vals;
  std::sort(sorted.begin(), sorted.end());
  stats.threshold_estimate =
      trials % 2 ? sorted[trials / 2]
                 : 0.5 * (sorted[trials / 2 - 1] + sorted[trials / 2]);
  std::uint64_t above = 0;
  for (double s : s_vals)
    if (s >= t0 - stats.delta) ++above;
  stats.frac_above_t0_minus_delta = trials ? double(above) / double(trials) : 0.0;

  const double lo = sorted.front(), hi = sorted.back();
  const int n_t = 41;
  for (int i = 0; i < n_t; ++i) {
    const double t = lo + (hi - lo) * double(i) / double(n_t - 1);
    std::uint64_t cnt = 0;
    for (double s : s_vals)
      if (s >= t) ++cnt;
    stats.tail_t.push_back(t);
    stats.tail_p.push_back(double(cnt) / double(trials));
  }
  return stats;
}

double exact_ensemble_error_ordinary(const Dmc2User& dmc, const JointDist& p_x1,
                                     const JointDist& p_x2, int m1, int m2, int n) {
  if (m1 > 3 || m2 > 3 || n > 3)
    fail(ErrorCode::kGuardExceeded, "toy ensemble enumeration is limited to m<=3, n<=3");
  const MarginalChannel w = marginal_channel(dmc, 1);

  // All sequences in the two type classes.
  auto type_class = [&](const std::vector<double>& p, int alphabet) {
    const std::vector<int> comp = nearest_composition(p, n);
    std::vector<int> word;
    for (int s = 0; s < alphabet; ++s)
      for (int c = 0; c < comp[static_cast<std::size_t>(s)]; ++c) word.push_back(s);
    std::sort(word.begin(), word.end());
    std::vector<std::vector<int>> seqs;
    do {
      seqs.push_back(word);
    } while (std::next_permutation(word.begin(), word.end()));
    return seqs;
  };
  const auto t1 = type_class(p_x1.probs(), w.x1.size);
  const auto t2 = type_class(p_x2.probs(), w.x2.size);

  // Enumerate codebooks as tuples of type-class indices.
  std::vector<int> radix;
  for (int i = 0; i < m1; ++i) radix.push_back(static_cast<int>(t1.size()));
  for (int j = 0; j < m2; ++j) radix.push_back(static_cast<int>(t2.size()));

  double total = 0.0;
  std::uint64_t books = 0;
  enumerate_assignments(radix, [&](const std::vector<int>& pick) {
    ++books;
    std::vector<const std::vector<int>*> cb1, cb2;
    for (int i = 0; i < m1; ++i) cb1.push_back(&t1[static_cast<std::size_t>(pick[static_cast<std::size_t>(i)])]);
    for (int j = 0; j < m2; ++j)
      cb2.push_back(&t2[static_cast<std::size_t>(pick[static_cast<std::size_t>(m1 + j)])]);

    auto score = [&](const std::vector<int>& y, int i) {
      double s = 0.0;
      for (int j = 0; j < m2; ++j) {
        double p = 1.0;
        for (int k = 0; k < n; ++k)
          p *= w.at((*cb1[static_cast<std::size_t>(i)])[static_cast<std::size_t>(k)],
                    (*cb2[static_cast<std::size_t>(j)])[static_cast<std::size_t>(k)],
                    y[static_cast<std::size_t>(k)]);
        s += p;
      }
      return s;
    };

    double pe = 0.0;
    std::vector<int> yradix(static_cast<std::size_t>(n), w.y.size);
    enumerate_assignments(yradix, [&](const std::vector<int>& y) {
      double py = 1.0;
      for (int k = 0; k < n; ++k)
        py *= w.at((*cb1[0])[static_cast<std::size_t>(k)],
                   (*cb2[0])[static_cast<std::size_t>(k)], y[static_cast<std::size_t>(k)]);
      if (py == 0.0 || m1 == 1) return;
      const double s0 = score(y, 0);
      for (int i = 1; i < m1; ++i)
        if (score(y, i) >= s0) {
          pe += py;
          return;
        }
    });
    total += pe;
  });
  return total / double(books);
}

}  // namespace ifcx
