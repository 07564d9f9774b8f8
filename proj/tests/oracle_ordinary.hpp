#pragma once

// Memoization-free, pruning-free nested-grid evaluation of the ordinary
// exponent. Shares the elementary measure arithmetic and the tie-break with
// the library but none of its search organization: no cloud store, no
// Pareto frontier, no candidate ordering, no divergence pruning.

#include <algorithm>
#include <cmath>
#include <vector>

#include "ifcx/channels.hpp"
#include "ifcx/infomeasures.hpp"
#include "ifcx/ordinary.hpp"
#include "ifcx/simplexopt.hpp"

namespace ifcx_oracle {

struct BruteResult {
  double value = std::numeric_limits<double>::infinity();
  std::vector<double> argmin;  // (x1, x2, y1) flattening
};

inline BruteResult exponent_ordinary_brute(const ifcx::Dmc2User& dmc,
                                           const ifcx::JointDist& p_x1,
                                           const ifcx::JointDist& p_x2,
                                           const ifcx::RatePair& rates,
                                           ifcx::GridSpec grid) {
  using namespace ifcx;
  const MarginalChannel w = marginal_channel(dmc, 1);
  const int nx1 = w.x1.size, nx2 = w.x2.size, ny = w.y.size;
  std::vector<double> lw(w.table.size());
  for (std::size_t i = 0; i < lw.size(); ++i)
    lw[i] = w.table[i] > 0.0 ? std::log(w.table[i]) : -kInf;

  const auto& y_opts = grid_pmfs(ny, grid.m);
  const auto& x1_opts = grid_pmfs(nx1, grid.m);
  const double tol = 1.0 / (2.0 * double(grid.m));

  std::vector<double> weights(static_cast<std::size_t>(nx1 * nx2));
  for (int a = 0; a < nx1; ++a)
    for (int b = 0; b < nx2; ++b)
      weights[static_cast<std::size_t>(a * nx2 + b)] =
          p_x1[static_cast<std::size_t>(a)] * p_x2[static_cast<std::size_t>(b)];

  const std::size_t n_in = static_cast<std::size_t>(nx1 * nx2);
  const std::size_t joint_cells = n_in * static_cast<std::size_t>(ny);

  BruteResult best;

  std::vector<std::size_t> outer_odo(n_in, 0);
  std::vector<double> joint(joint_cells, 0.0);
  while (true) {
    // Outer joint: weight x grid conditional of y.
    for (std::size_t c = 0; c < n_in; ++c)
      for (int y = 0; y < ny; ++y)
        joint[c * static_cast<std::size_t>(ny) + static_cast<std::size_t>(y)] =
            weights[c] * y_opts[outer_odo[c]][static_cast<std::size_t>(y)];

    double d = 0.0;
    for (std::size_t i = 0; i < joint_cells; ++i) {
      const double q = joint[i];
      if (q == 0.0) continue;
      const double ww = w.table[i];
      if (ww == 0.0) {
        d = kInf;
        break;
      }
      d += q * std::log(q / (weights[i / static_cast<std::size_t>(ny)] * ww));
    }
    if (d < 0.0 && d > -1e-12) d = 0.0;

    if (d < kInf) {
      const ExtReal f_q = f_value_span(joint, lw);
      // t0 on the unpruned cloud anchored at the joint's (x1, y) marginal.
      std::vector<double> anchor_q(static_cast<std::size_t>(nx1 * ny), 0.0);
      for (int a = 0; a < nx1; ++a)
        for (int b = 0; b < nx2; ++b)
          for (int y = 0; y < ny; ++y)
            anchor_q[static_cast<std::size_t>(a * ny + y)] +=
                joint[static_cast<std::size_t>((a * nx2 + b) * ny + y)];
      const FiCloud cloud_q =
          build_fi_cloud(anchor_q, nx1, ny, p_x2.probs(), lw, grid, /*prune=*/false);
      const ExtReal t0 = cloud_q.t_zero(rates.r2);

      // Fixed (x2, y) marginal of the outer joint.
      std::vector<double> fixed(static_cast<std::size_t>(nx2 * ny), 0.0);
      for (int a = 0; a < nx1; ++a)
        for (int b = 0; b < nx2; ++b)
          for (int y = 0; y < ny; ++y)
            fixed[static_cast<std::size_t>(b * ny + y)] +=
                joint[static_cast<std::size_t>((a * nx2 + b) * ny + y)];

      double ehat1 = kInf, ehat2 = kInf;
      std::vector<std::size_t> odo(static_cast<std::size_t>(nx2 * ny), 0);
      std::vector<double> qt(joint_cells, 0.0);
      while (true) {
        for (int b = 0; b < nx2; ++b)
          for (int y = 0; y < ny; ++y) {
            const double mass = fixed[static_cast<std::size_t>(b * ny + y)];
            const auto& pmf = x1_opts[odo[static_cast<std::size_t>(b * ny + y)]];
            for (int a = 0; a < nx1; ++a)
              qt[static_cast<std::size_t>((a * nx2 + b) * ny + y)] =
                  mass * pmf[static_cast<std::size_t>(a)];
          }
        bool pass = true;
        for (int a = 0; a < nx1 && pass; ++a) {
          double mx = 0.0;
          for (int b = 0; b < nx2; ++b)
            for (int y = 0; y < ny; ++y)
              mx += qt[static_cast<std::size_t>((a * nx2 + b) * ny + y)];
          if (std::abs(mx - p_x1[static_cast<std::size_t>(a)]) > tol) pass = false;
        }
        if (pass) {
          const ExtReal f_t = f_value_span(qt, lw);
          std::vector<double> anchor(static_cast<std::size_t>(nx1 * ny), 0.0);
          for (int a = 0; a < nx1; ++a)
            for (int b = 0; b < nx2; ++b)
              for (int y = 0; y < ny; ++y)
                anchor[static_cast<std::size_t>(a * ny + y)] +=
                    qt[static_cast<std::size_t>((a * nx2 + b) * ny + y)];
          const FiCloud cloud =
              build_fi_cloud(anchor, nx1, ny, p_x2.probs(), lw, grid, /*prune=*/false);
          const double e1 = cloud.e_one(f_t, t0, f_q, rates.r2).value();

          // MI = H(X1) + H(X2,Y) - H(everything), clipped at zero.
          double h1 = 0.0;
          for (int a = 0; a < nx1; ++a) {
            double mx = 0.0;
            for (int b = 0; b < nx2; ++b)
              for (int y = 0; y < ny; ++y)
                mx += qt[static_cast<std::size_t>((a * nx2 + b) * ny + y)];
            if (mx > 0.0) h1 -= mx * std::log(mx);
          }
          const double h2y = entropy_span(fixed);
          const double hall = entropy_span(qt);
          const double mi = clip_positive(h1 + h2y - hall);

          if (mi + e1 < ehat1) ehat1 = mi + e1;
          if (e1 < ehat2) ehat2 = e1;
        }
        std::size_t k = odo.size();
        bool done = true;
        while (k > 0) {
          --k;
          if (++odo[k] < x1_opts.size()) {
            done = false;
            break;
          }
          odo[k] = 0;
        }
        if (done) break;
      }

      const double estar = std::max(clip_positive(ehat1 - rates.r1), ehat2);
      const double total = d + estar;
      const bool better =
          total < best.value ||
          (total == best.value && !best.argmin.empty() &&
           std::lexicographical_compare(joint.begin(), joint.end(),
                                        best.argmin.begin(), best.argmin.end()));
      if (better) {
        best.value = total;
        best.argmin = joint;
      }
    }

    std::size_t k = n_in;
    bool done = true;
    while (k > 0) {
      --k;
      if (++outer_odo[k] < y_opts.size()) {
        done = false;
        break;
      }
      outer_odo[k] = 0;
    }
    if (done) break;
  }
  return best;
}

}  // namespace ifcx_oracle
