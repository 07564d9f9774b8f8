#pragma once

#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "ifcx/errors.hpp"

namespace ifcx {

// Finite alphabet of symbols 0..size-1. Symbolic labels, when a user has
// any, live in the CLI layer only.
struct Alphabet {
  int size = 1;

  explicit Alphabet(int s = 1) : size(s) {
    if (s < 1) fail(ErrorCode::kInvalidArgument, "alphabet size must be >= 1");
  }
  friend bool operator==(const Alphabet&, const Alphabet&) = default;
};

constexpr double kPmfTolerance = 1e-9;

// Probability mass function over a product of finite alphabets, stored
// row-major (first axis slowest). Immutable after construction.
class JointDist {
 public:
  JointDist() = default;

  // Validates nonnegativity and total mass 1 within kPmfTolerance, then
  // renormalizes exactly once.
  JointDist(std::vector<Alphabet> axes, std::vector<double> probs)
      : axes_(std::move(axes)), probs_(std::move(probs)) {
    std::size_t n = 1;
    for (const auto& a : axes_) n *= static_cast<std::size_t>(a.size);
    if (n != probs_.size())
      fail(ErrorCode::kDimensionMismatch, "pmf size does not match axes");
    double total = 0.0;
    for (double p : probs_) {
      if (p < 0.0) fail(ErrorCode::kNegativeProbability, "negative pmf entry");
      total += p;
    }
    if (std::abs(total - 1.0) > kPmfTolerance)
      fail(ErrorCode::kRowSum, "pmf mass deviates from 1 beyond tolerance");
    if (total != 1.0 && total > 0.0) {
      for (double& p : probs_) p /= total;
    }
  }

  // Skips validation and renormalization. For values produced by exact
  // arithmetic on already-valid pmfs (marginals, grid joints).
  static JointDist from_raw_unchecked(std::vector<Alphabet> axes,
                                      std::vector<double> probs) {
    JointDist d;
    d.axes_ = std::move(axes);
    d.probs_ = std::move(probs);
    return d;
  }

  static JointDist uniform(std::vector<Alphabet> axes) {
    std::size_t n = 1;
    for (const auto& a : axes) n *= static_cast<std::size_t>(a.size);
    return JointDist(std::move(axes), std::vector<double>(n, 1.0 / double(n)));
  }

  static JointDist unit_mass(std::vector<Alphabet> axes,
                             const std::vector<int>& coords) {
    std::size_t n = 1;
    for (const auto& a : axes) n *= static_cast<std::size_t>(a.size);
    std::vector<double> p(n, 0.0);
    JointDist d;
    d.axes_ = std::move(axes);
    d.probs_ = std::move(p);
    d.probs_[d.index(coords)] = 1.0;
    return d;
  }

  int rank() const { return static_cast<int>(axes_.size()); }
  const std::vector<Alphabet>& axes() const { return axes_; }
  int axis_size(int i) const { return axes_[static_cast<std::size_t>(i)].size; }
  std::size_t cells() const { return probs_.size(); }
  const std::vector<double>& probs() const { return probs_; }
  double operator[](std::size_t i) const { return probs_[i]; }

  std::size_t index(const std::vector<int>& coords) const {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < axes_.size(); ++i)
      idx = idx * static_cast<std::size_t>(axes_[i].size) +
            static_cast<std::size_t>(coords[i]);
    return idx;
  }

  double at(const std::vector<int>& coords) const { return probs_[index(coords)]; }

  friend bool operator==(const JointDist& a, const JointDist& b) {
    return a.axes_ == b.axes_ && a.probs_ == b.probs_;
  }

 private:
  std::vector<Alphabet> axes_;
  std::vector<double> probs_;
};

// Conditional table p(col | row): `rows` conditioning cells, each a pmf
// over `cols` output symbols, stored row-major.
struct Conditional {
  int rows = 0;
  int cols = 0;
  std::vector<double> p;

  double at(int row, int col) const {
    return p[static_cast<std::size_t>(row) * static_cast<std::size_t>(cols) +
             static_cast<std::size_t>(col)];
  }
};

}  // namespace ifcx
