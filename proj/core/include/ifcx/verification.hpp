#pragma once

#include <cstdint>
#include <vector>

#include "ifcx/channels.hpp"
#include "ifcx/ordinary.hpp"
#include "ifcx/simplexopt.hpp"

namespace ifcx {

// SplitMix64 keyed by (master seed, stream id). Each Monte Carlo trial gets
// its own stream so results do not depend on scheduling.
class Rng {
 public:
  explicit Rng(std::uint64_t state) : state_(state) {}

  static Rng stream(std::uint64_t master_seed, std::uint64_t stream_id) {
    return Rng(mix(master_seed + 0x9e3779b97f4a7c15ULL * (stream_id + 1)));
  }

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double next_double() {  // uniform in [0,1)
    return double(next_u64() >> 11) * 0x1.0p-53;
  }
  int next_int(int n) {  // uniform in [0,n)
    return static_cast<int>(next_double() * double(n)) % n;
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 33)) * 0xff51afd7ed558ccdULL;
    z = (z ^ (z >> 33)) * 0xc4ceb9fe1a85ec53ULL;
    return z ^ (z >> 33);
  }
  std::uint64_t state_;
};

// Explicit probability space for the dependent-union lemma with one indexed
// block: L1 copies of V1, L2 copies of the block (V2..VK), N event rows.
// Sets are dense membership tables.
struct LemmaInstance {
  std::vector<int> sizes;                // |V1|..|VK|
  std::vector<std::vector<double>> pmfs; // per variable
  int l1 = 1, l2 = 1;
  // a0[l][v1]; a[l][k][v1 * |V_{k+2}| + v]; g[l][k][v] for k = 0..K-2
  std::vector<std::vector<std::uint8_t>> a0;
  std::vector<std::vector<std::vector<std::uint8_t>>> a;
  std::vector<std::vector<std::vector<std::uint8_t>>> g;

  int k_vars() const { return static_cast<int>(sizes.size()); }
  int n_events() const { return static_cast<int>(a0.size()); }
};

struct LemmaBounds {
  double upper = 1.0;
  double lower = 0.0;
  bool conditions_hold = false;
};

// Exact probability of the union event by full enumeration of the joint
// assignment space (guard: <= 10^7 atoms).
double exact_union_probability(const LemmaInstance& inst);

LemmaBounds lemma3_bounds(const LemmaInstance& inst);

// Multi-index generalization: J indexed groups Z1..ZJ plus the V block.
struct Lemma4Instance {
  std::vector<int> z_sizes;                 // |Z1|..|ZJ|
  std::vector<std::vector<double>> z_pmfs;
  std::vector<int> counts;                  // N_1..N_J
  std::vector<int> v_sizes;                 // |V1|..|VK|
  std::vector<std::vector<double>> v_pmfs;
  int n_block = 1;                          // N_{J+1}
  // a0[l][z-composite]; a[l][k][z-composite * |V_k| + v]; g[l][k][v]
  std::vector<std::vector<std::uint8_t>> a0;
  std::vector<std::vector<std::vector<std::uint8_t>>> a;
  std::vector<std::vector<std::vector<std::uint8_t>>> g;

  int j_groups() const { return static_cast<int>(z_sizes.size()); }
  int k_vars() const { return static_cast<int>(v_sizes.size()); }
  int n_events() const { return static_cast<int>(a0.size()); }
};

double exact_union_probability4(const Lemma4Instance& inst);
LemmaBounds lemma4_bounds(const Lemma4Instance& inst);

// de Caen: P(union) >= sum_i P(A_i)^2 / sum_j P(A_i cap A_j). Events with
// zero probability contribute zero.
double decaen_lower_bound(const std::vector<std::vector<std::uint8_t>>& events,
                          const std::vector<double>& atom_pmf);

struct SimReport {
  int n = 0;
  std::uint64_t trials = 0;
  double pe_hat = 0.0;
  double wilson_lo = 0.0, wilson_hi = 0.0;
  std::uint64_t tie_events = 0;
  bool exact_y = true;
  std::uint64_t seed = 0;
  std::vector<std::vector<int>> compositions;  // symbol counts per codebook
};

struct SimOptions {
  int threads = 1;
  std::uint64_t exact_y_limit = 1u << 20;  // enumerate y^n up to this size
  std::uint64_t messages_limit = 1u << 16; // guard on the message product
};

SimReport simulate_ordinary(const Dmc2User& dmc, const JointDist& p_x1,
                            const JointDist& p_x2, const RatePair& rates, int n,
                            std::uint64_t trials, std::uint64_t seed,
                            const SimOptions& opts = {});

struct HkSimRates {
  double r11 = 0.0, r12 = 0.0, r21 = 0.0, r22 = 0.0;
};

SimReport simulate_hk(const VirtualChannel& vch, const std::vector<JointDist>& p_z,
                      const HkSimRates& rates, int n, std::uint64_t trials,
                      std::uint64_t seed, const SimOptions& opts = {});

struct EnumeratorStats {
  int n = 0;
  std::uint64_t trials = 0;
  double analytic_t0 = 0.0;        // from t_zero on the channel-true anchor
  double threshold_estimate = 0.0; // median of (1/n) log likelihood-sum
  double delta = 0.1;
  double frac_above_t0_minus_delta = 0.0;
  std::vector<double> tail_t;      // t grid
  std::vector<double> tail_p;      // empirical P{ (1/n) log sum >= t }
  std::vector<std::uint32_t> dominant_type_counts;  // per-trial N2 near the optimizer
};

// Empirical location of the interfering likelihood-sum threshold versus the
// analytic t0 computed on the channel-consistent (X1,Y1) anchor at the given
// grid resolution.
EnumeratorStats enumerator_threshold_check(const Dmc2User& dmc, const JointDist& p_x1,
                                           const JointDist& p_x2, double r2, int n,
                                           std::uint64_t trials, std::uint64_t seed,
                                           GridSpec grid,
                                           const SimOptions& opts = {});

// Toy-size exact ensemble average of the receiver-1 error probability by
// full codebook enumeration; oracle for the simulators.
double exact_ensemble_error_ordinary(const Dmc2User& dmc, const JointDist& p_x1,
                                     const JointDist& p_x2, int m1, int m2, int n);

// Largest-remainder rounding of n * p; the composition closest to n * p in
// total variation, ties resolved toward lower symbol indices.
std::vector<int> nearest_composition(const std::vector<double>& p, int n);

std::pair<double, double> wilson_interval(double p_hat, double trials,
                                          double z = 1.959963984540054);

}  // namespace ifcx
