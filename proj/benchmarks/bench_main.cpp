#include <benchmark/benchmark.h>

#include <cmath>

#include "ifcx/channels.hpp"
#include "ifcx/exponent_engine.hpp"
#include "ifcx/hk.hpp"
#include "ifcx/infomeasures.hpp"
#include "ifcx/ordinary.hpp"
#include "ifcx/simplexopt.hpp"
#include "ifcx/verification.hpp"

namespace {

using namespace ifcx;

const Dmc2User& zchan() {
  static const Dmc2User z = make_z_channel(0.01);
  return z;
}

std::vector<double> zlog_w() {
  const MarginalChannel w = marginal_channel(zchan(), 1);
  std::vector<double> lw(w.table.size());
  for (std::size_t i = 0; i < lw.size(); ++i) lw[i] = std::log(w.table[i]);
  return lw;
}

void BM_EntropySpan(benchmark::State& state) {
  const JointDist q = JointDist::uniform(
      {Alphabet(2), Alphabet(2), Alphabet(2), Alphabet(2), Alphabet(2)});
  for (auto _ : state) benchmark::DoNotOptimize(entropy_span(q.probs()));
}
BENCHMARK(BM_EntropySpan);

void BM_MutualInformation(benchmark::State& state) {
  const JointDist q = JointDist::uniform({Alphabet(2), Alphabet(3), Alphabet(2)});
  for (auto _ : state)
    benchmark::DoNotOptimize(mutual_information(q, {0}, {1, 2}));
}
BENCHMARK(BM_MutualInformation);

void BM_CloudBuild(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const auto lw = zlog_w();
  const std::vector<double> anchor{0.35, 0.15, 0.30, 0.20};
  const std::vector<double> pb{0.5, 0.5};
  for (auto _ : state)
    benchmark::DoNotOptimize(build_fi_cloud(anchor, 2, 2, pb, lw, GridSpec(m)));
}
BENCHMARK(BM_CloudBuild)->Arg(3)->Arg(6)->Arg(12);

void BM_CloudQueries(benchmark::State& state) {
  const auto lw = zlog_w();
  const FiCloud cloud = build_fi_cloud({0.35, 0.15, 0.30, 0.20}, 2, 2, {0.5, 0.5},
                                       lw, GridSpec(6));
  double r = 0.0;
  for (auto _ : state) {
    r = r > 0.5 ? 0.0 : r + 1e-3;
    benchmark::DoNotOptimize(cloud.t_zero(r));
    benchmark::DoNotOptimize(cloud.e_one(ExtReal(-0.4), ExtReal(-0.3), ExtReal(-0.2), r));
  }
}
BENCHMARK(BM_CloudQueries);

void BM_ExponentOrdinary(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const JointDist u = JointDist::uniform({Alphabet(2)});
  for (auto _ : state)
    benchmark::DoNotOptimize(
        exponent_ordinary(zchan(), u, u, RatePair(0.05, 0.1), GridSpec(m)));
}
BENCHMARK(BM_ExponentOrdinary)->Arg(3)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);

void BM_ExponentHkCollapsed(benchmark::State& state) {
  const MarginalChannel w = marginal_channel(zchan(), 1);
  HkMaps maps{Alphabet(2), Alphabet(1), Alphabet(1), Alphabet(2), {0, 1}, {0, 1}};
  const VirtualChannel vch = make_hk_virtual_channel(w, maps);
  const std::vector<JointDist> pz = {
      JointDist::uniform({Alphabet(2)}), JointDist::uniform({Alphabet(1)}),
      JointDist::uniform({Alphabet(1)}), JointDist::uniform({Alphabet(2)})};
  for (auto _ : state)
    benchmark::DoNotOptimize(
        exponent_hk(vch, pz, HkRates(0.05, 0.0, 0.0, 0.1), GridSpec(3)));
}
BENCHMARK(BM_ExponentHkCollapsed)->Unit(benchmark::kMillisecond);

void BM_SimulateTrialBatch(benchmark::State& state) {
  const JointDist u = JointDist::uniform({Alphabet(2)});
  const Dmc2User z = make_z_channel(0.1);
  std::uint64_t seed = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        simulate_ordinary(z, u, u, RatePair(0.05, 0.1), 8, 100, seed++));
  }
}
BENCHMARK(BM_SimulateTrialBatch)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
