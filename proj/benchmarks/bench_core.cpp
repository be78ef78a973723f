// Micro-benchmarks for the hot paths: statevector gate application, shot
// sampling, reconstruction, and the distance metric.

#include <benchmark/benchmark.h>

#include <map>
#include <string>
#include <vector>

#include "qcut/circuit.hpp"
#include "qcut/cutting.hpp"
#include "qcut/metrics.hpp"
#include "qcut/rng.hpp"
#include "qcut/simulator.hpp"

namespace {

void BM_GateLayer(benchmark::State& state) {
  const std::size_t wires = std::size_t(state.range(0));
  qcut::Circuit circuit;
  circuit.wire_count = wires;
  for (std::size_t w = 0; w < wires; ++w)
    circuit.gates.push_back(qcut::Gate::h(w));
  for (std::size_t w = 0; w + 1 < wires; ++w)
    circuit.gates.push_back(qcut::Gate::cnot(w, w + 1));
  circuit.observable = qcut::Observable::all_z(wires);

  for (auto _ : state) {
    benchmark::DoNotOptimize(qcut::exact_expectation(circuit));
  }
  state.SetItemsProcessed(std::int64_t(state.iterations()) *
                          std::int64_t(circuit.gates.size()));
}
BENCHMARK(BM_GateLayer)->Arg(8)->Arg(12)->Arg(16);

void BM_SampledExpectation(benchmark::State& state) {
  const std::size_t shots = std::size_t(state.range(0));
  qcut::Circuit circuit = qcut::build_ghz(6);
  const qcut::NoiseModel noise = qcut::reference_noise_model();

  std::uint64_t seed = 1;
  for (auto _ : state) {
    qcut::RngStream rng(seed++);
    benchmark::DoNotOptimize(qcut::sampled_expectation(
        circuit, circuit.observable, shots, &noise, rng));
  }
  state.SetItemsProcessed(std::int64_t(state.iterations()) *
                          std::int64_t(shots));
}
BENCHMARK(BM_SampledExpectation)->Arg(100)->Arg(1000);

void BM_Reconstruct(benchmark::State& state) {
  qcut::Circuit circuit = qcut::build_benchmark();
  const qcut::FragmentSet fragments = qcut::cut(circuit);
  const std::map<std::string, double> results =
      qcut::exact_variant_results(fragments);

  for (auto _ : state) {
    benchmark::DoNotOptimize(qcut::reconstruct(results, fragments));
  }
}
BENCHMARK(BM_Reconstruct);

void BM_Hellinger(benchmark::State& state) {
  const std::size_t samples = std::size_t(state.range(0));
  qcut::RngStream rng(9);
  std::vector<double> a(samples), b(samples);
  for (double& x : a) x = rng.next_in(-1.0, 1.0);
  for (double& x : b) x = rng.next_in(-0.8, 1.2);

  for (auto _ : state) {
    const auto [p, q] = qcut::bin_pair(a, b);
    benchmark::DoNotOptimize(qcut::hellinger(p, q));
  }
  state.SetItemsProcessed(std::int64_t(state.iterations()) *
                          std::int64_t(samples));
}
BENCHMARK(BM_Hellinger)->Arg(1000)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
