#include <doctest.h>

#include <cmath>

#include "qcut/circuit.hpp"
#include "qcut/error.hpp"
#include "qcut/rng.hpp"
#include "qcut/simulator.hpp"

using namespace qcut;

namespace {

Circuit bell() {
  Circuit c;
  c.wire_count = 2;
  c.gates = {Gate::h(0), Gate::cnot(0, 1)};
  c.observable = Observable::all_z(2);
  return c;
}

}  // namespace

TEST_CASE("exact expectation on textbook states") {
  Circuit plus;
  plus.wire_count = 1;
  plus.gates = {Gate::h(0)};
  plus.observable = {"Z"};
  CHECK(exact_expectation(plus) == doctest::Approx(0.0).epsilon(1e-12));
  plus.observable = {"X"};
  CHECK(exact_expectation(plus) == doctest::Approx(1.0).epsilon(1e-12));

  CHECK(exact_expectation(bell()) == doctest::Approx(1.0).epsilon(1e-12));

  Circuit rot;
  rot.wire_count = 1;
  rot.gates = {Gate::rx(0.7, 0)};
  rot.observable = {"Z"};
  CHECK(exact_expectation(rot) == doctest::Approx(std::cos(0.7)).epsilon(1e-12));
}

TEST_CASE("all-identity observables evaluate to exactly 1") {
  Circuit c = bell();
  c.observable = Observable::identity(2);
  CHECK(exact_expectation(c) == 1.0);
}

TEST_CASE("statevector width cap is enforced") {
  Circuit wide;
  wide.wire_count = kMaxWires + 1;
  wide.observable = Observable::all_z(kMaxWires + 1);
  CHECK_THROWS_AS(exact_expectation(wide), Error);
}

TEST_CASE("statevector primitives") {
  Statevector sv(1);
  sv.apply(Gate::h(0));
  sv.apply(Gate::h(0));
  CHECK(std::abs(sv.amplitudes()[0] - 1.0) < 1e-12);

  sv.reset();
  sv.apply_pauli(0, 'X');
  CHECK(sv.population_one(0) == doctest::Approx(1.0).epsilon(1e-12));

  sv.reset();
  sv.apply(Gate::h(0));
  // |+> expressed in the X eigenbasis is the |0> column.
  sv.rotate_to_z_basis(0, 'X');
  CHECK(sv.population_one(0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("noiseless sampling converges to the exact value") {
  Circuit c;
  c.wire_count = 3;
  c.gates = {Gate::rx(0.9, 0), Gate::ry(1.3, 1), Gate::cnot(0, 1),
             Gate::rx(2.1, 2), Gate::cz(1, 2)};
  c.observable = Observable::all_z(3);
  const double exact = exact_expectation(c);

  RngStream rng(5);
  const std::size_t shots = 40000;
  const double sampled =
      sampled_expectation(c, c.observable, shots, nullptr, rng);
  CHECK(std::fabs(sampled - exact) < 5.0 / std::sqrt(double(shots)));
}

TEST_CASE("sampling is deterministic in the seed") {
  Circuit c = bell();
  const NoiseModel noise = reference_noise_model();
  RngStream a(11), b(11), other(12);
  const double va = sampled_expectation(c, c.observable, 2000, &noise, a);
  const double vb = sampled_expectation(c, c.observable, 2000, &noise, b);
  const double vc = sampled_expectation(c, c.observable, 2000, &noise, other);
  CHECK(va == vb);
  CHECK(va != vc);  // astronomically unlikely to collide
}

TEST_CASE("two-qubit depolarizing noise damps the Bell correlator to 0.99") {
  // Uniform Pauli-group depolarizing at p = 0.01 on CNOT leaves
  // (1-p)*1 + p*0 = 0.99 of the ZZ correlation.
  const NoiseModel noise = reference_noise_model();
  RngStream rng(123);
  const double value =
      sampled_expectation(bell(), bell().observable, 200000, &noise, rng);
  CHECK(value == doctest::Approx(0.99).epsilon(0.004));
}

TEST_CASE("thermal relaxation channel constants") {
  const NoiseModel noise = reference_noise_model();
  const GateChannel* rx = noise.channel_for(GateKind::RX);
  const GateChannel* ry = noise.channel_for(GateKind::RY);
  const GateChannel* cnot = noise.channel_for(GateKind::CNOT);
  REQUIRE(rx != nullptr);
  REQUIRE(ry != nullptr);
  REQUIRE(cnot != nullptr);
  CHECK(noise.channel_for(GateKind::CZ) == nullptr);
  CHECK(noise.channel_for(GateKind::H) == nullptr);

  REQUIRE(rx->thermal.has_value());
  CHECK(rx->thermal->prob == 0.02);
  REQUIRE(ry->thermal.has_value());
  CHECK(ry->thermal->prob == 0.015);
  REQUIRE(cnot->depolarizing.has_value());
  CHECK(cnot->depolarizing->prob == 0.01);

  // gamma = 1 - exp(-35ns / 50us); phase flip = (1 - exp(-35ns/t_phi)) / 2
  // with 1/t_phi = 1/30us - 1/(2 * 50us).
  CHECK(rx->thermal->gamma() == doctest::Approx(6.99755e-4).epsilon(1e-4));
  CHECK(rx->thermal->phase_flip_prob() ==
        doctest::Approx(4.08167e-4).epsilon(1e-4));
}

TEST_CASE("counts: totals, support, determinism") {
  const Circuit ghz = build_ghz(3);
  RngStream a(4), b(4);
  const Counts ca = sample_counts(ghz, 500, nullptr, a);
  const Counts cb = sample_counts(ghz, 500, nullptr, b);
  CHECK(ca == cb);

  std::uint64_t total = 0;
  for (const auto& [key, n] : ca) {
    total += n;
    CHECK(key.size() == 3);
    // Noiseless GHZ only ever measures the two extremal strings.
    CHECK((key == "000" || key == "111"));
  }
  CHECK(total == 500);
}

TEST_CASE("noise broadens the counts support") {
  const Circuit ghz = build_ghz(3);
  Circuit noisy_ghz = ghz;
  // Rebuild with CNOTs so the depolarizing channel has something to hit.
  const NoiseModel noise = reference_noise_model();
  RngStream rng(8);
  const Counts counts = sample_counts(noisy_ghz, 20000, &noise, rng);
  std::uint64_t leaked = 0;
  for (const auto& [key, n] : counts)
    if (key != "000" && key != "111") leaked += n;
  CHECK(leaked > 0);       // p = 0.01 per CNOT, two CNOTs, 20000 shots
  CHECK(leaked < 2000);    // but still rare
}
