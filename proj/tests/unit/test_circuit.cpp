#include <doctest.h>

#include <cmath>
#include <set>

#include "qcut/circuit.hpp"
#include "qcut/error.hpp"

using namespace qcut;

TEST_CASE("gate helpers carry the right arity and kind") {
  CHECK(gate_arity(GateKind::H) == 1);
  CHECK(gate_arity(GateKind::CNOT) == 2);
  CHECK(gate_is_rotation(GateKind::RX));
  CHECK(gate_is_rotation(GateKind::RY));
  CHECK(gate_is_rotation(GateKind::RZ));
  CHECK_FALSE(gate_is_rotation(GateKind::CZ));
  const Gate g = Gate::cnot(2, 5);
  CHECK(g.wires == std::vector<std::size_t>{2, 5});
}

TEST_CASE("validate accepts the built-in families") {
  CHECK_NOTHROW(validate(build_benchmark()));
  CHECK_NOTHROW(validate(build_alt_benchmark()));
  CHECK_NOTHROW(validate(build_ghz(15)));
  CHECK_NOTHROW(validate(
      build_deutsch_jozsa(14, OracleSpec::balanced_parity((1ULL << 14) - 1))));
}

TEST_CASE("validate rejects broken circuits") {
  Circuit c;
  c.wire_count = 2;
  c.observable = Observable::all_z(2);

  SUBCASE("wire index out of range") {
    c.gates.push_back(Gate::h(2));
    CHECK_THROWS_AS(validate(c), Error);
  }
  SUBCASE("duplicate wires on a two-qubit gate") {
    c.gates.push_back({GateKind::CZ, {1, 1}});
    CHECK_THROWS_AS(validate(c), Error);
  }
  SUBCASE("non-finite rotation angle") {
    c.gates.push_back(Gate::rx(std::nan(""), 0));
    CHECK_THROWS_AS(validate(c), Error);
  }
  SUBCASE("observable length mismatch") {
    c.gates.push_back(Gate::h(0));
    c.observable = Observable::all_z(3);
    CHECK_THROWS_AS(validate(c), Error);
  }
  SUBCASE("cut position past the gate list") {
    c.gates.push_back(Gate::h(0));
    c.cuts.push_back({0, 5});
    CHECK_THROWS_AS(validate(c), Error);
  }
  SUBCASE("more wires than the statevector cap") {
    Circuit wide;
    wide.wire_count = kMaxWires + 1;
    wide.observable = Observable::all_z(kMaxWires + 1);
    CHECK_THROWS_AS(validate(wide), Error);
  }
}

TEST_CASE("ghz builder lays out one H and a CNOT fan-out") {
  const Circuit g = build_ghz(5);
  CHECK(g.wire_count == 5);
  REQUIRE(g.gates.size() == 5);
  CHECK(g.gates[0].kind == GateKind::H);
  for (std::size_t i = 1; i < 5; ++i) {
    CHECK(g.gates[i].kind == GateKind::CNOT);
    CHECK(g.gates[i].wires[1] == i);
  }
  CHECK(g.observable == Observable::all_z(5));
  CHECK(g.cuts.empty());
}

TEST_CASE("deutsch-jozsa builder: auxiliary wire and oracle shape") {
  const std::size_t n = 4;
  const Circuit c = build_deutsch_jozsa(n, OracleSpec::balanced_parity(0b1011));
  CHECK(c.wire_count == n + 1);
  // X then H on the auxiliary, H layer on inputs, oracle CNOTs, final H layer.
  std::size_t cnots = 0;
  for (const Gate& g : c.gates)
    if (g.kind == GateKind::CNOT) {
      ++cnots;
      CHECK(g.wires[1] == n);  // kickback always targets the auxiliary
    }
  CHECK(cnots == 3);  // popcount(0b1011)
  CHECK(c.observable.paulis == "ZZZZI");
}

TEST_CASE("benchmark circuits ship with their two cuts on wires 1 and 3") {
  for (const Circuit& c : {build_benchmark(), build_alt_benchmark()}) {
    REQUIRE(c.cuts.size() == 2);
    std::set<std::size_t> wires{c.cuts[0].wire, c.cuts[1].wire};
    CHECK(wires == std::set<std::size_t>{1, 3});
    CHECK(c.wire_count == 15);
    CHECK(c.observable == Observable::all_z(15));
  }
}

TEST_CASE("last_gate_on_wire finds the final touch and rejects bare wires") {
  Circuit c;
  c.wire_count = 3;
  c.gates = {Gate::h(0), Gate::cz(0, 1), Gate::rx(0.3, 0)};
  c.observable = Observable::all_z(3);
  CHECK(last_gate_on_wire(c, 0) == 2);
  CHECK(last_gate_on_wire(c, 1) == 1);
  CHECK_THROWS_AS(last_gate_on_wire(c, 2), Error);
}

TEST_CASE("probes stay away from zero expectation") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const Probe probe = build_probe(seed);
    REQUIRE(probe.circuit.gates.size() == 1);
    CHECK(probe.circuit.gates[0].kind == GateKind::RX);
    const double theta = probe.circuit.gates[0].angle;
    CHECK(theta > angles::kProbeThetaLo);
    CHECK(theta < angles::kProbeThetaHi);
    CHECK(std::fabs(probe.expected) >= angles::kProbeMinExpected);
    CHECK(probe.expected == doctest::Approx(std::cos(theta)).epsilon(1e-12));
  }
}

TEST_CASE("probe construction is deterministic in the seed") {
  const Probe a = build_probe(42);
  const Probe b = build_probe(42);
  CHECK(a.circuit.gates[0].angle == b.circuit.gates[0].angle);
  CHECK(a.expected == b.expected);
}
