#include "qcut/circuit.hpp"

#include <cmath>
#include <numbers>
#include <set>

#include "qcut/error.hpp"
#include "qcut/rng.hpp"

namespace qcut {

const char* to_string(GateKind kind) {
  switch (kind) {
    case GateKind::H: return "h";
    case GateKind::X: return "x";
    case GateKind::RX: return "rx";
    case GateKind::RY: return "ry";
    case GateKind::RZ: return "rz";
    case GateKind::CZ: return "cz";
    case GateKind::CNOT: return "cx";
  }
  return "?";
}

bool gate_is_rotation(GateKind kind) {
  return kind == GateKind::RX || kind == GateKind::RY || kind == GateKind::RZ;
}

std::size_t gate_arity(GateKind kind) {
  return (kind == GateKind::CZ || kind == GateKind::CNOT) ? 2 : 1;
}

bool operator==(const Gate& a, const Gate& b) {
  return a.kind == b.kind && a.wires == b.wires && a.angle == b.angle;
}

bool operator==(const Observable& a, const Observable& b) {
  return a.paulis == b.paulis;
}

bool operator==(const CutPoint& a, const CutPoint& b) {
  return a.wire == b.wire && a.position == b.position;
}

void validate(const Circuit& circuit) {
  if (circuit.wire_count == 0)
    fail(ErrorKind::Validation, "circuit has no wires");
  if (circuit.wire_count > kMaxWires)
    fail(ErrorKind::Capacity,
         "circuit width " + std::to_string(circuit.wire_count) +
             " exceeds supported maximum " + std::to_string(kMaxWires));
  for (std::size_t i = 0; i < circuit.gates.size(); ++i) {
    const Gate& g = circuit.gates[i];
    if (g.wires.size() != gate_arity(g.kind))
      fail(ErrorKind::Validation,
           "gate " + std::to_string(i) + ": wrong operand count");
    for (std::size_t w : g.wires)
      if (w >= circuit.wire_count)
        fail(ErrorKind::Validation,
             "gate " + std::to_string(i) + ": wire " + std::to_string(w) +
                 " out of range");
    if (g.wires.size() == 2 && g.wires[0] == g.wires[1])
      fail(ErrorKind::Validation,
           "gate " + std::to_string(i) + ": duplicate operand wire");
    if (gate_is_rotation(g.kind) && !std::isfinite(g.angle))
      fail(ErrorKind::Validation,
           "gate " + std::to_string(i) + ": non-finite angle");
  }
  if (circuit.observable.size() != circuit.wire_count)
    fail(ErrorKind::Validation, "observable length does not match wire count");
  for (char c : circuit.observable.paulis)
    if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z')
      fail(ErrorKind::Validation,
           std::string("observable contains invalid pauli '") + c + "'");
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const CutPoint& cut : circuit.cuts) {
    if (cut.wire >= circuit.wire_count)
      fail(ErrorKind::Cut, "cut wire " + std::to_string(cut.wire) +
                               " out of range");
    if (cut.position >= circuit.gates.size())
      fail(ErrorKind::Cut, "cut position " + std::to_string(cut.position) +
                               " past the last gate");
    if (!seen.insert({cut.wire, cut.position}).second)
      fail(ErrorKind::Cut, "duplicate cut at wire " +
                               std::to_string(cut.wire) + ", position " +
                               std::to_string(cut.position));
  }
}

std::size_t last_gate_on_wire(const Circuit& circuit, std::size_t wire) {
  for (std::size_t i = circuit.gates.size(); i > 0; --i) {
    const Gate& g = circuit.gates[i - 1];
    for (std::size_t w : g.wires)
      if (w == wire) return i - 1;
  }
  fail(ErrorKind::InvalidArgument,
       "no gate acts on wire " + std::to_string(wire));
}

Circuit build_ghz(std::size_t n) {
  if (n < 2) fail(ErrorKind::InvalidArgument, "GHZ needs at least 2 wires");
  Circuit c;
  c.wire_count = n;
  c.gates.push_back(Gate::h(0));
  for (std::size_t t = 1; t < n; ++t) c.gates.push_back(Gate::cnot(0, t));
  c.observable = Observable::all_z(n);
  validate(c);
  return c;
}

Circuit build_deutsch_jozsa(std::size_t n, const OracleSpec& oracle) {
  if (n == 0) fail(ErrorKind::InvalidArgument, "DJ needs at least 1 input");
  if (oracle.kind == OracleKind::BalancedParity) {
    if (oracle.mask == 0)
      fail(ErrorKind::InvalidArgument, "balanced parity mask must be nonzero");
    if (n < 64 && (oracle.mask >> n) != 0)
      fail(ErrorKind::InvalidArgument, "parity mask selects wires past n");
  }
  const std::size_t aux = n;
  Circuit c;
  c.wire_count = n + 1;
  c.gates.push_back(Gate::x(aux));
  for (std::size_t w = 0; w <= n; ++w) c.gates.push_back(Gate::h(w));
  switch (oracle.kind) {
    case OracleKind::Constant0:
      break;
    case OracleKind::Constant1:
      c.gates.push_back(Gate::x(aux));
      break;
    case OracleKind::BalancedParity:
      for (std::size_t w = 0; w < n; ++w)
        if (oracle.mask & (std::uint64_t{1} << w))
          c.gates.push_back(Gate::cnot(w, aux));
      break;
  }
  for (std::size_t w = 0; w < n; ++w) c.gates.push_back(Gate::h(w));
  c.observable.paulis = std::string(n, 'Z') + "I";
  validate(c);
  return c;
}

Circuit build_benchmark() {
  using std::numbers::pi;
  Circuit c;
  c.wire_count = 15;

  // Entangled head on wires 0-5.
  for (std::size_t i = 0; i <= 5; ++i) {
    const double theta = (double(i) + 1.0) * pi / angles::kBenchInitNum;
    c.gates.push_back(Gate::rx(theta, i));
    c.gates.push_back(Gate::ry(theta, i));
  }
  for (std::size_t i = 0; i < 5; ++i) c.gates.push_back(Gate::cz(i, i + 1));

  // Second rotation layer on wires 0-3; the cuts sit right after it.
  for (std::size_t i = 0; i <= 3; ++i) {
    const double theta = (double(i) + 1.0) * pi / angles::kBenchSecondNum;
    c.gates.push_back(Gate::rx(theta, i));
    c.gates.push_back(Gate::ry(theta, i));
  }

  const std::size_t cut_wire1 = last_gate_on_wire(c, 1);
  const std::size_t cut_wire3 = last_gate_on_wire(c, 3);

  // Middle block on wires 6-9.
  for (std::size_t i = 6; i <= 9; ++i) {
    const double theta = (double(i) + 1.0) * pi / angles::kBenchInitNum;
    c.gates.push_back(Gate::rx(theta, i));
    c.gates.push_back(Gate::ry(theta, i));
  }
  for (std::size_t i = 6; i < 9; ++i) c.gates.push_back(Gate::cz(i, i + 1));

  // Tail on wires 10-14, each chained to its predecessor.
  for (std::size_t i = 10; i <= 14; ++i) {
    const double theta = double(i) * pi / angles::kBenchTailDen;
    c.gates.push_back(Gate::rx(theta, i));
    c.gates.push_back(Gate::ry(theta, i));
    c.gates.push_back(Gate::cz(i - 1, i));
  }

  c.cuts = {{1, cut_wire1}, {3, cut_wire3}};
  c.observable = Observable::all_z(15);
  validate(c);
  return c;
}

Circuit build_alt_benchmark() {
  using std::numbers::pi;
  Circuit c;
  c.wire_count = 15;

  for (std::size_t i = 0; i < 15; ++i) {
    c.gates.push_back(Gate::rx((double(i) + 1.0) * pi / angles::kAltLayerRxDen, i));
    c.gates.push_back(Gate::ry((double(i) + 1.0) * pi / angles::kAltLayerRyDen, i));
  }
  // One chain threading every wire; the cuts sever it between links.
  std::size_t cut_wire1 = 0;
  std::size_t cut_wire3 = 0;
  for (std::size_t i = 0; i < 14; ++i) {
    c.gates.push_back(Gate::cz(i, i + 1));
    if (i == 0) cut_wire1 = c.gates.size() - 1;  // after CZ(0,1)
    if (i == 2) cut_wire3 = c.gates.size() - 1;  // after CZ(2,3)
  }
  for (std::size_t i = 0; i < 15; ++i)
    c.gates.push_back(Gate::rx((double(i) + 1.0) * pi / angles::kAltFinalRxDen, i));

  c.cuts = {{1, cut_wire1}, {3, cut_wire3}};
  c.observable = Observable::all_z(15);
  validate(c);
  return c;
}

Probe build_probe(std::uint64_t seed) {
  RngStream rng(seed);
  double theta = 0.0;
  double expected = 0.0;
  // Reject angles whose expectation is too close to zero: the integrity
  // score divides by the expected value.
  do {
    theta = rng.next_in(angles::kProbeThetaLo, angles::kProbeThetaHi);
    expected = std::cos(theta);
  } while (std::fabs(expected) < angles::kProbeMinExpected);

  Probe probe;
  probe.circuit.wire_count = 1;
  probe.circuit.gates.push_back(Gate::rx(theta, 0));
  probe.circuit.observable = Observable::all_z(1);
  probe.expected = expected;
  return probe;
}

}  // namespace qcut
