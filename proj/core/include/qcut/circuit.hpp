#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace qcut {

enum class GateKind { H, X, RX, RY, RZ, CZ, CNOT };

const char* to_string(GateKind kind);
bool gate_is_rotation(GateKind kind);
std::size_t gate_arity(GateKind kind);

struct Gate {
  GateKind kind;
  std::vector<std::size_t> wires;  // arity 1 or 2; for CNOT: {control, target}
  double angle = 0.0;              // rotations only

  static Gate h(std::size_t w) { return {GateKind::H, {w}}; }
  static Gate x(std::size_t w) { return {GateKind::X, {w}}; }
  static Gate rx(double a, std::size_t w) { return {GateKind::RX, {w}, a}; }
  static Gate ry(double a, std::size_t w) { return {GateKind::RY, {w}, a}; }
  static Gate rz(double a, std::size_t w) { return {GateKind::RZ, {w}, a}; }
  static Gate cz(std::size_t a, std::size_t b) { return {GateKind::CZ, {a, b}}; }
  static Gate cnot(std::size_t c, std::size_t t) {
    return {GateKind::CNOT, {c, t}};
  }
};

bool operator==(const Gate& a, const Gate& b);

// A Pauli string over all wires, one of I/X/Y/Z per wire, e.g. "ZZIZ".
// Wire 0 is the leftmost character.
struct Observable {
  std::string paulis;

  static Observable all_z(std::size_t n) { return {std::string(n, 'Z')}; }
  static Observable identity(std::size_t n) { return {std::string(n, 'I')}; }

  std::size_t size() const { return paulis.size(); }
  bool is_identity() const {
    return paulis.find_first_not_of('I') == std::string::npos;
  }
};

bool operator==(const Observable& a, const Observable& b);

// A wire cut. The wire is severed immediately after the gate with sequence
// index `position`; gates at indices <= position act on the upstream segment
// of the wire, later gates on the downstream segment.
struct CutPoint {
  std::size_t wire;
  std::size_t position;
};

bool operator==(const CutPoint& a, const CutPoint& b);

struct Circuit {
  std::size_t wire_count = 0;
  std::vector<Gate> gates;
  std::vector<CutPoint> cuts;
  Observable observable;
};

// Hard cap on statevector width; anything larger is refused up front.
inline constexpr std::size_t kMaxWires = 24;

// Throws Validation/Capacity/Cut errors when the circuit breaks an invariant:
// wire indices in range, rotation angles finite, observable length matching
// wire_count, cut positions in range and unique per (wire, position).
void validate(const Circuit& circuit);

// Index of the last gate acting on `wire`, used to place cuts after a wire's
// final gate. Throws InvalidArgument if no gate touches the wire.
std::size_t last_gate_on_wire(const Circuit& circuit, std::size_t wire);

// ---------------------------------------------------------------------------
// Circuit families.
//
// All fixed rotation angles used by the built-in families live in
// `angles::` so the exact constants are documented in one place.
// ---------------------------------------------------------------------------

namespace angles {
// Benchmark: initial single-wire layer and the narrower second layer.
inline constexpr double kBenchInitNum = 7.0;    // theta_i = (i+1)*pi/7
inline constexpr double kBenchSecondNum = 11.0; // theta_i = (i+1)*pi/11
inline constexpr double kBenchTailDen = 15.0;   // tail theta_i = i*pi/15
// Alternative benchmark layers.
inline constexpr double kAltLayerRxDen = 9.0;   // (i+1)*pi/9
inline constexpr double kAltLayerRyDen = 13.0;  // (i+1)*pi/13
inline constexpr double kAltFinalRxDen = 6.0;   // (i+1)*pi/6
// Probe angle range; see build_probe.
inline constexpr double kProbeThetaLo = 0.2;
inline constexpr double kProbeThetaHi = 2.9;
inline constexpr double kProbeMinExpected = 0.1;
}  // namespace angles

// GHZ preparation: H on wire 0 followed by a CNOT fan-out. No cuts attached;
// callers place cuts where they need them. Observable: all-Z.
Circuit build_ghz(std::size_t n);

// Deutsch-Jozsa oracle selector.
enum class OracleKind { Constant0, Constant1, BalancedParity };

struct OracleSpec {
  OracleKind kind = OracleKind::Constant0;
  std::uint64_t mask = 0;  // BalancedParity: bit i selects input wire i

  static OracleSpec constant0() { return {OracleKind::Constant0, 0}; }
  static OracleSpec constant1() { return {OracleKind::Constant1, 0}; }
  static OracleSpec balanced_parity(std::uint64_t mask) {
    return {OracleKind::BalancedParity, mask};
  }
};

// Deutsch-Jozsa on n input wires plus one auxiliary wire (wire n). The
// auxiliary is prepared in |-> via X,H; the oracle acts by phase kickback;
// a final H layer covers the input wires. Observable: Z on inputs, I on aux.
Circuit build_deutsch_jozsa(std::size_t n, const OracleSpec& oracle);

// 15-wire benchmark used across the integrity experiments: RX/RY layers on
// wires 0-5, a CZ chain, a second RX/RY layer on wires 0-3 (the cut region,
// cuts on wires 1 and 3), an RX/RY + CZ block on wires 6-9 and a rotated,
// chained tail on wires 10-14. Observable: all-Z. Ships with its two cuts.
Circuit build_benchmark();

// Structurally simpler 15-wire companion with a higher fraction of noisy
// (rotation) gates: full RX/RY layer, one CZ chain threading all wires, full
// RX layer. Cuts on wires 1 and 3 split the chain into 2/3/12-wire pieces.
Circuit build_alt_benchmark();

struct Probe {
  Circuit circuit;   // single wire: RX(theta), observable Z
  double expected;   // exact expectation, cos(theta)
};

// Single-qubit integrity probe: RX(theta) with theta drawn from the seeded
// stream over (0.2, 2.9), re-drawn while |cos(theta)| < 0.1 so the relative
// error in the integrity score is always well defined.
Probe build_probe(std::uint64_t seed);

}  // namespace qcut
