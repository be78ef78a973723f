#pragma once

#include <string>

#include "qcut/circuit.hpp"

namespace qcut {

// Parses the QASM subset used for circuit interchange:
//
//   OPENQASM 2.0;            (ignored)
//   include "qelib1.inc";    (ignored)
//   qreg q[n];
//   h q[i];  x q[i];
//   rx(expr) q[i];  ry(expr) q[i];  rz(expr) q[i];
//   cz q[i],q[j];  cx q[i],q[j];
//
// where expr is a decimal literal or an integer multiple/fraction of pi
// (pi, pi/2, 3*pi/4, -pi/2, ...). Statements are case-sensitive and end
// with ';'. Unknown statements raise Parse errors carrying the line number;
// wire indices outside the declared register raise Validation errors.
//
// The parsed circuit has no cuts and an all-Z observable (callers override
// both as needed).
Circuit parse_qasm_subset(const std::string& text);

// Inverse of the parser for the gate sequence: emits a program the parser
// maps back to the same wire count and gate list, angles preserved exactly
// (shortest round-trip decimal form).
std::string emit_qasm(const Circuit& circuit);

}  // namespace qcut
