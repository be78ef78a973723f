#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qcut/circuit.hpp"

namespace qcut {

// ---------------------------------------------------------------------------
// Wire cutting.
//
// Each cut severs one wire and resolves the identity channel at that point as
//   Id(rho) = 1/2 * sum_{P in {I,X,Y,Z}} Tr(P rho) * P.
// The upstream side of a cut measures the chosen Pauli on its stub wire; the
// downstream side prepares eigenstates of it, drawn from
// {|0>, |1>, |+>, |->, |+i>, |-i>}. Reconstruction sums 4^k Pauli
// assignments (k = cut count); the +/- eigenstate branches of each Pauli are
// folded into the coefficient table rather than dispatched as extra channels,
// so the unit of execution stays "one runnable sub-circuit".
// ---------------------------------------------------------------------------

// One of the six single-qubit Pauli eigenstates, named by basis and branch:
// {Z,+} = |0>, {Z,-} = |1>, {X,+-} = |+->, {Y,+-} = |+-i>.
struct PrepState {
  char basis;  // 'X', 'Y' or 'Z'
  int sign;    // +1 or -1
};

// Preparation gates taking |0> to the named eigenstate.
std::vector<Gate> prep_gates(const PrepState& state, std::size_t wire);

// Metadata for one wire of a fragment: which original-wire segment it is and
// how each end terminates.
struct FragmentWire {
  std::size_t original_wire;
  std::size_t segment;                       // 0 = from the circuit start
  std::optional<std::size_t> inbound_cut;    // starts at this cut: prep stub
  std::optional<std::size_t> outbound_cut;   // ends at this cut: measure stub
  char end_pauli = 'I';  // observable component when the wire reaches the end
};

struct Fragment {
  Circuit circuit;  // remapped gates; observable is assigned per variant
  std::vector<FragmentWire> wires;
  std::vector<std::size_t> measure_stubs;  // local wires with an outbound cut
  std::vector<std::size_t> prep_stubs;     // local wires with an inbound cut
};

struct FragmentSet {
  std::vector<Fragment> fragments;
  std::size_t cut_count = 0;
  std::size_t original_wire_count = 0;
  Observable original_observable;
};

// Splits the circuit at its cut points. Gates keep their relative order
// inside each fragment; every fragment is independently runnable (all
// preparations happen before the fragment's gates touch the stub, all stub
// measurements after). Cut errors name the offending cut.
FragmentSet cut(const Circuit& circuit);

// One runnable sub-circuit: a fragment with a Pauli basis chosen for every
// measure stub and an eigenstate for every prep stub.
struct FragmentVariant {
  std::size_t fragment;
  std::vector<char> measure_basis;    // parallel to Fragment::measure_stubs
  std::vector<PrepState> prep_state;  // parallel to Fragment::prep_stubs
  Circuit circuit;                    // preparation gates + fragment gates
  // Native weight of this variant: (1/2)^{measure stubs} times the product
  // of its eigenstate branch signs. When reconstruction consumes a variant
  // under the identity channel (which reuses the Z eigenstates), the branch
  // signs come from the coefficient table instead.
  double coefficient;
  std::string key;  // canonical id, see variant_key()
};

// Canonical variant id: "frag<i>" followed by ":cut<j>=<P><b>" entries sorted
// by cut index, where <b> is '+'/'-' for prepared eigenstates and 'm' for a
// measured stub, e.g. "frag1:cut0=Z+:cut1=Xm".
std::string variant_key(const FragmentSet& fset, std::size_t fragment,
                        const std::vector<char>& measure_basis,
                        const std::vector<PrepState>& prep_state);

// All runnable variants: per fragment, every combination of measurement
// bases (4 per measure stub) and preparation eigenstates (6 per prep stub).
std::vector<FragmentVariant> enumerate_variants(const FragmentSet& fset);

// The variant keys reconstruct() will look up, in enumeration order.
std::vector<std::string> required_variant_keys(const FragmentSet& fset);

struct Reconstruction {
  double value;
  bool out_of_range;  // |value| exceeded 1 (reported, never clamped)
};

// Combines per-variant expectation values into the uncut circuit's
// expectation: sum over 4^k Pauli assignments of (1/2)^k times the product
// over fragments of branch-combined variant results. Missing entries raise
// IncompleteResults naming the absent keys.
Reconstruction reconstruct(const std::map<std::string, double>& results,
                           const FragmentSet& fset);

// Evaluates every variant exactly (noiseless); reconstruct() over this map
// should match the uncut exact expectation to near machine precision.
std::map<std::string, double> exact_variant_results(const FragmentSet& fset);

}  // namespace qcut
