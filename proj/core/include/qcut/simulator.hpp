#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qcut/circuit.hpp"
#include "qcut/rng.hpp"

namespace qcut {

// ---------------------------------------------------------------------------
// Noise model: a per-gate-kind channel map, sampled as stochastic
// trajectories (one Kraus branch per shot), never as density matrices.
// ---------------------------------------------------------------------------

// Thermal relaxation attached to a gate kind. With probability `prob` per
// gate application, one relaxation trajectory is applied to each operand
// wire: amplitude damping toward |0> with gamma = 1 - exp(-gate_time/t1)
// (jump vs. no-jump branch chosen by the damped population), followed by a
// phase flip with probability (1 - exp(-gate_time/t_phi))/2 where
// 1/t_phi = 1/t2 - 1/(2*t1).
struct ThermalRelaxation {
  double t1;
  double t2;
  double prob;
  double gate_time;

  double gamma() const;
  double phase_flip_prob() const;
};

// Depolarizing channel attached to a gate kind: with probability `prob`, one
// Pauli drawn uniformly from the full Pauli group on the operand wires
// (identity included) is applied, which realizes
// E(rho) = (1-p)*rho + (p/d)*Id in expectation.
struct Depolarizing {
  double prob;
};

struct GateChannel {
  // Exactly one of the two is set.
  std::optional<ThermalRelaxation> thermal;
  std::optional<Depolarizing> depolarizing;
};

struct NoiseModel {
  std::map<GateKind, GateChannel> channels;

  bool empty() const { return channels.empty(); }
  const GateChannel* channel_for(GateKind kind) const;
};

void validate(const NoiseModel& model);

// The hardware model used throughout the experiments: thermal relaxation
// (T1 = 50us, T2 = 30us, 35ns nominal gate time) on RX with probability 0.02
// and RY with probability 0.015, and two-qubit depolarizing noise with
// p = 0.01 on CNOT.
NoiseModel reference_noise_model();

// ---------------------------------------------------------------------------
// Statevector engine. Wire 0 is the most significant bit of basis-state
// indices and of bitstring keys, matching the left-to-right order of
// observable strings.
// ---------------------------------------------------------------------------

class Statevector {
 public:
  explicit Statevector(std::size_t wire_count);

  void reset();  // back to |0...0>
  void apply(const Gate& gate);
  void apply_circuit(const Circuit& circuit);

  std::size_t wire_count() const { return wire_count_; }
  const std::vector<std::complex<double>>& amplitudes() const { return amp_; }
  double norm() const;

  // Noise trajectory primitives.
  void apply_pauli(std::size_t wire, char pauli);
  double population_one(std::size_t wire) const;
  void damp_jump(std::size_t wire);                    // |1> -> |0> collapse
  void damp_no_jump(std::size_t wire, double gamma);   // diag(1, sqrt(1-g))
  void renormalize();

  // Rotates `wire` so that eigenstates of `pauli` (X or Y) map onto the
  // computational basis; used before sampling in a Pauli eigenbasis.
  void rotate_to_z_basis(std::size_t wire, char pauli);

 private:
  void apply_single(std::size_t wire, const std::complex<double> m[2][2]);

  std::size_t wire_count_;
  std::vector<std::complex<double>> amp_;
};

using Counts = std::map<std::string, std::uint64_t>;

// Exact expectation <psi|O|psi> of a Pauli-string observable on the final
// state of the (noiseless) circuit. All-identity observables return 1.0
// exactly. |result| <= 1 + epsilon for any Pauli string.
double exact_expectation(const Circuit& circuit, const Observable& observable);
double exact_expectation(const Circuit& circuit);

// Shot-sampled expectation. Per shot: a noise trajectory is drawn (when
// `noise` is non-null), the state evolved, and one observable eigenvalue
// sampled; returns the mean over shots. Without noise this converges to
// exact_expectation at the usual 1/sqrt(shots) rate.
double sampled_expectation(const Circuit& circuit, const Observable& observable,
                           std::size_t shots, const NoiseModel* noise,
                           RngStream& rng);

// Computational-basis counts over `shots` trajectory samples. Keys are
// bitstrings with wire 0 leftmost; values sum to `shots`.
Counts sample_counts(const Circuit& circuit, std::size_t shots,
                     const NoiseModel* noise, RngStream& rng);

}  // namespace qcut
