#include "qcut/simulator.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <cmath>
#include <numbers>

#include "qcut/error.hpp"

namespace qcut {

namespace {

using cd = std::complex<double>;

constexpr double kInvSqrt2 = 0.70710678118654752440;

}  // namespace

// --------------------------------------------------------------------------
// Noise model
// --------------------------------------------------------------------------

double ThermalRelaxation::gamma() const {
  return 1.0 - std::exp(-gate_time / t1);
}

double ThermalRelaxation::phase_flip_prob() const {
  // Pure dephasing rate on top of the T1 contribution.
  const double inv_tphi = 1.0 / t2 - 1.0 / (2.0 * t1);
  if (inv_tphi <= 0.0) return 0.0;
  return 0.5 * (1.0 - std::exp(-gate_time * inv_tphi));
}

const GateChannel* NoiseModel::channel_for(GateKind kind) const {
  const auto it = channels.find(kind);
  return it == channels.end() ? nullptr : &it->second;
}

void validate(const NoiseModel& model) {
  for (const auto& [kind, channel] : model.channels) {
    if (channel.thermal.has_value() == channel.depolarizing.has_value())
      fail(ErrorKind::Validation,
           std::string("noise channel for '") + to_string(kind) +
               "' must be exactly one of thermal/depolarizing");
    if (channel.thermal) {
      const ThermalRelaxation& t = *channel.thermal;
      if (!(t.t1 > 0.0) || !(t.t2 > 0.0))
        fail(ErrorKind::Validation, "thermal relaxation times must be positive");
      if (t.t2 > 2.0 * t.t1)
        fail(ErrorKind::Validation, "thermal T2 must not exceed 2*T1");
      if (!(t.gate_time > 0.0))
        fail(ErrorKind::Validation, "thermal gate time must be positive");
      if (t.prob < 0.0 || t.prob > 1.0)
        fail(ErrorKind::Validation, "thermal probability outside [0,1]");
    }
    if (channel.depolarizing) {
      const double p = channel.depolarizing->prob;
      if (p < 0.0 || p > 1.0)
        fail(ErrorKind::Validation, "depolarizing probability outside [0,1]");
    }
  }
}

NoiseModel reference_noise_model() {
  NoiseModel model;
  model.channels[GateKind::RX] = {ThermalRelaxation{50e-6, 30e-6, 0.02, 35e-9},
                                  std::nullopt};
  model.channels[GateKind::RY] = {ThermalRelaxation{50e-6, 30e-6, 0.015, 35e-9},
                                  std::nullopt};
  model.channels[GateKind::CNOT] = {std::nullopt, Depolarizing{0.01}};
  validate(model);
  return model;
}

// --------------------------------------------------------------------------
// Statevector
// --------------------------------------------------------------------------

Statevector::Statevector(std::size_t wire_count) : wire_count_(wire_count) {
  if (wire_count == 0 || wire_count > kMaxWires)
    fail(ErrorKind::Capacity, "unsupported statevector width");
  amp_.assign(std::size_t{1} << wire_count, cd{0.0, 0.0});
  amp_[0] = cd{1.0, 0.0};
}

void Statevector::reset() {
  std::fill(amp_.begin(), amp_.end(), cd{0.0, 0.0});
  amp_[0] = cd{1.0, 0.0};
}

double Statevector::norm() const {
  double s = 0.0;
  for (const cd& a : amp_) s += std::norm(a);
  return std::sqrt(s);
}

void Statevector::apply_single(std::size_t wire,
                               const std::complex<double> m[2][2]) {
  const std::size_t bit = wire_count_ - 1 - wire;  // wire 0 = MSB
  const std::size_t mask = std::size_t{1} << bit;
  const std::size_t dim = amp_.size();
  for (std::size_t base = 0; base < dim; base += mask << 1) {
    for (std::size_t off = 0; off < mask; ++off) {
      const std::size_t i0 = base + off;
      const std::size_t i1 = i0 + mask;
      const cd a0 = amp_[i0];
      const cd a1 = amp_[i1];
      amp_[i0] = m[0][0] * a0 + m[0][1] * a1;
      amp_[i1] = m[1][0] * a0 + m[1][1] * a1;
    }
  }
}

void Statevector::apply(const Gate& gate) {
  switch (gate.kind) {
    case GateKind::H: {
      const cd m[2][2] = {{kInvSqrt2, kInvSqrt2}, {kInvSqrt2, -kInvSqrt2}};
      apply_single(gate.wires[0], m);
      break;
    }
    case GateKind::X: {
      const cd m[2][2] = {{0.0, 1.0}, {1.0, 0.0}};
      apply_single(gate.wires[0], m);
      break;
    }
    case GateKind::RX: {
      const double c = std::cos(gate.angle / 2.0);
      const double s = std::sin(gate.angle / 2.0);
      const cd m[2][2] = {{c, cd{0.0, -s}}, {cd{0.0, -s}, c}};
      apply_single(gate.wires[0], m);
      break;
    }
    case GateKind::RY: {
      const double c = std::cos(gate.angle / 2.0);
      const double s = std::sin(gate.angle / 2.0);
      const cd m[2][2] = {{c, -s}, {s, c}};
      apply_single(gate.wires[0], m);
      break;
    }
    case GateKind::RZ: {
      const cd e0 = std::polar(1.0, -gate.angle / 2.0);
      const cd e1 = std::polar(1.0, gate.angle / 2.0);
      const cd m[2][2] = {{e0, 0.0}, {0.0, e1}};
      apply_single(gate.wires[0], m);
      break;
    }
    case GateKind::CZ: {
      const std::size_t ma = std::size_t{1} << (wire_count_ - 1 - gate.wires[0]);
      const std::size_t mb = std::size_t{1} << (wire_count_ - 1 - gate.wires[1]);
      const std::size_t both = ma | mb;
      for (std::size_t i = 0; i < amp_.size(); ++i)
        if ((i & both) == both) amp_[i] = -amp_[i];
      break;
    }
    case GateKind::CNOT: {
      const std::size_t mc = std::size_t{1} << (wire_count_ - 1 - gate.wires[0]);
      const std::size_t mt = std::size_t{1} << (wire_count_ - 1 - gate.wires[1]);
      for (std::size_t i = 0; i < amp_.size(); ++i)
        if ((i & mc) && !(i & mt)) std::swap(amp_[i], amp_[i | mt]);
      break;
    }
  }
#ifndef NDEBUG
  assert(std::fabs(norm() - 1.0) < 1e-10 && "gate broke normalization");
#endif
}

void Statevector::apply_circuit(const Circuit& circuit) {
  for (const Gate& g : circuit.gates) apply(g);
}

void Statevector::apply_pauli(std::size_t wire, char pauli) {
  switch (pauli) {
    case 'I':
      return;
    case 'X': {
      const cd m[2][2] = {{0.0, 1.0}, {1.0, 0.0}};
      apply_single(wire, m);
      return;
    }
    case 'Y': {
      const cd m[2][2] = {{0.0, cd{0.0, -1.0}}, {cd{0.0, 1.0}, 0.0}};
      apply_single(wire, m);
      return;
    }
    case 'Z': {
      const cd m[2][2] = {{1.0, 0.0}, {0.0, -1.0}};
      apply_single(wire, m);
      return;
    }
    default:
      fail(ErrorKind::InvalidArgument, std::string("bad pauli '") + pauli + "'");
  }
}

double Statevector::population_one(std::size_t wire) const {
  const std::size_t mask = std::size_t{1} << (wire_count_ - 1 - wire);
  double p = 0.0;
  for (std::size_t i = 0; i < amp_.size(); ++i)
    if (i & mask) p += std::norm(amp_[i]);
  return p;
}

void Statevector::damp_jump(std::size_t wire) {
  const std::size_t mask = std::size_t{1} << (wire_count_ - 1 - wire);
  for (std::size_t i = 0; i < amp_.size(); ++i) {
    if (i & mask) {
      amp_[i ^ mask] = amp_[i];
      amp_[i] = cd{0.0, 0.0};
    }
  }
  renormalize();
}

void Statevector::damp_no_jump(std::size_t wire, double gamma) {
  const std::size_t mask = std::size_t{1} << (wire_count_ - 1 - wire);
  const double k = std::sqrt(1.0 - gamma);
  for (std::size_t i = 0; i < amp_.size(); ++i)
    if (i & mask) amp_[i] *= k;
  renormalize();
}

void Statevector::renormalize() {
  const double n = norm();
  if (n <= 0.0)
    fail(ErrorKind::Job, "state collapsed to zero norm during a trajectory");
  const double inv = 1.0 / n;
  for (cd& a : amp_) a *= inv;
}

void Statevector::rotate_to_z_basis(std::size_t wire, char pauli) {
  if (pauli == 'X') {
    const cd m[2][2] = {{kInvSqrt2, kInvSqrt2}, {kInvSqrt2, -kInvSqrt2}};
    apply_single(wire, m);
  } else if (pauli == 'Y') {
    // Maps (|0> + i|1>)/sqrt(2) -> |0> and (|0> - i|1>)/sqrt(2) -> |1>.
    const cd m[2][2] = {{kInvSqrt2, cd{0.0, -kInvSqrt2}},
                        {kInvSqrt2, cd{0.0, kInvSqrt2}}};
    apply_single(wire, m);
  }
}

// --------------------------------------------------------------------------
// Expectations and sampling
// --------------------------------------------------------------------------

namespace {

void check_observable(const Circuit& circuit, const Observable& observable) {
  if (observable.size() != circuit.wire_count)
    fail(ErrorKind::InvalidArgument,
         "observable length does not match circuit width");
  for (char c : observable.paulis)
    if (c != 'I' && c != 'X' && c != 'Y' && c != 'Z')
      fail(ErrorKind::InvalidArgument,
           std::string("observable contains invalid pauli '") + c + "'");
}

std::size_t wire_mask(std::size_t wire_count, std::size_t wire) {
  return std::size_t{1} << (wire_count - 1 - wire);
}

// Expectation of a Pauli string on an explicit state, one pass.
double pauli_expectation(const Statevector& state, const Observable& obs) {
  const std::size_t n = state.wire_count();
  std::size_t flip = 0;  // X and Y wires
  std::size_t sign = 0;  // Y and Z wires
  std::size_t y_count = 0;
  for (std::size_t w = 0; w < n; ++w) {
    const char p = obs.paulis[w];
    if (p == 'X' || p == 'Y') flip |= wire_mask(n, w);
    if (p == 'Y' || p == 'Z') sign |= wire_mask(n, w);
    if (p == 'Y') ++y_count;
  }
  // O|b> = i^{#Y} * (-1)^{popcount(b & sign)} |b ^ flip>
  const cd phases[4] = {cd{1, 0}, cd{0, 1}, cd{-1, 0}, cd{0, -1}};
  const cd global = phases[y_count % 4];
  const auto& amp = state.amplitudes();
  cd total{0.0, 0.0};
  for (std::size_t b = 0; b < amp.size(); ++b) {
    const cd term = std::conj(amp[b ^ flip]) * amp[b];
    total += std::popcount(b & sign) % 2 ? -term : term;
  }
  total *= global;
  return total.real();
}

struct TrajectoryPlan {
  std::vector<std::size_t> noisy_gates;  // indices of gates with a channel
  std::vector<const GateChannel*> channels;
};

TrajectoryPlan plan_trajectories(const Circuit& circuit,
                                 const NoiseModel* noise) {
  TrajectoryPlan plan;
  if (!noise) return plan;
  for (std::size_t i = 0; i < circuit.gates.size(); ++i) {
    if (const GateChannel* ch = noise->channel_for(circuit.gates[i].kind)) {
      plan.noisy_gates.push_back(i);
      plan.channels.push_back(ch);
    }
  }
  return plan;
}

double event_probability(const GateChannel& ch) {
  return ch.thermal ? ch.thermal->prob : ch.depolarizing->prob;
}

// Applies one sampled branch of the channel attached to `gate`.
void apply_channel_trajectory(Statevector& state, const Gate& gate,
                              const GateChannel& ch, RngStream& rng) {
  if (ch.thermal) {
    const ThermalRelaxation& t = *ch.thermal;
    const double gamma = t.gamma();
    const double p_flip = t.phase_flip_prob();
    for (std::size_t w : gate.wires) {
      const double p_jump = gamma * state.population_one(w);
      if (rng.next_unit() < p_jump)
        state.damp_jump(w);
      else
        state.damp_no_jump(w, gamma);
      if (rng.next_unit() < p_flip) state.apply_pauli(w, 'Z');
    }
    return;
  }
  // Depolarizing: uniform over the full Pauli group on the operand wires
  // (identity included), matching (1-p)*rho + (p/d)*Id.
  static constexpr char kPaulis[4] = {'I', 'X', 'Y', 'Z'};
  for (std::size_t w : gate.wires)
    state.apply_pauli(w, kPaulis[rng.next_index(4)]);
}

// Evolves one noisy trajectory. `flags` marks which noisy gates fire.
void evolve_trajectory(Statevector& state, const Circuit& circuit,
                       const TrajectoryPlan& plan,
                       const std::vector<bool>& flags, RngStream& rng) {
  state.reset();
  std::size_t next_noisy = 0;
  for (std::size_t i = 0; i < circuit.gates.size(); ++i) {
    state.apply(circuit.gates[i]);
    if (next_noisy < plan.noisy_gates.size() &&
        plan.noisy_gates[next_noisy] == i) {
      if (flags[next_noisy])
        apply_channel_trajectory(state, circuit.gates[i],
                                 *plan.channels[next_noisy], rng);
      ++next_noisy;
    }
  }
}

// Samples a basis-state index from |amp|^2 by inverse CDF, single pass.
std::size_t sample_index(const std::vector<cd>& amp, double u) {
  double cum = 0.0;
  for (std::size_t i = 0; i < amp.size(); ++i) {
    cum += std::norm(amp[i]);
    if (u < cum) return i;
  }
  return amp.size() - 1;  // guards the u ~ 1, cum ~ 1-eps edge
}

}  // namespace

double exact_expectation(const Circuit& circuit, const Observable& observable) {
  validate(circuit);
  check_observable(circuit, observable);
  if (observable.is_identity()) return 1.0;
  Statevector state(circuit.wire_count);
  state.apply_circuit(circuit);
  return pauli_expectation(state, observable);
}

double exact_expectation(const Circuit& circuit) {
  return exact_expectation(circuit, circuit.observable);
}

double sampled_expectation(const Circuit& circuit, const Observable& observable,
                           std::size_t shots, const NoiseModel* noise,
                           RngStream& rng) {
  validate(circuit);
  check_observable(circuit, observable);
  if (shots == 0) fail(ErrorKind::InvalidArgument, "shots must be positive");

  const std::size_t n = circuit.wire_count;
  std::size_t parity_mask = 0;
  for (std::size_t w = 0; w < n; ++w)
    if (observable.paulis[w] != 'I') parity_mask |= wire_mask(n, w);

  // Noiseless final state, rotated into the observable's eigenbasis, with a
  // cumulative distribution for cheap per-shot sampling. Shots whose
  // trajectory has no noise event reuse it.
  Statevector clean(n);
  clean.apply_circuit(circuit);
  for (std::size_t w = 0; w < n; ++w)
    clean.rotate_to_z_basis(w, observable.paulis[w]);
  std::vector<double> cdf(clean.amplitudes().size());
  double cum = 0.0;
  for (std::size_t i = 0; i < cdf.size(); ++i) {
    cum += std::norm(clean.amplitudes()[i]);
    cdf[i] = cum;
  }

  const TrajectoryPlan plan = plan_trajectories(circuit, noise);
  std::vector<bool> flags(plan.noisy_gates.size());
  Statevector work(n);

  std::int64_t eigen_sum = 0;
  for (std::size_t shot = 0; shot < shots; ++shot) {
    bool any_event = false;
    for (std::size_t g = 0; g < flags.size(); ++g) {
      flags[g] = rng.next_unit() < event_probability(*plan.channels[g]);
      any_event |= flags[g];
    }
    std::size_t outcome;
    if (!any_event) {
      const double u = rng.next_unit();
      outcome = static_cast<std::size_t>(
          std::lower_bound(cdf.begin(), cdf.end(), u,
                           [](double c, double t) { return c <= t; }) -
          cdf.begin());
      if (outcome >= cdf.size()) outcome = cdf.size() - 1;
    } else {
      evolve_trajectory(work, circuit, plan, flags, rng);
      for (std::size_t w = 0; w < n; ++w)
        work.rotate_to_z_basis(w, observable.paulis[w]);
      outcome = sample_index(work.amplitudes(), rng.next_unit());
    }
    eigen_sum += std::popcount(outcome & parity_mask) % 2 ? -1 : 1;
  }
  return static_cast<double>(eigen_sum) / static_cast<double>(shots);
}

Counts sample_counts(const Circuit& circuit, std::size_t shots,
                     const NoiseModel* noise, RngStream& rng) {
  validate(circuit);
  if (shots == 0) fail(ErrorKind::InvalidArgument, "shots must be positive");
  const std::size_t n = circuit.wire_count;

  Statevector clean(n);
  clean.apply_circuit(circuit);
  std::vector<double> cdf(clean.amplitudes().size());
  double cum = 0.0;
  for (std::size_t i = 0; i < cdf.size(); ++i) {
    cum += std::norm(clean.amplitudes()[i]);
    cdf[i] = cum;
  }

  const TrajectoryPlan plan = plan_trajectories(circuit, noise);
  std::vector<bool> flags(plan.noisy_gates.size());
  Statevector work(n);

  std::vector<std::uint64_t> tallies(cdf.size(), 0);
  for (std::size_t shot = 0; shot < shots; ++shot) {
    bool any_event = false;
    for (std::size_t g = 0; g < flags.size(); ++g) {
      flags[g] = rng.next_unit() < event_probability(*plan.channels[g]);
      any_event |= flags[g];
    }
    std::size_t outcome;
    if (!any_event) {
      const double u = rng.next_unit();
      outcome = static_cast<std::size_t>(
          std::lower_bound(cdf.begin(), cdf.end(), u,
                           [](double c, double t) { return c <= t; }) -
          cdf.begin());
      if (outcome >= cdf.size()) outcome = cdf.size() - 1;
    } else {
      evolve_trajectory(work, circuit, plan, flags, rng);
      outcome = sample_index(work.amplitudes(), rng.next_unit());
    }
    ++tallies[outcome];
  }

  Counts counts;
  for (std::size_t i = 0; i < tallies.size(); ++i) {
    if (tallies[i] == 0) continue;
    std::string key(n, '0');
    for (std::size_t w = 0; w < n; ++w)
      if (i & wire_mask(n, w)) key[w] = '1';
    counts.emplace(std::move(key), tallies[i]);
  }
  return counts;
}

}  // namespace qcut
