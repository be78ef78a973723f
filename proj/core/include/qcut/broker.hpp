#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qcut/adversary.hpp"
#include "qcut/circuit.hpp"
#include "qcut/cutting.hpp"
#include "qcut/rng.hpp"
#include "qcut/simulator.hpp"

namespace qcut {

// How executable circuits (fragment variants) are distributed over QPUs.
//  - uniform:      every QPU equally likely
//  - proportional: P_n = IS_n / sum IS_i
//  - exponential:  P_n = e^{IS_n} / sum e^{IS_i}
//  - profile1:     P_n = (2 CS_n + IS_n) / sum (2 CS_i + IS_i)
//  - profile2:     P_n = (CS_n + IS_n) / sum (CS_i + IS_i)
//  - profile3:     P_n = e^{2 IS_n + CS_n} / sum e^{2 IS_i + CS_i}
enum class PolicyKind {
  Uniform,
  Proportional,
  Exponential,
  Profile1,
  Profile2,
  Profile3,
};

const char* to_string(PolicyKind kind);
PolicyKind parse_policy_kind(std::string_view name);

struct AllocationPolicy {
  PolicyKind kind = PolicyKind::Uniform;
  std::size_t replication = 1;  // replicas per variant, on distinct QPUs
};

enum class FakeMode { None, Random, Calibrated };

const char* to_string(FakeMode mode);
FakeMode parse_fake_mode(std::string_view name);

struct FakePolicy {
  FakeMode mode = FakeMode::None;
  std::size_t multiplier = 0;  // decoys per real variant per QPU
};

struct QpuProfile {
  std::string id;
  bool malicious = false;
  bool noisy = false;
  // 0-10 reliability estimated from probe circuits (see score_integrity).
  double integrity_score = 10.0;
  // 0-10 operator-supplied trust score, used by the blended profiles.
  double confidentiality_score = 10.0;
  // Whether a malicious executor also tampers probe results. Tampering them
  // is what makes probes detect the attack; the false setting exists to
  // explore the counterfactual.
  bool tamper_probes = true;
};

// One circuit execution request. This is also the unit the wire protocol
// ships to out-of-process workers. `probe_hint` is testbed plumbing for the
// tamper_probes=false counterfactual; it is never serialized, because real
// probes are indistinguishable from any other dispatched circuit.
struct EvalRequest {
  std::string job_id;
  Circuit circuit;  // cut-free, runnable as-is
  std::uint64_t shots = 0;
  std::uint64_t seed = 0;
  bool probe_hint = false;
};

// An executor that can run circuits: either an in-process simulated QPU or a
// proxy for an out-of-process worker.
class Executor {
 public:
  virtual ~Executor() = default;
  virtual const std::string& id() const = 0;
  // Sampled expectation of request.circuit.observable.
  virtual double evaluate(const EvalRequest& request) = 0;
  // Raw measurement histogram (all wires, Z basis). Optional capability:
  // transports that only carry expectation values reject it.
  virtual Counts sample_counts(const EvalRequest& request) = 0;
};

// In-process QPU simulator. Honest executors sample the circuit under their
// noise model; malicious ones additionally tamper every result they return,
// consuming their own tamper stream in dispatch order.
class SimulatedQpu : public Executor {
 public:
  SimulatedQpu(QpuProfile profile, std::uint64_t tamper_seed);

  const std::string& id() const override { return profile_.id; }
  double evaluate(const EvalRequest& request) override;
  Counts sample_counts(const EvalRequest& request) override;

  const QpuProfile& profile() const { return profile_; }

 private:
  bool should_tamper(const EvalRequest& request) const;

  QpuProfile profile_;
  NoiseModel noise_;  // empty unless profile_.noisy
  TamperModel tamper_model_;
  RngStream tamper_rng_;
};

// Mean probe score: per probe, max(0, 10 - |expected - actual| / |expected|
// * 10). Probe expectations are bounded away from zero by construction.
double score_integrity(Executor& executor, std::span<const Probe> probes,
                       std::uint64_t shots, std::uint64_t master_seed,
                       std::vector<DispatchRecord>* log = nullptr,
                       bool executor_is_malicious = false);

// Probability of each QPU receiving a given circuit under the policy.
// Throws DegenerateScores when a score-proportional policy sees an all-zero
// denominator; callers fall back to uniform.
std::vector<double> allocation_probabilities(std::span<const QpuProfile> qpus,
                                             const AllocationPolicy& policy);

// `replication` distinct QPU indices, sampled without replacement with
// iterative renormalization. If the remaining probability mass hits zero the
// rest of the picks are uniform over the remaining QPUs.
std::vector<std::size_t> assign_replicas(std::span<const double> probabilities,
                                         std::size_t replication,
                                         RngStream& rng);

// Integrity-score-weighted mean. A zero weight sum degrades to the plain
// mean (the caller records that the weights were degenerate).
double aggregate_replicas(std::span<const double> values,
                          std::span<const double> weights);

// Random circuit over the supported gate set (used for decoys and for
// randomized oracle checks). The first gate always touches wire 0.
Circuit random_circuit(std::size_t width, std::size_t gate_count,
                       RngStream& rng);

// Decoy circuits for one target QPU: multiplier * |real| of them.
//  - Random mode: each decoy copies one real variant (so decoy widths follow
//    the real width distribution exactly) and re-draws every rotation gate's
//    axis and angle; rotation-free variants come back verbatim.
//  - Calibrated mode: a final RY on wire 0 is tuned (against a local exact
//    simulation) so the decoy's expectation lands uniformly inside the real
//    variants' predicted range, widened by 10%.
std::vector<Circuit> generate_fakes(const std::vector<FragmentVariant>& real,
                                    const FakePolicy& policy, RngStream& rng);

struct VariantOutcome {
  std::vector<std::string> qpu_ids;
  std::vector<double> raw;      // reported values, replica order
  double aggregated = 0.0;      // IS-weighted mean of raw
  bool unweighted = false;      // weights were all zero
};

struct JobResult {
  double value = 0.0;        // reconstructed expectation
  bool out_of_range = false; // |value| > 1 (reported, never clamped)
  bool degenerate_fallback = false;  // policy fell back to uniform
  std::map<std::string, VariantOutcome> per_variant;
  std::vector<DispatchRecord> dispatch_log;  // this job's entries
};

struct CountsJobResult {
  std::map<std::string, double> frequencies;  // IS-weighted mean frequencies
  bool degenerate_fallback = false;
  std::vector<DispatchRecord> dispatch_log;
};

// The trusted scheduler. Owns the executors, scores them with probes, and
// orchestrates cut -> enumerate -> assign -> dispatch -> aggregate ->
// reconstruct for each evaluation. All randomness comes from streams forked
// off the master seed by (purpose, evaluation, ...) labels, so a result
// value never depends on which QPU happened to run the circuit — only
// tampering changes values.
class Broker {
 public:
  Broker(std::vector<QpuProfile> profiles, std::uint64_t master_seed);

  // Replace an executor (e.g. with a socket-backed worker). The profile of
  // the same index still describes it.
  void attach_executor(std::size_t index, std::unique_ptr<Executor> executor);

  // Score every QPU once with the given probes, filling profiles' IS.
  void score_all(std::span<const Probe> probes, std::uint64_t shots);

  // One evaluation of a cut circuit.
  JobResult run_job(const Circuit& circuit, const AllocationPolicy& policy,
                    const FakePolicy& fakes, std::uint64_t shots,
                    std::size_t evaluation);

  // One evaluation of an uncut circuit in counts mode: the whole circuit is
  // dispatched to `replication` QPUs and their histograms are combined.
  CountsJobResult run_counts_job(const Circuit& circuit,
                                 const AllocationPolicy& policy,
                                 std::uint64_t shots, std::size_t evaluation);

  const std::vector<QpuProfile>& profiles() const { return profiles_; }
  std::uint64_t master_seed() const { return master_seed_; }
  // Chronological record of everything dispatched in this broker's lifetime
  // (probes included); the source for ObservationSets.
  const std::vector<DispatchRecord>& dispatch_log() const { return log_; }

 private:
  std::vector<double> policy_probabilities(const AllocationPolicy& policy,
                                           bool* fell_back) const;

  std::uint64_t master_seed_;
  std::vector<QpuProfile> profiles_;
  std::vector<std::unique_ptr<Executor>> executors_;
  std::vector<DispatchRecord> log_;
};

}  // namespace qcut
