#include "qcut/broker.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "qcut/error.hpp"
#include "qcut/qasm.hpp"

namespace qcut {

const char* to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::Uniform: return "uniform";
    case PolicyKind::Proportional: return "proportional";
    case PolicyKind::Exponential: return "exponential";
    case PolicyKind::Profile1: return "profile1";
    case PolicyKind::Profile2: return "profile2";
    case PolicyKind::Profile3: return "profile3";
  }
  return "?";
}

PolicyKind parse_policy_kind(std::string_view name) {
  if (name == "uniform") return PolicyKind::Uniform;
  if (name == "proportional") return PolicyKind::Proportional;
  if (name == "exponential") return PolicyKind::Exponential;
  if (name == "profile1") return PolicyKind::Profile1;
  if (name == "profile2") return PolicyKind::Profile2;
  if (name == "profile3") return PolicyKind::Profile3;
  fail(ErrorKind::Config, "unknown policy kind '" + std::string(name) + "'");
}

const char* to_string(FakeMode mode) {
  switch (mode) {
    case FakeMode::None: return "none";
    case FakeMode::Random: return "random";
    case FakeMode::Calibrated: return "calibrated";
  }
  return "?";
}

FakeMode parse_fake_mode(std::string_view name) {
  if (name == "none") return FakeMode::None;
  if (name == "random") return FakeMode::Random;
  if (name == "calibrated") return FakeMode::Calibrated;
  fail(ErrorKind::Config, "unknown fake mode '" + std::string(name) + "'");
}

SimulatedQpu::SimulatedQpu(QpuProfile profile, std::uint64_t tamper_seed)
    : profile_(std::move(profile)),
      noise_(profile_.noisy ? reference_noise_model() : NoiseModel{}),
      tamper_rng_(tamper_seed) {}

bool SimulatedQpu::should_tamper(const EvalRequest& request) const {
  if (!profile_.malicious) return false;
  if (request.probe_hint && !profile_.tamper_probes) return false;
  return true;
}

double SimulatedQpu::evaluate(const EvalRequest& request) {
  RngStream shot_rng(request.seed);
  const double honest =
      sampled_expectation(request.circuit, request.circuit.observable,
                          request.shots, noise_.empty() ? nullptr : &noise_,
                          shot_rng);
  if (!should_tamper(request)) return honest;
  return tamper(honest, tamper_model_, tamper_rng_);
}

Counts SimulatedQpu::sample_counts(const EvalRequest& request) {
  RngStream shot_rng(request.seed);
  Counts honest = qcut::sample_counts(request.circuit, request.shots,
                                      noise_.empty() ? nullptr : &noise_,
                                      shot_rng);
  if (!should_tamper(request)) return honest;
  return tamper_counts(honest, tamper_model_, tamper_rng_);
}

double score_integrity(Executor& executor, std::span<const Probe> probes,
                       std::uint64_t shots, std::uint64_t master_seed,
                       std::vector<DispatchRecord>* log,
                       bool executor_is_malicious) {
  if (probes.empty())
    fail(ErrorKind::InvalidArgument, "integrity scoring requires probes");
  double total = 0.0;
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const Probe& probe = probes[i];
    EvalRequest request;
    request.job_id = "probe" + std::to_string(i);
    request.circuit = probe.circuit;
    request.shots = shots;
    request.seed = fork_seed(master_seed, "probe-shots", executor.id(), i);
    request.probe_hint = true;
    const double actual = executor.evaluate(request);
    const double relative =
        std::fabs(probe.expected - actual) / std::fabs(probe.expected);
    total += std::max(0.0, 10.0 - relative * 10.0);
    if (log)
      log->push_back({executor.id(), 0, "", /*is_probe=*/true,
                      /*is_fake=*/false, executor_is_malicious, actual});
  }
  return total / double(probes.size());
}

std::vector<double> allocation_probabilities(std::span<const QpuProfile> qpus,
                                             const AllocationPolicy& policy) {
  if (qpus.empty())
    fail(ErrorKind::InvalidArgument, "no QPUs to allocate over");

  const std::size_t n = qpus.size();
  std::vector<double> p(n, 0.0);

  // Linear kinds share the score-over-sum shape; exponential kinds share the
  // stabilized softmax (subtracting the max exponent leaves the ratios — and
  // with it the vector itself — unchanged, while keeping exp() in range).
  const auto linear = [&](auto&& score) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = score(qpus[i]);
      sum += p[i];
    }
    if (sum <= 0.0)
      fail(ErrorKind::DegenerateScores,
           "allocation scores sum to zero; cannot form probabilities");
    for (double& x : p) x /= sum;
  };
  const auto softmax = [&](auto&& exponent) {
    double hi = exponent(qpus[0]);
    for (std::size_t i = 1; i < n; ++i) hi = std::max(hi, exponent(qpus[i]));
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = std::exp(exponent(qpus[i]) - hi);
      sum += p[i];
    }
    for (double& x : p) x /= sum;
  };

  switch (policy.kind) {
    case PolicyKind::Uniform:
      for (double& x : p) x = 1.0 / double(n);
      break;
    case PolicyKind::Proportional:
      linear([](const QpuProfile& q) { return q.integrity_score; });
      break;
    case PolicyKind::Exponential:
      softmax([](const QpuProfile& q) { return q.integrity_score; });
      break;
    case PolicyKind::Profile1:
      linear([](const QpuProfile& q) {
        return 2.0 * q.confidentiality_score + q.integrity_score;
      });
      break;
    case PolicyKind::Profile2:
      linear([](const QpuProfile& q) {
        return q.confidentiality_score + q.integrity_score;
      });
      break;
    case PolicyKind::Profile3:
      softmax([](const QpuProfile& q) {
        return 2.0 * q.integrity_score + q.confidentiality_score;
      });
      break;
  }
  return p;
}

std::vector<std::size_t> assign_replicas(std::span<const double> probabilities,
                                         std::size_t replication,
                                         RngStream& rng) {
  if (replication == 0)
    fail(ErrorKind::InvalidArgument, "replication must be at least 1");
  if (replication > probabilities.size())
    fail(ErrorKind::InvalidArgument,
         "replication " + std::to_string(replication) + " exceeds QPU count " +
             std::to_string(probabilities.size()));

  std::vector<double> weight(probabilities.begin(), probabilities.end());
  std::vector<std::size_t> picks;
  for (std::size_t r = 0; r < replication; ++r) {
    double total = 0.0;
    for (double w : weight) total += w;
    std::size_t chosen = weight.size();
    if (total > 0.0) {
      const double u = rng.next_unit() * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < weight.size(); ++i) {
        acc += weight[i];
        if (u < acc) {
          chosen = i;
          break;
        }
      }
      if (chosen == weight.size()) {  // u landed on accumulated rounding
        for (std::size_t i = weight.size(); i-- > 0;) {
          if (weight[i] > 0.0) {
            chosen = i;
            break;
          }
        }
      }
    } else {
      // All remaining mass is zero: fall back to uniform over the leftovers.
      std::vector<std::size_t> remaining;
      for (std::size_t i = 0; i < weight.size(); ++i)
        if (std::find(picks.begin(), picks.end(), i) == picks.end())
          remaining.push_back(i);
      chosen = remaining[rng.next_index(remaining.size())];
    }
    picks.push_back(chosen);
    weight[chosen] = 0.0;
  }
  return picks;
}

double aggregate_replicas(std::span<const double> values,
                          std::span<const double> weights) {
  if (values.empty() || values.size() != weights.size())
    fail(ErrorKind::InvalidArgument, "mismatched replica values and weights");
  double weight_sum = 0.0;
  for (double w : weights) weight_sum += w;
  if (weight_sum <= 0.0) {
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / double(values.size());
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) sum += weights[i] * values[i];
  return sum / weight_sum;
}

Circuit random_circuit(std::size_t width, std::size_t gate_count,
                       RngStream& rng) {
  if (width == 0) fail(ErrorKind::InvalidArgument, "width must be positive");
  if (gate_count == 0)
    fail(ErrorKind::InvalidArgument, "gate count must be positive");
  constexpr double kTwoPi = 2.0 * std::numbers::pi;

  Circuit c;
  c.wire_count = width;
  for (std::size_t i = 0; i < gate_count; ++i) {
    // First gate always touches wire 0 so the decoy's measured wire carries
    // circuit-dependent signal.
    const std::size_t kinds = width >= 2 ? 7 : 5;
    switch (rng.next_index(kinds)) {
      case 0:
        c.gates.push_back(Gate::h(i == 0 ? 0 : rng.next_index(width)));
        break;
      case 1:
        c.gates.push_back(Gate::x(i == 0 ? 0 : rng.next_index(width)));
        break;
      case 2:
        c.gates.push_back(Gate::rx(rng.next_in(0.0, kTwoPi),
                                   i == 0 ? 0 : rng.next_index(width)));
        break;
      case 3:
        c.gates.push_back(Gate::ry(rng.next_in(0.0, kTwoPi),
                                   i == 0 ? 0 : rng.next_index(width)));
        break;
      case 4:
        c.gates.push_back(Gate::rz(rng.next_in(0.0, kTwoPi),
                                   i == 0 ? 0 : rng.next_index(width)));
        break;
      default: {
        const std::size_t a = i == 0 ? 0 : rng.next_index(width);
        std::size_t b = rng.next_index(width - 1);
        if (b >= a) ++b;
        if (rng.next_index(2) == 0)
          c.gates.push_back(Gate::cz(a, b));
        else
          c.gates.push_back(Gate::cnot(a, b));
        break;
      }
    }
  }
  c.observable = Observable::all_z(width);
  return c;
}

namespace {

// Random-mode decoy: a copy of one real variant with every rotation gate's
// axis and angle re-drawn. Keeping the real work's width and topology is what
// makes the decoy pool track the input circuit: decoys built as independent
// gate soup produce nearly the same value distribution for any input of
// similar size, which lets an observer subtract them out — measured pooled
// distances collapsed well below the calibrated mode's, inverting the
// ordering the flooding countermeasure is supposed to produce. Circuits with
// no rotation gates come back verbatim; a copy is the strongest camouflage,
// and its reported value still never enters reconstruction.
Circuit resample_decoy(const FragmentVariant& variant, RngStream& rng) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  Circuit decoy = variant.circuit;
  for (Gate& gate : decoy.gates) {
    if (gate.kind != GateKind::RX && gate.kind != GateKind::RY &&
        gate.kind != GateKind::RZ)
      continue;
    switch (rng.next_index(3)) {
      case 0:
        gate.kind = GateKind::RX;
        break;
      case 1:
        gate.kind = GateKind::RY;
        break;
      default:
        gate.kind = GateKind::RZ;
        break;
    }
    gate.angle = rng.next_in(0.0, kTwoPi);
  }
  return decoy;
}

Observable single_z(std::size_t width) {
  std::string paulis(width, 'I');
  paulis[0] = 'Z';
  return {paulis};
}

// Tune a final RY on wire 0 so the decoy's exact expectation hits `target`.
// After appending RY(phi), <Z_0> becomes A cos(phi) - B sin(phi) where A and
// B are the pre-rotation <Z_0> and <X_0>; any |target| <= sqrt(A^2 + B^2) is
// reachable.
bool calibrate_decoy(Circuit& candidate, double lo, double hi,
                     RngStream& rng) {
  std::string x_paulis(candidate.wire_count, 'I');
  x_paulis[0] = 'X';
  const double a = exact_expectation(candidate, single_z(candidate.wire_count));
  const double b = exact_expectation(candidate, Observable{x_paulis});
  const double radius = std::hypot(a, b);
  if (radius < 1e-6) return false;

  for (int attempt = 0; attempt < 50; ++attempt) {
    const double target = rng.next_in(lo, hi);
    if (std::fabs(target) > radius) continue;
    const double delta = std::atan2(b, a);
    const double sign = rng.next_index(2) == 0 ? 1.0 : -1.0;
    const double phi = -delta + sign * std::acos(target / radius);
    candidate.gates.push_back(Gate::ry(phi, 0));
    candidate.observable = single_z(candidate.wire_count);
    return true;
  }
  return false;
}

}  // namespace

std::vector<Circuit> generate_fakes(const std::vector<FragmentVariant>& real,
                                    const FakePolicy& policy, RngStream& rng) {
  std::vector<Circuit> fakes;
  if (policy.mode == FakeMode::None || policy.multiplier == 0) return fakes;
  if (real.empty())
    fail(ErrorKind::InvalidArgument,
         "decoy generation requires at least one real variant");

  std::vector<std::size_t> widths;
  for (const FragmentVariant& v : real) widths.push_back(v.circuit.wire_count);

  double lo = 0.0;
  double hi = 0.0;
  if (policy.mode == FakeMode::Calibrated) {
    // Local exact predictions of the real variants define the target range.
    lo = hi = exact_expectation(real[0].circuit, real[0].circuit.observable);
    for (std::size_t i = 1; i < real.size(); ++i) {
      const double e =
          exact_expectation(real[i].circuit, real[i].circuit.observable);
      lo = std::min(lo, e);
      hi = std::max(hi, e);
    }
    double span = hi - lo;
    if (span < 1e-9) span = 0.1;
    lo = std::max(-1.0, lo - 0.05 * span);
    hi = std::min(1.0, hi + 0.05 * span);
  }

  const std::size_t total = policy.multiplier * real.size();
  for (std::size_t slot = 0; slot < total; ++slot) {
    if (policy.mode == FakeMode::Random) {
      const FragmentVariant& v = real[rng.next_index(real.size())];
      fakes.push_back(resample_decoy(v, rng));
      continue;
    }
    const std::size_t width = widths[rng.next_index(widths.size())];
    const std::size_t gate_count = width + 1 + rng.next_index(2 * width);
    bool placed = false;
    for (int candidate = 0; candidate < 500 && !placed; ++candidate) {
      Circuit decoy = random_circuit(width, gate_count, rng);
      if (calibrate_decoy(decoy, lo, hi, rng)) {
        fakes.push_back(std::move(decoy));
        placed = true;
      }
    }
    if (!placed)
      fail(ErrorKind::Calibration,
           "could not calibrate a decoy into [" + std::to_string(lo) + ", " +
               std::to_string(hi) + "] after 500 candidates");
  }
  return fakes;
}

Broker::Broker(std::vector<QpuProfile> profiles, std::uint64_t master_seed)
    : master_seed_(master_seed), profiles_(std::move(profiles)) {
  if (profiles_.empty())
    fail(ErrorKind::InvalidArgument, "broker requires at least one QPU");
  for (const QpuProfile& p : profiles_) {
    if (p.id.empty()) fail(ErrorKind::InvalidArgument, "QPU with empty id");
    if (p.integrity_score < 0.0 || p.integrity_score > 10.0 ||
        p.confidentiality_score < 0.0 || p.confidentiality_score > 10.0)
      fail(ErrorKind::InvalidArgument,
           "QPU " + p.id + ": scores must lie in [0, 10]");
  }
  for (std::size_t i = 0; i < profiles_.size(); ++i)
    for (std::size_t j = i + 1; j < profiles_.size(); ++j)
      if (profiles_[i].id == profiles_[j].id)
        fail(ErrorKind::InvalidArgument,
             "duplicate QPU id " + profiles_[i].id);
  for (const QpuProfile& p : profiles_)
    executors_.push_back(std::make_unique<SimulatedQpu>(
        p, fork_seed(master_seed_, "tamper", p.id)));
}

void Broker::attach_executor(std::size_t index,
                             std::unique_ptr<Executor> executor) {
  if (index >= executors_.size())
    fail(ErrorKind::InvalidArgument, "executor index out of range");
  executors_[index] = std::move(executor);
}

void Broker::score_all(std::span<const Probe> probes, std::uint64_t shots) {
  for (std::size_t i = 0; i < profiles_.size(); ++i)
    profiles_[i].integrity_score =
        score_integrity(*executors_[i], probes, shots, master_seed_, &log_,
                        profiles_[i].malicious);
}

std::vector<double> Broker::policy_probabilities(
    const AllocationPolicy& policy, bool* fell_back) const {
  *fell_back = false;
  try {
    return allocation_probabilities(profiles_, policy);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::DegenerateScores) throw;
    *fell_back = true;
    return allocation_probabilities(profiles_,
                                    {PolicyKind::Uniform, policy.replication});
  }
}

JobResult Broker::run_job(const Circuit& circuit,
                          const AllocationPolicy& policy,
                          const FakePolicy& fakes, std::uint64_t shots,
                          std::size_t evaluation) {
  const FragmentSet fset = cut(circuit);
  const std::vector<FragmentVariant> variants = enumerate_variants(fset);

  // Decoy randomness is additionally keyed by the input circuit itself, so
  // two different inputs never share decoys even under one master seed —
  // shared decoys would make their observation pools artificially alike —
  // while rerunning the same input reproduces its decoys exactly.
  const std::uint64_t circuit_key =
      detail::fnv1a64(0xcbf29ce484222325ULL, emit_qasm(circuit));

  JobResult result;
  std::vector<double> probabilities =
      policy_probabilities(policy, &result.degenerate_fallback);

  // Pick the replicas of every real variant, in enumeration order, from one
  // per-evaluation stream.
  RngStream assign_rng =
      fork_stream(master_seed_, "assign", evaluation);
  std::vector<std::vector<std::size_t>> replicas(variants.size());
  for (std::size_t v = 0; v < variants.size(); ++v)
    replicas[v] = assign_replicas(probabilities, policy.replication,
                                  assign_rng);

  // Per-QPU work lists: the QPU's share of real variants plus its decoys,
  // shuffled together so an observer cannot separate them by position.
  struct WorkItem {
    bool is_fake = false;
    std::size_t variant = 0;  // real: index into variants
    std::size_t replica = 0;  // real: replica slot
    std::size_t slot = 0;     // fake: per-QPU decoy slot
    const Circuit* fake = nullptr;
  };

  std::vector<std::vector<double>> raw(variants.size());
  std::vector<std::vector<std::string>> used(variants.size());
  std::vector<std::vector<double>> weights(variants.size());
  for (std::size_t v = 0; v < variants.size(); ++v) {
    raw[v].resize(replicas[v].size());
    used[v].resize(replicas[v].size());
    weights[v].resize(replicas[v].size());
  }

  const std::string job_id = "eval" + std::to_string(evaluation);
  for (std::size_t q = 0; q < profiles_.size(); ++q) {
    const std::string& qpu_id = profiles_[q].id;
    std::vector<WorkItem> items;
    for (std::size_t v = 0; v < variants.size(); ++v)
      for (std::size_t r = 0; r < replicas[v].size(); ++r)
        if (replicas[v][r] == q) items.push_back({false, v, r, 0, nullptr});

    RngStream fake_rng =
        fork_stream(master_seed_, "fakes", circuit_key, evaluation, qpu_id);
    const std::vector<Circuit> decoys = generate_fakes(variants, fakes, fake_rng);
    for (std::size_t s = 0; s < decoys.size(); ++s)
      items.push_back({true, 0, 0, s, &decoys[s]});

    RngStream order_rng =
        fork_stream(master_seed_, "order", evaluation, qpu_id);
    order_rng.shuffle(std::span<WorkItem>(items));

    for (const WorkItem& item : items) {
      EvalRequest request;
      request.job_id = job_id;
      request.shots = shots;
      if (item.is_fake) {
        request.circuit = *item.fake;
        request.seed =
            fork_seed(master_seed_, "fake-shots", circuit_key, evaluation, qpu_id,
                      item.slot);
      } else {
        request.circuit = variants[item.variant].circuit;
        // Keyed by the variant alone — never by QPU, evaluation, or replica
        // slot — so the honest estimate for a piece of work is one fixed
        // number: every honest executor reports it identically, repeated
        // evaluations reproduce it, replicas of it agree exactly (making
        // the weighted replica average a no-op until someone tampers), and
        // the outcome distribution across evaluations spreads only through
        // adversarial interference. This mirrors the reference stack, whose
        // per-evaluation estimates are deterministic to within numerical
        // jitter.
        request.seed =
            fork_seed(master_seed_, "shots", variants[item.variant].key);
      }
      const double value = executors_[q]->evaluate(request);
      if (!item.is_fake) {
        raw[item.variant][item.replica] = value;
        used[item.variant][item.replica] = qpu_id;
        weights[item.variant][item.replica] = profiles_[q].integrity_score;
      }
      DispatchRecord record;
      record.qpu_id = qpu_id;
      record.evaluation = evaluation;
      record.variant_key = item.is_fake ? "" : variants[item.variant].key;
      record.is_fake = item.is_fake;
      record.tampered = profiles_[q].malicious;
      record.value = value;
      log_.push_back(record);
      result.dispatch_log.push_back(std::move(record));
    }
  }

  std::map<std::string, double> aggregated;
  for (std::size_t v = 0; v < variants.size(); ++v) {
    VariantOutcome outcome;
    outcome.qpu_ids = used[v];
    outcome.raw = raw[v];
    double weight_sum = 0.0;
    for (double w : weights[v]) weight_sum += w;
    outcome.unweighted = weight_sum <= 0.0;
    outcome.aggregated = aggregate_replicas(raw[v], weights[v]);
    aggregated[variants[v].key] = outcome.aggregated;
    result.per_variant[variants[v].key] = std::move(outcome);
  }

  const Reconstruction reconstruction = reconstruct(aggregated, fset);
  result.value = reconstruction.value;
  result.out_of_range = reconstruction.out_of_range;
  return result;
}

CountsJobResult Broker::run_counts_job(const Circuit& circuit,
                                       const AllocationPolicy& policy,
                                       std::uint64_t shots,
                                       std::size_t evaluation) {
  if (!circuit.cuts.empty())
    fail(ErrorKind::InvalidArgument,
         "counts mode runs the circuit whole; remove its cut points");

  CountsJobResult result;
  std::vector<double> probabilities =
      policy_probabilities(policy, &result.degenerate_fallback);
  RngStream assign_rng = fork_stream(master_seed_, "assign", evaluation);
  const std::vector<std::size_t> picks =
      assign_replicas(probabilities, policy.replication, assign_rng);

  const std::string job_id = "eval" + std::to_string(evaluation);
  std::vector<Counts> histograms;
  std::vector<double> hist_weights;
  for (std::size_t r = 0; r < picks.size(); ++r) {
    const std::size_t q = picks[r];
    EvalRequest request;
    request.job_id = job_id;
    request.circuit = circuit;
    request.shots = shots;
    // Same keying rule as the expectation path: the honest histogram is one
    // fixed draw, so only tampering separates runs.
    request.seed = fork_seed(master_seed_, "shots", "counts");
    Counts counts = executors_[q]->sample_counts(request);

    double parity = 0.0;  // summary value for the log: observable expectation
    std::uint64_t total = 0;
    for (const auto& [key, count] : counts) {
      int sign = 1;
      for (std::size_t w = 0; w < circuit.wire_count; ++w)
        if (circuit.observable.paulis[w] != 'I' && key[w] == '1') sign = -sign;
      parity += double(sign) * double(count);
      total += count;
    }
    if (total > 0) parity /= double(total);

    DispatchRecord record;
    record.qpu_id = profiles_[q].id;
    record.evaluation = evaluation;
    record.variant_key = "counts";
    record.tampered = profiles_[q].malicious;
    record.value = parity;
    log_.push_back(record);
    result.dispatch_log.push_back(std::move(record));

    histograms.push_back(std::move(counts));
    hist_weights.push_back(profiles_[q].integrity_score);
  }

  double weight_sum = 0.0;
  for (double w : hist_weights) weight_sum += w;
  if (weight_sum <= 0.0) {
    // Degenerate weights: plain mean over replicas.
    std::fill(hist_weights.begin(), hist_weights.end(), 1.0);
    weight_sum = double(hist_weights.size());
  }

  std::map<std::string, double> mass;
  for (std::size_t r = 0; r < histograms.size(); ++r)
    for (const auto& [key, count] : histograms[r])
      mass[key] += hist_weights[r] * double(count) / double(shots);
  for (auto& [key, m] : mass) m /= weight_sum;
  result.frequencies = std::move(mass);
  return result;
}

}  // namespace qcut
