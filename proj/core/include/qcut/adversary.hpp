#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qcut/rng.hpp"

namespace qcut {

// Multiplicative tampering applied by a malicious executor to every result it
// returns: value -> (base + spread * r) * value with r uniform in [0, 1).
// With the defaults the effective multiplier lies in [1.5, 2.5).
struct TamperModel {
  double base = 1.5;
  double spread = 1.0;
};

double tamper(double value, const TamperModel& model, RngStream& rng);

// Counts-mode analogue: each outcome's count is scaled by its own multiplier
// drawn from the same stream (in key order), then the histogram is
// renormalized back to the original shot total by largest remainder so it
// stays a valid counts table.
std::map<std::string, std::uint64_t> tamper_counts(
    const std::map<std::string, std::uint64_t>& counts,
    const TamperModel& model, RngStream& rng);

// One circuit handed to one executor, as recorded by the broker. `is_fake`
// and `tampered` are broker-side bookkeeping; the executor itself never
// sees them.
struct DispatchRecord {
  std::string qpu_id;
  std::size_t evaluation = 0;
  std::string variant_key;  // empty for probe dispatches
  bool is_probe = false;
  bool is_fake = false;
  bool tampered = false;
  double value = 0.0;
};

// Everything a compromised QPU operator learns from a run: the raw result
// values of the circuits it executed, in dispatch order. Deliberately strips
// the broker-side flags — real and decoy circuits are indistinguishable to
// the observer.
struct ObservationSet {
  std::string qpu_id;
  std::vector<double> samples;
};

ObservationSet observe(const std::vector<DispatchRecord>& dispatch_log,
                       const std::string& qpu_id);

}  // namespace qcut
