#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qcut/broker.hpp"
#include "qcut/circuit.hpp"
#include "qcut/metrics.hpp"

namespace qcut {

// Which circuit an experiment runs. `cuts` overrides the kind's default cut
// points when present; an explicitly empty list means "no cuts" (counts
// mode), while an absent one picks the kind's standard cuts.
struct CircuitSpec {
  std::string kind;  // benchmark | alt_benchmark | ghz | dj | qasm_file
  std::size_t n = 0;          // ghz: wire count; dj: input wires (aux added)
  std::uint64_t mask = 0;     // dj parity mask; 0 = all inputs
  std::string path;           // qasm_file: file to load
  std::optional<std::vector<CutPoint>> cuts;
};

struct QpuConfig {
  std::string id;
  bool noise = false;
  double cs = 10.0;  // operator-supplied confidentiality score
};

struct ExperimentConfig {
  CircuitSpec circuit;
  std::vector<QpuConfig> qpus;
  AllocationPolicy policy;
  FakePolicy fakes;
  std::uint64_t shots = 1000;
  std::size_t evaluations = 200;
  std::size_t saboteur_lo = 0;
  std::size_t saboteur_hi = 0;
  std::uint64_t master_seed = 1;
  double threshold = 0.25;
  bool counts_mode = false;  // compare outcome histograms instead of binned
                             // expectation values (uncut circuits only)
  std::size_t probes = 8;
  bool tamper_probes = true;
};

// JSON <-> config. Field names match the struct members one for one
// ("saboteur_range" is the [lo, hi] pair, "distribution" selects
// "expectation" or "counts"); unknown fields are rejected with their path.
// to_json always emits the canonical complete form, which parse_config
// accepts back unchanged.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
std::string config_to_json(const ExperimentConfig& config);

void validate_config(const ExperimentConfig& config);

// Instantiate the configured circuit, applying default cut points for kinds
// that have them (benchmark and alt_benchmark carry their own; ghz is cut
// twice on wire 0 at one and two thirds of the fan-out; dj twice on the
// auxiliary wire inside the oracle).
Circuit realize_circuit(const CircuitSpec& spec);

struct SweepRecord {
  std::size_t point = 0;  // saboteur count, or comparison index
  std::string label;      // "s=2", or the comparison circuit's kind
  double hellinger = 0.0;
  Summary summary;
  Distribution distribution;
  double runtime_ms = 0.0;  // wall clock; reported in the CSV only
};

struct SweepReport {
  std::string kind;  // "integrity" | "confidentiality"
  ExperimentConfig config;
  std::vector<std::string> comparisons;  // confidentiality only
  std::vector<SweepRecord> records;
  std::optional<std::size_t> tolerated;  // integrity with saboteur_lo == 0
  Distribution reference;  // ground truth / reference pool, self-binned
};

// Integrity: establish the all-honest ground-truth distribution, then for
// each saboteur count s in [saboteur_lo, saboteur_hi] flip the first s QPUs
// (ids sorted) to malicious, rerun, and measure the Hellinger distance to
// ground truth.
SweepReport run_integrity_sweep(const ExperimentConfig& config);

// Confidentiality: run the reference circuit and each comparison circuit
// through identically-configured all-honest brokers, pool every value each
// QPU reported (decoys and probes included), and measure the distance
// between the reference pool and each comparison pool.
SweepReport run_confidentiality_sweep(const ExperimentConfig& config,
                                      const std::vector<CircuitSpec>& comparisons);

struct ReportFormats {
  bool json = true;
  bool csv = true;
  bool svg = false;
};

// Renderers are exposed separately so determinism can be checked without
// touching the filesystem. report.json embeds digests of the SVG renderings;
// the CSV is excluded from digests because it carries wall-clock timings.
std::string render_report_json(const SweepReport& report);
std::string render_sweep_csv(const SweepReport& report);
std::string render_histogram_svg(const SweepRecord& record);
std::string svg_file_name(const SweepRecord& record);

void emit_report(const SweepReport& report, const std::string& out_dir,
                 const ReportFormats& formats);

}  // namespace qcut
