// qcut: command-line front end for the circuit-cutting broker testbed.
//
// Subcommands: run-integrity, run-confidentiality, cut-check, simulate,
// and (when the socket transport is compiled in) worker.
//
// Exit codes: 0 success; 1 a requested check failed; 2 configuration or
// usage error; 3 runtime failure while executing.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qcut/circuit.hpp"
#include "qcut/cutting.hpp"
#include "qcut/error.hpp"
#include "qcut/harness.hpp"
#include "qcut/qasm.hpp"
#include "qcut/rng.hpp"
#include "qcut/simulator.hpp"

#ifdef QCUT_SOCKET_TRANSPORT
#include "qcut/broker.hpp"
#include "qcut/protocol.hpp"
#endif

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

int exit_code_for(const qcut::Error& error) {
  switch (error.kind()) {
    case qcut::ErrorKind::InvalidArgument:
    case qcut::ErrorKind::Parse:
    case qcut::ErrorKind::Validation:
    case qcut::ErrorKind::Capacity:
    case qcut::ErrorKind::Cut:
    case qcut::ErrorKind::Config:
      return kExitConfig;
    default:
      return kExitRuntime;
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    qcut::fail(qcut::ErrorKind::Io, "cannot open " + path);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// An unreadable config file is a configuration error to the CLI even though
// the library reports it as an I/O failure.
qcut::ExperimentConfig load_config_for_cli(const std::string& path) {
  try {
    return qcut::load_config(path);
  } catch (const qcut::Error& error) {
    if (error.kind() == qcut::ErrorKind::Io) {
      qcut::fail(qcut::ErrorKind::Config, error.what());
    }
    throw;
  }
}

qcut::ReportFormats parse_formats(const std::string& list) {
  qcut::ReportFormats formats{false, false, false};
  std::stringstream stream(list);
  std::string item;
  while (std::getline(stream, item, ',')) {
    if (item == "json") {
      formats.json = true;
    } else if (item == "csv") {
      formats.csv = true;
    } else if (item == "svg") {
      formats.svg = true;
    } else if (!item.empty()) {
      qcut::fail(qcut::ErrorKind::Config,
                 "unknown output format '" + item +
                     "' (expected a comma-separated subset of json,csv,svg)");
    }
  }
  if (!formats.json && !formats.csv && !formats.svg) {
    qcut::fail(qcut::ErrorKind::Config, "no output format selected");
  }
  return formats;
}

// "ghz", "ghz:8", "dj:6:21", or "qasm:<path>".
qcut::CircuitSpec parse_compare_spec(const std::string& text) {
  qcut::CircuitSpec spec;
  if (text.rfind("qasm:", 0) == 0) {
    spec.kind = "qasm_file";
    spec.path = text.substr(5);
    if (spec.path.empty()) {
      qcut::fail(qcut::ErrorKind::Config, "qasm: requires a file path");
    }
    return spec;
  }
  std::stringstream stream(text);
  std::string field;
  std::vector<std::string> fields;
  while (std::getline(stream, field, ':')) fields.push_back(field);
  if (fields.empty() || fields.size() > 3 || fields[0].empty()) {
    qcut::fail(qcut::ErrorKind::Config,
               "bad --compare value '" + text +
                   "' (expected kind[:n[:mask]] or qasm:<path>)");
  }
  spec.kind = fields[0];
  try {
    if (fields.size() >= 2) spec.n = std::stoul(fields[1]);
    if (fields.size() >= 3) spec.mask = std::stoull(fields[2]);
  } catch (const std::exception&) {
    qcut::fail(qcut::ErrorKind::Config,
               "bad numeric field in --compare value '" + text + "'");
  }
  return spec;
}

std::vector<qcut::CutPoint> parse_cut_list(const std::string& text) {
  std::vector<qcut::CutPoint> cuts;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    const std::size_t colon = item.find(':');
    if (colon == std::string::npos) {
      qcut::fail(qcut::ErrorKind::Config,
                 "bad cut '" + item + "' (expected wire:position)");
    }
    try {
      cuts.push_back({std::stoul(item.substr(0, colon)),
                      std::stoul(item.substr(colon + 1))});
    } catch (const std::exception&) {
      qcut::fail(qcut::ErrorKind::Config,
                 "bad numeric field in cut '" + item + "'");
    }
  }
  if (cuts.empty()) {
    qcut::fail(qcut::ErrorKind::Config, "--cuts lists no cut points");
  }
  return cuts;
}

void print_sweep_summary(const qcut::SweepReport& report) {
  for (const qcut::SweepRecord& record : report.records) {
    std::printf("%-16s hellinger %.6f\n", record.label.c_str(),
                record.hellinger);
  }
  if (report.tolerated.has_value()) {
    std::printf("tolerated_attackers %zu (threshold %g)\n", *report.tolerated,
                report.config.threshold);
  }
}

int cmd_run_integrity(const std::string& config_path, const std::string& out,
                      std::optional<std::uint64_t> seed,
                      const std::string& format) {
  qcut::ExperimentConfig config = load_config_for_cli(config_path);
  if (seed.has_value()) config.master_seed = *seed;
  qcut::validate_config(config);
  const qcut::SweepReport report = qcut::run_integrity_sweep(config);
  qcut::emit_report(report, out, parse_formats(format));
  print_sweep_summary(report);
  std::printf("wrote %s\n", out.c_str());
  return kExitOk;
}

int cmd_run_confidentiality(const std::string& config_path,
                            const std::vector<std::string>& compare,
                            const std::string& out,
                            std::optional<std::uint64_t> seed,
                            const std::string& format) {
  qcut::ExperimentConfig config = load_config_for_cli(config_path);
  if (seed.has_value()) config.master_seed = *seed;
  qcut::validate_config(config);
  std::vector<qcut::CircuitSpec> comparisons;
  comparisons.reserve(compare.size());
  for (const std::string& text : compare) {
    comparisons.push_back(parse_compare_spec(text));
  }
  const qcut::SweepReport report =
      qcut::run_confidentiality_sweep(config, comparisons);
  qcut::emit_report(report, out, parse_formats(format));
  print_sweep_summary(report);
  std::printf("wrote %s\n", out.c_str());
  return kExitOk;
}

int cmd_cut_check(const std::string& qasm_path, const std::string& cut_list,
                  double tolerance) {
  qcut::Circuit circuit = qcut::parse_qasm_subset(read_text_file(qasm_path));
  circuit.cuts = parse_cut_list(cut_list);
  qcut::validate(circuit);

  const double exact = qcut::exact_expectation(circuit);
  const qcut::FragmentSet fragments = qcut::cut(circuit);
  const qcut::Reconstruction result =
      qcut::reconstruct(qcut::exact_variant_results(fragments), fragments);
  const double difference = std::fabs(result.value - exact);

  std::printf("reconstructed % .12f\n", result.value);
  std::printf("exact         % .12f\n", exact);
  std::printf("difference    %.3e (tolerance %.3e)\n", difference, tolerance);
  return difference <= tolerance ? kExitOk : kExitCheckFailed;
}

int cmd_simulate(const std::string& qasm_path, std::size_t shots,
                 std::uint64_t seed, bool noisy) {
  const qcut::Circuit circuit =
      qcut::parse_qasm_subset(read_text_file(qasm_path));
  const qcut::NoiseModel noise =
      noisy ? qcut::reference_noise_model() : qcut::NoiseModel{};
  qcut::RngStream rng(seed);
  const qcut::Counts counts =
      qcut::sample_counts(circuit, shots, noisy ? &noise : nullptr, rng);
  std::printf("%s\n", nlohmann::json(counts).dump(2).c_str());
  return kExitOk;
}

#ifdef QCUT_SOCKET_TRANSPORT
int cmd_worker(const std::string& socket_path, const std::string& id,
               bool noisy, bool malicious, std::uint64_t seed,
               std::size_t max_connections) {
  qcut::QpuProfile profile;
  profile.id = id;
  profile.noisy = noisy;
  profile.malicious = malicious;
  qcut::SimulatedQpu qpu(profile, qcut::fork_seed(seed, "tamper", id));
  std::fprintf(stderr, "worker %s listening on %s\n", id.c_str(),
               socket_path.c_str());
  qcut::serve_worker(socket_path, qpu, max_connections);
  return kExitOk;
}
#endif

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"circuit-cutting broker testbed"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string format = "json,csv";
  std::optional<std::uint64_t> seed;

  CLI::App* integrity =
      app.add_subcommand("run-integrity", "saboteur-count Hellinger sweep");
  integrity->add_option("--config", config_path, "experiment config JSON")
      ->required();
  integrity->add_option("--out", out_dir, "output directory")->required();
  integrity->add_option("--seed", seed, "override the config master seed");
  integrity->add_option("--format", format,
                        "comma-separated outputs: json,csv,svg");

  std::vector<std::string> compare;
  CLI::App* confidentiality = app.add_subcommand(
      "run-confidentiality", "dispatch-pool distinguishability sweep");
  confidentiality->add_option("--config", config_path, "experiment config JSON")
      ->required();
  confidentiality
      ->add_option("--compare", compare,
                   "comparison circuits (kind[:n[:mask]] or qasm:<path>)")
      ->required()
      ->expected(-1);
  confidentiality->add_option("--out", out_dir, "output directory")->required();
  confidentiality->add_option("--seed", seed,
                              "override the config master seed");
  confidentiality->add_option("--format", format,
                              "comma-separated outputs: json,csv,svg");

  std::string qasm_path;
  std::string cut_list;
  double tolerance = 1e-9;
  CLI::App* cut_check = app.add_subcommand(
      "cut-check", "reconstruct a cut circuit and compare with the exact value");
  cut_check->add_option("--qasm", qasm_path, "circuit file")->required();
  cut_check->add_option("--cuts", cut_list, "wire:pos[,wire:pos...]")
      ->required();
  cut_check->add_option("--tol", tolerance, "absolute tolerance");

  std::size_t shots = 1000;
  std::uint64_t sim_seed = 1;
  bool noisy = false;
  CLI::App* simulate =
      app.add_subcommand("simulate", "sample outcome counts for a circuit");
  simulate->add_option("--qasm", qasm_path, "circuit file")->required();
  simulate->add_option("--shots", shots, "number of shots")->required();
  simulate->add_option("--seed", sim_seed, "sampling seed");
  simulate->add_flag("--noise", noisy, "apply the reference noise model");

#ifdef QCUT_SOCKET_TRANSPORT
  std::string socket_path;
  std::string worker_id = "worker";
  bool malicious = false;
  std::uint64_t worker_seed = 1;
  std::size_t max_connections = std::size_t(-1);
  CLI::App* worker = app.add_subcommand(
      "worker", "serve a simulated QPU on a Unix domain socket");
  worker->add_option("--socket", socket_path, "socket path")->required();
  worker->add_option("--id", worker_id, "executor id");
  worker->add_flag("--noise", noisy, "apply the reference noise model");
  worker->add_flag("--malicious", malicious, "tamper with every result");
  worker->add_option("--seed", worker_seed, "tamper stream seed");
  worker->add_option("--max-connections", max_connections,
                     "serve this many connections, then exit");
#endif

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& error) {
    const int code = app.exit(error);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (integrity->parsed()) {
      return cmd_run_integrity(config_path, out_dir, seed, format);
    }
    if (confidentiality->parsed()) {
      return cmd_run_confidentiality(config_path, compare, out_dir, seed,
                                     format);
    }
    if (cut_check->parsed()) {
      return cmd_cut_check(qasm_path, cut_list, tolerance);
    }
    if (simulate->parsed()) {
      return cmd_simulate(qasm_path, shots, sim_seed, noisy);
    }
#ifdef QCUT_SOCKET_TRANSPORT
    if (worker->parsed()) {
      return cmd_worker(socket_path, worker_id, noisy, malicious, worker_seed,
                        max_connections);
    }
#endif
  } catch (const qcut::Error& error) {
    std::fprintf(stderr, "error: %s\n", error.what());
    return exit_code_for(error);
  } catch (const std::exception& error) {
    std::fprintf(stderr, "error: %s\n", error.what());
    return kExitRuntime;
  }
  return kExitConfig;
}
