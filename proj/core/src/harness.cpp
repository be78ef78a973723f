#include "qcut/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "qcut/error.hpp"
#include "qcut/qasm.hpp"
#include "qcut/simulator.hpp"

namespace qcut {

using nlohmann::json;

namespace {

[[noreturn]] void config_fail(const std::string& path, const std::string& what) {
  fail(ErrorKind::Config, path + ": " + what);
}

void reject_unknown(const json& object, const std::string& path,
                    std::initializer_list<const char*> known) {
  for (const auto& [key, value] : object.items()) {
    if (std::find_if(known.begin(), known.end(), [&](const char* k) {
          return key == k;
        }) == known.end())
      config_fail(path.empty() ? key : path + "." + key, "unknown field");
  }
}

template <typename T>
T get_field(const json& object, const std::string& path, const char* key,
            T fallback) {
  if (!object.contains(key)) return fallback;
  try {
    return object.at(key).get<T>();
  } catch (const json::exception&) {
    config_fail(path.empty() ? key : path + "." + key, "wrong type");
  }
}

CircuitSpec parse_circuit_spec(const json& object, const std::string& path) {
  if (!object.is_object()) config_fail(path, "must be an object");
  reject_unknown(object, path, {"kind", "n", "mask", "path", "cuts"});
  CircuitSpec spec;
  spec.kind = get_field<std::string>(object, path, "kind", "");
  if (spec.kind.empty()) config_fail(path + ".kind", "required");
  spec.n = get_field<std::size_t>(object, path, "n", 0);
  spec.mask = get_field<std::uint64_t>(object, path, "mask", 0);
  spec.path = get_field<std::string>(object, path, "path", "");
  if (object.contains("cuts")) {
    const json& cuts = object.at("cuts");
    if (cuts.is_null()) {
      // explicit null = use the kind's defaults, same as absent
    } else if (!cuts.is_array()) {
      config_fail(path + ".cuts", "must be an array");
    } else {
      std::vector<CutPoint> list;
      for (std::size_t i = 0; i < cuts.size(); ++i) {
        const std::string cut_path =
            path + ".cuts[" + std::to_string(i) + "]";
        if (!cuts[i].is_object()) config_fail(cut_path, "must be an object");
        reject_unknown(cuts[i], cut_path, {"wire", "position"});
        if (!cuts[i].contains("wire") || !cuts[i].contains("position"))
          config_fail(cut_path, "needs wire and position");
        list.push_back({get_field<std::size_t>(cuts[i], cut_path, "wire", 0),
                        get_field<std::size_t>(cuts[i], cut_path, "position", 0)});
      }
      spec.cuts = std::move(list);
    }
  }
  return spec;
}

json circuit_spec_to_json(const CircuitSpec& spec) {
  json object;
  object["kind"] = spec.kind;
  object["n"] = spec.n;
  object["mask"] = spec.mask;
  object["path"] = spec.path;
  if (spec.cuts) {
    json cuts = json::array();
    for (const CutPoint& c : *spec.cuts)
      cuts.push_back({{"wire", c.wire}, {"position", c.position}});
    object["cuts"] = std::move(cuts);
  } else {
    object["cuts"] = nullptr;
  }
  return object;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  const json root = json::parse(json_text, nullptr, /*allow_exceptions=*/false);
  if (root.is_discarded())
    fail(ErrorKind::Config, "configuration is not valid JSON");
  if (!root.is_object())
    fail(ErrorKind::Config, "configuration must be a JSON object");
  reject_unknown(root, "",
                 {"circuit", "qpus", "policy", "fakes", "shots", "evaluations",
                  "saboteur_range", "master_seed", "threshold", "distribution",
                  "probes", "tamper_probes"});

  ExperimentConfig config;
  if (!root.contains("circuit")) fail(ErrorKind::Config, "circuit: required");
  config.circuit = parse_circuit_spec(root.at("circuit"), "circuit");

  if (!root.contains("qpus") || !root.at("qpus").is_array())
    fail(ErrorKind::Config, "qpus: required array");
  for (std::size_t i = 0; i < root.at("qpus").size(); ++i) {
    const json& q = root.at("qpus")[i];
    const std::string path = "qpus[" + std::to_string(i) + "]";
    if (!q.is_object()) config_fail(path, "must be an object");
    reject_unknown(q, path, {"id", "noise", "cs"});
    QpuConfig qpu;
    qpu.id = get_field<std::string>(q, path, "id", "");
    if (qpu.id.empty()) config_fail(path + ".id", "required");
    qpu.noise = get_field<bool>(q, path, "noise", false);
    qpu.cs = get_field<double>(q, path, "cs", 10.0);
    config.qpus.push_back(std::move(qpu));
  }

  if (root.contains("policy")) {
    const json& p = root.at("policy");
    if (!p.is_object()) config_fail("policy", "must be an object");
    reject_unknown(p, "policy", {"kind", "replication"});
    config.policy.kind = parse_policy_kind(
        get_field<std::string>(p, "policy", "kind", "uniform"));
    config.policy.replication =
        get_field<std::size_t>(p, "policy", "replication", 1);
  }

  if (root.contains("fakes")) {
    const json& f = root.at("fakes");
    if (!f.is_object()) config_fail("fakes", "must be an object");
    reject_unknown(f, "fakes", {"mode", "multiplier"});
    config.fakes.mode =
        parse_fake_mode(get_field<std::string>(f, "fakes", "mode", "none"));
    config.fakes.multiplier =
        get_field<std::size_t>(f, "fakes", "multiplier", 0);
  }

  config.shots = get_field<std::uint64_t>(root, "", "shots", 1000);
  config.evaluations = get_field<std::size_t>(root, "", "evaluations", 200);

  if (root.contains("saboteur_range")) {
    const json& range = root.at("saboteur_range");
    if (!range.is_array() || range.size() != 2)
      config_fail("saboteur_range", "must be [lo, hi]");
    try {
      config.saboteur_lo = range[0].get<std::size_t>();
      config.saboteur_hi = range[1].get<std::size_t>();
    } catch (const json::exception&) {
      config_fail("saboteur_range", "wrong type");
    }
  }

  config.master_seed = get_field<std::uint64_t>(root, "", "master_seed", 1);
  config.threshold = get_field<double>(root, "", "threshold", 0.25);
  const std::string distribution =
      get_field<std::string>(root, "", "distribution", "expectation");
  if (distribution == "expectation") {
    config.counts_mode = false;
  } else if (distribution == "counts") {
    config.counts_mode = true;
  } else {
    config_fail("distribution", "must be \"expectation\" or \"counts\"");
  }
  config.probes = get_field<std::size_t>(root, "", "probes", 8);
  config.tamper_probes = get_field<bool>(root, "", "tamper_probes", true);
  return config;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return parse_config(text.str());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Config)
      fail(ErrorKind::Config, path + ": " + e.what());
    throw;
  }
}

std::string config_to_json(const ExperimentConfig& config) {
  json root;
  root["circuit"] = circuit_spec_to_json(config.circuit);
  json qpus = json::array();
  for (const QpuConfig& q : config.qpus)
    qpus.push_back({{"id", q.id}, {"noise", q.noise}, {"cs", q.cs}});
  root["qpus"] = std::move(qpus);
  root["policy"] = {{"kind", to_string(config.policy.kind)},
                    {"replication", config.policy.replication}};
  root["fakes"] = {{"mode", to_string(config.fakes.mode)},
                   {"multiplier", config.fakes.multiplier}};
  root["shots"] = config.shots;
  root["evaluations"] = config.evaluations;
  root["saboteur_range"] = {config.saboteur_lo, config.saboteur_hi};
  root["master_seed"] = config.master_seed;
  root["threshold"] = config.threshold;
  root["distribution"] = config.counts_mode ? "counts" : "expectation";
  root["probes"] = config.probes;
  root["tamper_probes"] = config.tamper_probes;
  return root.dump(2);
}

void validate_config(const ExperimentConfig& config) {
  if (config.qpus.empty()) fail(ErrorKind::Config, "qpus: none configured");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < config.qpus.size(); ++i) {
    const QpuConfig& q = config.qpus[i];
    const std::string path = "qpus[" + std::to_string(i) + "]";
    if (!ids.insert(q.id).second) config_fail(path + ".id", "duplicate");
    if (q.cs < 0.0 || q.cs > 10.0)
      config_fail(path + ".cs", "must lie in [0, 10]");
  }
  if (config.evaluations == 0)
    fail(ErrorKind::Config, "evaluations: must be at least 1");
  if (config.shots == 0) fail(ErrorKind::Config, "shots: must be at least 1");
  if (config.saboteur_lo > config.saboteur_hi)
    fail(ErrorKind::Config, "saboteur_range: lo exceeds hi");
  if (config.saboteur_hi > config.qpus.size())
    config_fail("saboteur_range",
                "hi " + std::to_string(config.saboteur_hi) +
                    " exceeds QPU count " + std::to_string(config.qpus.size()));
  if (config.policy.replication == 0 ||
      config.policy.replication > config.qpus.size())
    config_fail("policy.replication",
                "must lie in [1, " + std::to_string(config.qpus.size()) + "]");
  if (config.threshold <= 0.0 || config.threshold > 1.0)
    fail(ErrorKind::Config, "threshold: must lie in (0, 1]");
  if (config.probes == 0)
    fail(ErrorKind::Config, "probes: must be at least 1");
  if (config.counts_mode && config.fakes.mode != FakeMode::None)
    fail(ErrorKind::Config, "fakes.mode: counts mode does not dispatch decoys");
}

Circuit realize_circuit(const CircuitSpec& spec) {
  Circuit circuit;
  std::optional<std::vector<CutPoint>> default_cuts;

  if (spec.kind == "benchmark") {
    circuit = build_benchmark();
    default_cuts = circuit.cuts;
  } else if (spec.kind == "alt_benchmark") {
    circuit = build_alt_benchmark();
    default_cuts = circuit.cuts;
  } else if (spec.kind == "ghz") {
    const std::size_t n = spec.n == 0 ? 15 : spec.n;
    circuit = build_ghz(n);
    if (n >= 3)
      default_cuts = std::vector<CutPoint>{{0, n / 3}, {0, 2 * n / 3}};
  } else if (spec.kind == "dj") {
    const std::size_t n = spec.n == 0 ? 14 : spec.n;
    const std::uint64_t mask =
        spec.mask == 0 ? (n >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1)
                       : spec.mask;
    circuit = build_deutsch_jozsa(n, OracleSpec::balanced_parity(mask));
    // Cut the auxiliary wire at one and two thirds of the oracle's CNOTs.
    std::size_t cnots = 0;
    for (const Gate& g : circuit.gates)
      if (g.kind == GateKind::CNOT) ++cnots;
    if (cnots >= 3) {
      const std::size_t first_cnot = n + 2;  // X, then n+1 Hadamards
      default_cuts = std::vector<CutPoint>{
          {n, first_cnot + cnots / 3 - 1},
          {n, first_cnot + 2 * cnots / 3 - 1}};
    }
  } else if (spec.kind == "qasm_file") {
    if (spec.path.empty())
      fail(ErrorKind::Config, "circuit.path: required for qasm_file");
    std::ifstream in(spec.path);
    if (!in) fail(ErrorKind::Io, "cannot open QASM file " + spec.path);
    std::ostringstream text;
    text << in.rdbuf();
    circuit = parse_qasm_subset(text.str());
  } else {
    fail(ErrorKind::Config, "circuit.kind: unknown kind '" + spec.kind + "'");
  }

  if (spec.cuts)
    circuit.cuts = *spec.cuts;
  else if (default_cuts)
    circuit.cuts = *default_cuts;
  else
    circuit.cuts.clear();
  validate(circuit);
  return circuit;
}

namespace {

std::vector<Probe> build_probes(const ExperimentConfig& config) {
  std::vector<Probe> probes;
  for (std::size_t i = 0; i < config.probes; ++i)
    probes.push_back(build_probe(fork_seed(config.master_seed, "probe", i)));
  return probes;
}

std::vector<QpuProfile> make_profiles(const ExperimentConfig& config,
                                      std::size_t saboteurs) {
  // The first `saboteurs` ids in sorted order turn malicious.
  std::vector<std::string> sorted_ids;
  for (const QpuConfig& q : config.qpus) sorted_ids.push_back(q.id);
  std::sort(sorted_ids.begin(), sorted_ids.end());
  std::set<std::string> bad(sorted_ids.begin(),
                            sorted_ids.begin() + std::ptrdiff_t(saboteurs));

  std::vector<QpuProfile> profiles;
  for (const QpuConfig& q : config.qpus) {
    QpuProfile profile;
    profile.id = q.id;
    profile.noisy = q.noise;
    profile.confidentiality_score = q.cs;
    profile.malicious = bad.contains(q.id);
    profile.tamper_probes = config.tamper_probes;
    profiles.push_back(std::move(profile));
  }
  return profiles;
}

struct PointOutcome {
  std::vector<double> values;            // expectation mode: one per evaluation
  std::map<std::string, double> mass;    // counts mode: pooled frequencies
  std::vector<double> parities;          // counts mode: per-evaluation summary
};

PointOutcome run_point(const ExperimentConfig& config, const Circuit& circuit,
                       std::span<const Probe> probes, std::size_t saboteurs) {
  Broker broker(make_profiles(config, saboteurs), config.master_seed);
  broker.score_all(probes, config.shots);

  PointOutcome outcome;
  for (std::size_t e = 0; e < config.evaluations; ++e) {
    if (config.counts_mode) {
      const CountsJobResult job =
          broker.run_counts_job(circuit, config.policy, config.shots, e);
      double parity = 0.0;
      for (const auto& [key, freq] : job.frequencies) {
        int sign = 1;
        for (std::size_t w = 0; w < circuit.wire_count; ++w)
          if (circuit.observable.paulis[w] != 'I' && key[w] == '1')
            sign = -sign;
        parity += double(sign) * freq;
        outcome.mass[key] += freq;
      }
      outcome.parities.push_back(parity);
    } else {
      outcome.values.push_back(
          broker.run_job(circuit, config.policy, config.fakes, config.shots, e)
              .value);
    }
  }
  return outcome;
}

std::pair<Distribution, Distribution> point_distributions(
    const ExperimentConfig& config, const PointOutcome& ground,
    const PointOutcome& point) {
  if (config.counts_mode) {
    // Pooled masses are real-valued (integrity-weighted); normalize over the
    // union of outcomes.
    std::set<std::string> keys;
    double total_g = 0.0;
    double total_p = 0.0;
    for (const auto& [k, m] : ground.mass) {
      keys.insert(k);
      total_g += m;
    }
    for (const auto& [k, m] : point.mass) {
      keys.insert(k);
      total_p += m;
    }
    Distribution dg;
    Distribution dp;
    for (const std::string& k : keys) {
      dg.labels.push_back(k);
      dp.labels.push_back(k);
      const auto ig = ground.mass.find(k);
      const auto ip = point.mass.find(k);
      dg.probs.push_back(ig == ground.mass.end() ? 0.0 : ig->second / total_g);
      dp.probs.push_back(ip == point.mass.end() ? 0.0 : ip->second / total_p);
    }
    return {dg, dp};
  }
  return bin_pair(ground.values, point.values);
}

}  // namespace

SweepReport run_integrity_sweep(const ExperimentConfig& config) {
  validate_config(config);
  const Circuit circuit = realize_circuit(config.circuit);
  if (!config.counts_mode && circuit.cuts.empty())
    fail(ErrorKind::Config, "circuit: integrity sweeps need cut points");
  if (config.counts_mode && !circuit.cuts.empty())
    fail(ErrorKind::Config, "circuit: counts mode runs the circuit uncut");
  const std::vector<Probe> probes = build_probes(config);

  SweepReport report;
  report.kind = "integrity";
  report.config = config;

  const PointOutcome ground = run_point(config, circuit, probes, 0);
  report.reference = config.counts_mode
                         ? point_distributions(config, ground, ground).first
                         : bin_pair(ground.values, ground.values).first;

  std::vector<double> distances;
  for (std::size_t s = config.saboteur_lo; s <= config.saboteur_hi; ++s) {
    const auto started = std::chrono::steady_clock::now();
    // s = 0 is the ground truth run compared with itself; the broker is
    // deterministic, so rerunning it would reproduce `ground` bit for bit.
    const PointOutcome point =
        s == 0 ? ground : run_point(config, circuit, probes, s);
    const auto [dg, dp] = point_distributions(config, ground, point);

    SweepRecord record;
    record.point = s;
    record.label = "s=" + std::to_string(s);
    record.hellinger = hellinger(dg, dp);
    record.summary =
        summarize(config.counts_mode ? point.parities : point.values);
    record.distribution = dp;
    record.runtime_ms =
        std::chrono::duration<double, std::milli>(
            std::chrono::steady_clock::now() - started)
            .count();
    distances.push_back(record.hellinger);
    report.records.push_back(std::move(record));
  }

  if (config.saboteur_lo == 0)
    report.tolerated = tolerated_attackers(distances, config.threshold);
  return report;
}

namespace {

std::vector<double> run_observation_pool(const ExperimentConfig& config,
                                         const Circuit& circuit,
                                         std::span<const Probe> probes) {
  Broker broker(make_profiles(config, 0), config.master_seed);
  broker.score_all(probes, config.shots);
  for (std::size_t e = 0; e < config.evaluations; ++e)
    broker.run_job(circuit, config.policy, config.fakes, config.shots, e);

  std::vector<double> pool;
  for (const DispatchRecord& record : broker.dispatch_log())
    pool.push_back(record.value);
  return pool;
}

}  // namespace

SweepReport run_confidentiality_sweep(
    const ExperimentConfig& config,
    const std::vector<CircuitSpec>& comparisons) {
  validate_config(config);
  if (comparisons.empty())
    fail(ErrorKind::InvalidArgument,
         "confidentiality sweeps need at least one comparison circuit");
  if (config.counts_mode)
    fail(ErrorKind::Config,
         "distribution: confidentiality sweeps pool reported values");
  const Circuit reference = realize_circuit(config.circuit);
  if (reference.cuts.empty())
    fail(ErrorKind::Config, "circuit: confidentiality sweeps need cut points");
  const std::vector<Probe> probes = build_probes(config);

  SweepReport report;
  report.kind = "confidentiality";
  report.config = config;

  const std::vector<double> reference_pool =
      run_observation_pool(config, reference, probes);
  report.reference = bin_pair(reference_pool, reference_pool).first;

  for (std::size_t i = 0; i < comparisons.size(); ++i) {
    const auto started = std::chrono::steady_clock::now();
    const Circuit comparison = realize_circuit(comparisons[i]);
    if (comparison.cuts.empty())
      fail(ErrorKind::Config,
           "comparison " + comparisons[i].kind + ": needs cut points");
    const std::vector<double> pool =
        run_observation_pool(config, comparison, probes);
    const auto [dr, dc] = bin_pair(reference_pool, pool);

    SweepRecord record;
    record.point = i;
    record.label = comparisons[i].kind;
    record.hellinger = hellinger(dr, dc);
    record.summary = summarize(pool);
    record.distribution = dc;
    record.runtime_ms =
        std::chrono::duration<double, std::milli>(
            std::chrono::steady_clock::now() - started)
            .count();
    report.comparisons.push_back(comparisons[i].kind);
    report.records.push_back(std::move(record));
  }
  return report;
}

}  // namespace qcut
