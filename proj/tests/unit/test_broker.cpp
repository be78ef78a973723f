#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "qcut/broker.hpp"
#include "qcut/circuit.hpp"
#include "qcut/cutting.hpp"
#include "qcut/error.hpp"
#include "qcut/rng.hpp"
#include "qcut/simulator.hpp"

using namespace qcut;

namespace {

// Executor reporting a fixed value, for pinning the score formula.
class FixedExecutor : public Executor {
 public:
  FixedExecutor(std::string id, double value)
      : id_(std::move(id)), value_(value) {}
  const std::string& id() const override { return id_; }
  double evaluate(const EvalRequest&) override { return value_; }
  Counts sample_counts(const EvalRequest&) override { return {}; }

 private:
  std::string id_;
  double value_;
};

QpuProfile honest(const std::string& id, double is = 10.0, double cs = 10.0) {
  QpuProfile p;
  p.id = id;
  p.integrity_score = is;
  p.confidentiality_score = cs;
  return p;
}

std::vector<QpuProfile> honest_trio() {
  return {honest("alpha"), honest("beta"), honest("gamma")};
}

Circuit cut_ghz4() {
  Circuit ghz = build_ghz(4);
  ghz.cuts = {{0, 1}};
  return ghz;
}

Probe fixed_probe(double expected) {
  Probe p;
  p.circuit.wire_count = 1;
  p.circuit.gates = {Gate::rx(0.0, 0)};
  p.circuit.observable = {"Z"};
  p.expected = expected;
  return p;
}

// Whether `fake` is some real variant with only rotation gates re-drawn:
// same width, same gate count, non-rotation gates identical in place, and
// rotation slots still rotations on the same wires.
bool matches_some_variant(const std::vector<FragmentVariant>& variants,
                          const Circuit& fake) {
  return std::any_of(
      variants.begin(), variants.end(), [&](const FragmentVariant& v) {
        if (v.circuit.wire_count != fake.wire_count) return false;
        if (v.circuit.gates.size() != fake.gates.size()) return false;
        for (std::size_t i = 0; i < fake.gates.size(); ++i) {
          const Gate& a = v.circuit.gates[i];
          const Gate& b = fake.gates[i];
          if (gate_is_rotation(a.kind) != gate_is_rotation(b.kind))
            return false;
          if (!gate_is_rotation(a.kind) && !(a == b)) return false;
          if (gate_is_rotation(a.kind) && a.wires != b.wires) return false;
        }
        return true;
      });
}

bool is_verbatim_copy(const std::vector<FragmentVariant>& variants,
                      const Circuit& fake) {
  return std::any_of(variants.begin(), variants.end(), [&](const auto& v) {
    return v.circuit.gates == fake.gates &&
           v.circuit.wire_count == fake.wire_count;
  });
}

}  // namespace

TEST_CASE("policy and fake-mode names round-trip") {
  for (PolicyKind kind :
       {PolicyKind::Uniform, PolicyKind::Proportional, PolicyKind::Exponential,
        PolicyKind::Profile1, PolicyKind::Profile2, PolicyKind::Profile3})
    CHECK(parse_policy_kind(to_string(kind)) == kind);
  for (FakeMode mode : {FakeMode::None, FakeMode::Random, FakeMode::Calibrated})
    CHECK(parse_fake_mode(to_string(mode)) == mode);
  CHECK_THROWS_AS(parse_policy_kind("fancy"), Error);
  CHECK_THROWS_AS(parse_fake_mode("fancy"), Error);
}

TEST_CASE("integrity score formula on pinned errors") {
  const std::vector<Probe> probes = {fixed_probe(1.0)};

  FixedExecutor exact("e", 1.0);
  CHECK(score_integrity(exact, probes, 100, 1) == 10.0);

  FixedExecutor inflated("i", 1.2);
  CHECK(score_integrity(inflated, probes, 100, 1) ==
        doctest::Approx(8.0).epsilon(1e-12));

  FixedExecutor maximal("m", 2.5);
  CHECK(score_integrity(maximal, probes, 100, 1) == 0.0);

  // Deflation is penalized symmetrically.
  FixedExecutor deflated("d", 0.8);
  CHECK(score_integrity(deflated, probes, 100, 1) ==
        doctest::Approx(8.0).epsilon(1e-12));

  CHECK_THROWS_AS(score_integrity(exact, {}, 100, 1), Error);
}

TEST_CASE("allocation probabilities: shapes and pinned values") {
  std::vector<QpuProfile> qpus = {honest("a", 2.0, 4.0), honest("b", 4.0, 4.0),
                                  honest("c", 2.0, 8.0)};

  SUBCASE("uniform") {
    const auto p = allocation_probabilities(qpus, {PolicyKind::Uniform, 1});
    for (double x : p) CHECK(x == doctest::Approx(1.0 / 3).epsilon(1e-15));
  }
  SUBCASE("proportional is score over sum, exactly on dyadic scores") {
    const auto p =
        allocation_probabilities(qpus, {PolicyKind::Proportional, 1});
    CHECK(p[0] == 0.25);
    CHECK(p[1] == 0.5);
    CHECK(p[2] == 0.25);
  }
  SUBCASE("profile1 weighs confidentiality double") {
    const auto p = allocation_probabilities(qpus, {PolicyKind::Profile1, 1});
    // 2CS+IS = {10, 12, 18}, sum 40.
    CHECK(p[0] == 0.25);
    CHECK(p[1] == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(p[2] == 0.45);
  }
  SUBCASE("profile2 weighs the scores equally") {
    const auto p = allocation_probabilities(qpus, {PolicyKind::Profile2, 1});
    // CS+IS = {6, 8, 10}, sum 24.
    CHECK(p[0] == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(p[1] == doctest::Approx(8.0 / 24).epsilon(1e-15));
    CHECK(p[2] == doctest::Approx(10.0 / 24).epsilon(1e-15));
  }
  SUBCASE("exponential kinds preserve the score ordering") {
    for (PolicyKind kind : {PolicyKind::Exponential, PolicyKind::Profile3}) {
      const auto p = allocation_probabilities(qpus, {kind, 1});
      double sum = 0.0;
      for (double x : p) sum += x;
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(p[1] > p[0]);  // higher IS wins for both kinds
    }
  }
}

TEST_CASE("probability vectors sum to one across random score profiles") {
  RngStream rng(31);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<QpuProfile> qpus;
    const std::size_t n = 2 + rng.next_index(7);
    for (std::size_t i = 0; i < n; ++i)
      qpus.push_back(honest("q" + std::to_string(i), rng.next_in(0.0, 10.0),
                            rng.next_in(0.0, 10.0)));
    for (PolicyKind kind :
         {PolicyKind::Uniform, PolicyKind::Proportional,
          PolicyKind::Exponential, PolicyKind::Profile1, PolicyKind::Profile2,
          PolicyKind::Profile3}) {
      const auto p = allocation_probabilities(qpus, {kind, 1});
      double sum = 0.0;
      for (double x : p) {
        CHECK(x >= 0.0);
        sum += x;
      }
      CHECK(std::fabs(sum - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("proportional scaling and exponential shifting are exact") {
  std::vector<QpuProfile> qpus = {honest("a", 1.0), honest("b", 2.0),
                                  honest("c", 4.0), honest("d", 0.5)};
  std::vector<QpuProfile> scaled = qpus;
  for (auto& q : scaled) q.integrity_score *= 2.0;
  std::vector<QpuProfile> shifted = qpus;
  for (auto& q : shifted) q.integrity_score += 1.0;

  const auto p0 = allocation_probabilities(qpus, {PolicyKind::Proportional, 1});
  const auto p1 =
      allocation_probabilities(scaled, {PolicyKind::Proportional, 1});
  CHECK(p0 == p1);  // bitwise: scaling by 2 cancels in the quotient

  const auto e0 = allocation_probabilities(qpus, {PolicyKind::Exponential, 1});
  const auto e1 =
      allocation_probabilities(shifted, {PolicyKind::Exponential, 1});
  CHECK(e0 == e1);  // bitwise: the stabilized exponent differences are equal
}

TEST_CASE("a zero-score saboteur is starved of work") {
  std::vector<QpuProfile> qpus;
  for (int i = 0; i < 5; ++i) qpus.push_back(honest("h" + std::to_string(i)));
  qpus.push_back(honest("saboteur", 0.0));

  const auto prop =
      allocation_probabilities(qpus, {PolicyKind::Proportional, 1});
  CHECK(prop.back() == 0.0);

  const auto expo =
      allocation_probabilities(qpus, {PolicyKind::Exponential, 1});
  // e^{-10} / (5 + e^{-10}) = 9.08e-6
  CHECK(expo.back() < 1e-5);
  CHECK(expo.back() == doctest::Approx(9.0799859e-6).epsilon(1e-4));
}

TEST_CASE("degenerate scores raise, and the broker falls back to uniform") {
  std::vector<QpuProfile> qpus = {honest("a", 0.0), honest("b", 0.0)};
  CHECK_THROWS_AS(
      allocation_probabilities(qpus, {PolicyKind::Proportional, 1}), Error);

  // Exponential never degenerates: e^0 is still positive.
  const auto p = allocation_probabilities(qpus, {PolicyKind::Exponential, 1});
  CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("replica assignment picks distinct QPUs") {
  const std::vector<double> probs = {0.7, 0.2, 0.1, 0.0};
  RngStream rng(13);
  for (int i = 0; i < 200; ++i) {
    const auto picks = assign_replicas(probs, 3, rng);
    REQUIRE(picks.size() == 3);
    const std::set<std::size_t> unique(picks.begin(), picks.end());
    CHECK(unique.size() == 3);
    for (std::size_t idx : picks) CHECK(idx < 4);
  }

  // Exhausted mass: the remaining picks are uniform over what is left.
  const std::vector<double> point_mass = {1.0, 0.0, 0.0};
  RngStream rng2(14);
  const auto picks = assign_replicas(point_mass, 3, rng2);
  CHECK(std::set<std::size_t>(picks.begin(), picks.end()).size() == 3);
  CHECK(picks[0] == 0);
}

TEST_CASE("replica aggregation is the integrity-weighted mean") {
  const std::vector<double> values = {1.0, 2.5};
  const std::vector<double> weights = {10.0, 0.0};
  CHECK(aggregate_replicas(values, weights) == 1.0);

  const std::vector<double> equal_weights = {10.0, 10.0};
  const std::vector<double> pair = {1.0, 2.0};
  CHECK(aggregate_replicas(pair, equal_weights) == 1.5);

  const std::vector<double> zeros = {0.0, 0.0};
  CHECK(aggregate_replicas(pair, zeros) == 1.5);  // degrades to plain mean
}

TEST_CASE("decoy generation: counts, widths, determinism") {
  const auto variants = enumerate_variants(cut(cut_ghz4()));

  RngStream none_rng(1);
  CHECK(generate_fakes(variants, {FakeMode::None, 5}, none_rng).empty());
  RngStream zero_rng(1);
  CHECK(generate_fakes(variants, {FakeMode::Random, 0}, zero_rng).empty());

  RngStream rng_a(2), rng_b(2);
  const auto fakes_a = generate_fakes(variants, {FakeMode::Random, 5}, rng_a);
  const auto fakes_b = generate_fakes(variants, {FakeMode::Random, 5}, rng_b);
  CHECK(fakes_a.size() == 5 * variants.size());

  std::set<std::size_t> real_widths;
  for (const auto& v : variants) real_widths.insert(v.circuit.wire_count);
  for (std::size_t i = 0; i < fakes_a.size(); ++i)
    CHECK(real_widths.count(fakes_a[i].wire_count) == 1);
  for (std::size_t i = 0; i < fakes_a.size(); ++i)
    CHECK(fakes_a[i].gates == fakes_b[i].gates);  // same stream, same decoys
}

TEST_CASE("random decoys mirror a real variant's structure") {
  Circuit chain;
  chain.wire_count = 3;
  chain.gates = {Gate::ry(1.1, 0), Gate::rx(0.4, 1), Gate::cnot(0, 1),
                 Gate::rz(2.2, 1), Gate::cz(1, 2), Gate::ry(0.9, 2)};
  chain.observable = Observable::all_z(3);
  chain.cuts = {{1, 3}};
  const auto variants = enumerate_variants(cut(chain));

  RngStream rng(6);
  const auto fakes = generate_fakes(variants, {FakeMode::Random, 3}, rng);
  REQUIRE(fakes.size() == 3 * variants.size());
  // Each decoy matches some real variant gate-for-gate in arity, with only
  // rotation axes and angles replaced.
  for (const Circuit& fake : fakes)
    CHECK(matches_some_variant(variants, fake));
}

TEST_CASE("rotation-free variants come back verbatim as random decoys") {
  // GHZ variants only carry rotations when an X or Y eigenstate is prepared
  // on the stub; measure-side and Z-prep variants have none, so a decoy
  // sourced from them has nothing to re-draw and must be an exact copy.
  const auto variants = enumerate_variants(cut(cut_ghz4()));
  RngStream rng(3);
  const auto fakes = generate_fakes(variants, {FakeMode::Random, 4}, rng);
  std::size_t verbatim = 0;
  for (const Circuit& fake : fakes) {
    const bool has_rotation =
        std::any_of(fake.gates.begin(), fake.gates.end(), [](const Gate& g) {
          return gate_is_rotation(g.kind);
        });
    if (!has_rotation) {
      CHECK(is_verbatim_copy(variants, fake));
      ++verbatim;
    } else {
      CHECK(matches_some_variant(variants, fake));
    }
  }
  CHECK(verbatim > 0);  // rotation-free sources are common for GHZ
}

TEST_CASE("calibrated decoys land inside the widened real range") {
  const auto variants = enumerate_variants(cut(build_alt_benchmark()));

  double lo = 1.0, hi = -1.0;
  for (const auto& v : variants) {
    const double e = exact_expectation(v.circuit, v.circuit.observable);
    lo = std::min(lo, e);
    hi = std::max(hi, e);
  }
  double span = hi - lo;
  if (span < 1e-9) span = 0.1;  // degenerate ranges are widened around a point
  const double wlo = std::max(-1.0, lo - 0.05 * span);
  const double whi = std::min(1.0, hi + 0.05 * span);

  RngStream rng(9);
  const auto fakes = generate_fakes(variants, {FakeMode::Calibrated, 2}, rng);
  REQUIRE(fakes.size() == 2 * variants.size());
  for (const Circuit& fake : fakes) {
    const double predicted = exact_expectation(fake, fake.observable);
    CHECK(predicted >= wlo - 1e-9);
    CHECK(predicted <= whi + 1e-9);
  }
}

TEST_CASE("honest noiseless job reproduces the uncut expectation") {
  Broker broker(honest_trio(), 77);
  const JobResult job =
      broker.run_job(cut_ghz4(), {PolicyKind::Uniform, 1}, {}, 20000, 0);
  CHECK(job.value == doctest::Approx(1.0).epsilon(0.05));
  CHECK_FALSE(job.degenerate_fallback);

  // Every required variant is present, once per replica.
  const auto required = required_variant_keys(cut(cut_ghz4()));
  CHECK(job.per_variant.size() == required.size());
  for (const auto& key : required) {
    REQUIRE(job.per_variant.count(key) == 1);
    const VariantOutcome& out = job.per_variant.at(key);
    CHECK(out.qpu_ids.size() == 1);
    CHECK(out.raw.size() == 1);
  }
  for (const DispatchRecord& r : job.dispatch_log) CHECK_FALSE(r.tampered);
}

TEST_CASE("job values are deterministic and routing-independent") {
  const Circuit circuit = cut_ghz4();
  const auto run = [&](PolicyKind kind, std::size_t r, FakePolicy fakes) {
    Broker broker(honest_trio(), 42);
    return broker.run_job(circuit, {kind, r}, fakes, 500, 3);
  };

  const double base = run(PolicyKind::Uniform, 1, {}).value;
  // Same master seed: byte-identical.
  CHECK(run(PolicyKind::Uniform, 1, {}).value == base);
  // Honest identical executors: the value cannot depend on who ran what, so
  // changing the policy, replicating, or flooding with decoys leaves the
  // reconstructed value exactly unchanged (work is seeded by variant alone).
  CHECK(run(PolicyKind::Exponential, 1, {}).value == base);
  CHECK(run(PolicyKind::Uniform, 2, {}).value == base);
  CHECK(run(PolicyKind::Uniform, 1, {FakeMode::Random, 5}).value == base);
  CHECK(run(PolicyKind::Uniform, 1, {FakeMode::Calibrated, 2}).value == base);
}

TEST_CASE("decoys appear in the dispatch log but never in reconstruction") {
  Broker broker(honest_trio(), 5);
  const FakePolicy fakes{FakeMode::Random, 2};
  const JobResult job =
      broker.run_job(cut_ghz4(), {PolicyKind::Uniform, 1}, fakes, 200, 0);

  const std::size_t variant_count =
      enumerate_variants(cut(cut_ghz4())).size();
  std::size_t fake_records = 0, real_records = 0;
  for (const DispatchRecord& r : job.dispatch_log) {
    if (r.is_fake) {
      ++fake_records;
      CHECK(r.variant_key.empty());
    } else {
      ++real_records;
    }
  }
  // Two decoys per real variant on each of the three QPUs.
  CHECK(fake_records == 2 * variant_count * 3);
  CHECK(real_records == variant_count);
}

TEST_CASE("malicious executors tamper and honest scoring exposes them") {
  QpuProfile saboteur;
  saboteur.id = "mallory";
  saboteur.malicious = true;

  std::vector<Probe> probes;
  for (std::uint64_t i = 0; i < 8; ++i) probes.push_back(build_probe(i));

  SimulatedQpu tampering(saboteur, 99);
  const double tampered_is = score_integrity(tampering, probes, 4000, 7);
  CHECK(tampered_is < 5.0);

  saboteur.tamper_probes = false;
  SimulatedQpu covert(saboteur, 99);
  const double covert_is = score_integrity(covert, probes, 4000, 7);
  CHECK(covert_is > 9.0);

  QpuProfile honest_profile = honest("goodie");
  SimulatedQpu honest_qpu(honest_profile, 99);
  const double honest_is = score_integrity(honest_qpu, probes, 4000, 7);
  CHECK(honest_is > 9.0);
}

TEST_CASE("a tampering QPU shifts the reconstructed value") {
  std::vector<QpuProfile> profiles = honest_trio();
  for (auto& p : profiles) p.malicious = true;

  Broker honest_broker(honest_trio(), 11);
  Broker evil_broker(profiles, 11);
  const Circuit circuit = cut_ghz4();
  const JobResult good =
      honest_broker.run_job(circuit, {PolicyKind::Uniform, 1}, {}, 1000, 0);
  const JobResult bad =
      evil_broker.run_job(circuit, {PolicyKind::Uniform, 1}, {}, 1000, 0);

  CHECK(good.value != bad.value);
  std::size_t tampered = 0;
  for (const DispatchRecord& r : bad.dispatch_log)
    if (r.tampered) ++tampered;
  CHECK(tampered == bad.dispatch_log.size());
}

TEST_CASE("counts jobs aggregate histograms over replicas") {
  Broker broker(honest_trio(), 21);
  const Circuit ghz = build_ghz(3);
  const CountsJobResult result =
      broker.run_counts_job(ghz, {PolicyKind::Uniform, 2}, 400, 0);

  double total = 0.0;
  for (const auto& [key, freq] : result.frequencies) {
    CHECK(key.size() == 3);
    total += freq;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-9));

  Broker broker2(honest_trio(), 21);
  const CountsJobResult again =
      broker2.run_counts_job(ghz, {PolicyKind::Uniform, 2}, 400, 0);
  CHECK(again.frequencies == result.frequencies);
}

TEST_CASE("score_all fills profiles and logs probe dispatches") {
  Broker broker(honest_trio(), 33);
  std::vector<Probe> probes;
  for (std::uint64_t i = 0; i < 4; ++i) probes.push_back(build_probe(i));
  broker.score_all(probes, 2000);

  for (const QpuProfile& p : broker.profiles()) {
    CHECK(p.integrity_score > 9.0);
    CHECK(p.integrity_score <= 10.0);
  }
  std::size_t probe_records = 0;
  for (const DispatchRecord& r : broker.dispatch_log())
    if (r.is_probe) ++probe_records;
  CHECK(probe_records == 4 * 3);
}
