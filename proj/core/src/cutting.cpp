#include "qcut/cutting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <tuple>

#include "qcut/error.hpp"
#include "qcut/simulator.hpp"

namespace qcut {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;

// Minimal union-find over segment vertices.
struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) {
    for (std::size_t i = 0; i < n; ++i) parent[i] = i;
  }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

struct WireCuts {
  // (position, global cut index), sorted by position.
  std::vector<std::pair<std::size_t, std::size_t>> at;
};

// Segment of `wire` a gate at index `gate_index` acts on: the number of cuts
// on that wire strictly before the gate.
std::size_t segment_of(const WireCuts& cuts, std::size_t gate_index) {
  std::size_t s = 0;
  for (const auto& [pos, idx] : cuts.at)
    if (pos < gate_index) ++s;
  return s;
}

const char kBases[4] = {'I', 'X', 'Y', 'Z'};
const PrepState kPrepStates[6] = {{'Z', +1}, {'Z', -1}, {'X', +1},
                                  {'X', -1}, {'Y', +1}, {'Y', -1}};

}  // namespace

std::vector<Gate> prep_gates(const PrepState& state, std::size_t wire) {
  switch (state.basis) {
    case 'Z':
      if (state.sign > 0) return {};
      return {Gate::x(wire)};
    case 'X':
      return {Gate::ry(state.sign > 0 ? kHalfPi : -kHalfPi, wire)};
    case 'Y':
      return {Gate::rx(state.sign > 0 ? -kHalfPi : kHalfPi, wire)};
    default:
      fail(ErrorKind::InvalidArgument,
           std::string("bad preparation basis '") + state.basis + "'");
  }
}

FragmentSet cut(const Circuit& circuit) {
  validate(circuit);
  if (circuit.cuts.empty())
    fail(ErrorKind::Cut, "circuit has no cut points");

  const std::size_t n = circuit.wire_count;
  std::vector<WireCuts> wire_cuts(n);
  for (std::size_t j = 0; j < circuit.cuts.size(); ++j) {
    const CutPoint& c = circuit.cuts[j];
    wire_cuts[c.wire].at.push_back({c.position, j});
  }
  for (auto& wc : wire_cuts) std::sort(wc.at.begin(), wc.at.end());

  // Vertex per (wire, segment).
  std::vector<std::size_t> first_vertex(n + 1);
  std::size_t total = 0;
  for (std::size_t w = 0; w < n; ++w) {
    first_vertex[w] = total;
    total += wire_cuts[w].at.size() + 1;
  }
  first_vertex[n] = total;
  const auto vertex = [&](std::size_t w, std::size_t s) {
    return first_vertex[w] + s;
  };

  UnionFind uf(total);
  for (std::size_t i = 0; i < circuit.gates.size(); ++i) {
    const Gate& g = circuit.gates[i];
    const std::size_t v0 =
        vertex(g.wires[0], segment_of(wire_cuts[g.wires[0]], i));
    for (std::size_t k = 1; k < g.wires.size(); ++k)
      uf.unite(v0, vertex(g.wires[k], segment_of(wire_cuts[g.wires[k]], i)));
  }

  // Fragments in order of first appearance over (wire, segment).
  FragmentSet fset;
  fset.cut_count = circuit.cuts.size();
  fset.original_wire_count = n;
  fset.original_observable = circuit.observable;

  std::vector<std::size_t> fragment_of_root(total, SIZE_MAX);
  std::vector<std::size_t> local_wire(total, SIZE_MAX);
  for (std::size_t w = 0; w < n; ++w) {
    for (std::size_t s = 0; s + first_vertex[w] < first_vertex[w + 1]; ++s) {
      const std::size_t v = vertex(w, s);
      const std::size_t root = uf.find(v);
      if (fragment_of_root[root] == SIZE_MAX) {
        fragment_of_root[root] = fset.fragments.size();
        fset.fragments.emplace_back();
      }
      Fragment& frag = fset.fragments[fragment_of_root[root]];
      local_wire[v] = frag.wires.size();

      FragmentWire fw;
      fw.original_wire = w;
      fw.segment = s;
      const std::size_t wire_cut_count = wire_cuts[w].at.size();
      if (s > 0) fw.inbound_cut = wire_cuts[w].at[s - 1].second;
      if (s < wire_cut_count) fw.outbound_cut = wire_cuts[w].at[s].second;
      if (s == wire_cut_count) fw.end_pauli = circuit.observable.paulis[w];
      frag.wires.push_back(fw);
    }
  }

  for (Fragment& frag : fset.fragments) {
    frag.circuit.wire_count = frag.wires.size();
    frag.circuit.observable = Observable::identity(frag.wires.size());
    for (std::size_t l = 0; l < frag.wires.size(); ++l) {
      if (frag.wires[l].inbound_cut) frag.prep_stubs.push_back(l);
      if (frag.wires[l].outbound_cut) frag.measure_stubs.push_back(l);
    }
  }

  // Distribute gates, remapping operands to fragment-local wires.
  for (std::size_t i = 0; i < circuit.gates.size(); ++i) {
    Gate g = circuit.gates[i];
    const std::size_t v0 =
        vertex(g.wires[0], segment_of(wire_cuts[g.wires[0]], i));
    Fragment& frag = fset.fragments[fragment_of_root[uf.find(v0)]];
    for (std::size_t& w : g.wires)
      w = local_wire[vertex(w, segment_of(wire_cuts[w], i))];
    frag.circuit.gates.push_back(std::move(g));
  }

  for (const Fragment& frag : fset.fragments) validate(frag.circuit);
  return fset;
}

std::string variant_key(const FragmentSet& fset, std::size_t fragment,
                        const std::vector<char>& measure_basis,
                        const std::vector<PrepState>& prep_state) {
  const Fragment& frag = fset.fragments[fragment];
  // (cut index, role, text); prepared entries sort before measured ones.
  std::vector<std::tuple<std::size_t, int, std::string>> entries;
  for (std::size_t i = 0; i < frag.prep_stubs.size(); ++i) {
    const std::size_t cut_index =
        *frag.wires[frag.prep_stubs[i]].inbound_cut;
    entries.emplace_back(cut_index, 0,
                         std::string(1, prep_state[i].basis) +
                             (prep_state[i].sign > 0 ? '+' : '-'));
  }
  for (std::size_t i = 0; i < frag.measure_stubs.size(); ++i) {
    const std::size_t cut_index =
        *frag.wires[frag.measure_stubs[i]].outbound_cut;
    entries.emplace_back(cut_index, 1,
                         std::string(1, measure_basis[i]) + 'm');
  }
  std::sort(entries.begin(), entries.end());
  std::string key = "frag" + std::to_string(fragment);
  for (const auto& [cut_index, role, text] : entries)
    key += ":cut" + std::to_string(cut_index) + "=" + text;
  return key;
}

namespace {

Circuit make_variant_circuit(const Fragment& frag,
                             const std::vector<char>& measure_basis,
                             const std::vector<PrepState>& prep_state) {
  Circuit c;
  c.wire_count = frag.circuit.wire_count;
  for (std::size_t i = 0; i < frag.prep_stubs.size(); ++i)
    for (const Gate& g : prep_gates(prep_state[i], frag.prep_stubs[i]))
      c.gates.push_back(g);
  c.gates.insert(c.gates.end(), frag.circuit.gates.begin(),
                 frag.circuit.gates.end());
  std::string obs(frag.circuit.wire_count, 'I');
  for (std::size_t l = 0; l < frag.wires.size(); ++l)
    if (!frag.wires[l].outbound_cut) obs[l] = frag.wires[l].end_pauli;
  for (std::size_t i = 0; i < frag.measure_stubs.size(); ++i)
    obs[frag.measure_stubs[i]] = measure_basis[i];
  c.observable = {obs};
  return c;
}

template <typename Visit>
void for_each_variant(const FragmentSet& fset, Visit&& visit) {
  for (std::size_t f = 0; f < fset.fragments.size(); ++f) {
    const Fragment& frag = fset.fragments[f];
    const std::size_t m = frag.measure_stubs.size();
    const std::size_t d = frag.prep_stubs.size();
    std::size_t combos = 1;
    for (std::size_t i = 0; i < m; ++i) combos *= 4;
    for (std::size_t i = 0; i < d; ++i) combos *= 6;

    std::vector<char> bases(m);
    std::vector<PrepState> preps(d);
    for (std::size_t c = 0; c < combos; ++c) {
      std::size_t rest = c;
      for (std::size_t i = 0; i < m; ++i) {
        bases[i] = kBases[rest % 4];
        rest /= 4;
      }
      for (std::size_t i = 0; i < d; ++i) {
        preps[i] = kPrepStates[rest % 6];
        rest /= 6;
      }
      visit(f, bases, preps);
    }
  }
}

}  // namespace

std::vector<FragmentVariant> enumerate_variants(const FragmentSet& fset) {
  std::vector<FragmentVariant> variants;
  for_each_variant(fset, [&](std::size_t f, const std::vector<char>& bases,
                             const std::vector<PrepState>& preps) {
    const Fragment& frag = fset.fragments[f];
    FragmentVariant v;
    v.fragment = f;
    v.measure_basis = bases;
    v.prep_state = preps;
    v.circuit = make_variant_circuit(frag, bases, preps);
    double coef = 1.0;
    for (std::size_t i = 0; i < bases.size(); ++i) coef *= 0.5;
    for (const PrepState& p : preps) coef *= p.sign;
    v.coefficient = coef;
    v.key = variant_key(fset, f, bases, preps);
    variants.push_back(std::move(v));
  });
  return variants;
}

std::vector<std::string> required_variant_keys(const FragmentSet& fset) {
  std::vector<std::string> keys;
  for_each_variant(fset, [&](std::size_t f, const std::vector<char>& bases,
                             const std::vector<PrepState>& preps) {
    keys.push_back(variant_key(fset, f, bases, preps));
  });
  return keys;
}

Reconstruction reconstruct(const std::map<std::string, double>& results,
                           const FragmentSet& fset) {
  const std::size_t k = fset.cut_count;
  if (k == 0) fail(ErrorKind::Cut, "fragment set has no cuts");
  if (k > 16) fail(ErrorKind::Capacity, "too many cuts to reconstruct");

  std::vector<std::string> missing;
  for (const std::string& key : required_variant_keys(fset))
    if (!results.contains(key)) missing.push_back(key);
  if (!missing.empty()) {
    std::sort(missing.begin(), missing.end());
    missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
    std::string what = "missing variant results:";
    for (const std::string& key : missing) what += " " + key;
    fail(ErrorKind::IncompleteResults, what);
  }

  const auto lookup = [&](const std::string& key) {
    return results.at(key);
  };

  // Branch-combined value of one fragment under a global Pauli assignment.
  const auto fragment_value = [&](std::size_t f,
                                  const std::vector<char>& assignment) {
    const Fragment& frag = fset.fragments[f];
    std::vector<char> bases(frag.measure_stubs.size());
    for (std::size_t i = 0; i < bases.size(); ++i)
      bases[i] = assignment[*frag.wires[frag.measure_stubs[i]].outbound_cut];

    const std::size_t d = frag.prep_stubs.size();
    std::vector<PrepState> preps(d);
    double value = 0.0;
    for (std::size_t b = 0; b < (std::size_t{1} << d); ++b) {
      double sign = 1.0;
      for (std::size_t i = 0; i < d; ++i) {
        const char channel =
            assignment[*frag.wires[frag.prep_stubs[i]].inbound_cut];
        const int branch = (b >> i) & 1 ? -1 : +1;
        if (channel == 'I') {
          preps[i] = {'Z', branch};  // identity reuses the Z eigenstates
        } else {
          preps[i] = {channel, branch};
          sign *= branch;
        }
      }
      value += sign * lookup(variant_key(fset, f, bases, preps));
    }
    return value;
  };

  double total = 0.0;
  std::size_t assignments = 1;
  for (std::size_t i = 0; i < k; ++i) assignments *= 4;
  std::vector<char> assignment(k);
  double half_k = 1.0;
  for (std::size_t i = 0; i < k; ++i) half_k *= 0.5;

  for (std::size_t a = 0; a < assignments; ++a) {
    std::size_t rest = a;
    for (std::size_t j = 0; j < k; ++j) {
      assignment[j] = kBases[rest % 4];
      rest /= 4;
    }
    double term = half_k;
    for (std::size_t f = 0; f < fset.fragments.size() && term != 0.0; ++f)
      term *= fragment_value(f, assignment);
    total += term;
  }

  Reconstruction r;
  r.value = total;
  r.out_of_range = std::fabs(total) > 1.0;
  return r;
}

std::map<std::string, double> exact_variant_results(const FragmentSet& fset) {
  std::map<std::string, double> results;
  for (const FragmentVariant& v : enumerate_variants(fset))
    results[v.key] = exact_expectation(v.circuit, v.circuit.observable);
  return results;
}

}  // namespace qcut
