#include "qcut/adversary.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>

#include "qcut/error.hpp"

namespace qcut {

double tamper(double value, const TamperModel& model, RngStream& rng) {
  assert(std::isfinite(value));
  return (model.base + model.spread * rng.next_unit()) * value;
}

std::map<std::string, std::uint64_t> tamper_counts(
    const std::map<std::string, std::uint64_t>& counts,
    const TamperModel& model, RngStream& rng) {
  std::uint64_t shots = 0;
  for (const auto& [key, c] : counts) shots += c;
  if (shots == 0) return counts;

  // Scale every outcome, then redistribute to keep the shot total intact
  // (largest-remainder rounding, ties broken by key order).
  std::vector<std::string> keys;
  std::vector<double> scaled;
  double total = 0.0;
  for (const auto& [key, c] : counts) {
    const double m = model.base + model.spread * rng.next_unit();
    keys.push_back(key);
    scaled.push_back(m * double(c));
    total += scaled.back();
  }

  std::vector<std::uint64_t> out(keys.size(), 0);
  std::vector<std::pair<double, std::size_t>> remainders;
  std::uint64_t assigned = 0;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const double quota = scaled[i] / total * double(shots);
    out[i] = std::uint64_t(quota);
    assigned += out[i];
    remainders.push_back({quota - double(out[i]), i});
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; assigned < shots; ++i, ++assigned)
    ++out[remainders[i % remainders.size()].second];

  std::map<std::string, std::uint64_t> result;
  for (std::size_t i = 0; i < keys.size(); ++i)
    if (out[i] > 0) result[keys[i]] = out[i];
  return result;
}

ObservationSet observe(const std::vector<DispatchRecord>& dispatch_log,
                       const std::string& qpu_id) {
  ObservationSet set;
  set.qpu_id = qpu_id;
  for (const DispatchRecord& rec : dispatch_log)
    if (rec.qpu_id == qpu_id) set.samples.push_back(rec.value);
  return set;
}

}  // namespace qcut
