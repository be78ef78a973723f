#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace qcut {

// A probability distribution in one of two forms:
//  - binned: `edges` has probs.size() + 1 entries and labels is empty;
//  - categorical: `labels` has probs.size() entries and edges is empty.
// Probabilities are nonnegative and sum to 1 (within float rounding).
struct Distribution {
  std::vector<double> edges;
  std::vector<std::string> labels;
  std::vector<double> probs;

  bool categorical() const { return !labels.empty(); }
};

// Hellinger distance (1/sqrt(2)) * sqrt(sum (sqrt(p) - sqrt(q))^2), in [0,1].
// Both inputs must share the same support (identical edges or labels).
double hellinger(const Distribution& p, const Distribution& q);

// Build comparable histograms for two sample sets: equal-width bins over the
// [min, max] range of the union, so the two distributions share edges. If all
// samples coincide the histograms degenerate to a single full bin (distance 0).
std::pair<Distribution, Distribution> bin_pair(std::span<const double> a,
                                               std::span<const double> b,
                                               std::size_t bins = 64);

// Build comparable categorical distributions over the union of observed keys.
std::pair<Distribution, Distribution> categorical_pair(
    const std::map<std::string, std::uint64_t>& a,
    const std::map<std::string, std::uint64_t>& b);

// Upper bound on total variation distance implied by a Hellinger distance:
// min(1, sqrt(2) * h).
double tvd_bound(double h);

struct Summary {
  double mean = 0.0;
  double std_dev = 0.0;  // n-1 denominator; 0 for a single sample
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  std::size_t count = 0;
};

Summary summarize(std::span<const double> samples);

// Largest saboteur count t such that distances[s] <= threshold for every
// s <= t. distances[s] is the distance for s saboteurs, contiguous from 0.
// distances[0] must itself be within the threshold (ground truth compared
// against itself); anything else means the sweep is self-inconsistent.
std::size_t tolerated_attackers(std::span<const double> distances,
                                double threshold = 0.25);

}  // namespace qcut
