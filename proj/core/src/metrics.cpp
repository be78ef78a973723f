#include "qcut/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "qcut/error.hpp"

namespace qcut {

double hellinger(const Distribution& p, const Distribution& q) {
  if (p.categorical() != q.categorical() || p.edges != q.edges ||
      p.labels != q.labels || p.probs.size() != q.probs.size())
    fail(ErrorKind::InvalidArgument,
         "hellinger requires distributions over the same support");
  double sum = 0.0;
  for (std::size_t i = 0; i < p.probs.size(); ++i) {
    const double d = std::sqrt(p.probs[i]) - std::sqrt(q.probs[i]);
    sum += d * d;
  }
  return std::min(1.0, std::sqrt(sum / 2.0));
}

std::pair<Distribution, Distribution> bin_pair(std::span<const double> a,
                                               std::span<const double> b,
                                               std::size_t bins) {
  if (a.empty() || b.empty())
    fail(ErrorKind::InvalidArgument, "bin_pair requires nonempty sample sets");
  if (bins < 2)
    fail(ErrorKind::InvalidArgument, "bin_pair requires at least 2 bins");

  double lo = a[0];
  double hi = a[0];
  for (double x : a) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  for (double x : b) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }

  if (lo == hi) {
    // Every sample identical: one full bin each, distance trivially zero.
    Distribution d;
    d.edges = {lo - 0.5, lo + 0.5};
    d.probs = {1.0};
    return {d, d};
  }

  Distribution pa;
  pa.edges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i)
    pa.edges[i] = lo + (hi - lo) * (double(i) / double(bins));
  pa.edges.front() = lo;
  pa.edges.back() = hi;
  Distribution pb = pa;

  const auto fill = [&](std::span<const double> samples, Distribution& d) {
    std::vector<std::size_t> counts(bins, 0);
    for (double x : samples) {
      auto idx = std::size_t((x - lo) / (hi - lo) * double(bins));
      ++counts[std::min(idx, bins - 1)];
    }
    d.probs.resize(bins);
    for (std::size_t i = 0; i < bins; ++i)
      d.probs[i] = double(counts[i]) / double(samples.size());
  };
  fill(a, pa);
  fill(b, pb);
  return {pa, pb};
}

std::pair<Distribution, Distribution> categorical_pair(
    const std::map<std::string, std::uint64_t>& a,
    const std::map<std::string, std::uint64_t>& b) {
  if (a.empty() || b.empty())
    fail(ErrorKind::InvalidArgument,
         "categorical_pair requires nonempty count maps");
  std::set<std::string> keys;
  std::uint64_t total_a = 0;
  std::uint64_t total_b = 0;
  for (const auto& [k, c] : a) {
    keys.insert(k);
    total_a += c;
  }
  for (const auto& [k, c] : b) {
    keys.insert(k);
    total_b += c;
  }
  if (total_a == 0 || total_b == 0)
    fail(ErrorKind::InvalidArgument, "categorical_pair requires nonzero totals");

  Distribution pa;
  Distribution pb;
  for (const std::string& k : keys) {
    pa.labels.push_back(k);
    pb.labels.push_back(k);
    const auto ia = a.find(k);
    const auto ib = b.find(k);
    pa.probs.push_back(ia == a.end() ? 0.0
                                     : double(ia->second) / double(total_a));
    pb.probs.push_back(ib == b.end() ? 0.0
                                     : double(ib->second) / double(total_b));
  }
  return {pa, pb};
}

double tvd_bound(double h) {
  if (h < 0.0 || h > 1.0)
    fail(ErrorKind::InvalidArgument, "hellinger value outside [0,1]");
  return std::min(1.0, std::sqrt(2.0) * h);
}

namespace {

// Linearly interpolated quantile of a sorted sample (the convention used by
// numpy's default and R's type 7).
double quantile_sorted(const std::vector<double>& sorted, double p) {
  const double pos = p * double(sorted.size() - 1);
  const auto below = std::size_t(pos);
  const std::size_t above = std::min(below + 1, sorted.size() - 1);
  const double frac = pos - double(below);
  return sorted[below] + frac * (sorted[above] - sorted[below]);
}

}  // namespace

Summary summarize(std::span<const double> samples) {
  if (samples.empty())
    fail(ErrorKind::InvalidArgument, "summarize requires samples");
  Summary s;
  s.count = samples.size();
  s.mean = std::accumulate(samples.begin(), samples.end(), 0.0) /
           double(samples.size());
  if (samples.size() > 1) {
    double ss = 0.0;
    for (double x : samples) ss += (x - s.mean) * (x - s.mean);
    s.std_dev = std::sqrt(ss / double(samples.size() - 1));
  }
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  s.min = sorted.front();
  s.max = sorted.back();
  s.q1 = quantile_sorted(sorted, 0.25);
  s.median = quantile_sorted(sorted, 0.5);
  s.q3 = quantile_sorted(sorted, 0.75);
  return s;
}

std::size_t tolerated_attackers(std::span<const double> distances,
                                double threshold) {
  if (distances.empty())
    fail(ErrorKind::InvalidArgument, "no distances to evaluate");
  if (distances[0] > threshold)
    fail(ErrorKind::Validation,
         "distance at zero saboteurs exceeds the threshold; the sweep does "
         "not reproduce its own ground truth");
  std::size_t t = 0;
  while (t + 1 < distances.size() && distances[t + 1] <= threshold) ++t;
  return t;
}

}  // namespace qcut
