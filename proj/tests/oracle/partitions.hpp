#pragma once
// Set partitions and a pair-counting Adjusted Rand Index.

#include <vector>

namespace oracle {

// All partitions of {0..n-1} as restricted growth strings (labels from 1).
inline std::vector<std::vector<int>> partitions(int n) {
  std::vector<std::vector<int>> out;
  std::vector<int> a(static_cast<std::size_t>(n), 0);
  const auto rec = [&](auto &self, int i, int maxlabel) -> void {
    if (i == n) {
      std::vector<int> labels(a.begin(), a.end());
      for (auto &l : labels)
        ++l;
      out.push_back(labels);
      return;
    }
    for (int v = 0; v <= maxlabel + 1; ++v) {
      a[static_cast<std::size_t>(i)] = v;
      self(self, i + 1, std::max(maxlabel, v));
    }
  };
  if (n == 0)
    return {{}};
  a[0] = 0;
  rec(rec, 1, 0);
  return out;
}

// ARI from pair counts: every pair of items is classified as together/apart
// in each partition. Degenerate denominators (both partitions trivial in the
// same way) score 1.
inline double ari_pairs(const std::vector<int> &a, const std::vector<int> &b) {
  double both = 0, only_a = 0, only_b = 0, neither = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      const bool sa = a[i] == a[j], sb = b[i] == b[j];
      if (sa && sb)
        ++both;
      else if (sa)
        ++only_a;
      else if (sb)
        ++only_b;
      else
        ++neither;
    }
  const double total = both + only_a + only_b + neither;
  if (total == 0)
    return 1.0;
  const double pa = both + only_a, pb = both + only_b;
  const double expected = pa * pb / total;
  const double maximum = 0.5 * (pa + pb);
  if (maximum == expected)
    return 1.0;
  return (both - expected) / (maximum - expected);
}

} // namespace oracle
