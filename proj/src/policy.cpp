#include "holgraph/policy.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace holgraph {

std::vector<RankedPremise> top_k(std::span<const std::size_t> indices, std::span<const double> scores, std::size_t k) {
  if (indices.size() != scores.size()) throw std::invalid_argument("top_k: size mismatch");
  std::vector<RankedPremise> all;
  all.reserve(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) all.push_back({indices[i], scores[i]});
  auto order = [](const RankedPremise& a, const RankedPremise& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.index < b.index;
  };
  k = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), order);
  all.resize(k);
  return all;
}

std::vector<std::size_t> top_k_ids(std::span<const double> values, std::size_t k) {
  std::vector<std::size_t> ids(values.size());
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  k = std::min(k, ids.size());
  std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(k), ids.end(),
                    [&](std::size_t a, std::size_t b) { return values[a] != values[b] ? values[a] > values[b] : a < b; });
  ids.resize(k);
  return ids;
}

}  // namespace holgraph
