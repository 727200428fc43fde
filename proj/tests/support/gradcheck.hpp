#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "holgraph/model.hpp"

namespace gradcheck {

struct Worst {
  std::string name;
  double relative = 0;
  double analytic = 0;
  double numeric = 0;
};

struct Report {
  std::vector<Worst> groups;  // worst entry of every parameter tensor
  std::size_t entries = 0;

  double max_relative() const {
    double m = 0;
    for (const auto& g : groups) m = std::max(m, g.relative);
    return m;
  }
};

// |a - n| / max(|a|, |n|, floor); the floor keeps entries whose gradient is
// essentially zero from dominating through rounding noise.
inline double relative_error(double a, double n, double floor) {
  return std::abs(a - n) / std::max({std::abs(a), std::abs(n), floor});
}

// Central differences of `loss` against the analytic gradient for up to
// `per_tensor` entries of each parameter (all entries when 0). `loss` must be
// deterministic, which means reseeding any dropout stream on every call.
inline Report check(holgraph::ModelParams<double>& params, const holgraph::ModelParams<double>& analytic,
                    const std::function<double()>& loss, double eps, std::size_t per_tensor, double floor,
                    std::uint64_t seed = 7) {
  Report report;
  auto named = holgraph::collect_parameters(params);
  auto grads = holgraph::collect_parameters(const_cast<holgraph::ModelParams<double>&>(analytic));
  holgraph::Rng rng(seed);
  for (std::size_t t = 0; t < named.size(); ++t) {
    auto& m = *named[t].value;
    const auto size = static_cast<std::size_t>(m.size());
    std::vector<std::size_t> entries(size);
    for (std::size_t i = 0; i < size; ++i) entries[i] = i;
    if (per_tensor > 0 && per_tensor < size) {
      std::shuffle(entries.begin(), entries.end(), rng);
      entries.resize(per_tensor);
    }
    Worst worst{named[t].name};
    for (std::size_t i : entries) {
      double& x = m.data()[i];
      const double saved = x;
      x = saved + eps;
      const double up = loss();
      x = saved - eps;
      const double down = loss();
      x = saved;
      const double numeric = (up - down) / (2 * eps);
      const double a = grads[t].value->data()[i];
      const double r = relative_error(a, numeric, floor);
      if (r >= worst.relative) worst = {named[t].name, r, a, numeric};
      ++report.entries;
    }
    report.groups.push_back(worst);
  }
  return report;
}

}  // namespace gradcheck
