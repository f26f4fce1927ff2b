#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

namespace recruit {

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Minimise `f` from `start` with an axis-aligned initial simplex of edge
/// `step`. Standard coefficients (reflection 1, expansion 2, contraction 1/2,
/// shrink 1/2). Stops when max - min of the simplex values is at most
/// `tolerance`.
template <class F>
NelderMeadResult nelder_mead(F&& f, std::vector<double> start, double step,
                             double tolerance, int max_iterations) {
  const std::size_t n = start.size();
  std::vector<std::vector<double>> pts(n + 1, start);
  for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += step;
  std::vector<double> vals(n + 1);
  for (std::size_t i = 0; i <= n; ++i) vals[i] = f(pts[i]);

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), trial(n), trial2(n);
  auto along = [&](const std::vector<double>& from, double coef, std::vector<double>& out) {
    for (std::size_t i = 0; i < n; ++i) out[i] = centroid[i] + coef * (from[i] - centroid[i]);
  };

  NelderMeadResult res;
  int it = 0;
  for (; it < max_iterations; ++it) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];
    if (std::isfinite(vals[worst]) && vals[worst] - vals[best] <= tolerance) {
      res.converged = true;
      break;
    }

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t i = 0; i < n; ++i) centroid[i] += pts[order[k]][i] / static_cast<double>(n);

    along(pts[worst], -1.0, trial);
    const double fr = f(trial);
    if (fr < vals[best]) {
      along(pts[worst], -2.0, trial2);
      const double fe = f(trial2);
      if (fe < fr) {
        pts[worst] = trial2;
        vals[worst] = fe;
      } else {
        pts[worst] = trial;
        vals[worst] = fr;
      }
      continue;
    }
    if (fr < vals[second]) {
      pts[worst] = trial;
      vals[worst] = fr;
      continue;
    }
    // Contraction: outside if the reflected point beats the worst, else inside.
    const bool outside = fr < vals[worst];
    along(pts[worst], outside ? -0.5 : 0.5, trial2);
    const double fc = f(trial2);
    if (fc < (outside ? fr : vals[worst])) {
      pts[worst] = trial2;
      vals[worst] = fc;
      continue;
    }
    for (std::size_t k = 1; k <= n; ++k) {
      auto& p = pts[order[k]];
      for (std::size_t i = 0; i < n; ++i) p[i] = pts[best][i] + 0.5 * (p[i] - pts[best][i]);
      vals[order[k]] = f(p);
    }
  }
  const auto best = static_cast<std::size_t>(
      std::min_element(vals.begin(), vals.end()) - vals.begin());
  res.x = pts[best];
  res.value = vals[best];
  res.iterations = it;
  return res;
}

}  // namespace recruit
