#pragma once

// Independent reference implementations used to cross-check the library.
// Nothing here shares code with the implementation paths under test.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "navrl/navgraph.hpp"
#include "navrl/rng.hpp"

namespace oracles {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Floyd-Warshall all-pairs hop distances over an explicit adjacency list.
inline std::vector<std::vector<double>> floyd_warshall(
    std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  std::vector<std::vector<double>> d(n, std::vector<double>(n, kInf));
  for (std::size_t i = 0; i < n; ++i) d[i][i] = 0.0;
  for (const auto& [a, b] : edges) d[a][b] = std::min(d[a][b], 1.0);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i) {
      if (d[i][k] == kInf) continue;
      for (std::size_t j = 0; j < n; ++j)
        if (d[k][j] != kInf && d[i][k] + d[k][j] < d[i][j])
          d[i][j] = d[i][k] + d[k][j];
    }
  return d;
}

inline std::vector<std::vector<double>> floyd_warshall(const navrl::NavGraph& g) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (navrl::NodeId u = 0; u < g.size(); ++u)
    for (const navrl::Edge& e : g.edges_from(u)) edges.push_back({e.from, e.to});
  return floyd_warshall(g.size(), edges);
}

/// Random connected sub-lattice graph with quadrant-exact bearings; always
/// satisfies the one-Move-edge-per-heading-cone requirement.
inline navrl::NavGraph random_lattice_graph(navrl::Rng& rng, int max_nodes) {
  const int side = 8;
  auto key = [&](int x, int y) { return y * side + x; };
  std::vector<bool> chosen(side * side, false);
  std::vector<std::pair<int, int>> cells;
  int x = static_cast<int>(navrl::uniform_index(rng, side));
  int y = static_cast<int>(navrl::uniform_index(rng, side));
  chosen[key(x, y)] = true;
  cells.push_back({x, y});
  int want = 1 + static_cast<int>(navrl::uniform_index(rng, max_nodes));
  int guard = 0;
  while (static_cast<int>(cells.size()) < want && guard++ < 100000) {
    auto [cx, cy] = cells[navrl::uniform_index(rng, cells.size())];
    static const int dx[4] = {1, 0, -1, 0};
    static const int dy[4] = {0, 1, 0, -1};
    int dir = static_cast<int>(navrl::uniform_index(rng, 4));
    int nx = cx + dx[dir], ny = cy + dy[dir];
    if (nx < 0 || ny < 0 || nx >= side || ny >= side) continue;
    if (!chosen[key(nx, ny)]) {
      chosen[key(nx, ny)] = true;
      cells.push_back({nx, ny});
    }
  }
  navrl::GraphBuilder b(1.0);
  std::vector<int> id(side * side, -1);
  for (auto [cx, cy] : cells)
    id[key(cx, cy)] = static_cast<int>(
        b.add_node({static_cast<double>(cx), static_cast<double>(cy), 0.0}));
  for (auto [cx, cy] : cells) {
    if (cx + 1 < side && id[key(cx + 1, cy)] >= 0)
      b.add_move_pair(static_cast<navrl::NodeId>(id[key(cx, cy)]),
                      static_cast<navrl::NodeId>(id[key(cx + 1, cy)]), 0.0);
    if (cy + 1 < side && id[key(cx, cy + 1)] >= 0)
      b.add_move_pair(static_cast<navrl::NodeId>(id[key(cx, cy)]),
                      static_cast<navrl::NodeId>(id[key(cx, cy + 1)]), 90.0);
  }
  return b.build();
}

/// Discounted return by direct summation: sum_k gamma^k r_{t+k} plus the
/// bootstrap tail.
inline std::vector<double> brute_force_returns(const std::vector<double>& rewards,
                                               double gamma, double bootstrap) {
  std::vector<double> out(rewards.size());
  for (std::size_t t = 0; t < rewards.size(); ++t) {
    double acc = 0.0;
    double g = 1.0;
    for (std::size_t k = t; k < rewards.size(); ++k) {
      acc += g * rewards[k];
      g *= gamma;
    }
    acc += g * bootstrap;
    out[t] = acc;
  }
  return out;
}

/// Central finite-difference gradient of a scalar function of a parameter
/// vector accessed through get/set callbacks.
inline double central_difference(const std::function<double()>& eval,
                                 double& param, double h) {
  const double saved = param;
  param = saved + h;
  const double up = eval();
  param = saved - h;
  const double down = eval();
  param = saved;
  return (up - down) / (2.0 * h);
}

/// Chi-squared critical value via the Wilson-Hilferty approximation.
/// p is the upper-tail probability (e.g. 0.01).
inline double chi2_critical(double df, double p) {
  // Upper-tail standard normal quantiles for the p we use.
  double z;
  if (p <= 0.011)
    z = 2.3263478740408408;
  else if (p <= 0.051)
    z = 1.6448536269514722;
  else
    z = 1.2815515655446004;
  double a = 2.0 / (9.0 * df);
  double c = 1.0 - a + z * std::sqrt(a);
  return df * c * c * c;
}

/// Pearson chi-squared statistic for observed counts against a uniform
/// expectation.
inline double chi2_uniform_statistic(const std::vector<std::uint64_t>& counts,
                                     std::uint64_t total) {
  double expected = static_cast<double>(total) / counts.size();
  double stat = 0.0;
  for (auto c : counts) {
    double d = static_cast<double>(c) - expected;
    stat += d * d / expected;
  }
  return stat;
}

}  // namespace oracles
