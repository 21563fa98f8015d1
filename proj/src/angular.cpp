#include "vef/angular.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace vef {

namespace {

// Octant weight by sorted level triple; published tables normalized to 1 per octant.
double octant_weight(int N, std::array<int, 3> levels) {
  std::sort(levels.begin(), levels.end());
  if (N == 4) return 1.0 / 3.0;
  const auto is = [&](int a, int b, int c) { return levels == std::array<int, 3>{a, b, c}; };
  if (is(1, 1, 6)) return 0.0707626;
  if (is(1, 2, 5)) return 0.0558811;
  if (is(1, 3, 4)) return 0.0373377;
  if (is(2, 2, 4)) return 0.0502819;
  if (is(2, 3, 3)) return 0.0258513;
  throw std::logic_error("level_symmetric: missing weight class");
}

}  // namespace

AngularQuadrature level_symmetric(int N) {
  double mu1 = 0.0;
  if (N == 4) {
    mu1 = 0.3500212;
  } else if (N == 12) {
    mu1 = 0.1672126;
  } else {
    throw std::invalid_argument("level_symmetric: unsupported order S" + std::to_string(N));
  }
  const int levels = N / 2;
  const double delta = 2.0 * (1.0 - 3.0 * mu1 * mu1) / (N - 2);
  std::vector<double> mu(levels);
  for (int i = 0; i < levels; ++i) mu[i] = std::sqrt(mu1 * mu1 + i * delta);

  AngularQuadrature q;
  q.order = N;
  std::vector<std::array<int, 3>> triples;
  for (int i = 1; i <= levels; ++i) {
    for (int j = 1; j <= levels; ++j) {
      const int k = levels + 2 - i - j;
      if (k >= 1 && k <= levels) triples.push_back({i, j, k});
    }
  }
  double total = 0.0;
  for (int oct = 0; oct < 8; ++oct) {
    const double sx = (oct & 1) ? -1.0 : 1.0;
    const double sy = (oct & 2) ? -1.0 : 1.0;
    const double sz = (oct & 4) ? -1.0 : 1.0;
    for (const auto& t : triples) {
      q.directions.emplace_back(sx * mu[t[0] - 1], sy * mu[t[1] - 1], sz * mu[t[2] - 1]);
      q.weights.push_back(octant_weight(N, t));
      total += q.weights.back();
    }
  }
  const double scale = 4.0 * std::numbers::pi / total;
  for (auto& w : q.weights) w *= scale;
  return q;
}

MomentDefects moment_defects(const AngularQuadrature& quad) {
  double w0 = 0.0;
  Vec3 w1 = Vec3::Zero();
  Eigen::Matrix3d w2 = Eigen::Matrix3d::Zero();
  for (int d = 0; d < quad.size(); ++d) {
    w0 += quad.weights[d];
    w1 += quad.weights[d] * quad.directions[d];
    w2 += quad.weights[d] * quad.directions[d] * quad.directions[d].transpose();
  }
  const double fp = 4.0 * std::numbers::pi;
  return {std::abs(w0 - fp), w1.cwiseAbs().maxCoeff(),
          (w2 - (fp / 3.0) * Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff()};
}

}  // namespace vef
