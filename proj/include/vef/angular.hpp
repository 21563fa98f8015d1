#pragma once

#include <Eigen/Dense>

#include <vector>

namespace vef {

using Vec3 = Eigen::Vector3d;

/// Discrete ordinates on the full unit sphere; weights sum to 4 pi.
struct AngularQuadrature {
  int order = 0;
  std::vector<Vec3> directions;
  std::vector<double> weights;
  int size() const { return static_cast<int>(directions.size()); }
};

/// Level-symmetric S_N set, N in {4, 12}. Throws std::invalid_argument otherwise.
AngularQuadrature level_symmetric(int N);

struct MomentDefects {
  double zeroth;  // |sum w - 4 pi|
  double first;   // max |sum w Omega|
  double second;  // max |sum w Omega Omega^T - (4 pi / 3) I|
};
MomentDefects moment_defects(const AngularQuadrature& quad);

}  // namespace vef
