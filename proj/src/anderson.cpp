#include "vef/anderson.hpp"

#include <stdexcept>

namespace vef {

AndersonAccelerator::AndersonAccelerator(int window, double rank_tol) : window_(window), rank_tol_(rank_tol) {
  if (window < 1) throw std::invalid_argument("AndersonAccelerator: window must be >= 1");
}

void AndersonAccelerator::reset() {
  has_prev_ = false;
  dF_.clear();
  dG_.clear();
}

Vector AndersonAccelerator::update(const Vector& x, const Vector& gx) {
  if (x.size() != gx.size()) throw DimensionError("AndersonAccelerator: x and G(x) differ in size");
  if (has_prev_ && prev_f_.size() != x.size()) throw DimensionError("AndersonAccelerator: vector size changed");
  const Vector f = gx - x;
  if (has_prev_) {
    dF_.push_back(f - prev_f_);
    dG_.push_back(gx - prev_g_);
    if (static_cast<int>(dF_.size()) > window_) {
      dF_.pop_front();
      dG_.pop_front();
    }
  }
  prev_f_ = f;
  prev_g_ = gx;
  has_prev_ = true;

  while (!dF_.empty()) {
    const int m = static_cast<int>(dF_.size());
    Eigen::MatrixXd F(x.size(), m);
    for (int j = 0; j < m; ++j) F.col(j) = dF_[j];
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(F);
    const double scale = F.norm();
    qr.setThreshold(rank_tol_);
    if (scale > 0.0 && qr.rank() == m) {
      const Eigen::VectorXd gamma = qr.solve(f);
      Vector next = gx;
      for (int j = 0; j < m; ++j) next -= gamma[j] * dG_[j];
      return next;
    }
    dF_.pop_front();
    dG_.pop_front();
  }
  return gx;
}

}  // namespace vef
