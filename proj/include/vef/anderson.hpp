#pragma once

#include <deque>

#include "vef/sparse.hpp"

namespace vef {

/// Type-II Anderson mixing over the last `window` iterates, undamped.
/// The least-squares problem min ||f_k - dF gamma|| is solved by a
/// column-pivoted QR; columns are dropped oldest-first until it has full rank.
class AndersonAccelerator {
 public:
  explicit AndersonAccelerator(int window, double rank_tol = 1e-12);

  /// Given x_k and G(x_k) returns x_{k+1}.
  Vector update(const Vector& x, const Vector& gx);
  void reset();
  int window() const { return window_; }
  /// Difference columns currently stored.
  int history_size() const { return static_cast<int>(dF_.size()); }

 private:
  int window_;
  double rank_tol_;
  bool has_prev_ = false;
  Vector prev_f_, prev_g_;
  std::deque<Vector> dF_, dG_;
};

}  // namespace vef
