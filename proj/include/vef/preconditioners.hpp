#pragma once

#include <Eigen/SparseLU>

#include <memory>
#include <vector>

#include "vef/krylov.hpp"

namespace vef {

class JacobiPreconditioner final : public LinearOperator {
 public:
  explicit JacobiPreconditioner(const SparseMatrix& A);
  int size() const override { return static_cast<int>(inv_diag_.size()); }
  void apply(const Vector& x, Vector& y) const override { y = inv_diag_.cwiseProduct(x); }

 private:
  Vector inv_diag_;
};

/// Sparse LU factorization used as an exact inverse.
class DirectSolver final : public LinearOperator {
 public:
  explicit DirectSolver(const SparseMatrix& A);
  int size() const override { return n_; }
  void apply(const Vector& x, Vector& y) const override;

 private:
  int n_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
};

struct SubstituteOptions {
  double strength_threshold = 0.08;
  int max_coarse = 40000;
};

/// Two-level smoothed aggregation cycle standing in for an algebraic
/// multigrid V-cycle: forward Gauss-Seidel, Galerkin coarse correction with a
/// sparse LU coarse solve, backward Gauss-Seidel.
class TwoLevelSubstitute final : public LinearOperator {
 public:
  explicit TwoLevelSubstitute(const SparseMatrix& A, const SubstituteOptions& opts = {});
  int size() const override { return static_cast<int>(A_.rows()); }
  void apply(const Vector& r, Vector& z) const override;

  int coarse_size() const { return static_cast<int>(P_.cols()); }
  /// Aggregate id of every fine index.
  const std::vector<int>& aggregates() const { return aggregates_; }

 private:
  void gauss_seidel(const Vector& b, Vector& x, bool forward) const;

  SparseMatrix A_;
  Vector diag_;
  std::vector<int> aggregates_;
  SparseMatrix P_;
  SparseMatrix R_;
  std::unique_ptr<DirectSolver> coarse_;
};

/// k steps of z <- z + B (r - A z) from z = 0.
class RichardsonPreconditioner final : public LinearOperator {
 public:
  RichardsonPreconditioner(SparseMatrix A, std::shared_ptr<const LinearOperator> inner, int steps);
  int size() const override { return static_cast<int>(A_.rows()); }
  void apply(const Vector& r, Vector& z) const override;

 private:
  SparseMatrix A_;
  std::shared_ptr<const LinearOperator> inner_;
  int steps_;
};

/// z = Z (A_V solve) Z^T r + I_B diag(A)_B^{-1} I_B^T r.
class SubspaceCorrectionPreconditioner final : public LinearOperator {
 public:
  SubspaceCorrectionPreconditioner(const SparseMatrix& A, SparseMatrix prolongation, std::vector<int> boundary_dofs,
                                   std::shared_ptr<const LinearOperator> continuous_solver);
  int size() const override { return static_cast<int>(Z_.rows()); }
  void apply(const Vector& r, Vector& z) const override;

  const SparseMatrix& prolongation() const { return Z_; }
  const std::vector<int>& boundary_dofs() const { return boundary_; }

 private:
  SparseMatrix Z_;
  SparseMatrix Zt_;
  std::vector<int> boundary_;
  std::vector<double> boundary_inv_diag_;
  std::shared_ptr<const LinearOperator> continuous_;
};

enum class ContinuousMode { exact, substitute, substitute_k_inner };

/// Approximate inverse of a continuous-space operator. The k-inner mode runs
/// `steps` Richardson iterations on `A_V` preconditioned by the substitute
/// built on `preconditioning_operator` (the symmetrized operator if given).
std::shared_ptr<const LinearOperator> make_continuous_solver(ContinuousMode mode, const SparseMatrix& A_V,
                                                             const SparseMatrix* preconditioning_operator = nullptr,
                                                             int steps = 3);

}  // namespace vef
