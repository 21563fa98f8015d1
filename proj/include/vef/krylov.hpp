#pragma once

#include <string>

#include "vef/sparse.hpp"

namespace vef {

/// y = Op(x). Implementations must be linear and deterministic.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;
  virtual int size() const = 0;
  virtual void apply(const Vector& x, Vector& y) const = 0;
};

class MatrixOperator final : public LinearOperator {
 public:
  explicit MatrixOperator(const SparseMatrix& A) : A_(A) {}
  int size() const override { return static_cast<int>(A_.rows()); }
  void apply(const Vector& x, Vector& y) const override { y.noalias() = A_ * x; }

 private:
  const SparseMatrix& A_;
};

class IdentityOperator final : public LinearOperator {
 public:
  explicit IdentityOperator(int n) : n_(n) {}
  int size() const override { return n_; }
  void apply(const Vector& x, Vector& y) const override { y = x; }

 private:
  int n_;
};

enum class KrylovStatus { converged, max_iterations, breakdown };
std::string to_string(KrylovStatus s);

struct KrylovResult {
  Vector x;
  int iterations = 0;
  KrylovStatus status = KrylovStatus::max_iterations;
  double relative_residual = 0.0;
  bool converged() const { return status == KrylovStatus::converged; }
};

struct KrylovOptions {
  double rel_tol = 1e-8;
  int max_iter = 1000;
};

/// Right-preconditioned BiCGStab. Stops when ||b - Ax|| <= rel_tol ||b||.
/// On breakdown it restarts once from the current iterate.
KrylovResult bicgstab(const LinearOperator& A, const Vector& b, const LinearOperator* precond,
                      const Vector* x0, const KrylovOptions& opts);
KrylovResult bicgstab(const SparseMatrix& A, const Vector& b, const LinearOperator* precond,
                      const Vector* x0, const KrylovOptions& opts);

/// Preconditioned conjugate gradients for symmetric positive definite systems.
KrylovResult conjugate_gradient(const LinearOperator& A, const Vector& b, const LinearOperator* precond,
                                const Vector* x0, const KrylovOptions& opts);

}  // namespace vef
