#include "vef/krylov.hpp"

#include <cmath>
#include <limits>

namespace vef {

std::string to_string(KrylovStatus s) {
  switch (s) {
    case KrylovStatus::converged: return "converged";
    case KrylovStatus::max_iterations: return "max_iterations";
    case KrylovStatus::breakdown: return "breakdown";
  }
  return "unknown";
}

namespace {

void precondition(const LinearOperator* M, const Vector& r, Vector& z) {
  if (M) {
    M->apply(r, z);
  } else {
    z = r;
  }
}

}  // namespace

KrylovResult bicgstab(const LinearOperator& A, const Vector& b, const LinearOperator* precond,
                      const Vector* x0, const KrylovOptions& opts) {
  const int n = A.size();
  if (b.size() != n || (x0 && x0->size() != n)) throw DimensionError("bicgstab: dimension mismatch");
  KrylovResult res;
  res.x = x0 ? *x0 : Vector::Zero(n);
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    res.x.setZero();
    res.status = KrylovStatus::converged;
    return res;
  }
  const double target = opts.rel_tol * bnorm;
  Vector r(n), rhat(n), p(n), v(n), phat(n), s(n), shat(n), t(n), tmp(n);
  A.apply(res.x, tmp);
  r = b - tmp;
  double rnorm = r.norm();
  res.relative_residual = rnorm / bnorm;
  if (rnorm <= target) {
    res.status = KrylovStatus::converged;
    return res;
  }
  bool restarted = false;
  const double tiny = std::numeric_limits<double>::epsilon();
  auto reset = [&]() {
    rhat = r;
    p.setZero();
    v.setZero();
  };
  reset();
  double rho = 1.0, alpha = 1.0, omega = 1.0;
  while (res.iterations < opts.max_iter) {
    const double rho_new = rhat.dot(r);
    if (std::abs(rho_new) <= tiny * rhat.norm() * rnorm) {
      if (restarted) {
        res.status = KrylovStatus::breakdown;
        return res;
      }
      restarted = true;
      reset();
      rho = alpha = omega = 1.0;
      continue;
    }
    const double beta = (rho_new / rho) * (alpha / omega);
    rho = rho_new;
    p = r + beta * (p - omega * v);
    precondition(precond, p, phat);
    A.apply(phat, v);
    const double rv = rhat.dot(v);
    ++res.iterations;
    if (rv == 0.0 || !std::isfinite(rv)) {
      if (restarted) {
        res.status = KrylovStatus::breakdown;
        return res;
      }
      restarted = true;
      reset();
      rho = alpha = omega = 1.0;
      continue;
    }
    alpha = rho / rv;
    s = r - alpha * v;
    res.x += alpha * phat;
    const double snorm = s.norm();
    if (snorm <= target) {
      res.relative_residual = snorm / bnorm;
      res.status = KrylovStatus::converged;
      return res;
    }
    precondition(precond, s, shat);
    A.apply(shat, t);
    const double tt = t.squaredNorm();
    omega = tt > 0.0 ? t.dot(s) / tt : 0.0;
    res.x += omega * shat;
    r = s - omega * t;
    rnorm = r.norm();
    res.relative_residual = rnorm / bnorm;
    if (!std::isfinite(rnorm)) {
      res.status = KrylovStatus::breakdown;
      return res;
    }
    if (rnorm <= target) {
      res.status = KrylovStatus::converged;
      return res;
    }
    if (omega == 0.0) {
      if (restarted) {
        res.status = KrylovStatus::breakdown;
        return res;
      }
      restarted = true;
      reset();
      rho = alpha = omega = 1.0;
    }
  }
  res.status = KrylovStatus::max_iterations;
  return res;
}

KrylovResult bicgstab(const SparseMatrix& A, const Vector& b, const LinearOperator* precond,
                      const Vector* x0, const KrylovOptions& opts) {
  if (A.rows() != A.cols()) throw DimensionError("bicgstab: matrix is not square");
  return bicgstab(MatrixOperator(A), b, precond, x0, opts);
}

KrylovResult conjugate_gradient(const LinearOperator& A, const Vector& b, const LinearOperator* precond,
                                const Vector* x0, const KrylovOptions& opts) {
  const int n = A.size();
  if (b.size() != n || (x0 && x0->size() != n)) throw DimensionError("conjugate_gradient: dimension mismatch");
  KrylovResult res;
  res.x = x0 ? *x0 : Vector::Zero(n);
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    res.x.setZero();
    res.status = KrylovStatus::converged;
    return res;
  }
  Vector r(n), z(n), p(n), q(n);
  A.apply(res.x, q);
  r = b - q;
  precondition(precond, r, z);
  p = z;
  double rz = r.dot(z);
  while (true) {
    res.relative_residual = r.norm() / bnorm;
    if (res.relative_residual <= opts.rel_tol) {
      res.status = KrylovStatus::converged;
      return res;
    }
    if (res.iterations >= opts.max_iter) {
      res.status = KrylovStatus::max_iterations;
      return res;
    }
    A.apply(p, q);
    const double pq = p.dot(q);
    if (pq <= 0.0 || !std::isfinite(pq)) {
      res.status = KrylovStatus::breakdown;
      return res;
    }
    const double alpha = rz / pq;
    res.x += alpha * p;
    r -= alpha * q;
    ++res.iterations;
    precondition(precond, r, z);
    const double rz_new = r.dot(z);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
}

}  // namespace vef
