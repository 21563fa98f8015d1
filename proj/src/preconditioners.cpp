#include "vef/preconditioners.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace vef {

namespace {

Vector diagonal_of(const SparseMatrix& A) {
  Vector d = Vector::Zero(A.rows());
  for (int i = 0; i < A.outerSize(); ++i) {
    for (SparseMatrix::InnerIterator it(A, i); it; ++it) {
      if (it.col() == i) d[i] = it.value();
    }
  }
  return d;
}

}  // namespace

JacobiPreconditioner::JacobiPreconditioner(const SparseMatrix& A) {
  const Vector d = diagonal_of(A);
  inv_diag_.resize(d.size());
  for (int i = 0; i < d.size(); ++i) {
    if (d[i] == 0.0) throw std::runtime_error("JacobiPreconditioner: zero diagonal in row " + std::to_string(i));
    inv_diag_[i] = 1.0 / d[i];
  }
}

DirectSolver::DirectSolver(const SparseMatrix& A) : n_(static_cast<int>(A.rows())) {
  if (A.rows() != A.cols()) throw DimensionError("DirectSolver: matrix is not square");
  Eigen::SparseMatrix<double> colmajor = A;
  lu_.analyzePattern(colmajor);
  lu_.factorize(colmajor);
  if (lu_.info() != Eigen::Success) throw std::runtime_error("DirectSolver: factorization failed");
}

void DirectSolver::apply(const Vector& x, Vector& y) const { y = lu_.solve(x); }

TwoLevelSubstitute::TwoLevelSubstitute(const SparseMatrix& A, const SubstituteOptions& opts) : A_(A) {
  const int n = static_cast<int>(A.rows());
  if (A.rows() != A.cols()) throw DimensionError("TwoLevelSubstitute: matrix is not square");
  diag_ = diagonal_of(A_);
  for (int i = 0; i < n; ++i) {
    if (diag_[i] == 0.0) throw std::runtime_error("TwoLevelSubstitute: zero diagonal in row " + std::to_string(i));
  }

  // strength graph on the symmetrized pattern
  const SparseMatrix At = transpose(A_);
  std::vector<std::vector<std::pair<int, double>>> strong(n);
  auto add_strong = [&](const SparseMatrix& M) {
    for (int i = 0; i < n; ++i) {
      for (SparseMatrix::InnerIterator it(M, i); it; ++it) {
        const int j = static_cast<int>(it.col());
        if (j == i) continue;
        const double s = std::abs(it.value()) / std::sqrt(std::abs(diag_[i] * diag_[j]));
        if (s >= opts.strength_threshold) strong[i].emplace_back(j, s);
      }
    }
  };
  add_strong(A_);
  add_strong(At);

  aggregates_.assign(n, -1);
  int nagg = 0;
  for (int i = 0; i < n; ++i) {
    if (aggregates_[i] >= 0) continue;
    bool free = true;
    for (const auto& [j, s] : strong[i]) free = free && aggregates_[j] < 0;
    if (!free) continue;
    aggregates_[i] = nagg;
    for (const auto& [j, s] : strong[i]) aggregates_[j] = nagg;
    ++nagg;
  }
  std::vector<int> pass1 = aggregates_;
  for (int i = 0; i < n; ++i) {
    if (aggregates_[i] >= 0) continue;
    double best = -1.0;
    for (const auto& [j, s] : strong[i]) {
      if (pass1[j] >= 0 && s > best) {
        best = s;
        aggregates_[i] = pass1[j];
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    if (aggregates_[i] < 0) aggregates_[i] = nagg++;
  }
  if (nagg > opts.max_coarse) throw std::runtime_error("TwoLevelSubstitute: coarse space too large");

  std::vector<int> agg_size(nagg, 0);
  for (int a : aggregates_) ++agg_size[a];
  std::vector<Triplet> t;
  t.reserve(n);
  for (int i = 0; i < n; ++i) t.emplace_back(i, aggregates_[i], 1.0 / std::sqrt(static_cast<double>(agg_size[aggregates_[i]])));
  const SparseMatrix Ptent = from_triplets(n, nagg, t);

  // spectral radius of D^{-1} A by power iteration from a fixed start vector
  const Vector inv_d = diag_.cwiseInverse();
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = 1.0 + 0.5 * std::sin(1.0 + i);
  double rho = 1.0;
  for (int it = 0; it < 20; ++it) {
    Vector w = inv_d.cwiseProduct(A_ * v);
    const double nrm = w.norm();
    if (nrm == 0.0) break;
    rho = nrm / v.norm();
    v = w / nrm;
  }
  const double omega = (4.0 / 3.0) / std::max(rho, 1e-300);
  SparseMatrix DinvA = inv_d.asDiagonal() * A_;
  P_ = Ptent - omega * SparseMatrix(DinvA * Ptent);
  P_.prune(0.0);
  P_.makeCompressed();
  R_ = transpose(P_);
  const SparseMatrix Ac = R_ * A_ * P_;
  coarse_ = std::make_unique<DirectSolver>(Ac);
}

void TwoLevelSubstitute::gauss_seidel(const Vector& b, Vector& x, bool forward) const {
  const int n = static_cast<int>(A_.rows());
  for (int k = 0; k < n; ++k) {
    const int i = forward ? k : n - 1 - k;
    double s = b[i];
    for (SparseMatrix::InnerIterator it(A_, i); it; ++it) {
      if (it.col() != i) s -= it.value() * x[it.col()];
    }
    x[i] = s / diag_[i];
  }
}

void TwoLevelSubstitute::apply(const Vector& r, Vector& z) const {
  z = Vector::Zero(r.size());
  gauss_seidel(r, z, true);
  const Vector res = r - A_ * z;
  Vector rc = R_ * res, ec;
  coarse_->apply(rc, ec);
  z += P_ * ec;
  gauss_seidel(r, z, false);
}

RichardsonPreconditioner::RichardsonPreconditioner(SparseMatrix A, std::shared_ptr<const LinearOperator> inner, int steps)
    : A_(std::move(A)), inner_(std::move(inner)), steps_(steps) {
  if (steps < 1) throw std::invalid_argument("RichardsonPreconditioner: steps must be >= 1");
}

void RichardsonPreconditioner::apply(const Vector& r, Vector& z) const {
  z = Vector::Zero(r.size());
  Vector dz(r.size());
  for (int k = 0; k < steps_; ++k) {
    const Vector res = k == 0 ? r : Vector(r - A_ * z);
    inner_->apply(res, dz);
    z += dz;
  }
}

SubspaceCorrectionPreconditioner::SubspaceCorrectionPreconditioner(const SparseMatrix& A, SparseMatrix prolongation,
                                                                   std::vector<int> boundary_dofs,
                                                                   std::shared_ptr<const LinearOperator> continuous_solver)
    : Z_(std::move(prolongation)), boundary_(std::move(boundary_dofs)), continuous_(std::move(continuous_solver)) {
  if (A.rows() != Z_.rows() || continuous_->size() != Z_.cols()) {
    throw DimensionError("SubspaceCorrectionPreconditioner: dimension mismatch");
  }
  Zt_ = transpose(Z_);
  const Vector d = diagonal_of(A);
  boundary_inv_diag_.reserve(boundary_.size());
  for (int i : boundary_) {
    if (d[i] == 0.0) throw std::runtime_error("SubspaceCorrectionPreconditioner: zero diagonal on a boundary dof");
    boundary_inv_diag_.push_back(1.0 / d[i]);
  }
}

void SubspaceCorrectionPreconditioner::apply(const Vector& r, Vector& z) const {
  Vector rc = Zt_ * r, zc;
  continuous_->apply(rc, zc);
  z = Z_ * zc;
  for (std::size_t k = 0; k < boundary_.size(); ++k) z[boundary_[k]] += boundary_inv_diag_[k] * r[boundary_[k]];
}

std::shared_ptr<const LinearOperator> make_continuous_solver(ContinuousMode mode, const SparseMatrix& A_V,
                                                             const SparseMatrix* preconditioning_operator, int steps) {
  const SparseMatrix& S = preconditioning_operator ? *preconditioning_operator : A_V;
  switch (mode) {
    case ContinuousMode::exact: return std::make_shared<DirectSolver>(A_V);
    case ContinuousMode::substitute: return std::make_shared<TwoLevelSubstitute>(S);
    case ContinuousMode::substitute_k_inner:
      return std::make_shared<RichardsonPreconditioner>(A_V, std::make_shared<TwoLevelSubstitute>(S), steps);
  }
  throw std::invalid_argument("make_continuous_solver: unknown mode");
}

}  // namespace vef
