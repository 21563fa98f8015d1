#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <iosfwd>
#include <stdexcept>
#include <vector>

namespace vef {

/// Compressed row storage with sorted column indices.
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<double>;
using Vector = Eigen::VectorXd;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Builds a compressed matrix, summing duplicate entries in a fixed order.
SparseMatrix from_triplets(int rows, int cols, const std::vector<Triplet>& entries);

Vector spmv(const SparseMatrix& A, const Vector& x);
SparseMatrix transpose(const SparseMatrix& A);
/// Returns At^T * D * B where D is typically a block-diagonal inverse.
SparseMatrix triple_product(const SparseMatrix& At, const SparseMatrix& D, const SparseMatrix& B);

/// Inverse of a matrix that is block diagonal with contiguous blocks of a
/// fixed size (one block per element for DG spaces).
class BlockDiagInverse {
 public:
  BlockDiagInverse(const SparseMatrix& M, int block_size);

  int size() const { return static_cast<int>(blocks_.size()) * block_size_; }
  int block_size() const { return block_size_; }
  Vector apply(const Vector& x) const;
  SparseMatrix as_matrix() const;

 private:
  int block_size_;
  std::vector<Eigen::MatrixXd> blocks_;
};

/// Largest |A_ij - A_ji|.
double symmetry_defect(const SparseMatrix& A);

/// Coordinate text dump: "row col value" per nonzero, 17 significant digits.
void write_coordinate(std::ostream& os, const SparseMatrix& A);

}  // namespace vef
