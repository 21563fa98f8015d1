#include "vef/sparse.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <string>

namespace vef {

SparseMatrix from_triplets(int rows, int cols, const std::vector<Triplet>& entries) {
  SparseMatrix A(rows, cols);
  A.setFromTriplets(entries.begin(), entries.end());
  A.makeCompressed();
  return A;
}

Vector spmv(const SparseMatrix& A, const Vector& x) {
  if (A.cols() != x.size()) throw DimensionError("spmv: dimension mismatch");
  return A * x;
}

SparseMatrix transpose(const SparseMatrix& A) {
  SparseMatrix T = A.transpose();
  T.makeCompressed();
  return T;
}

SparseMatrix triple_product(const SparseMatrix& At, const SparseMatrix& D, const SparseMatrix& B) {
  if (At.rows() != D.rows() || D.cols() != B.rows()) throw DimensionError("triple_product: dimension mismatch");
  SparseMatrix DB = D * B;
  SparseMatrix out = SparseMatrix(At.transpose()) * DB;
  out.makeCompressed();
  return out;
}

BlockDiagInverse::BlockDiagInverse(const SparseMatrix& M, int block_size) : block_size_(block_size) {
  if (block_size <= 0 || M.rows() != M.cols() || M.rows() % block_size != 0) {
    throw DimensionError("BlockDiagInverse: matrix size is not a multiple of the block size");
  }
  const int nb = static_cast<int>(M.rows()) / block_size;
  blocks_.resize(nb);
  for (int b = 0; b < nb; ++b) {
    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(block_size, block_size);
    for (int r = 0; r < block_size; ++r) {
      const int row = b * block_size + r;
      for (SparseMatrix::InnerIterator it(M, row); it; ++it) {
        const int c = static_cast<int>(it.col()) - b * block_size;
        if (c < 0 || c >= block_size) {
          if (it.value() != 0.0) throw DimensionError("BlockDiagInverse: entry outside the diagonal blocks");
          continue;
        }
        block(r, c) = it.value();
      }
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(block);
    if (!lu.isInvertible()) throw std::runtime_error("BlockDiagInverse: singular block " + std::to_string(b));
    blocks_[b] = lu.inverse();
  }
}

Vector BlockDiagInverse::apply(const Vector& x) const {
  if (x.size() != size()) throw DimensionError("BlockDiagInverse::apply: dimension mismatch");
  Vector y(x.size());
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    y.segment(b * block_size_, block_size_).noalias() = blocks_[b] * x.segment(b * block_size_, block_size_);
  }
  return y;
}

SparseMatrix BlockDiagInverse::as_matrix() const {
  std::vector<Triplet> t;
  t.reserve(blocks_.size() * block_size_ * block_size_);
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    const int off = static_cast<int>(b) * block_size_;
    for (int r = 0; r < block_size_; ++r) {
      for (int c = 0; c < block_size_; ++c) t.emplace_back(off + r, off + c, blocks_[b](r, c));
    }
  }
  return from_triplets(size(), size(), t);
}

double symmetry_defect(const SparseMatrix& A) {
  SparseMatrix D = A - SparseMatrix(A.transpose());
  double m = 0.0;
  for (int k = 0; k < D.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(D, k); it; ++it) m = std::max(m, std::abs(it.value()));
  }
  return m;
}

void write_coordinate(std::ostream& os, const SparseMatrix& A) {
  os << std::setprecision(17);
  for (int k = 0; k < A.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(A, k); it; ++it) os << it.row() << " " << it.col() << " " << it.value() << "\n";
  }
}

}  // namespace vef
