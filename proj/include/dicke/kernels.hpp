// Sparse-times-dense product kernels used by the density-matrix propagator.
// Each output column is owned by exactly one thread, so the parallel path
// produces bit-identical results for any thread count. The serial variants
// are kept as the reference implementation for tests and benchmarks.

#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <complex>

namespace dicke {

using SparseC = Eigen::SparseMatrix<std::complex<double>>;

// out = A * B
inline void spmm_left_serial(const SparseC& A, const Eigen::MatrixXcd& B,
                             Eigen::MatrixXcd& out) {
    out.setZero();
    for (Eigen::Index col = 0; col < B.cols(); ++col) {
        for (int k = 0; k < A.outerSize(); ++k) {
            const std::complex<double> bk = B(k, col);
            if (bk == std::complex<double>{0.0, 0.0}) continue;
            for (SparseC::InnerIterator it(A, k); it; ++it) {
                out(it.row(), col) += it.value() * bk;
            }
        }
    }
}

inline void spmm_left(const SparseC& A, const Eigen::MatrixXcd& B,
                      Eigen::MatrixXcd& out) {
#pragma omp parallel for schedule(static)
    for (Eigen::Index col = 0; col < B.cols(); ++col) {
        out.col(col).setZero();
        for (int k = 0; k < A.outerSize(); ++k) {
            const std::complex<double> bk = B(k, col);
            if (bk == std::complex<double>{0.0, 0.0}) continue;
            for (SparseC::InnerIterator it(A, k); it; ++it) {
                out(it.row(), col) += it.value() * bk;
            }
        }
    }
}

// out = B * A
inline void spmm_right_serial(const Eigen::MatrixXcd& B, const SparseC& A,
                              Eigen::MatrixXcd& out) {
    out.setZero();
    for (int col = 0; col < A.outerSize(); ++col) {
        for (SparseC::InnerIterator it(A, col); it; ++it) {
            out.col(col) += it.value() * B.col(it.row());
        }
    }
}

inline void spmm_right(const Eigen::MatrixXcd& B, const SparseC& A,
                       Eigen::MatrixXcd& out) {
#pragma omp parallel for schedule(static)
    for (int col = 0; col < A.outerSize(); ++col) {
        out.col(col).setZero();
        for (SparseC::InnerIterator it(A, col); it; ++it) {
            out.col(col) += it.value() * B.col(it.row());
        }
    }
}

}  // namespace dicke
