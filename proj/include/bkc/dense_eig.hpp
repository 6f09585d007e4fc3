// dense_eig.hpp — Dense eigensolver kernels: Parlett–Reinsch balancing,
// Householder Hessenberg reduction, Francis double-shift QR, complex inverse
// iteration on Hessenberg matrices, and implicit-shift QL for symmetric
// tridiagonal matrices.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <string>
#include <vector>

namespace bkc::eig {

// Diagonal similarity scaling with powers of 2; fills `scale` with the applied
// row factors (eigenvector rows must be multiplied back by scale[i]).
void balance(Eigen::MatrixXd& a, Eigen::VectorXd& scale);

// Reduce to upper Hessenberg form in place; accumulates the orthogonal
// transform into q when non-null.
void hessenberg(Eigen::MatrixXd& a, Eigen::MatrixXd* q);

struct QrReport {
    int sweeps = 0;
    std::vector<double> shift_history;  // kept short; reported on failure
};

// Eigenvalues of an upper Hessenberg matrix via Francis double-shift QR with
// deflation. Destroys h. Throws std::runtime_error naming the shift history
// when a block fails to deflate within the iteration cap.
Eigen::VectorXcd hqr_eigenvalues(Eigen::MatrixXd h, QrReport* report = nullptr,
                                 int iter_cap_per_block = 40);

// One right eigenvector of a real upper Hessenberg matrix by inverse
// iteration at the (possibly complex) eigenvalue lambda.
Eigen::VectorXcd hessenberg_inverse_iteration(const Eigen::MatrixXd& h,
                                              std::complex<double> lambda);

// Implicit-shift QL for a symmetric tridiagonal matrix. d: diagonal (in:
// values, out: eigenvalues ascending); e: off-diagonals e[0..n-2]; z: when
// non-null must start as identity (or an accumulated basis) and returns the
// eigenvectors in columns, reordered with d.
void tql2(Eigen::VectorXd& d, Eigen::VectorXd& e, Eigen::MatrixXd* z);

}  // namespace bkc::eig
