#pragma once

#include <functional>
#include <vector>

#include "bellnav/core.hpp"

namespace bellnav {

/// Sorts by modulus (descending); near-equal moduli fall back to larger real
/// part, then larger imaginary part.
void sort_by_modulus(std::vector<cplx> &values);

/// All eigenvalues of a general square matrix (LAPACK zgeev), sorted by modulus.
std::vector<cplx> eigenvalues(const MatrixC &m);

struct EigenPair {
    cplx value;
    VectorC vector;
};

/// Largest-modulus eigenpair of a general square matrix (LAPACK zgeev).
EigenPair dominant_eigenpair(const MatrixC &m);

struct HermitianEig {
    Eigen::VectorXd values;
    MatrixC vectors; // columns
};

/// Lowest `count` eigenpairs of a Hermitian matrix (LAPACK zheevr).
HermitianEig hermitian_lowest(const MatrixC &h, int count);

struct Svd {
    MatrixC u;
    Eigen::VectorXd s;
    MatrixC vh;
};

/// Thin SVD (LAPACK zgesdd).
Svd svd(const MatrixC &m);

struct SvdReal {
    Eigen::MatrixXd u;
    Eigen::VectorXd s;
    Eigen::MatrixXd vh;
};

/// Thin SVD of a real matrix (LAPACK dgesdd).
SvdReal svd(const Eigen::MatrixXd &m);

/// y = A x for a vector of fixed dimension.
using LinearMap = std::function<void(const VectorC &x, VectorC &y)>;

struct KrylovOptions {
    int nev          = 2;  // eigenvalues wanted
    int ncv          = 24; // basis size
    double tol       = 1e-11;
    int max_restarts = 300;
};

struct KrylovResult {
    std::vector<cplx> values; // nev largest-modulus Ritz values, sorted
    bool converged = false;
    int matvecs    = 0;
};

/// Largest-modulus eigenvalues of a non-Hermitian operator by Krylov-Schur restarts.
KrylovResult leading_eigenvalues(const LinearMap &op, Eigen::Index n, const VectorC &start, const KrylovOptions &opts);

struct LanczosResult {
    double value = 0.0;
    VectorC vector;
    int iterations = 0;
    double residual = 0.0;
};

/// Lowest eigenpair of a Hermitian operator by Lanczos with full reorthogonalization.
/// `project`, if set, is applied to every new basis vector (keeps a symmetry sector).
LanczosResult lanczos_lowest(const LinearMap &op, const VectorC &start, double tol, int max_iter,
                             const std::function<void(VectorC &)> &project = {});

} // namespace bellnav
