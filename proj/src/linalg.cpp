#include "bellnav/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

namespace bellnav {

void sort_by_modulus(std::vector<cplx> &values) {
    std::stable_sort(values.begin(), values.end(), [](const cplx &a, const cplx &b) {
        const double ma = std::abs(a), mb = std::abs(b);
        if(std::abs(ma - mb) > 1e-12 * std::max(1.0, std::max(ma, mb))) return ma > mb;
        if(a.real() != b.real()) return a.real() > b.real();
        return a.imag() > b.imag();
    });
}

std::vector<cplx> eigenvalues(const MatrixC &m) {
    if(m.rows() != m.cols()) throw NumericError("eigenvalues: matrix is not square");
    const auto n = static_cast<lapack_int>(m.rows());
    if(n == 0) return {};
    if(!m.allFinite()) throw NumericError("eigenvalues: matrix has non-finite entries");
    MatrixC a = m;
    VectorC w(n);
    const lapack_int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'N', n, a.data(), n, w.data(), nullptr, 1, nullptr, 1);
    if(info != 0) throw NumericError(fmt::format("zgeev failed (info={})", info));
    std::vector<cplx> out(w.data(), w.data() + n);
    sort_by_modulus(out);
    return out;
}

EigenPair dominant_eigenpair(const MatrixC &m) {
    if(m.rows() != m.cols() || m.rows() == 0) throw NumericError("dominant_eigenpair: matrix is not square");
    const auto n = static_cast<lapack_int>(m.rows());
    MatrixC a = m, vr(n, n);
    VectorC w(n);
    const lapack_int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', 'V', n, a.data(), n, w.data(), nullptr, 1, vr.data(), n);
    if(info != 0) throw NumericError(fmt::format("zgeev failed (info={})", info));
    std::vector<cplx> vals(w.data(), w.data() + n);
    sort_by_modulus(vals);
    Eigen::Index best = 0;
    for(Eigen::Index i = 0; i < n; ++i)
        if(w[i] == vals[0]) best = i;
    return {w[best], vr.col(best)};
}

HermitianEig hermitian_lowest(const MatrixC &h, int count) {
    if(h.rows() != h.cols()) throw NumericError("hermitian_lowest: matrix is not square");
    const auto n = static_cast<lapack_int>(h.rows());
    if(count < 1 || count > n) throw NumericError("hermitian_lowest: bad eigenpair count");
    const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
    if((h - h.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale) throw NumericError("hermitian_lowest: matrix is not Hermitian");
    MatrixC a = h;
    Eigen::VectorXd w(n);
    MatrixC z(n, count);
    std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(count));
    lapack_int found = 0;
    const lapack_int info = LAPACKE_zheevr(LAPACK_COL_MAJOR, 'V', 'I', 'L', n, a.data(), n, 0.0, 0.0, 1, count, 0.0, &found, w.data(),
                                           z.data(), n, isuppz.data());
    if(info != 0 || found != count) throw NumericError(fmt::format("zheevr failed (info={})", info));
    return {w.head(count), z};
}

Svd svd(const MatrixC &m) {
    const auto rows = static_cast<lapack_int>(m.rows());
    const auto cols = static_cast<lapack_int>(m.cols());
    const lapack_int k = std::min(rows, cols);
    if(!m.allFinite()) throw NumericError("svd: matrix has non-finite entries");
    MatrixC a = m;
    Svd out{MatrixC(rows, k), Eigen::VectorXd(k), MatrixC(k, cols)};
    lapack_int info = LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'S', rows, cols, a.data(), rows, out.s.data(), out.u.data(), rows, out.vh.data(), k);
    if(info > 0) {
        // divide-and-conquer occasionally fails to converge; the QR variant is slower but sturdier
        a = m;
        std::vector<double> superb(static_cast<std::size_t>(std::max<lapack_int>(1, k)));
        info = LAPACKE_zgesvd(LAPACK_COL_MAJOR, 'S', 'S', rows, cols, a.data(), rows, out.s.data(), out.u.data(), rows, out.vh.data(), k,
                              superb.data());
    }
    if(info != 0) throw NumericError(fmt::format("SVD failed (info={})", info));
    return out;
}

SvdReal svd(const Eigen::MatrixXd &m) {
    const auto rows = static_cast<lapack_int>(m.rows());
    const auto cols = static_cast<lapack_int>(m.cols());
    const lapack_int k = std::min(rows, cols);
    if(!m.allFinite()) throw NumericError("svd: matrix has non-finite entries");
    Eigen::MatrixXd a = m;
    SvdReal out{Eigen::MatrixXd(rows, k), Eigen::VectorXd(k), Eigen::MatrixXd(k, cols)};
    lapack_int info = LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'S', rows, cols, a.data(), rows, out.s.data(), out.u.data(), rows, out.vh.data(), k);
    if(info > 0) {
        a = m;
        std::vector<double> superb(static_cast<std::size_t>(std::max<lapack_int>(1, k)));
        info = LAPACKE_dgesvd(LAPACK_COL_MAJOR, 'S', 'S', rows, cols, a.data(), rows, out.s.data(), out.u.data(), rows, out.vh.data(), k,
                              superb.data());
    }
    if(info != 0) throw NumericError(fmt::format("SVD failed (info={})", info));
    return out;
}

namespace {

// Orthogonalizes w against the first `count` columns of V (classical Gram-Schmidt, twice).
VectorC orthogonalize(const MatrixC &v, Eigen::Index count, VectorC &w) {
    VectorC coeffs = VectorC::Zero(count);
    for(int pass = 0; pass < 2; ++pass) {
        const VectorC c = v.leftCols(count).adjoint() * w;
        w.noalias() -= v.leftCols(count) * c;
        coeffs += c;
    }
    return coeffs;
}

} // namespace

KrylovResult leading_eigenvalues(const LinearMap &op, Eigen::Index n, const VectorC &start, const KrylovOptions &opts) {
    KrylovResult res;
    if(n <= 0) throw NumericError("leading_eigenvalues: empty operator");
    const int nev = std::min<int>(opts.nev, static_cast<int>(n));
    const int m   = std::min<int>(std::max(opts.ncv, 2 * nev + 4), static_cast<int>(n));

    if(m == n) {
        // the basis would span the whole space; assemble the matrix instead
        MatrixC dense(n, n);
        VectorC e = VectorC::Zero(n), y(n);
        for(Eigen::Index j = 0; j < n; ++j) {
            e.setZero();
            e[j] = 1.0;
            op(e, y);
            dense.col(j) = y;
        }
        auto all   = eigenvalues(dense);
        res.values = {all.begin(), all.begin() + nev};
        res.converged = true;
        res.matvecs   = static_cast<int>(n);
        return res;
    }

    MatrixC v = MatrixC::Zero(n, m + 1);
    MatrixC h = MatrixC::Zero(m + 1, m);
    VectorC w(n);

    double nrm = start.norm();
    if(!(nrm > 0.0)) throw NumericError("leading_eigenvalues: zero start vector");
    v.col(0) = start / nrm;
    int k    = 0; // size of the retained Schur block
    const int keep = std::min(m - 1, nev + (m - nev) / 2);
    std::vector<cplx> previous;
    int stalled = 0;

    for(int restart = 0; restart <= opts.max_restarts; ++restart) {
        for(int j = k; j < m; ++j) {
            op(v.col(j), w);
            ++res.matvecs;
            const VectorC c = orthogonalize(v, j + 1, w);
            h.col(j).head(j + 1) += c;
            double beta = w.norm();
            if(beta < 1e-300) {
                // invariant subspace: restart direction from a deterministic pattern
                w = VectorC::Zero(n);
                for(Eigen::Index i = 0; i < n; ++i) w[i] = cplx(std::cos(0.7 * double(i + j)), std::sin(1.3 * double(i)));
                orthogonalize(v, j + 1, w);
                v.col(j + 1) = w / w.norm();
                h(j + 1, j)  = 0.0;
                continue;
            }
            h(j + 1, j)  = beta;
            v.col(j + 1) = w / beta;
        }

        // Schur form of the projected matrix, wanted eigenvalues moved to the front
        MatrixC t = h.topRows(m);
        MatrixC q(m, m);
        VectorC ritz(m);
        lapack_int sdim = 0;
        lapack_int info = LAPACKE_zgees(LAPACK_COL_MAJOR, 'V', 'N', nullptr, m, t.data(), m, &sdim, ritz.data(), q.data(), m);
        if(info != 0) throw NumericError(fmt::format("zgees failed (info={})", info));

        std::vector<int> order(static_cast<std::size_t>(m));
        for(int i = 0; i < m; ++i) order[static_cast<std::size_t>(i)] = i;
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return std::abs(ritz[a]) > std::abs(ritz[b]); });
        std::vector<lapack_int> select(static_cast<std::size_t>(m), 0);
        for(int i = 0; i < keep; ++i) select[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = 1;
        lapack_int msel = 0;
        double s_cond = 0.0, sep = 0.0;
        info = LAPACKE_ztrsen(LAPACK_COL_MAJOR, 'N', 'V', select.data(), m, t.data(), m, q.data(), m, ritz.data(), &msel, &s_cond, &sep);
        if(info != 0) throw NumericError(fmt::format("ztrsen failed (info={})", info));

        // residual coupling of each Schur vector to the next Krylov direction
        const cplx beta    = h(m, m - 1);
        const VectorC bvec = beta * q.row(m - 1).transpose();

        std::vector<int> lead_idx(static_cast<std::size_t>(keep));
        for(int i = 0; i < keep; ++i) lead_idx[static_cast<std::size_t>(i)] = i;
        std::stable_sort(lead_idx.begin(), lead_idx.end(), [&](int a, int b) { return std::abs(t(a, a)) > std::abs(t(b, b)); });
        std::vector<cplx> wanted(ritz.data(), ritz.data() + keep);
        sort_by_modulus(wanted);
        bool done         = true;
        const double lead = std::max(std::abs(wanted[0]), 1e-300);
        // Schur vectors fill in order, so every position up to the last wanted one must be converged
        int last = 0;
        for(int i = 0; i < nev; ++i) last = std::max(last, lead_idx[static_cast<std::size_t>(i)]);
        for(int i = 0; i <= last; ++i)
            if(std::abs(bvec[i]) > opts.tol * lead) done = false;
        // only eigenvalues are needed: values that stop moving count as converged even
        // when clustered or defective spectra keep the Schur residuals large
        double moved = 0.0;
        if(!previous.empty())
            for(int i = 0; i < nev; ++i) moved = std::max(moved, std::abs(wanted[static_cast<std::size_t>(i)] - previous[static_cast<std::size_t>(i)]));
        stalled   = (!previous.empty() && moved <= opts.tol * lead) ? stalled + 1 : 0;
        previous  = wanted;
        if(stalled >= 3) done = true;
        if(done || restart == opts.max_restarts) {
            res.values.assign(wanted.begin(), wanted.begin() + nev);
            res.converged = done;
            return res;
        }

        // truncate to the leading Schur block and continue the Arnoldi relation
        MatrixC vk = v.leftCols(m) * q.leftCols(keep);
        v.leftCols(keep) = vk;
        v.col(keep)      = v.col(m);
        h.setZero();
        h.topLeftCorner(keep, keep) = t.topLeftCorner(keep, keep);
        h.row(keep).head(keep)      = bvec.head(keep).transpose();
        k                           = keep;
    }
    return res;
}

LanczosResult lanczos_lowest(const LinearMap &op, const VectorC &start, double tol, int max_iter,
                             const std::function<void(VectorC &)> &project) {
    const Eigen::Index n = start.size();
    VectorC q0 = start;
    if(project) project(q0);
    double nrm = q0.norm();
    if(!(nrm > 0.0)) throw NumericError("lanczos_lowest: start vector vanishes in the requested sector");
    const int kmax = static_cast<int>(std::min<Eigen::Index>(max_iter, n));

    MatrixC basis(n, kmax + 1);
    basis.col(0) = q0 / nrm;
    std::vector<double> alpha, beta;
    VectorC w(n);
    LanczosResult res;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;

    for(int j = 0; j < kmax; ++j) {
        op(basis.col(j), w);
        if(project) project(w);
        const VectorC c = orthogonalize(basis, j + 1, w);
        alpha.push_back(c[j].real());
        const double b = w.norm();

        const int dim = j + 1;
        Eigen::MatrixXd t = Eigen::MatrixXd::Zero(dim, dim);
        for(int i = 0; i < dim; ++i) t(i, i) = alpha[static_cast<std::size_t>(i)];
        for(int i = 0; i + 1 < dim; ++i) t(i, i + 1) = t(i + 1, i) = beta[static_cast<std::size_t>(i)];
        tri.compute(t);
        const double resid = b * std::abs(tri.eigenvectors()(dim - 1, 0));
        res.iterations     = dim;
        res.residual       = resid;
        if(resid < tol || b < 1e-14 || dim == kmax) {
            res.value  = tri.eigenvalues()[0];
            res.vector = basis.leftCols(dim) * tri.eigenvectors().col(0).cast<cplx>();
            res.vector /= res.vector.norm();
            if(resid >= tol && b >= 1e-14)
                throw ConvergenceError(fmt::format("Lanczos did not converge in {} iterations", dim), resid);
            return res;
        }
        beta.push_back(b);
        basis.col(j + 1) = w / b;
    }
    throw ConvergenceError("Lanczos exhausted its basis", res.residual);
}

} // namespace bellnav
