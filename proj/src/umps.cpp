#include "bellnav/umps.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "bellnav/linalg.hpp"

namespace bellnav {

namespace {

constexpr int kBlockDim = 4; // two physical sites per iTEBD block

MatrixC kron(const MatrixC &a, const MatrixC &b) {
    MatrixC out(a.rows() * b.rows(), a.cols() * b.cols());
    for(Eigen::Index i = 0; i < a.rows(); ++i)
        for(Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

// Hamiltonian of one bond between two blocks (four physical sites). Terms that
// straddle the bond count fully; terms inside a block are shared by its two bonds.
MatrixC bond_hamiltonian(const ModelSpec &spec) {
    MatrixC h = MatrixC::Zero(16, 16);
    for(const auto &term : site_terms(spec)) {
        const int len = static_cast<int>(term.ops.size());
        for(int p = 0; p + len <= 4; ++p) {
            const bool crosses = p <= 1 && p + len - 1 >= 2;
            MatrixC op         = MatrixC::Identity(1, 1);
            for(int site = 0; site < 4; ++site) {
                const char c = (site >= p && site < p + len) ? term.ops[static_cast<std::size_t>(site - p)] : 'I';
                op           = kron(op, pauli(c));
            }
            h += (crosses ? 1.0 : 0.5) * term.coeff * op;
        }
    }
    return h;
}

Eigen::MatrixXd imaginary_time_gate(const Eigen::MatrixXd &h, double tau) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
    const Eigen::VectorXd w = (-tau * es.eigenvalues().array()).exp();
    return es.eigenvectors() * w.asDiagonal() * es.eigenvectors().transpose();
}

// Hastings-form iTEBD state: right-canonical blocks and the Schmidt values on the
// bond to the right of each block. Every shipped Hamiltonian is real in the
// computational basis, so the evolution runs in real arithmetic.
using MatrixR = Eigen::MatrixXd;
using BlockR  = std::array<MatrixR, kBlockDim>;
using Pairs   = std::array<std::array<MatrixR, kBlockDim>, kBlockDim>;

struct InfiniteState {
    std::array<BlockR, 2> B;
    std::array<Eigen::VectorXd, 2> lam;
};

Pairs pair_products(const BlockR &x, const BlockR &y) {
    Pairs p;
    for(int a = 0; a < kBlockDim; ++a)
        for(int b = 0; b < kBlockDim; ++b) p[a][b].noalias() = x[a] * y[b];
    return p;
}

// Applies a two-block gate on the bond (x, y), x = 0 for the A-B bond.
void apply_gate(InfiniteState &st, int x, const MatrixR &gate, int chi, double cutoff) {
    const int y                = 1 - x;
    const Eigen::VectorXd &lft = st.lam[y];
    const Pairs p              = pair_products(st.B[x], st.B[y]);
    const Eigen::Index dl = p[0][0].rows(), dr = p[0][0].cols();

    Pairs c;
    MatrixR theta(kBlockDim * dl, kBlockDim * dr);
    for(int s = 0; s < kBlockDim; ++s)
        for(int t = 0; t < kBlockDim; ++t) {
            MatrixR acc = MatrixR::Zero(dl, dr);
            for(int a = 0; a < kBlockDim; ++a)
                for(int b = 0; b < kBlockDim; ++b) {
                    const double g = gate(s * kBlockDim + t, a * kBlockDim + b);
                    if(g != 0.0) acc += g * p[a][b];
                }
            theta.block(s * dl, t * dr, dl, dr) = lft.asDiagonal() * acc;
            c[s][t]                             = std::move(acc);
        }

    const SvdReal dec = svd(theta);
    Eigen::Index k    = 0;
    while(k < dec.s.size() && k < chi && dec.s[k] > cutoff * dec.s[0]) ++k;
    const double norm = dec.s.head(k).norm();

    for(int t = 0; t < kBlockDim; ++t) st.B[y][t] = dec.vh.block(0, t * dr, k, dr);
    for(int s = 0; s < kBlockDim; ++s) {
        MatrixR acc = MatrixR::Zero(dl, k);
        for(int t = 0; t < kBlockDim; ++t) acc.noalias() += c[s][t] * st.B[y][t].transpose();
        st.B[x][s] = acc / norm;
    }
    st.lam[x] = dec.s.head(k) / norm;
}

double bond_energy(const InfiniteState &st, int x, const MatrixR &h) {
    const int y  = 1 - x;
    const Pairs p = pair_products(st.B[x], st.B[y]);
    double num = 0.0, den = 0.0;
    Pairs th;
    for(int a = 0; a < kBlockDim; ++a)
        for(int b = 0; b < kBlockDim; ++b) {
            th[a][b] = st.lam[y].asDiagonal() * p[a][b];
            den += th[a][b].squaredNorm();
        }
    for(int s = 0; s < kBlockDim; ++s)
        for(int t = 0; t < kBlockDim; ++t)
            for(int a = 0; a < kBlockDim; ++a)
                for(int b = 0; b < kBlockDim; ++b) {
                    const double hv = h(s * kBlockDim + t, a * kBlockDim + b);
                    if(hv != 0.0) num += hv * th[a][b].cwiseProduct(th[s][t]).sum();
                }
    return num / den;
}

std::vector<SiteTensor> split_blocks(const InfiniteState &st) {
    std::vector<SiteTensor> sites;
    for(int x = 0; x < 2; ++x) {
        const BlockR &b       = st.B[x];
        const Eigen::Index dl = b[0].rows(), dr = b[0].cols();
        MatrixR m(2 * dl, 2 * dr);
        for(int s1 = 0; s1 < 2; ++s1)
            for(int s2 = 0; s2 < 2; ++s2) m.block(s1 * dl, s2 * dr, dl, dr) = b[2 * s1 + s2];
        const SvdReal dec = svd(m);
        Eigen::Index k    = 0;
        while(k < dec.s.size() && dec.s[k] > 1e-13 * dec.s[0]) ++k;
        SiteTensor first, second;
        for(int s = 0; s < 2; ++s) {
            first.A[s]  = (dec.u.block(s * dl, 0, dl, k) * dec.s.head(k).asDiagonal()).cast<cplx>();
            second.A[s] = dec.vh.block(0, s * dr, k, dr).cast<cplx>();
        }
        sites.push_back(std::move(first));
        sites.push_back(std::move(second));
    }
    return sites;
}

MatrixC right_apply(const SiteTensor &t, const MatrixC &r, const Matrix2c *op = nullptr) {
    MatrixC out = MatrixC::Zero(t.left_dim(), t.left_dim());
    for(int s = 0; s < 2; ++s)
        for(int u = 0; u < 2; ++u) {
            const cplx w = op ? (*op)(u, s) : cplx(s == u ? 1.0 : 0.0);
            if(w != 0.0) out += w * t.A[s] * r * t.A[u].adjoint();
        }
    return out;
}

MatrixC left_apply(const SiteTensor &t, const MatrixC &l) {
    MatrixC out = MatrixC::Zero(t.right_dim(), t.right_dim());
    for(int s = 0; s < 2; ++s) out += t.A[s].adjoint() * l * t.A[s];
    return out;
}

// Dense matrix of X -> chain(X) on vec(X), column-major.
template <typename F> MatrixC dense_map(Eigen::Index d, F &&chain) {
    MatrixC m(d * d, d * d);
    for(Eigen::Index j = 0; j < d; ++j)
        for(Eigen::Index i = 0; i < d; ++i) {
            MatrixC e = MatrixC::Zero(d, d);
            e(i, j)   = 1.0;
            const MatrixC y = chain(e);
            m.col(j * d + i) = Eigen::Map<const VectorC>(y.data(), d * d);
        }
    return m;
}

// Hermitian, positive-trace fixed point from an eigenvector of the transfer map.
MatrixC fixed_point(const VectorC &v, Eigen::Index d) {
    MatrixC x    = Eigen::Map<const MatrixC>(v.data(), d, d);
    const cplx tr = x.trace();
    x *= std::abs(tr) / tr;
    return 0.5 * (x + x.adjoint());
}

} // namespace

const SiteTensor &UniformMPS::site(int k) const {
    const int n = cell_size();
    return tensors[static_cast<std::size_t>(((k % n) + n) % n)];
}

double UniformMPS::canonical_residual() const {
    double worst   = 0.0;
    const int n    = cell_size();
    for(int k = 0; k < n; ++k) {
        const SiteTensor &t = tensors[static_cast<std::size_t>(k)];
        const auto dl = t.left_dim(), dr = t.right_dim();
        const MatrixC right = right_apply(t, MatrixC::Identity(dr, dr));
        worst               = std::max(worst, (right - MatrixC::Identity(dl, dl)).cwiseAbs().maxCoeff());
        const Eigen::VectorXd &sl = schmidt_weights[static_cast<std::size_t>(k)];
        const Eigen::VectorXd &sr = schmidt_weights[static_cast<std::size_t>((k + 1) % n)];
        const MatrixC lmat        = sl.array().square().matrix().cast<cplx>().asDiagonal();
        const MatrixC left        = left_apply(t, lmat);
        const MatrixC want        = sr.array().square().matrix().cast<cplx>().asDiagonal();
        worst                     = std::max(worst, (left - want).cwiseAbs().maxCoeff());
    }
    return worst;
}

UniformMPS canonicalize_cell(std::vector<SiteTensor> t, const ModelSpec &spec, int chi) {
    const int n = static_cast<int>(t.size());
    if(n < 1) throw ConfigError("canonicalize_cell: empty cell");
    for(int k = 0; k < n; ++k)
        if(t[static_cast<std::size_t>(k)].right_dim() != t[static_cast<std::size_t>((k + 1) % n)].left_dim())
            throw ConfigError("canonicalize_cell: bond dimensions do not chain");

    const Eigen::Index d0 = t[0].left_dim();
    auto right_chain      = [&](const MatrixC &x) {
        MatrixC r = x;
        for(int k = n - 1; k >= 0; --k) r = right_apply(t[static_cast<std::size_t>(k)], r);
        return r;
    };
    auto left_chain = [&](const MatrixC &x) {
        MatrixC l = x;
        for(int k = 0; k < n; ++k) l = left_apply(t[static_cast<std::size_t>(k)], l);
        return l;
    };
    const EigenPair rp = dominant_eigenpair(dense_map(d0, right_chain));
    const EigenPair lp = dominant_eigenpair(dense_map(d0, left_chain));
    const double rho   = std::abs(rp.value);
    if(!(rho > 0.0)) throw NumericError("canonicalize_cell: transfer map has zero spectral radius");
    const double scale = std::pow(rho, -0.5 / n);
    for(auto &s : t)
        for(auto &m : s.A) m *= scale;

    Eigen::SelfAdjointEigenSolver<MatrixC> er(fixed_point(rp.vector, d0));
    Eigen::SelfAdjointEigenSolver<MatrixC> el(fixed_point(lp.vector, d0));
    auto factor = [](const Eigen::SelfAdjointEigenSolver<MatrixC> &es, Eigen::VectorXd &sq) {
        const Eigen::VectorXd &w = es.eigenvalues();
        const double top         = w.cwiseAbs().maxCoeff();
        std::vector<Eigen::Index> kept;
        for(Eigen::Index i = 0; i < w.size(); ++i)
            if(w[i] > 1e-14 * top) kept.push_back(i);
        MatrixC v(w.size(), static_cast<Eigen::Index>(kept.size()));
        sq.resize(static_cast<Eigen::Index>(kept.size()));
        for(std::size_t j = 0; j < kept.size(); ++j) {
            v.col(static_cast<Eigen::Index>(j)) = es.eigenvectors().col(kept[j]);
            sq[static_cast<Eigen::Index>(j)]    = std::sqrt(w[kept[j]]);
        }
        return v;
    };
    Eigen::VectorXd rsq, lsq;
    const MatrixC wr   = factor(er, rsq);
    const MatrixC wl   = factor(el, lsq);
    const MatrixC y    = wr * rsq.cast<cplx>().asDiagonal();
    const MatrixC yinv = rsq.cwiseInverse().cast<cplx>().asDiagonal() * wr.adjoint();
    const MatrixC x    = lsq.cast<cplx>().asDiagonal() * wl.adjoint();
    const Svd core     = svd(MatrixC(x * y));
    Eigen::Index k0    = 0;
    while(k0 < core.s.size() && core.s[k0] > 1e-14 * core.s[0]) ++k0;
    const MatrixC g    = core.vh.topRows(k0) * yinv;
    const MatrixC ginv = y * core.vh.topRows(k0).adjoint();
    for(auto &m : t[0].A) m = g * m;
    for(auto &m : t[static_cast<std::size_t>(n - 1)].A) m = m * ginv;

    std::vector<Eigen::VectorXd> weights(static_cast<std::size_t>(n));
    weights[0] = core.s.head(k0) / core.s.head(k0).norm();

    // per-site right-canonical form, sweeping leftward inside the cell
    for(int k = n - 1; k >= 1; --k) {
        SiteTensor &cur       = t[static_cast<std::size_t>(k)];
        const Eigen::Index dl = cur.left_dim(), dr = cur.right_dim();
        MatrixC m(dl, 2 * dr);
        for(int s = 0; s < 2; ++s) m.block(0, s * dr, dl, dr) = cur.A[s];
        const Svd dec = svd(m);
        Eigen::Index kk = 0;
        while(kk < dec.s.size() && dec.s[kk] > 1e-14 * dec.s[0]) ++kk;
        for(int s = 0; s < 2; ++s) cur.A[s] = dec.vh.block(0, s * dr, kk, dr);
        const MatrixC us = dec.u.leftCols(kk) * dec.s.head(kk).cast<cplx>().asDiagonal();
        for(auto &a : t[static_cast<std::size_t>(k - 1)].A) a = a * us;
    }

    // Schmidt values on the inner bonds, rotating each bond into its Schmidt basis
    for(int k = 0; k + 1 < n; ++k) {
        SiteTensor &cur       = t[static_cast<std::size_t>(k)];
        SiteTensor &nxt       = t[static_cast<std::size_t>(k + 1)];
        const Eigen::Index dl = cur.left_dim(), dr = cur.right_dim();
        MatrixC m(2 * dl, dr);
        for(int s = 0; s < 2; ++s) m.block(s * dl, 0, dl, dr) = weights[static_cast<std::size_t>(k)].cast<cplx>().asDiagonal() * cur.A[s];
        const Svd dec = svd(m);
        Eigen::Index kk = 0;
        while(kk < dec.s.size() && dec.s[kk] > 1e-14 * dec.s[0]) ++kk;
        const MatrixC vh = dec.vh.topRows(kk);
        for(auto &a : cur.A) a = a * vh.adjoint();
        for(auto &a : nxt.A) a = vh * a;
        weights[static_cast<std::size_t>(k + 1)] = dec.s.head(kk) / dec.s.head(kk).norm();
    }

    UniformMPS mps;
    mps.spec            = spec;
    mps.chi             = chi;
    mps.tensors         = std::move(t);
    mps.schmidt_weights = std::move(weights);
    mps.energy_per_site = mps_energy_per_site(mps);
    return mps;
}

double mps_local_expectation(const UniformMPS &mps, const std::vector<Matrix2c> &op_string, int offset) {
    if(op_string.empty()) return 1.0;
    const int n  = mps.cell_size();
    const int o  = ((offset % n) + n) % n;
    const int ln = static_cast<int>(op_string.size());
    const Eigen::Index dr = mps.site(o + ln - 1).right_dim();
    MatrixC r = MatrixC::Identity(dr, dr);
    for(int j = ln - 1; j >= 0; --j) r = right_apply(mps.site(o + j), r, &op_string[static_cast<std::size_t>(j)]);
    const Eigen::VectorXd &w = mps.schmidt_weights[static_cast<std::size_t>(o)];
    return (w.array().square().matrix().cast<cplx>().asDiagonal() * r).trace().real();
}

double mps_average_expectation(const UniformMPS &mps, const std::vector<Matrix2c> &op_string) {
    double acc = 0.0;
    for(int o = 0; o < mps.cell_size(); ++o) acc += mps_local_expectation(mps, op_string, o);
    return acc / mps.cell_size();
}

double mps_energy_per_site(const UniformMPS &mps) {
    double e = 0.0;
    for(const auto &term : site_terms(mps.spec)) {
        std::vector<Matrix2c> ops;
        for(char c : term.ops) ops.push_back(pauli(c));
        e += term.coeff * mps_average_expectation(mps, ops);
    }
    return e;
}

UniformMPS product_state_mps(const ModelSpec &spec, cplx c0, cplx c1) {
    const double nrm = std::sqrt(std::norm(c0) + std::norm(c1));
    SiteTensor s;
    s.A[0] = MatrixC::Constant(1, 1, c0 / nrm);
    s.A[1] = MatrixC::Constant(1, 1, c1 / nrm);
    return canonicalize_cell({s, s, s, s}, spec, 1);
}

UniformMPS ground_state_umps(const ModelSpec &spec, int chi, double tol, int max_sweeps) {
    ImaginaryTimeSchedule schedule;
    schedule.tol       = tol;
    schedule.max_steps = max_sweeps;
    return ground_state_umps(spec, chi, schedule);
}

UniformMPS ground_state_umps(const ModelSpec &spec, int chi, const ImaginaryTimeSchedule &schedule) {
    spec.validate();
    if(chi < 2 || chi > 64) throw ConfigError(fmt::format("chi must lie in [2, 64], got {}", chi));
    if(!(schedule.tol > 0.0)) throw ConfigError("ground-state tolerance must be positive");
    if(schedule.steps.empty()) throw ConfigError("imaginary-time schedule is empty");

    // The XXZ chain conserves total Sz, so its start is tilted off the z axis.
    const double tilt = spec.kind == ModelKind::Xxz ? 0.3 * kPi : 0.0;
    const double amp[2] = {std::cos(0.5 * tilt), std::sin(0.5 * tilt)};
    InfiniteState st;
    for(int x = 0; x < 2; ++x) {
        for(int s = 0; s < kBlockDim; ++s) st.B[x][s] = MatrixR::Constant(1, 1, amp[s >> 1] * amp[s & 1]);
        st.lam[x] = Eigen::VectorXd::Ones(1);
    }

    const MatrixC hc = bond_hamiltonian(spec);
    if(hc.imag().cwiseAbs().maxCoeff() > 0.0) throw NumericError("bond Hamiltonian is not real");
    const MatrixR hb = hc.real();
    auto energy      = [&] { return 0.25 * (bond_energy(st, 0, hb) + bond_energy(st, 1, hb)); };

    int total_steps = 0;
    double delta    = 0.0;
    for(double tau : schedule.steps) {
        const MatrixR half = imaginary_time_gate(hb, 0.5 * tau);
        const MatrixR full = imaginary_time_gate(hb, tau);
        const int every    = std::max(10, static_cast<int>(std::lround(0.1 / tau)));
        double e_old       = energy();
        bool stationary    = false;
        // symmetric splitting with adjacent half steps on the A-B bond merged;
        // the state is only brought to the symmetric point for measurements
        apply_gate(st, 0, half, chi, schedule.svd_cutoff);
        for(int step = 1; step <= schedule.max_steps; ++step) {
            apply_gate(st, 1, full, chi, schedule.svd_cutoff);
            ++total_steps;
            const bool measure = step % every == 0 || step == schedule.max_steps;
            if(!measure) {
                apply_gate(st, 0, full, chi, schedule.svd_cutoff);
                continue;
            }
            apply_gate(st, 0, half, chi, schedule.svd_cutoff);
            const double e = energy();
            delta          = std::abs(e - e_old);
            e_old          = e;
            // stationarity measured as energy drift per unit imaginary time
            if(delta < schedule.tol * every * tau) {
                stationary = true;
                break;
            }
            if(step < schedule.max_steps) apply_gate(st, 0, half, chi, schedule.svd_cutoff);
        }
        if(!stationary)
            throw ConvergenceError(fmt::format("imaginary-time stage tau={} not stationary after {} steps (last delta {:.3e})", tau,
                                               schedule.max_steps, delta),
                                   delta);
        spdlog::debug("itebd stage tau={} done, E={:.12f}", tau, e_old);
    }

    UniformMPS mps  = canonicalize_cell(split_blocks(st), spec, chi);
    mps.steps       = total_steps;
    mps.last_delta  = delta;
    return mps;
}

} // namespace bellnav
