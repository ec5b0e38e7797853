#include "bellnav/bellop.hpp"

#include <cmath>

#include <fmt/format.h>
#include <unsupported/Eigen/KroneckerProduct>

#include "bellnav/linalg.hpp"

namespace bellnav {

namespace {

const cplx kAlpha{0.5, -0.5}; // (1-i)/2
const cplx kBeta{0.5, 0.5};   // (1+i)/2

const SettingPair &setting_for(const MeasurementSettings &settings, int site) {
    return settings[static_cast<std::size_t>(site) % settings.size()];
}

void check_tiling(const MeasurementSettings &settings, int n_sites) {
    validate_settings(settings);
    if(n_sites % static_cast<int>(settings.size()) != 0)
        throw ConfigError(fmt::format("{} sites are not a multiple of the unit cell {}", n_sites, settings.size()));
}

// E_O(R) = sum_{s,t} O_ts A^s R A^t+, the right action of one site.
MatrixC right_apply(const SiteTensor &t, const MatrixC &r, const Matrix2c &op) {
    MatrixC out = MatrixC::Zero(t.left_dim(), t.left_dim());
    for(int s = 0; s < 2; ++s)
        for(int u = 0; u < 2; ++u)
            if(op(u, s) != 0.0) out += op(u, s) * t.A[s] * r * t.A[u].adjoint();
    return out;
}

} // namespace

Matrix2c setting_operator(const UnitVector &v) { return pauli_dot(v.x, v.y, v.z); }

BellSiteBlock build_site_block(const UnitVector &a, const UnitVector &a_prime) {
    const Matrix2c A = setting_operator(a), Ap = setting_operator(a_prime);
    BellSiteBlock b;
    b.W[0][0] = 0.5 * (A + Ap);
    b.W[0][1] = 0.5 * (A - Ap);
    b.W[1][0] = -0.5 * (A - Ap);
    b.W[1][1] = 0.5 * (A + Ap);
    return b;
}

Matrix2c sector_operator(const UnitVector &a, const UnitVector &a_prime) {
    return kBeta * setting_operator(a) + kAlpha * setting_operator(a_prime);
}

MixedTransferMatrix mixed_transfer_matrix(const UniformMPS &mps, const MeasurementSettings &settings) {
    const int n = mps.cell_size();
    if(n == 0) throw ConfigError("mixed_transfer_matrix: empty MPS");
    check_tiling(settings, n);

    const Eigen::Index d0 = mps.site(0).left_dim();
    const Eigen::Index dd = d0 * d0;
    MixedTransferMatrix m;
    m.chi        = mps.chi;
    m.u          = static_cast<int>(settings.size());
    m.cell_sites = n;
    m.full.resize(2 * dd, 2 * dd);
    m.sector.resize(dd, dd);

    std::vector<BellSiteBlock> blocks;
    std::vector<Matrix2c> sectors;
    for(int k = 0; k < n; ++k) {
        const auto &p = setting_for(settings, k);
        blocks.push_back(build_site_block(p.a, p.a_prime));
        sectors.push_back(sector_operator(p.a, p.a_prime));
    }

    // Column (j, vec X): apply the cell to X placed in MPO channel j, right to left.
    for(Eigen::Index col = 0; col < dd; ++col) {
        MatrixC x = MatrixC::Zero(d0, d0);
        x(col % d0, col / d0) = 1.0;

        MatrixC r = x;
        for(int k = n - 1; k >= 0; --k) r = right_apply(mps.site(k), r, sectors[static_cast<std::size_t>(k)]);
        m.sector.col(col) = Eigen::Map<const VectorC>(r.data(), dd);

        for(int j = 0; j < 2; ++j) {
            std::array<MatrixC, 2> env;
            env[static_cast<std::size_t>(j)]     = x;
            env[static_cast<std::size_t>(1 - j)] = MatrixC::Zero(d0, d0);
            for(int k = n - 1; k >= 0; --k) {
                const SiteTensor &t = mps.site(k);
                std::array<MatrixC, 2> next;
                for(int i = 0; i < 2; ++i) {
                    next[static_cast<std::size_t>(i)] = MatrixC::Zero(t.left_dim(), t.left_dim());
                    for(int jj = 0; jj < 2; ++jj)
                        next[static_cast<std::size_t>(i)] +=
                            right_apply(t, env[static_cast<std::size_t>(jj)], blocks[static_cast<std::size_t>(k)].W[i][jj]);
                }
                env = std::move(next);
            }
            for(int i = 0; i < 2; ++i)
                m.full.block(i * dd, j * dd + col, dd, 1) = Eigen::Map<const VectorC>(env[static_cast<std::size_t>(i)].data(), dd);
        }
    }
    return m;
}

TransferSpectrum spectrum_from_eigenvalues(std::vector<cplx> values, int cell_sites) {
    if(values.empty()) throw NumericError("transfer spectrum: no eigenvalues");
    if(cell_sites < 1) throw ConfigError("transfer spectrum: cell size must be positive");
    sort_by_modulus(values);
    TransferSpectrum sp;
    sp.lambda1          = values[0];
    sp.lambda2          = values.size() > 1 ? values[1] : cplx(0.0);
    const double inv    = 1.0 / cell_sites;
    sp.lambda1_per_site = std::pow(std::abs(sp.lambda1), inv);
    sp.lambda2_per_site = std::pow(std::abs(sp.lambda2), inv);
    sp.gap              = sp.lambda1_per_site - sp.lambda2_per_site;
    sp.top.assign(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(6, values.size())));
    return sp;
}

TransferSpectrum transfer_spectrum(const MixedTransferMatrix &m) {
    const MatrixC &e = m.sector.size() > 0 ? m.sector : m.full;
    return spectrum_from_eigenvalues(eigenvalues(e), m.cell_sites);
}

SectorTransfer::SectorTransfer(const UniformMPS &mps) : sites_(mps.tensors) {
    if(sites_.size() != 4) throw ConfigError("SectorTransfer expects a four-site cell");
    d0_ = sites_[0].left_dim();
    for(int p = 0; p < 2; ++p)
        for(int s1 = 0; s1 < 2; ++s1)
            for(int s2 = 0; s2 < 2; ++s2)
                pairs_[static_cast<std::size_t>(p)].A[static_cast<std::size_t>(2 * s1 + s2)] =
                    sites_[static_cast<std::size_t>(2 * p)].A[s1] * sites_[static_cast<std::size_t>(2 * p + 1)].A[s2];
}

std::array<std::array<MatrixC, 4>, 2> SectorTransfer::y_terms(const MeasurementSettings &settings) const {
    check_tiling(settings, 4);
    // E_C(X) = sum_s A^s X Y_s with Y_s = sum_t C_ts A^t+; for a merged pair Y_{s1 s2} = Y2_{s2} Y1_{s1}
    std::array<std::array<MatrixC, 4>, 2> ys;
    for(int p = 0; p < 2; ++p) {
        std::array<std::array<MatrixC, 2>, 2> single;
        for(int q = 0; q < 2; ++q) {
            const int k          = 2 * p + q;
            const SiteTensor &t  = sites_[static_cast<std::size_t>(k)];
            const auto &pair     = setting_for(settings, k);
            const Matrix2c c     = sector_operator(pair.a, pair.a_prime);
            for(int s = 0; s < 2; ++s)
                single[static_cast<std::size_t>(q)][static_cast<std::size_t>(s)] = c(0, s) * t.A[0].adjoint() + c(1, s) * t.A[1].adjoint();
        }
        for(int s1 = 0; s1 < 2; ++s1)
            for(int s2 = 0; s2 < 2; ++s2)
                ys[static_cast<std::size_t>(p)][static_cast<std::size_t>(2 * s1 + s2)] =
                    single[1][static_cast<std::size_t>(s2)] * single[0][static_cast<std::size_t>(s1)];
    }
    return ys;
}

void SectorTransfer::apply(const std::array<std::array<MatrixC, 4>, 2> &ys, const VectorC &x, VectorC &y) const {
    MatrixC r = Eigen::Map<const MatrixC>(x.data(), d0_, d0_);
    for(int p = 1; p >= 0; --p) {
        const auto &pa   = pairs_[static_cast<std::size_t>(p)].A;
        const auto &py   = ys[static_cast<std::size_t>(p)];
        const auto dl    = pa[0].rows();
        MatrixC out      = MatrixC::Zero(dl, dl);
        MatrixC tmp;
        for(std::size_t s = 0; s < 4; ++s) {
            tmp.noalias() = pa[s] * r;
            out.noalias() += tmp * py[s];
        }
        r = std::move(out);
    }
    y = Eigen::Map<const VectorC>(r.data(), d0_ * d0_);
}

std::vector<cplx> SectorTransfer::leading(const MeasurementSettings &settings, int count) const {
    const auto ys = y_terms(settings);
    const Eigen::Index n = dim();
    const LinearMap op   = [&](const VectorC &x, VectorC &y) { apply(ys, x, y); };

    auto dense = [&] {
        MatrixC m(n, n);
        VectorC e(n), col(n);
        for(Eigen::Index j = 0; j < n; ++j) {
            e.setZero();
            e[j] = 1.0;
            op(e, col);
            m.col(j) = col;
        }
        auto all = eigenvalues(m);
        all.resize(static_cast<std::size_t>(std::min<Eigen::Index>(count, n)));
        return all;
    };
    if(n <= 64) return dense();

    // identity plus a fixed ripple, so the start overlaps every symmetry sector
    VectorC start(n);
    for(Eigen::Index i = 0; i < n; ++i) start[i] = cplx(0.01 * std::sin(1.7 * double(i) + 0.3), 0.01 * std::cos(0.9 * double(i)));
    for(Eigen::Index i = 0; i < d0_; ++i) start[i * d0_ + i] += 1.0;
    KrylovOptions opts;
    opts.nev = count;
    opts.ncv = std::max(24, 4 * count + 8);
    opts.max_restarts = 60; // the dense fallback is cheaper than a long stall
    const auto res = leading_eigenvalues(op, n, start, opts);
    if(!res.converged) return dense();
    return res.values;
}

TransferSpectrum SectorTransfer::spectrum(const MeasurementSettings &settings, int count) const {
    return spectrum_from_eigenvalues(leading(settings, count), cell_sites());
}

double SectorTransfer::lambda1_per_site(const MeasurementSettings &settings) const {
    return std::pow(std::abs(leading(settings, 2)[0]), 1.0 / cell_sites());
}

MatrixC brute_force_bell_operator(const MeasurementSettings &settings, int n_sites) {
    if(n_sites < 1) throw ConfigError("need at least one site");
    if(n_sites > 10) throw ResourceError(fmt::format("brute-force Bell operator limited to 10 sites, got {}", n_sites));
    check_tiling(settings, n_sites);
    const auto &first = setting_for(settings, 0);
    MatrixC f         = setting_operator(first.a);
    MatrixC fp        = setting_operator(first.a_prime);
    for(int k = 1; k < n_sites; ++k) {
        const auto &p    = setting_for(settings, k);
        const MatrixC A  = setting_operator(p.a), Ap = setting_operator(p.a_prime);
        const MatrixC s  = 0.5 * (A + Ap), d = 0.5 * (A - Ap);
        MatrixC nf       = Eigen::kroneckerProduct(f, s) + Eigen::kroneckerProduct(fp, d);
        MatrixC nfp      = Eigen::kroneckerProduct(fp, s) - Eigen::kroneckerProduct(f, d);
        f                = std::move(nf);
        fp               = std::move(nfp);
    }
    return f;
}

double bell_value_finite(const VectorC &psi, int n_sites, const MeasurementSettings &settings) {
    check_tiling(settings, n_sites);
    if(psi.size() != (Eigen::Index{1} << n_sites)) throw ConfigError("state dimension does not match 2^N");
    VectorC phi = psi;
    for(int k = 0; k < n_sites; ++k) {
        const auto &p = setting_for(settings, k);
        apply_site_operator(phi, n_sites, k, sector_operator(p.a, p.a_prime));
    }
    return 2.0 * (kAlpha * psi.dot(phi)).real();
}

double bell_value_finite(const FiniteGroundState &state, const MeasurementSettings &settings) {
    return bell_value_finite(state.state, state.n_sites, settings);
}

FiniteMPS random_finite_mps(int n_sites, int chi, std::mt19937_64 &rng) {
    if(n_sites < 1 || chi < 1) throw ConfigError("random_finite_mps: bad size");
    std::normal_distribution<double> g(0.0, 1.0);
    FiniteMPS m;
    for(int k = 0; k < n_sites; ++k) {
        // bond dimensions capped by the exact Schmidt rank on either side
        const int left  = k == 0 ? 1 : std::min(chi, 1 << std::min(k, n_sites - k));
        const int right = k == n_sites - 1 ? 1 : std::min(chi, 1 << std::min(k + 1, n_sites - k - 1));
        SiteTensor t;
        for(auto &a : t.A) {
            a.resize(left, right);
            for(Eigen::Index i = 0; i < left; ++i)
                for(Eigen::Index j = 0; j < right; ++j) {
                    const double re = g(rng);
                    a(i, j)         = cplx(re, g(rng));
                }
        }
        m.sites.push_back(std::move(t));
    }
    return m;
}

VectorC finite_mps_to_dense(const FiniteMPS &mps) {
    const int n = mps.n_sites();
    // rows: basis states of the sites so far (site 0 most significant), cols: open bond
    MatrixC acc = MatrixC::Identity(1, 1);
    for(int k = 0; k < n; ++k) {
        const SiteTensor &t = mps.sites[static_cast<std::size_t>(k)];
        MatrixC next(acc.rows() * 2, t.right_dim());
        for(Eigen::Index r = 0; r < acc.rows(); ++r)
            for(int s = 0; s < 2; ++s) next.row(2 * r + s) = acc.row(r) * t.A[s];
        acc = std::move(next);
    }
    VectorC psi = acc.col(0);
    return psi / psi.norm();
}

double mpo_bell_expectation(const FiniteMPS &mps, const MeasurementSettings &settings) {
    const int n = mps.n_sites();
    check_tiling(settings, n);
    // Row-vector recursion (F, F') <- (F, F') V with V = W^T; left boundary (1, 1),
    // right boundary picks F. Environments carry the MPS norm along.
    std::array<MatrixC, 2> env{MatrixC::Ones(1, 1), MatrixC::Ones(1, 1)};
    MatrixC norm = MatrixC::Ones(1, 1);
    for(int k = 0; k < n; ++k) {
        const SiteTensor &t = mps.sites[static_cast<std::size_t>(k)];
        const auto &p       = setting_for(settings, k);
        const auto block    = build_site_block(p.a, p.a_prime);
        std::array<MatrixC, 2> next{MatrixC::Zero(t.right_dim(), t.right_dim()), MatrixC::Zero(t.right_dim(), t.right_dim())};
        for(int j = 0; j < 2; ++j)
            for(int i = 0; i < 2; ++i) {
                const Matrix2c &op = block.W[j][i]; // V_ij = W_ji
                for(int s = 0; s < 2; ++s)
                    for(int u = 0; u < 2; ++u)
                        if(op(u, s) != 0.0) next[static_cast<std::size_t>(j)] += op(u, s) * t.A[u].adjoint() * env[static_cast<std::size_t>(i)] * t.A[s];
            }
        MatrixC nn = MatrixC::Zero(t.right_dim(), t.right_dim());
        for(int s = 0; s < 2; ++s) nn += t.A[s].adjoint() * norm * t.A[s];
        norm = std::move(nn);
        env  = std::move(next);
    }
    return (env[0](0, 0) / norm(0, 0)).real();
}

} // namespace bellnav
