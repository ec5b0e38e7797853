#include "bellnav/models.hpp"

#include <bit>
#include <cmath>
#include <cstdint>

#include <fmt/format.h>

#include "bellnav/linalg.hpp"

namespace bellnav {

std::string_view to_string(ModelKind kind) {
    switch(kind) {
        case ModelKind::ClusterIsing: return "CLUSTER_ISING";
        case ModelKind::Tfim: return "TFIM";
        case ModelKind::Xxz: return "XXZ";
    }
    return "?";
}

ModelKind parse_model_kind(std::string_view text) {
    if(text == "CLUSTER_ISING") return ModelKind::ClusterIsing;
    if(text == "TFIM") return ModelKind::Tfim;
    if(text == "XXZ") return ModelKind::Xxz;
    throw ConfigError(fmt::format("unknown model kind '{}'", text));
}

void ModelSpec::validate() const {
    if(!(J >= 0.0)) throw ConfigError(fmt::format("model.J must be non-negative, got {}", J));
    if(!std::isfinite(h) || !std::isfinite(delta)) throw ConfigError("model parameters must be finite");
    if(u != 1 && u != 2) throw ConfigError(fmt::format("model.u must be 1 or 2, got {}", u));
}

Matrix2c pauli(char which) {
    Matrix2c m;
    switch(which) {
        case 'I': m << 1, 0, 0, 1; break;
        case 'X': m << 0, 1, 1, 0; break;
        case 'Y': m << 0, cplx(0, -1), cplx(0, 1), 0; break;
        case 'Z': m << 1, 0, 0, -1; break;
        default: throw DomainError(fmt::format("unknown Pauli label '{}'", which));
    }
    return m;
}

Matrix2c pauli_dot(double x, double y, double z) {
    Matrix2c m;
    m << z, cplx(x, -y), cplx(x, y), -z;
    return m;
}

std::vector<PauliTerm> site_terms(const ModelSpec &spec) {
    std::vector<PauliTerm> t;
    switch(spec.kind) {
        case ModelKind::ClusterIsing:
            t.push_back({-1.0, "XZX"});
            if(spec.J != 0.0) t.push_back({-spec.J, "XX"});
            break;
        case ModelKind::Tfim: t.push_back({-1.0, "XX"}); break;
        case ModelKind::Xxz:
            t.push_back({-1.0, "XX"});
            t.push_back({-1.0, "YY"});
            if(spec.delta != 0.0) t.push_back({-spec.delta, "ZZ"});
            break;
    }
    if(spec.h != 0.0) t.push_back({-spec.h, "Z"});
    return t;
}

namespace {

struct CompiledString {
    std::uint64_t flip = 0;  // X or Y positions
    std::uint64_t zmask = 0; // Y or Z positions (sign from the spin state)
    cplx factor{1.0, 0.0};   // i^{#Y}
};

// Places the site-anchored terms at every start site of a ring (or open chain).
std::vector<CompiledString> compile(const ModelSpec &spec, int n_sites, bool periodic) {
    std::vector<CompiledString> out;
    for(const auto &term : site_terms(spec)) {
        const int len = static_cast<int>(term.ops.size());
        for(int start = 0; start < n_sites; ++start) {
            if(!periodic && start + len > n_sites) continue;
            CompiledString s;
            s.factor = term.coeff;
            for(int k = 0; k < len; ++k) {
                const int site          = (start + k) % n_sites;
                const std::uint64_t bit = std::uint64_t{1} << (n_sites - 1 - site);
                switch(term.ops[static_cast<std::size_t>(k)]) {
                    case 'X': s.flip ^= bit; break;
                    case 'Y':
                        s.flip ^= bit;
                        s.zmask ^= bit;
                        s.factor *= cplx(0, 1);
                        break;
                    case 'Z': s.zmask ^= bit; break;
                    default: break;
                }
            }
            out.push_back(s);
        }
    }
    return out;
}

void check_sites(int n_sites, int limit) {
    if(n_sites < 2) throw ConfigError(fmt::format("need at least 2 sites, got {}", n_sites));
    if(n_sites > limit) throw ResourceError(fmt::format("{} sites exceeds the limit of {}", n_sites, limit));
}

// <b'| P |b> = factor * (-1)^{popcount(b & zmask)} with b' = b ^ flip (Y acting on |1> gives -i, on |0> gives +i)
inline cplx string_element(const CompiledString &s, std::uint64_t b) {
    return (std::popcount(b & s.zmask) & 1) ? -s.factor : s.factor;
}

void fix_phase(VectorC &v) {
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    const cplx ph = v[imax] / std::abs(v[imax]);
    v /= ph;
}

} // namespace

MatrixC build_hamiltonian_dense(const ModelSpec &spec, int n_sites, bool periodic) {
    spec.validate();
    check_sites(n_sites, kDenseSiteLimit);
    const std::uint64_t dim = std::uint64_t{1} << n_sites;
    MatrixC h = MatrixC::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for(const auto &s : compile(spec, n_sites, periodic))
        for(std::uint64_t b = 0; b < dim; ++b) h(static_cast<Eigen::Index>(b ^ s.flip), static_cast<Eigen::Index>(b)) += string_element(s, b);
    return h;
}

void apply_hamiltonian(const ModelSpec &spec, int n_sites, const VectorC &x, VectorC &y) {
    check_sites(n_sites, 24);
    const std::uint64_t dim = std::uint64_t{1} << n_sites;
    if(static_cast<std::uint64_t>(x.size()) != dim) throw ConfigError("apply_hamiltonian: vector dimension mismatch");
    y.setZero(x.size());
    for(const auto &s : compile(spec, n_sites, true))
        for(std::uint64_t b = 0; b < dim; ++b) y[static_cast<Eigen::Index>(b ^ s.flip)] += string_element(s, b) * x[static_cast<Eigen::Index>(b)];
}

Eigen::VectorXd parity_diagonal(int n_sites) {
    const std::uint64_t dim = std::uint64_t{1} << n_sites;
    Eigen::VectorXd p(static_cast<Eigen::Index>(dim));
    for(std::uint64_t b = 0; b < dim; ++b) p[static_cast<Eigen::Index>(b)] = (std::popcount(b) & 1) ? -1.0 : 1.0;
    return p;
}

FiniteGroundState ground_state_ed(const MatrixC &h, const Eigen::VectorXd *parity) {
    const Eigen::Index dim = h.rows();
    if(dim == 0 || (dim & (dim - 1)) != 0) throw ConfigError("ground_state_ed: dimension is not a power of two");
    MatrixC biased = h;
    if(parity) {
        if(parity->size() != dim) throw ConfigError("ground_state_ed: parity dimension mismatch");
        for(Eigen::Index i = 0; i < dim; ++i) biased(i, i) -= 1e-8 * 0.5 * (1.0 + (*parity)[i]);
    }
    auto eig = hermitian_lowest(biased, 1);
    FiniteGroundState gs;
    gs.n_sites = std::countr_zero(static_cast<std::uint64_t>(dim));
    gs.state   = eig.vectors.col(0);
    gs.state /= gs.state.norm();
    fix_phase(gs.state);
    gs.energy = (gs.state.adjoint() * h * gs.state)(0, 0).real();
    return gs;
}

FiniteGroundState ground_state_finite(const ModelSpec &spec, int n_sites) {
    spec.validate();
    if(n_sites <= 10) {
        const auto p = parity_diagonal(n_sites);
        return ground_state_ed(build_hamiltonian_dense(spec, n_sites, true), &p);
    }
    check_sites(n_sites, 20);
    const auto dim = Eigen::Index{1} << n_sites;
    const auto p   = parity_diagonal(n_sites);
    const LinearMap op = [&](const VectorC &x, VectorC &y) { apply_hamiltonian(spec, n_sites, x, y); };

    VectorC start(dim);
    for(Eigen::Index b = 0; b < dim; ++b) start[b] = 1.0 + 0.25 * std::cos(0.37 * double(b));

    auto solve = [&](double sign) {
        auto project = [&](VectorC &v) {
            for(Eigen::Index b = 0; b < dim; ++b)
                if(p[b] != sign) v[b] = 0.0;
        };
        return lanczos_lowest(op, start, 1e-10, 400, project);
    };
    const auto even = solve(1.0);
    const auto odd  = solve(-1.0);
    const auto &best = (odd.value < even.value - 1e-8) ? odd : even;

    FiniteGroundState gs;
    gs.n_sites = n_sites;
    gs.state   = best.vector;
    fix_phase(gs.state);
    VectorC hv;
    apply_hamiltonian(spec, n_sites, gs.state, hv);
    gs.energy = gs.state.dot(hv).real();
    return gs;
}

void apply_site_operator(VectorC &psi, int n_sites, int site, const Matrix2c &op) {
    const Eigen::Index dim    = psi.size();
    const Eigen::Index stride = Eigen::Index{1} << (n_sites - 1 - site);
    for(Eigen::Index b = 0; b < dim; ++b) {
        if(b & stride) continue;
        const cplx up = psi[b], dn = psi[b | stride];
        psi[b]          = op(0, 0) * up + op(0, 1) * dn;
        psi[b | stride] = op(1, 0) * up + op(1, 1) * dn;
    }
}

double local_expectation(const VectorC &psi, int n_sites, int site, const Matrix2c &op) {
    VectorC tmp = psi;
    apply_site_operator(tmp, n_sites, site, op);
    return psi.dot(tmp).real();
}

std::vector<double> fidelity_susceptibility(ModelSpec spec, int n_sites, const std::vector<double> &h_values, double dh) {
    std::vector<double> out;
    out.reserve(h_values.size());
    for(double h : h_values) {
        spec.h         = h - dh;
        const auto lo  = ground_state_finite(spec, n_sites);
        spec.h         = h + dh;
        const auto hi  = ground_state_finite(spec, n_sites);
        const double f = std::abs(lo.state.dot(hi.state));
        out.push_back(2.0 * (1.0 - f) / (4.0 * dh * dh * n_sites));
    }
    return out;
}

} // namespace bellnav
