#pragma once

#include <string_view>
#include <vector>

#include "bellnav/core.hpp"

namespace bellnav {

enum class ModelKind { ClusterIsing, Tfim, Xxz };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view text);

/// Spin-chain model with every term entering with a minus sign:
///   CLUSTER_ISING  -sum(X Z X + J X X + h Z)
///   TFIM           -sum(X X + h Z)
///   XXZ            -sum(X X + Y Y + delta Z Z + h Z)
struct ModelSpec {
    ModelKind kind = ModelKind::ClusterIsing;
    double J       = 0.0;
    double h       = 0.0;
    double delta   = 1.0;
    int u          = 2;

    void validate() const;
    static int default_unit_cell(ModelKind kind) { return kind == ModelKind::ClusterIsing ? 2 : 1; }
};

/// Pauli matrix for 'I', 'X', 'Y' or 'Z'.
Matrix2c pauli(char which);
/// v . sigma for a real 3-vector.
Matrix2c pauli_dot(double x, double y, double z);

/// One Pauli string; ops[k] acts on site (start + k).
struct PauliTerm {
    double coeff = 0.0;
    std::string ops;
};

/// Terms anchored at a single site; the Hamiltonian is their sum over all sites.
std::vector<PauliTerm> site_terms(const ModelSpec &spec);

struct FiniteGroundState {
    int n_sites = 0;
    VectorC state;
    double energy = 0.0;
};

inline constexpr int kDenseSiteLimit = 12;

/// Periodic-ring Hamiltonian. Basis index bit (N-1-i) holds site i, 0 = spin up.
MatrixC build_hamiltonian_dense(const ModelSpec &spec, int n_sites, bool periodic = true);

/// y = H x on a periodic ring without forming the matrix.
void apply_hamiltonian(const ModelSpec &spec, int n_sites, const VectorC &x, VectorC &y);

/// Eigenvalues of prod Z on the computational basis.
Eigen::VectorXd parity_diagonal(int n_sites);

/// Lowest eigenpair of a dense Hermitian matrix. With a parity diagonal the even
/// sector is preferred by a 1e-8 projector bias; the reported energy excludes it.
FiniteGroundState ground_state_ed(const MatrixC &h, const Eigen::VectorXd *parity = nullptr);

/// Ring ground state; dense for small N, parity-resolved Lanczos above that.
FiniteGroundState ground_state_finite(const ModelSpec &spec, int n_sites);

/// <psi| O_site |psi> for a single-site operator.
double local_expectation(const VectorC &psi, int n_sites, int site, const Matrix2c &op);

/// Applies a single-site operator in place.
void apply_site_operator(VectorC &psi, int n_sites, int site, const Matrix2c &op);

/// Fidelity susceptibility per site, 2(1-|<psi(h-d)|psi(h+d)>|)/((2d)^2 N), on a ring.
std::vector<double> fidelity_susceptibility(ModelSpec spec, int n_sites, const std::vector<double> &h_values, double dh = 1e-3);

} // namespace bellnav
