#pragma once

#include <array>
#include <random>
#include <vector>

#include "bellnav/core.hpp"
#include "bellnav/geometry.hpp"
#include "bellnav/models.hpp"
#include "bellnav/umps.hpp"

namespace bellnav {

/// MPO site block of the Mermin-Klyshko chain,
///   W = 1/2 [[A+A', A-A'], [-(A-A'), A+A']],  A = a.sigma, A' = a'.sigma.
struct BellSiteBlock {
    std::array<std::array<Matrix2c, 2>, 2> W;
};

Matrix2c setting_operator(const UnitVector &v);
BellSiteBlock build_site_block(const UnitVector &a, const UnitVector &a_prime);

/// The block structure splits into two conjugate sectors. This returns the
/// generator of one of them, ((1+i)/2) A + ((1-i)/2) A'; the other is its adjoint.
Matrix2c sector_operator(const UnitVector &a, const UnitVector &a_prime);

/// Mixed transfer matrix of one MPS cell.
///
/// `full` is the (2 D^2) x (2 D^2) matrix in the MPO block basis, D the bond
/// dimension at the cell boundary. `sector` is the D^2 x D^2 block of one
/// conjugate sector; the full spectrum is sector(spec) plus its complex conjugate.
struct MixedTransferMatrix {
    MatrixC full;
    MatrixC sector;
    int chi         = 0;
    int u           = 0;
    int cell_sites  = 1; // physical sites in one application of the matrix
};

struct TransferSpectrum {
    cplx lambda1;
    cplx lambda2;
    double lambda1_per_site = 0.0;
    double lambda2_per_site = 0.0;
    double gap              = 0.0;
    std::vector<cplx> top;  // leading eigenvalues of the cell matrix, at most six
};

MixedTransferMatrix mixed_transfer_matrix(const UniformMPS &mps, const MeasurementSettings &settings);

/// Spectrum of `sector` when present, else of `full`.
TransferSpectrum transfer_spectrum(const MixedTransferMatrix &m);
TransferSpectrum spectrum_from_eigenvalues(std::vector<cplx> values, int cell_sites);

/// Matrix-free sector transfer map of a fixed MPS, re-targetable to new settings.
/// The fast path behind the optimizer objective.
class SectorTransfer {
  public:
    explicit SectorTransfer(const UniformMPS &mps);

    /// Leading sector eigenvalues (Krylov-Schur, dense fallback on small bonds or stalls).
    [[nodiscard]] std::vector<cplx> leading(const MeasurementSettings &settings, int count = 2) const;
    [[nodiscard]] TransferSpectrum spectrum(const MeasurementSettings &settings, int count = 2) const;
    [[nodiscard]] double lambda1_per_site(const MeasurementSettings &settings) const;

    [[nodiscard]] int cell_sites() const { return static_cast<int>(sites_.size()); }
    [[nodiscard]] Eigen::Index dim() const { return d0_ * d0_; }

  private:
    struct Pair {
        std::array<MatrixC, 4> A; // merged two-site tensors, index 2 s1 + s2
    };
    void apply(const std::array<std::array<MatrixC, 4>, 2> &ys, const VectorC &x, VectorC &y) const;
    [[nodiscard]] std::array<std::array<MatrixC, 4>, 2> y_terms(const MeasurementSettings &settings) const;

    std::vector<SiteTensor> sites_;
    std::array<Pair, 2> pairs_;
    Eigen::Index d0_ = 0;
};

/// Dense F_N from the recursion with F_1 = A_1; site k uses settings[k mod u].
MatrixC brute_force_bell_operator(const MeasurementSettings &settings, int n_sites);

/// <psi|F_N|psi> through the sector product form 2 Re[(1-i)/2 <psi|C_1 x ... x C_N|psi>].
double bell_value_finite(const FiniteGroundState &state, const MeasurementSettings &settings);
double bell_value_finite(const VectorC &psi, int n_sites, const MeasurementSettings &settings);

/// Open-boundary MPS; first left and last right bond have dimension 1.
struct FiniteMPS {
    std::vector<SiteTensor> sites;
    [[nodiscard]] int n_sites() const { return static_cast<int>(sites.size()); }
};

FiniteMPS random_finite_mps(int n_sites, int chi, std::mt19937_64 &rng);
/// Normalized dense amplitudes; site 0 is the most significant bit.
VectorC finite_mps_to_dense(const FiniteMPS &mps);
/// <F_N> by contracting the Bell MPO blocks between the MPS and its conjugate.
double mpo_bell_expectation(const FiniteMPS &mps, const MeasurementSettings &settings);

} // namespace bellnav
