#pragma once

#include <array>
#include <vector>

#include "bellnav/core.hpp"
#include "bellnav/models.hpp"

namespace bellnav {

/// One physical site: A[s] is a (left bond) x (right bond) matrix for spin s.
struct SiteTensor {
    std::array<MatrixC, 2> A;

    [[nodiscard]] Eigen::Index left_dim() const { return A[0].rows(); }
    [[nodiscard]] Eigen::Index right_dim() const { return A[0].cols(); }
};

/// Translationally invariant ground state on a repeating cell of physical sites.
///
/// Tensors are right-canonical. schmidt_weights[k] lives on the bond to the left
/// of site k; bond 0 closes the cell. The cell always holds two blocked pairs
/// (four sites), so bond 0 and bond 2 have dimension <= chi while the inner bonds
/// may reach 2 chi.
struct UniformMPS {
    ModelSpec spec;
    int chi = 0;
    std::vector<SiteTensor> tensors;
    std::vector<Eigen::VectorXd> schmidt_weights;
    double energy_per_site = 0.0;
    int steps              = 0;
    double last_delta      = 0.0;

    [[nodiscard]] int cell_size() const { return static_cast<int>(tensors.size()); }
    [[nodiscard]] const SiteTensor &site(int k) const;
    /// Largest violation of the right- and left-environment fixed-point equations.
    [[nodiscard]] double canonical_residual() const;
};

struct ImaginaryTimeSchedule {
    std::vector<double> steps{0.1, 0.01, 0.001};
    double tol         = 1e-8;
    int max_steps      = 20000; // per stage
    double svd_cutoff  = 1e-12;
};

inline constexpr int kScheduleVersion = 1;

UniformMPS ground_state_umps(const ModelSpec &spec, int chi, double tol = 1e-8, int max_sweeps = 20000);
UniformMPS ground_state_umps(const ModelSpec &spec, int chi, const ImaginaryTimeSchedule &schedule);

/// Builds a uniform MPS from raw cell tensors: normalizes and brings it to
/// canonical form with Schmidt weights on every bond.
UniformMPS canonicalize_cell(std::vector<SiteTensor> tensors, const ModelSpec &spec, int chi);

/// <O_0 O_1 ... > on consecutive sites starting at cell site `offset`.
double mps_local_expectation(const UniformMPS &mps, const std::vector<Matrix2c> &op_string, int offset);

/// Same expectation averaged over every starting site of the cell.
double mps_average_expectation(const UniformMPS &mps, const std::vector<Matrix2c> &op_string);

double mps_energy_per_site(const UniformMPS &mps);

/// Product state with every site in the spinor (c0, c1).
UniformMPS product_state_mps(const ModelSpec &spec, cplx c0, cplx c1);

} // namespace bellnav
