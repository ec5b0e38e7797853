#pragma once

#include <atomic>
#include <limits>
#include <memory>
#include <utility>
#include <vector>

#include "bellnav/bellop.hpp"
#include "bellnav/geometry.hpp"

namespace bellnav {

enum class SearchDomain {
    Fundamental, // each reduced pair folded into [0, pi/2] x [0, pi]
    Sphere,      // full [0, pi] x [0, 2 pi)
};

struct OptimizerConfig {
    int grid_resolution  = 48;
    double eta           = 0.05;
    double fd_step       = 1e-4;
    double tol           = 1e-8;
    int max_iters        = 500;
    int n_starts         = 4;
    SymmetryMode mode    = SymmetryMode::polar();
    SearchDomain domain  = SearchDomain::Fundamental;
    long max_grid_points = 4096; // per-axis resolution shrinks when the full grid would exceed this

    void validate() const;
    /// Domain actually searched: independent partner settings break the folds, so
    /// modes with a FREE pair relation always search the whole sphere.
    [[nodiscard]] SearchDomain effective_domain() const;
};

/// Quantity being maximized over measurement settings.
class Objective {
  public:
    virtual ~Objective() = default;
    [[nodiscard]] virtual int unit_cell() const = 0;
    [[nodiscard]] virtual double value(const MeasurementSettings &settings) const = 0;
    /// Spectral gap at these settings, when the objective has one.
    [[nodiscard]] virtual double gap(const MeasurementSettings &) const { return std::numeric_limits<double>::infinity(); }

    [[nodiscard]] long evaluations() const { return evaluations_.load(); }

  protected:
    void count() const { ++evaluations_; }

  private:
    mutable std::atomic<long> evaluations_{0};
};

/// |lambda1| per site of the mixed transfer matrix of a uniform MPS.
class TransferObjective final : public Objective {
  public:
    TransferObjective(const UniformMPS &mps, int u);
    [[nodiscard]] int unit_cell() const override { return u_; }
    [[nodiscard]] double value(const MeasurementSettings &settings) const override;
    [[nodiscard]] double gap(const MeasurementSettings &settings) const override;
    [[nodiscard]] const SectorTransfer &transfer() const { return transfer_; }

  private:
    SectorTransfer transfer_;
    int u_;
};

/// <F_N> on a finite state (oracle path).
class FiniteChainObjective final : public Objective {
  public:
    FiniteChainObjective(FiniteGroundState state, int u);
    [[nodiscard]] int unit_cell() const override { return u_; }
    [[nodiscard]] double value(const MeasurementSettings &settings) const override;

  private:
    FiniteGroundState state_;
    int u_;
};

struct Candidate {
    std::vector<BlochAngles> angles;
    double value = 0.0;
};

struct OptResult {
    MeasurementSettings settings;
    std::vector<BlochAngles> reduced_angles;
    double lambda1_per_site = 0.0;
    int iterations          = 0;
    bool converged          = false;
    std::vector<std::pair<int, double>> trace;
    std::vector<double> start_values; // final value reached from each start
    long evaluations = 0;
};

/// Reduced angles <-> flat parameter vector (theta_1, phi_1, theta_2, ...).
std::vector<double> flatten(const std::vector<BlochAngles> &angles);
std::vector<BlochAngles> unflatten(const std::vector<double> &params);

/// Per-axis grid resolution after applying the total-point cap.
int effective_grid_resolution(const OptimizerConfig &config, int reduced_pairs);

std::vector<Candidate> grid_scan(const Objective &objective, const OptimizerConfig &config);

/// Central-difference gradient of the objective in the flat reduced parameters.
std::vector<double> fd_gradient(const Objective &objective, const SymmetryMode &mode, const std::vector<double> &params, double step);

OptResult gradient_ascent(const Objective &objective, const std::vector<BlochAngles> &start, const OptimizerConfig &config);

/// Grid scan, then ascent from the best `n_starts` grid points and from any
/// extra starts. FREE-relation modes also start from the optima of the two mirror modes.
OptResult optimize_settings(const Objective &objective, const OptimizerConfig &config,
                            const std::vector<std::vector<BlochAngles>> &extra_starts = {});

OptResult optimize_settings(const UniformMPS &mps, const OptimizerConfig &config, int u);

} // namespace bellnav
