#pragma once

#include <functional>
#include <string>
#include <tuple>
#include <vector>

#include "bellnav/optimizer.hpp"
#include "bellnav/umps.hpp"

namespace bellnav {

struct SweepRecord {
    double h          = 0.0;
    double J          = 0.0;
    double lambda1    = 0.0; // per site
    double lambda2    = 0.0; // per site
    double gap        = 0.0;
    double dlambda_dh = 0.0;
    std::vector<BlochAngles> reduced_angles;
    MeasurementSettings settings;
    bool converged = false;
    std::string error;
    std::vector<cplx> top; // leading cell eigenvalues
    double energy_per_site = 0.0;
    long evaluations       = 0;
};

struct SweepOptions {
    int chi = 16;
    OptimizerConfig optimizer;
    ImaginaryTimeSchedule schedule;
    bool warm_start = true;
    int workers     = 1; // used only without warm starts
    /// Ground-state provider, e.g. backed by the on-disk cache. Defaults to a fresh solve.
    std::function<UniformMPS(const ModelSpec &)> ground_state;
    std::function<void(const SweepRecord &)> progress;
};

std::vector<double> uniform_grid(double start, double stop, double step);

std::vector<SweepRecord> sweep(const ModelSpec &model, const std::vector<double> &h_values, const SweepOptions &options);

/// Finds the optimum at one field value and fills a record; `warm` seeds the ascent.
SweepRecord optimize_point(const UniformMPS &mps, const OptimizerConfig &config, const std::vector<BlochAngles> *warm = nullptr);

/// Settings equivalent to `settings` under the exact symmetries of |lambda1| for
/// real parity-symmetric states, restricted to those that stay inside the mode family.
std::vector<MeasurementSettings> symmetry_images(const MeasurementSettings &settings, const SymmetryMode &mode);

/// Fills dlambda_dh by central differences (one-sided at the ends).
void susceptibility(std::vector<SweepRecord> &records);

enum class CriticalMethod { Susceptibility, Gap };

struct CriticalEstimate {
    double h = 0.0;
    CriticalMethod method;
    double strength = 0.0; // prominence (susceptibility) or depth (gap)
    bool confirmed  = false; // the other method agrees within two grid steps
};

struct DetectionThresholds {
    double prominence = 0.25; // fraction of the largest |dlambda/dh|
    double gap_depth  = 0.10; // fraction of the median gap
};

std::vector<CriticalEstimate> detect_critical_points(const std::vector<SweepRecord> &records, const DetectionThresholds &thresholds = {});

/// Merges estimates of both methods lying within two grid steps into single
/// locations (the susceptibility position wins), ascending in h.
std::vector<double> consolidate_critical_points(const std::vector<CriticalEstimate> &estimates, double grid_step);

enum class AngleVerdict { Locked, Rotating };

struct AngleTrack {
    std::string name; // e.g. "phi[a'1]"
    int op_index = 0; // 2 (site-1) + (0 for a, 1 for a')
    bool is_phi  = false;
    AngleVerdict verdict = AngleVerdict::Locked;
    double max_drift     = 0.0; // largest excursion between jumps, radians
    double max_step      = 0.0; // largest adjacent change, radians
    std::vector<double> jumps;
    int samples = 0;
};

struct GeometryReport {
    std::vector<AngleTrack> angles;
    std::vector<double> jump_locations;
    /// Field values where the pair relation of some site changes.
    std::vector<double> relation_switches;
    double tau_lock = 0.05;
    double tau_jump = 0.2;
};

/// Per-angle verdicts over the records that violate the classical bound.
GeometryReport classify_geometry(const std::vector<SweepRecord> &records, double tau_lock = 0.05, double tau_jump = 0.2);

/// Classifies an angle series directly (h ascending); exposed for calibration.
AngleTrack classify_series(const std::vector<double> &h, const std::vector<double> &values, bool circular, double tau_lock, double tau_jump);

/// Which mirror relation a site's pair follows within `tol` radians, if any.
PairRelation pair_relation_of(const SettingPair &pair, double tol);

std::vector<std::tuple<double, UnitVector, UnitVector>> bloch_trajectory(const std::vector<SweepRecord> &records, int site);

std::string_view to_string(CriticalMethod method);
std::string_view to_string(AngleVerdict verdict);

} // namespace bellnav
