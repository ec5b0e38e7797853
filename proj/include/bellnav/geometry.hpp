#pragma once

#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bellnav/core.hpp"

namespace bellnav {

/// Spherical coordinates of a measurement direction. Canonical values satisfy
/// 0 <= theta <= pi, 0 <= phi < 2 pi, and phi == 0 at either pole.
struct BlochAngles {
    double theta = 0.0;
    double phi   = 0.0;

    friend bool operator==(const BlochAngles &, const BlochAngles &) = default;
};

struct UnitVector {
    double x = 0.0;
    double y = 0.0;
    double z = 1.0;

    [[nodiscard]] double norm() const;
    [[nodiscard]] double dot(const UnitVector &o) const { return x * o.x + y * o.y + z * o.z; }
    [[nodiscard]] UnitVector operator-() const { return {-x, -y, -z}; }

    friend bool operator==(const UnitVector &, const UnitVector &) = default;
};

/// The two settings (a_k, a'_k) measured on one site of the unit cell.
struct SettingPair {
    UnitVector a;
    UnitVector a_prime;
};

/// Full operator set {a_k, a'_k} for a unit cell of u sites; index k-1 holds site k.
using MeasurementSettings = std::vector<SettingPair>;

/// How the partner setting a' is generated from a on an unlocked site.
enum class PairRelation {
    Free,            // a and a' independent
    PolarMirror,     // theta' = pi - theta, phi' = phi   (z -> -z)
    AzimuthalMirror, // theta' = theta, phi' = 2pi - phi  (y -> -y)
};

enum class ModeTag { Free, PolarMirror, AzimuthalMirror, AxisLocked };

/// Symmetry constraint family for the reduced search space.
///
/// `locked_sites` (1-based) pins both settings of a site to +z and may accompany
/// any tag. The AxisLocked tag requires a non-empty lock set; its unlocked sites
/// follow `axis_relation`, which defaults to the polar mirror.
struct SymmetryMode {
    ModeTag tag = ModeTag::PolarMirror;
    std::set<int> locked_sites;
    PairRelation axis_relation = PairRelation::PolarMirror;

    [[nodiscard]] PairRelation relation() const;
    [[nodiscard]] bool is_locked(int site) const { return locked_sites.count(site) > 0; }
    /// Number of reduced (theta, phi) pairs for a unit cell of size u.
    [[nodiscard]] int reduced_count(int u) const;
    void validate(int u) const;

    static SymmetryMode free() { return {ModeTag::Free, {}, PairRelation::PolarMirror}; }
    static SymmetryMode polar() { return {ModeTag::PolarMirror, {}, PairRelation::PolarMirror}; }
    static SymmetryMode azimuthal() { return {ModeTag::AzimuthalMirror, {}, PairRelation::PolarMirror}; }
    static SymmetryMode axis_locked(std::set<int> sites, PairRelation rel = PairRelation::PolarMirror) {
        return {ModeTag::AxisLocked, std::move(sites), rel};
    }
};

struct FundamentalDomain {
    static constexpr double theta_max = kPi / 2.0;
    static constexpr double phi_max   = kPi;
    static bool contains(const BlochAngles &angles);
};

/// Eq.-style Bloch parameterization [sin t cos p, sin t sin p, cos t].
UnitVector angles_to_vector(const BlochAngles &angles);
BlochAngles vector_to_angles(const UnitVector &v);

/// Maps arbitrary real (theta, phi) to the canonical angles of the same direction.
BlochAngles wrap_angles(double theta, double phi);

/// Folds theta -> pi - theta and phi -> 2pi - phi into [0, pi/2] x [0, pi].
BlochAngles canonicalize_to_domain(const BlochAngles &angles);

MeasurementSettings expand_settings(std::span<const BlochAngles> reduced, const SymmetryMode &mode, int u);

/// Inverse of expand_settings: reads the generating angles back out of a
/// settings set, assuming it belongs to the mode's family.
std::vector<BlochAngles> reduce_settings(const MeasurementSettings &settings, const SymmetryMode &mode);

/// min(|a-b|, 2pi-|a-b|) for angles taken mod 2pi.
double circular_distance(double a, double b);

void validate_settings(const MeasurementSettings &settings);

std::string_view to_string(ModeTag tag);
std::string_view to_string(PairRelation relation);
ModeTag parse_mode_tag(std::string_view text);
PairRelation parse_pair_relation(std::string_view text);

} // namespace bellnav
