#include "bellnav/geometry.hpp"

#include <cmath>

#include <fmt/format.h>

namespace bellnav {

namespace {

constexpr double kTwoPi = 2.0 * kPi;

double wrap_two_pi(double angle) {
    double r = std::fmod(angle, kTwoPi);
    if(r < 0.0) r += kTwoPi;
    if(r >= kTwoPi) r -= kTwoPi;
    return r;
}

} // namespace

double UnitVector::norm() const { return std::sqrt(x * x + y * y + z * z); }

PairRelation SymmetryMode::relation() const {
    switch(tag) {
        case ModeTag::Free: return PairRelation::Free;
        case ModeTag::PolarMirror: return PairRelation::PolarMirror;
        case ModeTag::AzimuthalMirror: return PairRelation::AzimuthalMirror;
        case ModeTag::AxisLocked: return axis_relation;
    }
    return PairRelation::Free;
}

int SymmetryMode::reduced_count(int u) const {
    int unlocked = 0;
    for(int k = 1; k <= u; ++k)
        if(!is_locked(k)) ++unlocked;
    return relation() == PairRelation::Free ? 2 * unlocked : unlocked;
}

void SymmetryMode::validate(int u) const {
    if(u < 1) throw ConfigError(fmt::format("unit cell size must be positive, got {}", u));
    for(int s : locked_sites)
        if(s < 1 || s > u) throw ConfigError(fmt::format("locked site {} outside unit cell 1..{}", s, u));
    if(tag == ModeTag::AxisLocked && locked_sites.empty()) throw ConfigError("AXIS_LOCKED mode requires at least one locked site");
}

bool FundamentalDomain::contains(const BlochAngles &angles) {
    return angles.theta >= 0.0 && angles.theta <= theta_max && angles.phi >= 0.0 && angles.phi <= phi_max;
}

UnitVector angles_to_vector(const BlochAngles &angles) {
    const double t = angles.theta;
    const double p = angles.phi;
    if(!(t >= 0.0 && t <= kPi) || !(p >= 0.0 && p < kTwoPi))
        throw DomainError(fmt::format("Bloch angles out of range: theta={} phi={}", t, p));
    const double st = std::sin(t);
    return {st * std::cos(p), st * std::sin(p), std::cos(t)};
}

BlochAngles vector_to_angles(const UnitVector &v) {
    const double n = v.norm();
    if(!(std::abs(n - 1.0) <= 1e-9)) throw DomainError(fmt::format("vector is not unit length (|v| = {})", n));
    const double rho   = std::hypot(v.x, v.y);
    const double theta = std::atan2(rho, v.z);
    if(rho == 0.0) return {theta, 0.0};
    return {theta, wrap_two_pi(std::atan2(v.y, v.x))};
}

BlochAngles wrap_angles(double theta, double phi) {
    double t = wrap_two_pi(theta);
    double p = phi;
    if(t > kPi) {
        t = kTwoPi - t;
        p += kPi;
    }
    p = wrap_two_pi(p);
    if(t == 0.0 || t == kPi) p = 0.0;
    return {t, p};
}

BlochAngles canonicalize_to_domain(const BlochAngles &angles) {
    BlochAngles out = wrap_angles(angles.theta, angles.phi);
    if(out.theta > FundamentalDomain::theta_max) out.theta = kPi - out.theta;
    if(out.phi > FundamentalDomain::phi_max) out.phi = kTwoPi - out.phi;
    if(out.theta == 0.0) out.phi = 0.0;
    return out;
}

MeasurementSettings expand_settings(std::span<const BlochAngles> reduced, const SymmetryMode &mode, int u) {
    mode.validate(u);
    const auto expected = static_cast<std::size_t>(mode.reduced_count(u));
    if(reduced.size() != expected)
        throw ConfigError(fmt::format("mode {} with u={} takes {} reduced angle pairs, got {}", to_string(mode.tag), u, expected,
                                      reduced.size()));

    const UnitVector zhat{0.0, 0.0, 1.0};
    MeasurementSettings out;
    out.reserve(static_cast<std::size_t>(u));
    std::size_t next = 0;
    for(int k = 1; k <= u; ++k) {
        if(mode.is_locked(k)) {
            out.push_back({zhat, zhat});
            continue;
        }
        const UnitVector a = angles_to_vector(reduced[next++]);
        switch(mode.relation()) {
            case PairRelation::Free: out.push_back({a, angles_to_vector(reduced[next++])}); break;
            case PairRelation::PolarMirror: out.push_back({a, {a.x, a.y, -a.z}}); break;
            case PairRelation::AzimuthalMirror: out.push_back({a, {a.x, -a.y, a.z}}); break;
        }
    }
    return out;
}

std::vector<BlochAngles> reduce_settings(const MeasurementSettings &settings, const SymmetryMode &mode) {
    const int u = static_cast<int>(settings.size());
    mode.validate(u);
    std::vector<BlochAngles> out;
    for(int k = 1; k <= u; ++k) {
        if(mode.is_locked(k)) continue;
        const auto &pair = settings[static_cast<std::size_t>(k - 1)];
        out.push_back(vector_to_angles(pair.a));
        if(mode.relation() == PairRelation::Free) out.push_back(vector_to_angles(pair.a_prime));
    }
    return out;
}

double circular_distance(double a, double b) {
    const double d = std::abs(wrap_two_pi(a) - wrap_two_pi(b));
    return std::min(d, kTwoPi - d);
}

void validate_settings(const MeasurementSettings &settings) {
    if(settings.empty()) throw ConfigError("measurement settings are empty");
    for(const auto &pair : settings) {
        for(const auto *v : {&pair.a, &pair.a_prime})
            if(!(std::abs(v->norm() - 1.0) <= 1e-9)) throw DomainError(fmt::format("setting vector not unit length: |v|={}", v->norm()));
    }
}

std::string_view to_string(ModeTag tag) {
    switch(tag) {
        case ModeTag::Free: return "FREE";
        case ModeTag::PolarMirror: return "POLAR_MIRROR";
        case ModeTag::AzimuthalMirror: return "AZIMUTHAL_MIRROR";
        case ModeTag::AxisLocked: return "AXIS_LOCKED";
    }
    return "?";
}

std::string_view to_string(PairRelation relation) {
    switch(relation) {
        case PairRelation::Free: return "FREE";
        case PairRelation::PolarMirror: return "POLAR_MIRROR";
        case PairRelation::AzimuthalMirror: return "AZIMUTHAL_MIRROR";
    }
    return "?";
}

ModeTag parse_mode_tag(std::string_view text) {
    if(text == "FREE") return ModeTag::Free;
    if(text == "POLAR_MIRROR") return ModeTag::PolarMirror;
    if(text == "AZIMUTHAL_MIRROR") return ModeTag::AzimuthalMirror;
    if(text == "AXIS_LOCKED") return ModeTag::AxisLocked;
    throw ConfigError(fmt::format("unknown symmetry mode '{}'", text));
}

PairRelation parse_pair_relation(std::string_view text) {
    if(text == "FREE") return PairRelation::Free;
    if(text == "POLAR_MIRROR") return PairRelation::PolarMirror;
    if(text == "AZIMUTHAL_MIRROR") return PairRelation::AzimuthalMirror;
    throw ConfigError(fmt::format("unknown pair relation '{}'", text));
}

} // namespace bellnav
