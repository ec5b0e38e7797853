#include <doctest.h>

#include <cmath>
#include <random>

#include "bellnav/geometry.hpp"
#include "bellnav/oracle.hpp"

using namespace bellnav;

TEST_CASE("angles and vectors round-trip") {
    std::mt19937_64 rng(7);
    for(int i = 0; i < 100; ++i) {
        const auto v = random_unit_vector(rng);
        const auto w = angles_to_vector(vector_to_angles(v));
        CHECK(std::abs(v.x - w.x) < 1e-12);
        CHECK(std::abs(v.y - w.y) < 1e-12);
        CHECK(std::abs(v.z - w.z) < 1e-12);
    }
    const auto north = vector_to_angles({0, 0, 1});
    CHECK(north.theta == 0.0);
    CHECK(north.phi == 0.0);
    const auto x = angles_to_vector({kPi / 2, 0});
    CHECK(std::abs(x.x - 1.0) < 1e-15);
}

TEST_CASE("out-of-range input is rejected") {
    CHECK_THROWS_AS(angles_to_vector({-0.1, 0}), DomainError);
    CHECK_THROWS_AS(angles_to_vector({std::nan(""), 0}), DomainError);
    CHECK_THROWS_AS(vector_to_angles({1, 1, 0}), DomainError);
}

TEST_CASE("wrap and fold") {
    const auto w = wrap_angles(-0.3, 7.0);
    CHECK(w.theta == doctest::Approx(0.3));
    const auto v1 = angles_to_vector(w);
    const double z = std::cos(-0.3);
    CHECK(v1.z == doctest::Approx(z));

    const auto f = canonicalize_to_domain({2.5, 5.0});
    CHECK(FundamentalDomain::contains(f));
    CHECK(f.theta == doctest::Approx(kPi - 2.5));
    CHECK(f.phi == doctest::Approx(2 * kPi - 5.0));
}

TEST_CASE("mode expansion") {
    const std::vector<BlochAngles> one{{0.4, 1.1}};
    const auto polar = expand_settings(one, SymmetryMode::polar(), 1);
    CHECK(polar[0].a_prime.z == doctest::Approx(-polar[0].a.z));
    CHECK(polar[0].a_prime.x == doctest::Approx(polar[0].a.x));

    const auto az = expand_settings(one, SymmetryMode::azimuthal(), 1);
    CHECK(az[0].a_prime.y == doctest::Approx(-az[0].a.y));
    CHECK(az[0].a_prime.z == doctest::Approx(az[0].a.z));

    const auto locked = expand_settings(one, SymmetryMode::axis_locked({2}), 2);
    REQUIRE(locked.size() == 2);
    CHECK(locked[1].a == UnitVector{0, 0, 1});
    CHECK(locked[1].a_prime == UnitVector{0, 0, 1});
    CHECK(reduce_settings(locked, SymmetryMode::axis_locked({2})).size() == 1);

    const std::vector<BlochAngles> two{{0.4, 1.1}, {2.0, 0.3}};
    const auto fr = expand_settings(two, SymmetryMode::free(), 1);
    const auto back = reduce_settings(fr, SymmetryMode::free());
    CHECK(back[1].theta == doctest::Approx(2.0));

    CHECK_THROWS_AS(expand_settings(two, SymmetryMode::polar(), 1), ConfigError);
    CHECK_THROWS_AS(SymmetryMode::axis_locked({}).validate(2), ConfigError);
    CHECK_THROWS_AS(SymmetryMode::axis_locked({3}).validate(2), ConfigError);
}

TEST_CASE("circular distance") {
    CHECK(circular_distance(0.1, 2 * kPi - 0.1) == doctest::Approx(0.2));
    CHECK(circular_distance(1.0, 1.0) == 0.0);
}

TEST_CASE("names parse back") {
    for(auto t : {ModeTag::Free, ModeTag::PolarMirror, ModeTag::AzimuthalMirror, ModeTag::AxisLocked}) CHECK(parse_mode_tag(to_string(t)) == t);
    for(auto r : {PairRelation::Free, PairRelation::PolarMirror, PairRelation::AzimuthalMirror}) CHECK(parse_pair_relation(to_string(r)) == r);
    CHECK_THROWS_AS(parse_mode_tag("SIDEWAYS"), ConfigError);
}
