#include <doctest.h>

#include <cmath>
#include <random>

#include "bellnav/optimizer.hpp"
#include "bellnav/oracle.hpp"

using namespace bellnav;

namespace {
FiniteGroundState singlet() {
    FiniteGroundState s{2, VectorC::Zero(4), 0.0};
    s.state[1] = 1.0 / std::sqrt(2.0);
    s.state[2] = -1.0 / std::sqrt(2.0);
    return s;
}
} // namespace

TEST_CASE("config validation") {
    OptimizerConfig c;
    c.grid_resolution = 4;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = {};
    c.eta = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c      = {};
    c.mode = SymmetryMode::free();
    CHECK(c.effective_domain() == SearchDomain::Sphere);
}

TEST_CASE("grid cap shrinks resolution") {
    OptimizerConfig c;
    c.grid_resolution = 48;
    c.max_grid_points = 4096;
    CHECK(effective_grid_resolution(c, 1) == 48);
    CHECK(effective_grid_resolution(c, 2) == 8);
    CHECK(effective_grid_resolution(c, 0) == 1);
}

TEST_CASE("singlet CHSH reaches sqrt 2") {
    const FiniteChainObjective obj(singlet(), 2);
    OptimizerConfig c;
    c.mode            = SymmetryMode::free();
    c.grid_resolution = 8;
    c.max_grid_points = 256;
    const auto r = optimize_settings(obj, c);
    CHECK(r.lambda1_per_site == doctest::Approx(std::sqrt(2.0)).epsilon(1e-7));
    CHECK(r.converged);
}

TEST_CASE("traces are monotone and deterministic") {
    const FiniteChainObjective obj(singlet(), 2);
    OptimizerConfig c;
    c.mode            = SymmetryMode::free();
    c.grid_resolution = 8;
    c.max_grid_points = 256;
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> th(0, kPi), ph(0, 2 * kPi);
    std::vector<BlochAngles> start;
    for(int i = 0; i < 4; ++i) start.push_back({th(rng), ph(rng)});
    const auto a = gradient_ascent(obj, start, c);
    for(std::size_t i = 1; i < a.trace.size(); ++i) CHECK(a.trace[i].second > a.trace[i - 1].second);
    const auto b = gradient_ascent(obj, start, c);
    CHECK(a.lambda1_per_site == b.lambda1_per_site);
    CHECK(a.reduced_angles == b.reduced_angles);
}

TEST_CASE("finite-difference gradient") {
    std::mt19937_64 rng(4);
    VectorC psi = VectorC::Random(16);
    psi.normalize();
    const FiniteChainObjective obj({4, psi, 0.0}, 2);
    const auto mode = SymmetryMode::free();
    std::vector<double> p;
    for(int i = 0; i < 8; ++i) p.push_back(0.3 + 0.35 * i);
    const auto g1 = fd_gradient(obj, mode, p, 1e-4);
    const auto g2 = fd_gradient(obj, mode, p, 2e-4);
    for(std::size_t i = 0; i < p.size(); ++i) {
        const double rich = (4 * g1[i] - g2[i]) / 3;
        CHECK(std::abs(g1[i] - rich) <= 1e-4 * std::max(1e-8, std::abs(rich)) + 1e-9);
    }
}

TEST_CASE("mismatched start") {
    const FiniteChainObjective obj(singlet(), 2);
    OptimizerConfig c;
    CHECK_THROWS_AS(gradient_ascent(obj, {{0.1, 0.2}}, c), ConfigError);
}
