#include <doctest.h>

#include <cmath>

#include "bellnav/models.hpp"
#include "bellnav/umps.hpp"

using namespace bellnav;

namespace {
ModelSpec cluster(double J, double h) {
    ModelSpec s;
    s.J = J;
    s.h = h;
    return s;
}
} // namespace

TEST_CASE("cluster point is exactly solvable") {
    const auto gs = ground_state_finite(cluster(0, 0), 8);
    CHECK(gs.energy / 8 == doctest::Approx(-1.0).epsilon(1e-12));
    // stabilizer X Z X has expectation 1 on every site
    VectorC psi = gs.state;
    apply_site_operator(psi, 8, 0, pauli('X'));
    apply_site_operator(psi, 8, 1, pauli('Z'));
    apply_site_operator(psi, 8, 2, pauli('X'));
    CHECK(std::abs(gs.state.dot(psi) - 1.0) < 1e-10);
}

TEST_CASE("dense and matrix-free Hamiltonians agree") {
    ModelSpec s = cluster(0.3, 0.7);
    const MatrixC h = build_hamiltonian_dense(s, 6);
    VectorC x = VectorC::Random(64), y(64);
    apply_hamiltonian(s, 6, x, y);
    CHECK((h * x - y).norm() < 1e-12);
    CHECK((h - h.adjoint()).norm() < 1e-12);
}

TEST_CASE("Lanczos path matches dense diagonalization") {
    // N=12 goes through the parity-sector Lanczos, N<=10 through dense ED
    ModelSpec s = cluster(0.3, 0.5);
    s.kind      = ModelKind::Tfim;
    s.u         = 1;
    s.h         = 0.9;
    const auto small = ground_state_finite(s, 10);
    const auto large = ground_state_finite(s, 12);
    CHECK(small.energy / 10 == doctest::Approx(large.energy / 12).epsilon(1e-3));
    const MatrixC h = build_hamiltonian_dense(s, 12);
    CHECK(std::abs((large.state.adjoint() * h * large.state)(0, 0).real() - large.energy) < 1e-8);
}

TEST_CASE("invalid specs") {
    ModelSpec s;
    s.u = 3;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s.u = 2;
    s.J = -1;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    CHECK_THROWS_AS(parse_model_kind("HUBBARD"), ConfigError);
    CHECK_THROWS_AS(build_hamiltonian_dense(cluster(0, 0), 14), ResourceError);
}

TEST_CASE("iTEBD ground states") {
    SUBCASE("cluster point") {
        const auto mps = ground_state_umps(cluster(0, 0), 4);
        CHECK(mps.energy_per_site == doctest::Approx(-1.0).epsilon(1e-6));
        CHECK(mps.canonical_residual() < 1e-10);
    }
    SUBCASE("TFIM against ED") {
        ModelSpec s;
        s.kind = ModelKind::Tfim;
        s.u    = 1;
        s.h    = 2.0;
        const auto mps = ground_state_umps(s, 8);
        // gapped, so N=12 is converged to ~1e-5
        CHECK(mps.energy_per_site == doctest::Approx(-2.127094859).epsilon(1e-5));
        CHECK(mps_energy_per_site(mps) == doctest::Approx(mps.energy_per_site).epsilon(1e-9));
    }
    SUBCASE("chi range") { CHECK_THROWS_AS(ground_state_umps(cluster(0, 0), 65), ConfigError); }
}

TEST_CASE("product state MPS") {
    ModelSpec s = cluster(0, 5.0);
    const auto up = product_state_mps(s, 1.0, 0.0);
    CHECK(mps_average_expectation(up, {pauli('Z')}) == doctest::Approx(1.0));
    CHECK(mps_average_expectation(up, {pauli('X')}) == doctest::Approx(0.0));
}
