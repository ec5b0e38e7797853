#include <doctest.h>

#include <cmath>
#include <random>

#include "bellnav/bellop.hpp"
#include "bellnav/linalg.hpp"
#include "bellnav/optimizer.hpp"
#include "bellnav/oracle.hpp"

#include <unsupported/Eigen/KroneckerProduct>

using namespace bellnav;

namespace {
const UnitVector X{1, 0, 0}, Y{0, 1, 0}, Z{0, 0, 1};

ModelSpec cluster(double J, double h) {
    ModelSpec s;
    s.J = J;
    s.h = h;
    return s;
}
} // namespace

TEST_CASE("two-site operator is CHSH/2") {
    std::mt19937_64 rng(3);
    const auto s = random_settings(2, rng);
    const MatrixC f = brute_force_bell_operator(s, 2);
    auto op = [](const UnitVector &v) { return MatrixC(setting_operator(v)); };
    const MatrixC a = op(s[0].a), ap = op(s[0].a_prime), b = op(s[1].a), bp = op(s[1].a_prime);
    const MatrixC chsh = 0.5 * (Eigen::kroneckerProduct(a, MatrixC(b + bp)) + Eigen::kroneckerProduct(ap, MatrixC(b - bp)));
    CHECK((f - chsh).norm() < 1e-12);
}

TEST_CASE("contraction paths agree on random states") {
    std::mt19937_64 rng(11);
    for(int n : {3, 4, 5}) {
        for(int c = 0; c < 10; ++c) {
            const auto mps      = random_finite_mps(n, 3, rng);
            const auto settings = random_settings(1, rng);
            const VectorC psi   = finite_mps_to_dense(mps);
            const double dense  = (psi.adjoint() * brute_force_bell_operator(settings, n) * psi)(0, 0).real();
            CHECK(std::abs(mpo_bell_expectation(mps, settings) - dense) < 1e-10);
            CHECK(std::abs(bell_value_finite(psi, n, settings) - dense) < 1e-10);
        }
    }
}

TEST_CASE("GHZ Mermin value") {
    VectorC ghz = VectorC::Zero(8);
    ghz[0] = ghz[7] = 1.0 / std::sqrt(2.0);
    // x and y alone give zero here; the optimum over one shared pair reaches 2
    CHECK(std::abs(bell_value_finite(ghz, 3, {{X, Y}})) < 1e-12);
    const FiniteChainObjective obj({3, ghz, 0.0}, 1);
    OptimizerConfig c;
    c.mode            = SymmetryMode::free();
    c.grid_resolution = 8;
    const auto r = optimize_settings(obj, c);
    CHECK(r.lambda1_per_site == doctest::Approx(2.0).epsilon(1e-7));
}

TEST_CASE("product states never exceed 1") {
    std::mt19937_64 rng(5);
    for(int c = 0; c < 50; ++c) {
        const VectorC psi = random_product_state(4, rng);
        CHECK(std::abs(bell_value_finite(psi, 4, random_settings(2, rng))) <= 1.0 + 1e-12);
    }
}

TEST_CASE("brute force guard") {
    CHECK_THROWS_AS(brute_force_bell_operator({{Z, Z}}, 11), ResourceError);
}

TEST_CASE("mixed transfer matrix") {
    const auto mps = ground_state_umps(cluster(0.0, 1.2), 4);
    std::mt19937_64 rng(2);
    const auto settings = random_settings(2, rng);
    const auto m        = mixed_transfer_matrix(mps, settings);

    SUBCASE("full spectrum is sector plus conjugate") {
        auto full = eigenvalues(m.full);
        auto sec  = eigenvalues(m.sector);
        CHECK(std::abs(std::abs(full[0]) - std::abs(sec[0])) < 1e-10);
    }
    SUBCASE("matrix-free map matches the dense sector") {
        const SectorTransfer tr(mps);
        const auto fast = tr.leading(settings, 2);
        const auto sec  = eigenvalues(m.sector);
        CHECK(std::abs(fast[0] - sec[0]) < 1e-9);
        CHECK(std::abs(std::abs(fast[1]) - std::abs(sec[1])) < 1e-9);
    }
    SUBCASE("quantum bound") {
        for(int c = 0; c < 10; ++c) {
            const SectorTransfer tr(mps);
            CHECK(tr.lambda1_per_site(random_settings(2, rng)) <= std::sqrt(2.0) + 1e-9);
        }
    }
    SUBCASE("identity settings give the norm") {
        const auto spec = transfer_spectrum(mixed_transfer_matrix(mps, {{Z, Z}, {Z, Z}}));
        // a = a' = z makes the sector the plain Z-twisted transfer matrix, |lambda1| <= 1
        CHECK(spec.lambda1_per_site <= 1.0 + 1e-9);
    }
}

TEST_CASE("spectrum ordering and gap") {
    const auto sp = spectrum_from_eigenvalues({cplx(0.5, 0), cplx(-1.0, 0), cplx(0.9, 0.1)}, 2);
    CHECK(std::abs(sp.lambda1) == doctest::Approx(1.0));
    CHECK(sp.lambda1_per_site == doctest::Approx(1.0));
    CHECK(sp.gap == doctest::Approx(sp.lambda1_per_site - sp.lambda2_per_site));
}
