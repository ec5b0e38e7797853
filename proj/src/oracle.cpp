#include "bellnav/oracle.hpp"

#include <cmath>

#include <fmt/format.h>

#include "bellnav/optimizer.hpp"

namespace bellnav {

UnitVector random_unit_vector(std::mt19937_64 &rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    while(true) {
        const double x = g(rng), y = g(rng), z = g(rng);
        const double n = std::sqrt(x * x + y * y + z * z);
        if(n > 1e-6) return angles_to_vector(vector_to_angles({x / n, y / n, z / n}));
    }
}

MeasurementSettings random_settings(int u, std::mt19937_64 &rng) {
    MeasurementSettings s;
    for(int k = 0; k < u; ++k) {
        const auto a = random_unit_vector(rng);
        s.push_back({a, random_unit_vector(rng)});
    }
    return s;
}

VectorC random_product_state(int n_sites, std::mt19937_64 &rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    VectorC psi = VectorC::Ones(1);
    for(int k = 0; k < n_sites; ++k) {
        VectorC s(2);
        for(auto &c : s) {
            const double re = g(rng);
            c               = cplx(re, g(rng));
        }
        s.normalize();
        VectorC next(psi.size() * 2);
        for(Eigen::Index i = 0; i < psi.size(); ++i) {
            next[2 * i]     = psi[i] * s[0];
            next[2 * i + 1] = psi[i] * s[1];
        }
        psi = std::move(next);
    }
    return psi;
}

namespace {

std::string describe(const MeasurementSettings &s) {
    std::string out;
    for(const auto &p : s)
        out += fmt::format("[({:.17g},{:.17g},{:.17g}) ({:.17g},{:.17g},{:.17g})]", p.a.x, p.a.y, p.a.z, p.a_prime.x, p.a_prime.y, p.a_prime.z);
    return out;
}

} // namespace

OracleReport run_oracle_battery(int n_sites, std::uint64_t seed, int cases, double tol) {
    if(n_sites < 2 || n_sites > 10) throw ConfigError(fmt::format("oracle-check needs 2 <= n_sites <= 10, got {}", n_sites));
    OracleReport rep;
    std::mt19937_64 rng(seed);

    for(int c = 0; c < cases; ++c) {
        const int u   = (n_sites % 2 == 0 && c % 2 == 1) ? 2 : 1;
        const int chi = 2 + c % 3;
        const auto mps      = random_finite_mps(n_sites, chi, rng);
        const auto settings = random_settings(u, rng);
        const VectorC psi   = finite_mps_to_dense(mps);
        const double dense  = (psi.adjoint() * brute_force_bell_operator(settings, n_sites) * psi)(0, 0).real();
        const double mpo    = mpo_bell_expectation(mps, settings);
        const double sector = bell_value_finite(psi, n_sites, settings);
        rep.max_mpo_dense_deviation    = std::max(rep.max_mpo_dense_deviation, std::abs(mpo - dense));
        rep.max_sector_dense_deviation = std::max(rep.max_sector_dense_deviation, std::abs(sector - dense));
        if(!(std::abs(mpo - dense) <= tol) || !(std::abs(sector - dense) <= tol))
            rep.failures.push_back({"mpo-vs-dense", fmt::format("seed={} case={} N={} chi={} settings={}", seed, c, n_sites, chi, describe(settings)), mpo,
                                    std::max(std::abs(mpo - dense), std::abs(sector - dense)), false});
    }

    {
        FiniteGroundState singlet{2, VectorC::Zero(4), 0.0};
        singlet.state[1] = 1.0 / std::sqrt(2.0);
        singlet.state[2] = -1.0 / std::sqrt(2.0);
        const FiniteChainObjective obj(singlet, 2);
        OptimizerConfig cfg;
        cfg.mode            = SymmetryMode::free();
        cfg.grid_resolution = 8;
        cfg.max_grid_points = 256;
        const auto res = optimize_settings(obj, cfg);
        rep.chsh_value = res.lambda1_per_site;
        if(!(std::abs(res.lambda1_per_site - std::sqrt(2.0)) < 1e-6))
            rep.failures.push_back({"singlet-chsh", fmt::format("settings={}", describe(res.settings)), res.lambda1_per_site,
                                    std::abs(res.lambda1_per_site - std::sqrt(2.0)), false});
    }

    for(int c = 0; c < cases; ++c) {
        const int u         = (n_sites % 2 == 0 && c % 2 == 1) ? 2 : 1;
        const VectorC psi   = random_product_state(n_sites, rng);
        const auto settings = random_settings(u, rng);
        const double v      = std::abs(bell_value_finite(psi, n_sites, settings));
        rep.max_product_value = std::max(rep.max_product_value, v);
        if(!(v <= 1.0 + 1e-9))
            rep.failures.push_back({"product-bound", fmt::format("seed={} case={} N={} settings={}", seed, c, n_sites, describe(settings)), v, v - 1.0, false});
    }
    return rep;
}

} // namespace bellnav
