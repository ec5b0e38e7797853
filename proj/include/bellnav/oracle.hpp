#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "bellnav/bellop.hpp"

namespace bellnav {

UnitVector random_unit_vector(std::mt19937_64 &rng);
MeasurementSettings random_settings(int u, std::mt19937_64 &rng);
/// Normalized product state, one random spinor per site.
VectorC random_product_state(int n_sites, std::mt19937_64 &rng);

struct OracleCase {
    std::string suite;
    std::string detail; // replayable description
    double value     = 0.0;
    double deviation = 0.0;
    bool passed      = true;
};

struct OracleReport {
    double max_mpo_dense_deviation = 0.0;
    double max_sector_dense_deviation = 0.0;
    double chsh_value               = 0.0;
    double max_product_value        = 0.0;
    std::vector<OracleCase> failures;
    [[nodiscard]] bool passed() const { return failures.empty(); }
};

/// MPO-vs-dense equivalence on random MPS, the singlet CHSH optimum and the
/// product-state bound, all at `n_sites` (<= 10). `tol` gates the equivalence check.
OracleReport run_oracle_battery(int n_sites, std::uint64_t seed, int cases = 200, double tol = 1e-9);

} // namespace bellnav
