#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "bellnav/cache.hpp"
#include "bellnav/config.hpp"
#include "bellnav/report.hpp"

using namespace bellnav;
namespace fs = std::filesystem;

TEST_CASE("config parsing") {
    const auto c = parse_config("# comment\n[model]\nkind = TFIM\nh = 0.7 # trailing\n\noptimizer.eta = 0.02\n");
    CHECK(c.model.kind == ModelKind::Tfim);
    CHECK(c.model.u == 1);
    CHECK(c.model.h == 0.7);
    // sections stick until the next header
    CHECK_THROWS_AS(parse_config("[model]\neta = 1\n"), ConfigError);
    CHECK(parse_config("optimizer.eta = 0.02\n").optimizer.eta == 0.02);

    try {
        parse_config("model.J = abc\n", "x.conf");
        FAIL("expected a ConfigError");
    } catch(const ConfigError &e) {
        CHECK(std::string(e.what()).find("model.J") != std::string::npos);
    }
    try {
        parse_config("optimizer.etta = 1\n");
        FAIL("expected a ConfigError");
    } catch(const ConfigError &e) {
        CHECK(std::string(e.what()).find("optimizer.etta") != std::string::npos);
    }
}

TEST_CASE("config overrides and hash") {
    RunConfig a, b;
    apply_override(b, "model.J=0.3");
    CHECK(a.hash() != b.hash());
    apply_override(a, "model.J = 0.3");
    CHECK(a.hash() == b.hash());
    apply_override(a, "outputs=elsewhere");
    CHECK(a.hash() == b.hash());
    CHECK_THROWS_AS(apply_override(a, "novalue"), ConfigError);
    RunConfig bad;
    bad.sweep_start = 2;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("csv round trip") {
    SweepRecord r;
    r.h         = 0.5;
    r.J         = 0.3;
    r.lambda1   = 1.01;
    r.lambda2   = 0.9;
    r.gap       = 0.11;
    r.converged = true;
    r.settings  = {{angles_to_vector({0.3, 1.2}), angles_to_vector({2.8, 1.2})}, {{0, 0, 1}, {0, 0, 1}}};
    SweepRecord f = r;
    f.h           = 0.6;
    f.lambda1     = std::nan("");
    f.converged   = false;
    const CsvHeader hdr{"abc", 0.05, 0.2, 0.25, 0.1};
    const auto text = records_to_csv({r, f}, hdr);
    CHECK(text.find("config_hash=abc") != std::string::npos);
    CHECK(text == records_to_csv({r, f}, hdr));
    CsvHeader back;
    const auto rows = records_from_csv(text, &back);
    REQUIRE(rows.size() == 2);
    CHECK(back.config_hash == "abc");
    CHECK(rows[0].settings[0].a.x == doctest::Approx(r.settings[0].a.x).epsilon(1e-9));
    CHECK(std::isnan(rows[1].lambda1));
    CHECK(!rows[1].converged);
}

TEST_CASE("svg is well formed and timestamp free") {
    const auto svg = render_svg("t", "h", {{"y", {{"s", {0, 1, 2}, {1, std::nan(""), 3}}}, {1.0}}});
    CHECK(svg.rfind("<?xml", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("polyline") != std::string::npos);
}

TEST_CASE("cache store, hit and corruption") {
    const fs::path dir = fs::temp_directory_path() / "bellnav_unit_cache";
    fs::remove_all(dir);
    const GroundStateCache cache(dir);
    CacheKey key;
    key.chi = 4;
    bool hit = true;
    const auto first = cache.get_or_compute(key, &hit);
    CHECK(!hit);
    const auto second = cache.get_or_compute(key, &hit);
    CHECK(hit);
    CHECK(second.energy_per_site == first.energy_per_site);
    CHECK((second.tensors[1].A[1] - first.tensors[1].A[1]).norm() == 0.0);

    {
        std::fstream f(cache.path_for(key), std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(120);
        f.put('\x5a');
    }
    CHECK(!cache.load(key).has_value());
    cache.get_or_compute(key, &hit);
    CHECK(!hit);

    CacheKey other = key;
    other.spec.h   = 0.1;
    CHECK(cache.path_for(other) != cache.path_for(key));
    fs::remove_all(dir);
}
