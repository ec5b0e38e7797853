#include "bellnav/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "bellnav/cache.hpp"
#include "bellnav/config.hpp"
#include "bellnav/oracle.hpp"
#include "bellnav/report.hpp"

namespace bellnav {

namespace {

namespace fs = std::filesystem;

struct Flags {
    std::string config_path;
    std::vector<std::string> overrides;
    int workers = 0;
    bool no_warm_start = false;
    std::string cache_dir;
    std::string out_dir;
    bool verbose = false;
    double h     = std::numeric_limits<double>::quiet_NaN();
    int n_sites  = 6;
    double oracle_tol = 1e-9;
    std::string csv_path;
};

RunConfig resolve(const Flags &f) {
    RunConfig c = f.config_path.empty() ? RunConfig{} : load_config(f.config_path);
    for(const auto &o : f.overrides) apply_override(c, o);
    if(f.workers > 0) c.workers = f.workers;
    if(f.no_warm_start) c.warm_start = false;
    if(!f.cache_dir.empty()) c.cache = f.cache_dir;
    if(!f.out_dir.empty()) c.outputs = f.out_dir;
    else if(const char *env = std::getenv("BELLNAV_OUT_DIR"); env != nullptr && *env != '\0') c.outputs = env;
    if(!std::isnan(f.h)) c.model.h = f.h;
    c.validate();
    return c;
}

CacheKey key_for(const RunConfig &c, double h) {
    CacheKey k{c.model, c.chi, c.schedule};
    k.spec.h = h;
    return k;
}

int cmd_ground_state(const RunConfig &c) {
    const GroundStateCache cache(c.cache);
    bool hit       = false;
    const auto mps = cache.get_or_compute(key_for(c, c.model.h), &hit);
    fmt::print("model={} J={} h={} delta={} u={} chi={}\n", to_string(c.model.kind), c.model.J, c.model.h, c.model.delta, c.model.u, c.chi);
    fmt::print("energy_per_site={:.10f}\n", mps.energy_per_site);
    fmt::print("steps={} last_delta={:.3e} canonical_residual={:.3e} cache={}\n", mps.steps, mps.last_delta, mps.canonical_residual(), hit ? "hit" : "miss");
    return kExitOk;
}

int cmd_optimize(const RunConfig &c) {
    const GroundStateCache cache(c.cache);
    const auto mps = cache.get_or_compute(key_for(c, c.model.h));
    const auto rec = optimize_point(mps, c.optimizer);
    fmt::print("model={} J={} h={} chi={} mode={} relation={}\n", to_string(c.model.kind), c.model.J, c.model.h, c.chi, to_string(c.optimizer.mode.tag),
               to_string(c.optimizer.mode.relation()));
    fmt::print("energy_per_site={:.10f}\n", mps.energy_per_site);
    fmt::print("lambda1_per_site={:.10f}\nlambda2_per_site={:.10f}\ngap={:.10f}\n", rec.lambda1, rec.lambda2, rec.gap);
    fmt::print("converged={} evaluations={}\n", rec.converged ? "true" : "false", rec.evaluations);
    fmt::print("{}", format_angles_pi(rec.settings));

    const fs::path csv = fs::path(c.outputs) / "optimize.csv";
    const CsvHeader header{c.hash(), c.tau_lock, c.tau_jump, c.thresholds.prominence, c.thresholds.gap_depth};
    std::string text = records_to_csv({rec}, header);
    if(fs::exists(csv)) {
        // append only the data row
        text = text.substr(text.find('\n', text.find('\n') + 1) + 1);
        std::ofstream out(csv, std::ios::app | std::ios::binary);
        out << text;
    } else {
        write_text_file(csv, text);
    }
    return rec.converged ? kExitOk : kExitPartial;
}

void emit_sweep_outputs(const fs::path &dir, const std::vector<SweepRecord> &records, const RunConfig *c, const CsvHeader &header, bool write_csv) {
    const auto estimates    = detect_critical_points(records, {header.prominence, header.gap_depth});
    const double step       = records.size() > 1 ? records[1].h - records[0].h : 0.0;
    const auto consolidated = consolidate_critical_points(estimates, step);
    const auto geometry     = classify_geometry(records, header.tau_lock, header.tau_jump);
    if(write_csv) write_text_file(dir / "sweep.csv", records_to_csv(records, header));
    write_text_file(dir / "indicators.svg", indicator_svg(records, consolidated));
    write_text_file(dir / "angles.svg", angle_svg(records, geometry.jump_locations));
    std::string report = c != nullptr ? fmt::format("sweep model={} J={} chi={} config_hash={}\n", to_string(c->model.kind), c->model.J, c->chi, header.config_hash)
                                      : fmt::format("sweep config_hash={}\n", header.config_hash);
    report += geometry_report_text(geometry, estimates, consolidated);
    write_text_file(dir / "report.txt", report);
    fmt::print("{}", report);
}

int cmd_sweep(const RunConfig &c) {
    const auto grid = c.h_grid();
    if(grid.empty()) throw ConfigError("sweep: empty h grid");
    if(grid.size() < 3) throw ConfigError("sweep: need at least three field values");
    const GroundStateCache cache(c.cache);
    SweepOptions opts;
    opts.chi          = c.chi;
    opts.optimizer    = c.optimizer;
    opts.schedule     = c.schedule;
    opts.warm_start   = c.warm_start;
    opts.workers      = c.workers;
    opts.ground_state = [&](const ModelSpec &s) { return cache.get_or_compute(key_for(c, s.h)); };
    opts.progress     = [](const SweepRecord &r) {
        spdlog::info("h={:.4f} lambda1={:.8f} gap={:.3e} evals={}{}", r.h, r.lambda1, r.gap, r.evaluations, r.converged ? "" : " UNCONVERGED");
    };
    const auto records = sweep(c.model, grid, opts);
    const CsvHeader header{c.hash(), c.tau_lock, c.tau_jump, c.thresholds.prominence, c.thresholds.gap_depth};
    emit_sweep_outputs(c.outputs, records, &c, header, true);
    int bad = 0;
    for(const auto &r : records) bad += r.converged ? 0 : 1;
    if(bad > 0) {
        spdlog::warn("{} of {} field points did not converge", bad, records.size());
        return kExitPartial;
    }
    return kExitOk;
}

int cmd_oracle_check(const RunConfig &c, int n_sites, double tol) {
    const auto rep = run_oracle_battery(n_sites, c.seed, 200, tol);
    fmt::print("oracle N={} seed={}\n", n_sites, c.seed);
    fmt::print("max_mpo_dense_deviation={:.3e}\n", rep.max_mpo_dense_deviation);
    fmt::print("max_sector_dense_deviation={:.3e}\n", rep.max_sector_dense_deviation);
    fmt::print("singlet_chsh={:.10f}\n", rep.chsh_value);
    fmt::print("max_product_value={:.12f}\n", rep.max_product_value);
    for(const auto &f : rep.failures) fmt::print("FAIL {} value={:.12g} deviation={:.3e} {}\n", f.suite, f.value, f.deviation, f.detail);
    fmt::print("{}\n", rep.passed() ? "PASS" : "FAIL");
    return rep.passed() ? kExitOk : kExitValidation;
}

int cmd_plot(const RunConfig &c, const std::string &csv_path) {
    const fs::path csv = csv_path.empty() ? fs::path(c.outputs) / "sweep.csv" : fs::path(csv_path);
    CsvHeader header{"", c.tau_lock, c.tau_jump, c.thresholds.prominence, c.thresholds.gap_depth};
    const auto records = records_from_csv(read_text_file(csv), &header);
    if(records.size() < 3) throw ConfigError("plot: need at least three rows");
    emit_sweep_outputs(csv_path.empty() ? fs::path(c.outputs) : csv.parent_path(), records, nullptr, header, false);
    return kExitOk;
}

} // namespace

int run_cli(int argc, char **argv) {
    auto logger = spdlog::stderr_color_mt("bellnav");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);

    CLI::App app{"bellnav: optimal Bell measurements on spin chains"};
    app.require_subcommand(1);
    Flags f;
    app.add_option("--config", f.config_path, "config file (flat key = value)");
    app.add_option("--set", f.overrides, "override, key=value")->take_all();
    app.add_option("--workers", f.workers, "parallel field points in cold-start sweeps");
    app.add_flag("--no-warm-start", f.no_warm_start, "optimize every field point from scratch");
    app.add_option("--cache-dir", f.cache_dir, "ground-state cache directory");
    app.add_option("--out-dir", f.out_dir, "output directory (else $BELLNAV_OUT_DIR, else config)");
    app.add_flag("-v,--verbose", f.verbose, "progress logging");

    auto *gs  = app.add_subcommand("ground-state", "compute or fetch the ground state");
    auto *opt = app.add_subcommand("optimize", "optimal settings at one field value");
    auto *sw  = app.add_subcommand("sweep", "field sweep with indicators and geometry report");
    auto *orc = app.add_subcommand("oracle-check", "cross-check against dense matrices");
    auto *plt = app.add_subcommand("plot", "re-render SVG plots from a sweep CSV");
    for(auto *s : {gs, opt}) s->add_option("--field", f.h, "field (default: model.h)");
    orc->add_option("--n", f.n_sites, "chain length, <= 10");
    orc->add_option("--tol", f.oracle_tol, "MPO-vs-dense tolerance");
    plt->add_option("--csv", f.csv_path, "sweep CSV (default: <out-dir>/sweep.csv)");
    app.fallthrough();

    try {
        app.parse(argc, argv);
    } catch(const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }
    if(f.verbose) spdlog::set_level(spdlog::level::info);

    try {
        const RunConfig c = resolve(f);
        if(*gs) return cmd_ground_state(c);
        if(*opt) return cmd_optimize(c);
        if(*sw) return cmd_sweep(c);
        if(*orc) return cmd_oracle_check(c, f.n_sites, f.oracle_tol);
        if(*plt) return cmd_plot(c, f.csv_path);
    } catch(const ConfigError &e) {
        fmt::print(stderr, "configuration error: {}\n", e.what());
        return kExitConfig;
    } catch(const std::exception &e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kExitRuntime;
    }
    return kExitConfig;
}

} // namespace bellnav
