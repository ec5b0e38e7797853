// Acceptance battery: one PASS/FAIL line per criterion, tolerances pinned below.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <memory>
#include <random>
#include <set>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "bellnav/cache.hpp"
#include "bellnav/config.hpp"
#include "bellnav/oracle.hpp"
#include "bellnav/report.hpp"

using namespace bellnav;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
    int id;
    bool pass;
    std::string detail;
};

std::vector<Outcome> outcomes;

void report(int id, bool pass, const std::string &detail) {
    outcomes.push_back({id, pass, detail});
    fmt::print("CRITERION {} {} {}\n", id, pass ? "PASS" : "FAIL", detail);
    std::fflush(stdout);
}

struct Env {
    fs::path cache_dir;
    fs::path out_dir;
    fs::path config_dir;
};

RunConfig config_for(const Env &env, const std::string &name) {
    auto c  = load_config(env.config_dir / name);
    c.cache = env.cache_dir.string();
    c.validate();
    return c;
}

struct SweepRun {
    std::vector<SweepRecord> records;
    std::vector<CriticalEstimate> estimates;
    std::vector<double> consolidated;
    GeometryReport geometry;
    double seconds = 0.0;
    int cached     = 0; // ground states served from the cache
};

SweepRun run_sweep(const Env &env, const RunConfig &c, const std::string &tag) {
    SweepRun run;
    const GroundStateCache cache(c.cache);
    SweepOptions opts;
    opts.chi          = c.chi;
    opts.optimizer    = c.optimizer;
    opts.schedule     = c.schedule;
    opts.warm_start   = c.warm_start;
    opts.ground_state = [&](const ModelSpec &s) {
        CacheKey key{c.model, c.chi, c.schedule};
        key.spec.h = s.h;
        bool hit   = false;
        auto mps   = cache.get_or_compute(key, &hit);
        run.cached += hit ? 1 : 0;
        return mps;
    };
    const auto t0 = Clock::now();
    run.records   = sweep(c.model, c.h_grid(), opts);
    run.seconds   = seconds_since(t0);
    run.estimates    = detect_critical_points(run.records, c.thresholds);
    run.consolidated = consolidate_critical_points(run.estimates, c.sweep_step);
    run.geometry     = classify_geometry(run.records, c.tau_lock, c.tau_jump);

    const fs::path dir = env.out_dir / tag;
    const CsvHeader header{c.hash(), c.tau_lock, c.tau_jump, c.thresholds.prominence, c.thresholds.gap_depth};
    write_text_file(dir / "sweep.csv", records_to_csv(run.records, header));
    write_text_file(dir / "indicators.svg", indicator_svg(run.records, run.consolidated));
    write_text_file(dir / "angles.svg", angle_svg(run.records, run.geometry.jump_locations));
    write_text_file(dir / "report.txt", geometry_report_text(run.geometry, run.estimates, run.consolidated));
    return run;
}

// 1. MPO contraction against dense brute force
void criterion1() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(1001);
    double worst = 0.0;
    int cases    = 0;
    for(int n : {4, 6, 8}) {
        const int count = n == 8 ? 66 : 67;
        for(int c = 0; c < count; ++c, ++cases) {
            const int u         = c % 2 == 0 ? 1 : 2;
            const auto mps      = random_finite_mps(n, 2 + c % 4, rng);
            const auto settings = random_settings(u, rng);
            const VectorC psi   = finite_mps_to_dense(mps);
            const double dense  = (psi.adjoint() * brute_force_bell_operator(settings, n) * psi)(0, 0).real();
            worst               = std::max(worst, std::abs(mpo_bell_expectation(mps, settings) - dense));
        }
    }
    const double t = seconds_since(t0);
    report(1, worst < 1e-9 && t < 120.0, fmt::format("cases={} max_dev={:.3e} (tol 1e-9) runtime={:.1f}s (limit 120s)", cases, worst, t));
}

// 2. Bound saturation
void criterion2() {
    OptimizerConfig c;
    c.mode            = SymmetryMode::free();
    c.grid_resolution = 8;
    c.max_grid_points = 256;

    FiniteGroundState singlet{2, VectorC::Zero(4), 0.0};
    singlet.state[1]  = 1.0 / std::sqrt(2.0);
    singlet.state[2]  = -1.0 / std::sqrt(2.0);
    const double chsh = optimize_settings(FiniteChainObjective(singlet, 2), c).lambda1_per_site;

    FiniteGroundState ghz{3, VectorC::Zero(8), 0.0};
    ghz.state[0]        = 1.0 / std::sqrt(2.0);
    ghz.state[7]        = 1.0 / std::sqrt(2.0);
    const double mermin = optimize_settings(FiniteChainObjective(ghz, 1), c).lambda1_per_site;

    std::mt19937_64 rng(2002);
    double prod = 0.0;
    for(int i = 0; i < 200; ++i) {
        const int n = 2 + i % 7;
        const int u = (n % 2 == 0 && i % 2 == 1) ? 2 : 1;
        prod        = std::max(prod, std::abs(bell_value_finite(random_product_state(n, rng), n, random_settings(u, rng))));
    }
    const bool ok = std::abs(chsh - std::sqrt(2.0)) < 1e-6 && std::abs(mermin - 2.0) < 1e-6 && prod <= 1.0 + 1e-9;
    report(2, ok, fmt::format("singlet={:.10f} (sqrt2 +-1e-6) ghz3={:.10f} (2 +-1e-6) product_max={:.12f} (<= 1+1e-9)", chsh, mermin, prod));
}

// 3. Gradient accuracy and monotone traces
void criterion3(const Env &env) {
    const auto t0 = Clock::now();
    RunConfig cfg = config_for(env, "cluster_j03.conf");
    CacheKey key{cfg.model, 8, cfg.schedule};
    key.spec.h     = 0.8;
    const auto mps = GroundStateCache(cfg.cache).get_or_compute(key);
    const TransferObjective obj(mps, cfg.model.u);
    const auto mode = cfg.optimizer.mode;

    std::mt19937_64 rng(3003);
    std::uniform_real_distribution<double> th(0.1, kPi - 0.1), ph(0.0, 2 * kPi);
    double worst   = 0.0;
    bool monotone  = true;
    int traces     = 0;
    OptimizerConfig oc = cfg.optimizer;
    for(int i = 0; i < 20; ++i) {
        std::vector<BlochAngles> start;
        for(int p = 0; p < mode.reduced_count(cfg.model.u); ++p) start.push_back({th(rng), ph(rng)});
        const auto x     = flatten(start);
        const double s   = oc.fd_step;
        const auto g1    = fd_gradient(obj, mode, x, s);
        const auto g2    = fd_gradient(obj, mode, x, 2 * s);
        double err = 0.0, norm = 0.0;
        for(std::size_t k = 0; k < x.size(); ++k) {
            const double rich = (4.0 * g1[k] - g2[k]) / 3.0;
            err               = std::max(err, std::abs(g1[k] - rich));
            norm              = std::max(norm, std::abs(rich));
        }
        worst = std::max(worst, err / std::max(norm, 1e-12));
        if(i < 5) {
            const auto r = gradient_ascent(obj, start, oc);
            ++traces;
            for(std::size_t k = 1; k < r.trace.size(); ++k) monotone = monotone && r.trace[k].second > r.trace[k - 1].second;
        }
    }
    // the sweep-style optimizer runs also have to be monotone
    const auto full = optimize_settings(obj, oc);
    for(std::size_t k = 1; k < full.trace.size(); ++k) monotone = monotone && full.trace[k].second > full.trace[k - 1].second;
    ++traces;
    const double t = seconds_since(t0);
    report(3, worst < 1e-4 && monotone && t < 300.0,
           fmt::format("max_rel_grad_err={:.3e} (tol 1e-4, max-norm) traces={} monotone={} runtime={:.1f}s (limit 300s)", worst, traces, monotone, t));
}

// 4. Optimizer against an exhaustive 64 x 64 grid on small chains
void criterion4() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(4004);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    double worst_shortfall = -1e300;
    std::string where;
    for(int c = 0; c < 10; ++c) {
        ModelSpec spec;
        spec.kind = std::array{ModelKind::ClusterIsing, ModelKind::Tfim, ModelKind::Xxz}[static_cast<std::size_t>(c % 3)];
        spec.u    = ModelSpec::default_unit_cell(spec.kind);
        spec.J    = spec.kind == ModelKind::ClusterIsing ? 0.5 * uni(rng) : 0.0;
        spec.h    = 2.0 * uni(rng);
        spec.delta = spec.kind == ModelKind::Xxz ? -1.0 + 2.0 * uni(rng) : 1.0;
        const int n = c % 2 == 0 ? 8 : 6;
        const FiniteChainObjective obj(ground_state_finite(spec, n), spec.u);

        OptimizerConfig oc;
        oc.mode = spec.u == 2 ? SymmetryMode::axis_locked({2}) : SymmetryMode::polar();
        const double best_opt = optimize_settings(obj, oc).lambda1_per_site;

        double best_grid = -1e300;
        for(int i = 0; i < 64; ++i)
            for(int j = 0; j < 64; ++j) {
                const std::vector<BlochAngles> a{{FundamentalDomain::theta_max * i / 63.0, FundamentalDomain::phi_max * j / 63.0}};
                best_grid = std::max(best_grid, obj.value(expand_settings(a, oc.mode, spec.u)));
            }
        const double shortfall = best_grid - best_opt;
        if(shortfall > worst_shortfall) {
            worst_shortfall = shortfall;
            where           = fmt::format("{} N={} J={:.3f} h={:.3f} delta={:.3f}", to_string(spec.kind), n, spec.J, spec.h, spec.delta);
        }
    }
    const double t = seconds_since(t0);
    report(4, worst_shortfall <= 1e-4 && t < 600.0,
           fmt::format("max(grid - optimizer)={:.3e} (tol 1e-4) worst_case=[{}] runtime={:.1f}s (limit 600s)", worst_shortfall, where, t));
}

const CriticalEstimate *strongest(const std::vector<CriticalEstimate> &est, CriticalMethod m) {
    const CriticalEstimate *best = nullptr;
    for(const auto &e : est)
        if(e.method == m && (best == nullptr || e.strength > best->strength)) best = &e;
    return best;
}

// 5 and 6 share the J = 0 sweep
void criteria5and6(const Env &env) {
    const RunConfig cfg = config_for(env, "cluster_j0.conf");
    const auto run      = run_sweep(env, cfg, "cluster_j0");

    const auto *chi = strongest(run.estimates, CriticalMethod::Susceptibility);
    const auto *gap = strongest(run.estimates, CriticalMethod::Gap);
    std::vector<double> gaps;
    for(const auto &r : run.records)
        if(!std::isnan(r.gap)) gaps.push_back(r.gap);
    std::sort(gaps.begin(), gaps.end());
    const double median = gaps.empty() ? NAN : gaps[gaps.size() / 2];
    double gap_at       = NAN;
    if(gap != nullptr)
        for(const auto &r : run.records)
            if(std::abs(r.h - gap->h) < 1e-9) gap_at = r.gap;
    const bool chi_ok   = chi != nullptr && std::abs(chi->h - 1.0) <= 0.02;
    const bool gap_ok   = gap != nullptr && std::abs(gap->h - 1.0) <= 0.02;
    const bool depth_ok = gap != nullptr && gap_at < 0.25 * median;
    const bool time_ok  = run.seconds < 1800.0;
    report(5, chi_ok && gap_ok && depth_ok && time_ok,
           fmt::format("susceptibility_peak={} gap_min={} gap_at_min={:.3e} median_gap={:.3e} (h=1+-0.02, gap<25% median) runtime={:.0f}s "
                       "(limit 1800s, cached ground states {}/{})",
                       chi ? fmt::format("{:.2f}", chi->h) : "none", gap ? fmt::format("{:.2f}", gap->h) : "none", gap_at, median, run.seconds,
                       run.cached, run.records.size()));

    // Settings are only defined up to exact images, so a pattern holds at h if the
    // recorded pair or a verified image of it satisfies it; raw counts are printed too.
    auto polar = [](const SettingPair &p) {
        const auto a = vector_to_angles(p.a), ap = vector_to_angles(p.a_prime);
        const bool phi_defined = std::sin(a.theta) > 1e-3 && std::sin(ap.theta) > 1e-3;
        return std::abs(ap.theta - (kPi - a.theta)) <= 0.05 && (!phi_defined || circular_distance(ap.phi, a.phi) <= 0.05);
    };
    auto azimuthal = [](const SettingPair &p) {
        const auto a = vector_to_angles(p.a), ap = vector_to_angles(p.a_prime);
        const bool phi_defined = std::sin(a.theta) > 1e-3 && std::sin(ap.theta) > 1e-3;
        return std::abs(ap.theta - a.theta) <= 0.05 && (!phi_defined || circular_distance(ap.phi, 2 * kPi - a.phi) <= 0.05);
    };
    const GroundStateCache cache(cfg.cache);
    auto holds_up_to_images = [&](const SweepRecord &r, const std::function<bool(const SettingPair &)> &pattern) {
        if(pattern(r.settings[0])) return true;
        std::vector<MeasurementSettings> cand;
        for(const auto &img : symmetry_images(r.settings, cfg.optimizer.mode)) {
            cand.push_back(img);
            for(int which = 0; which < 2; ++which) {
                auto s       = img;
                UnitVector &v = which == 0 ? s[0].a : s[0].a_prime;
                v            = -v;
                cand.push_back(s);
            }
        }
        std::unique_ptr<TransferObjective> obj;
        for(const auto &s : cand) {
            if(!pattern(s[0])) continue;
            if(!obj) {
                CacheKey key{cfg.model, cfg.chi, cfg.schedule};
                key.spec.h = r.h;
                obj        = std::make_unique<TransferObjective>(cache.get_or_compute(key), cfg.model.u);
            }
            if(std::abs(obj->value(s) - r.lambda1) <= 1e-9) return true;
        }
        return false;
    };

    int polar_bad = 0, polar_n = 0, az_bad = 0, az_n = 0, polar_raw = 0, az_raw = 0;
    double lock_xy = 0.0;
    std::string first_bad;
    for(const auto &r : run.records) {
        if(r.settings.size() < 2) continue;
        lock_xy = std::max({lock_xy, std::abs(r.settings[1].a.x), std::abs(r.settings[1].a.y), std::abs(r.settings[1].a_prime.x),
                            std::abs(r.settings[1].a_prime.y)});
        if(r.h <= 0.95 + 1e-9) {
            ++polar_n;
            polar_raw += polar(r.settings[0]) ? 1 : 0;
            if(!holds_up_to_images(r, polar)) {
                ++polar_bad;
                if(first_bad.empty()) first_bad = fmt::format("h={:.2f}", r.h);
            }
        } else if(r.h >= 1.05 - 1e-9) {
            ++az_n;
            az_raw += azimuthal(r.settings[0]) ? 1 : 0;
            if(!holds_up_to_images(r, azimuthal)) {
                ++az_bad;
                if(first_bad.empty()) first_bad = fmt::format("h={:.2f}", r.h);
            }
        }
    }
    report(6, polar_bad == 0 && az_bad == 0 && lock_xy < 1e-3 && polar_n > 0 && az_n > 0,
           fmt::format("h<=0.95 polar-mirror pattern {}/{} ok (raw {}), h>=1.05 azimuthal-mirror pattern {}/{} ok (raw {}) (tol 0.05 rad, up to "
                       "images exact to 1e-9), locked |x|,|y| max={:.1e} (tol 1e-3){}",
                       polar_n - polar_bad, polar_n, polar_raw, az_n - az_bad, az_n, az_raw, lock_xy,
                       first_bad.empty() ? "" : " first_mismatch " + first_bad));
}

/// Interior local maxima of a series, largest first.
std::vector<double> series_peaks(const std::vector<double> &h, const std::vector<double> &v) {
    std::vector<std::pair<double, double>> p;
    for(std::size_t i = 1; i + 1 < v.size(); ++i)
        if(v[i] > v[i - 1] && v[i] >= v[i + 1]) p.emplace_back(v[i], h[i]);
    std::sort(p.begin(), p.end(), [](auto a, auto b) { return a.first > b.first; });
    std::vector<double> out;
    for(auto [val, at] : p) out.push_back(at);
    return out;
}

// 7. J = 0.3: locked azimuths and two transitions
void criterion7(const Env &env) {
    const RunConfig cfg = config_for(env, "cluster_j03.conf");
    const auto run      = run_sweep(env, cfg, "cluster_j03");

    bool phi_locked = true, theta_rot = true;
    int phi_n = 0, theta_n = 0;
    double phi_drift = 0.0;
    for(const auto &t : run.geometry.angles) {
        if(t.samples == 0) continue;
        const int site = t.op_index / 2 + 1;
        if(cfg.optimizer.mode.is_locked(site)) continue; // pinned to the pole, nothing to classify
        if(t.is_phi) {
            ++phi_n;
            phi_drift  = std::max(phi_drift, t.max_drift);
            phi_locked = phi_locked && t.verdict == AngleVerdict::Locked;
        } else {
            ++theta_n;
            theta_rot = theta_rot && t.verdict == AngleVerdict::Rotating && t.jumps.empty();
        }
    }

    const auto grid = cfg.h_grid();
    ModelSpec spec  = cfg.model;
    const auto fid  = fidelity_susceptibility(spec, 12, grid);
    auto ed_peaks   = series_peaks(grid, fid);
    if(ed_peaks.size() > 2) ed_peaks.resize(2);
    std::sort(ed_peaks.begin(), ed_peaks.end());

    bool matched = run.consolidated.size() == 2 && ed_peaks.size() == 2;
    if(matched)
        for(int i = 0; i < 2; ++i) matched = matched && std::abs(run.consolidated[static_cast<std::size_t>(i)] - ed_peaks[static_cast<std::size_t>(i)]) <= 0.03;
    std::string found, ed;
    for(double h : run.consolidated) found += fmt::format("{:.2f} ", h);
    for(double h : ed_peaks) ed += fmt::format("{:.2f} ", h);
    report(7, phi_locked && phi_n > 0 && theta_rot && theta_n > 0 && matched,
           fmt::format("phi LOCKED={} (max drift {:.4f} < 0.05) theta ROTATING without jumps={} critical=[{}] ed_n12=[{}] (exactly two, each within "
                       "0.03) free-fermion=[{:.2f} {:.2f}] runtime={:.0f}s",
                       phi_locked, phi_drift, theta_rot, found, ed, 1.0 - spec.J, 1.0 + spec.J, run.seconds));
}

// 8. TFIM and XXZ qualitative verdicts
void criterion8(const Env &env) {
    const auto tfim = run_sweep(env, config_for(env, "tfim.conf"), "tfim");
    const auto xxz  = run_sweep(env, config_for(env, "xxz.conf"), "xxz");
    bool tfim_locked = true;
    int tfim_phi = 0, xxz_rot = 0;
    for(const auto &t : tfim.geometry.angles)
        if(t.is_phi && t.samples > 0) {
            ++tfim_phi;
            tfim_locked = tfim_locked && t.verdict == AngleVerdict::Locked;
        }
    for(const auto &t : xxz.geometry.angles)
        if(t.samples > 0 && t.verdict == AngleVerdict::Rotating) ++xxz_rot;
    report(8, tfim_locked && tfim_phi > 0 && xxz_rot > 0,
           fmt::format("tfim phi LOCKED={} ({} tracks) xxz ROTATING tracks={} runtime={:.0f}s+{:.0f}s", tfim_locked, tfim_phi, xxz_rot, tfim.seconds,
                       xxz.seconds));
}

// 9. Determinism: byte-identical CSV across repeated runs (the CLI exit codes are exercised by the cli test)
void criterion9(const Env &env) {
    RunConfig cfg      = config_for(env, "cluster_j03.conf");
    cfg.chi            = 8;
    cfg.sweep_start    = 0.6;
    cfg.sweep_stop     = 0.9;
    cfg.sweep_step     = 0.1;
    const auto a       = run_sweep(env, cfg, "determinism_a");
    const auto b       = run_sweep(env, cfg, "determinism_b");
    const auto ta      = read_text_file(env.out_dir / "determinism_a" / "sweep.csv");
    const auto tb      = read_text_file(env.out_dir / "determinism_b" / "sweep.csv");
    const bool same    = ta == tb && !ta.empty() && a.records.size() == b.records.size();
    report(9, same, fmt::format("repeated sweep CSV byte-identical={} ({} bytes, {} rows)", same, ta.size(), a.records.size()));
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"bellnav acceptance battery"};
    Env env;
    std::string cache = "acceptance-cache", out = "acceptance-out";
    std::string configs = BELLNAV_CONFIG_DIR;
    std::vector<int> only;
    app.add_option("--cache-dir", cache);
    app.add_option("--out-dir", out);
    app.add_option("--config-dir", configs);
    app.add_option("--only", only, "run just these criteria");
    CLI11_PARSE(app, argc, argv);
    env.cache_dir  = cache;
    env.out_dir    = out;
    env.config_dir = configs;
    spdlog::set_level(spdlog::level::warn);

    const std::set<int> sel(only.begin(), only.end());
    auto want = [&](int id) { return sel.empty() || sel.count(id) > 0; };
    auto guarded = [&](std::initializer_list<int> ids, auto &&fn) {
        bool any = false;
        for(int id : ids) any = any || want(id);
        if(!any) return;
        try {
            fn();
        } catch(const std::exception &e) {
            for(int id : ids)
                if(want(id)) report(id, false, fmt::format("exception: {}", e.what()));
        }
    };

    guarded({1}, [] { criterion1(); });
    guarded({2}, [] { criterion2(); });
    guarded({3}, [&] { criterion3(env); });
    guarded({4}, [] { criterion4(); });
    guarded({5, 6}, [&] { criteria5and6(env); });
    guarded({7}, [&] { criterion7(env); });
    guarded({8}, [&] { criterion8(env); });
    guarded({9}, [&] { criterion9(env); });

    int failed = 0;
    for(const auto &o : outcomes) failed += o.pass ? 0 : 1;
    fmt::print("SUMMARY {}/{} criteria passed\n", outcomes.size() - failed, outcomes.size());
    return failed == 0 ? 0 : 1;
}
