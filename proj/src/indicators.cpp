#include "bellnav/indicators.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <numeric>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace bellnav {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double settings_distance(const MeasurementSettings &a, const MeasurementSettings &b) {
    double d = 0.0;
    for(std::size_t k = 0; k < std::min(a.size(), b.size()); ++k) {
        auto sq = [](const UnitVector &p, const UnitVector &q) {
            return (p.x - q.x) * (p.x - q.x) + (p.y - q.y) * (p.y - q.y) + (p.z - q.z) * (p.z - q.z);
        };
        d += sq(a[k].a, b[k].a) + sq(a[k].a_prime, b[k].a_prime);
    }
    return d;
}

bool same_settings(const MeasurementSettings &a, const MeasurementSettings &b, double tol) {
    return a.size() == b.size() && settings_distance(a, b) <= tol * tol;
}

SweepRecord failed_record(const ModelSpec &spec, std::string why) {
    SweepRecord r;
    r.h          = spec.h;
    r.J          = spec.J;
    r.lambda1    = kNaN;
    r.lambda2    = kNaN;
    r.gap        = kNaN;
    r.dlambda_dh = kNaN;
    r.converged  = false;
    r.error      = std::move(why);
    r.energy_per_site = kNaN;
    return r;
}

/// Moves the record to the symmetry image nearest the previous optimum.
/// Negating a single operator is tried too: it is not a symmetry in general but
/// becomes exact at degenerate points (e.g. a site locked with a = a'), and the
/// value check below rejects it everywhere else.
void fix_gauge(SweepRecord &rec, const SweepRecord &prev, const Objective &obj, const SymmetryMode &mode) {
    if(prev.settings.size() != rec.settings.size()) return;
    const std::size_t u = rec.settings.size();
    std::vector<std::pair<double, MeasurementSettings>> cand;
    const double own = settings_distance(rec.settings, prev.settings);
    auto consider = [&](const MeasurementSettings &s) {
        const auto back = expand_settings(reduce_settings(s, mode), mode, static_cast<int>(u));
        if(!same_settings(back, s, 1e-9)) return;
        const double d = settings_distance(s, prev.settings);
        if(d + 1e-12 < own) cand.emplace_back(d, s);
    };
    for(const auto &img : symmetry_images(rec.settings, mode)) {
        consider(img);
        for(std::size_t k = 0; k < u; ++k)
            for(int which = 0; which < 2; ++which) {
                MeasurementSettings s = img;
                UnitVector &v         = which == 0 ? s[k].a : s[k].a_prime;
                v                     = angles_to_vector(vector_to_angles(-v));
                consider(s);
            }
    }
    std::stable_sort(cand.begin(), cand.end(), [](const auto &x, const auto &y) { return x.first < y.first; });
    for(const auto &[d, s] : cand) {
        if(std::abs(obj.value(s) - rec.lambda1) > 1e-9) continue; // only exact images
        rec.settings = s;
        break;
    }
    rec.reduced_angles = reduce_settings(rec.settings, mode);
}

} // namespace

std::vector<double> uniform_grid(double start, double stop, double step) {
    if(!(step > 0.0)) throw ConfigError("sweep.step must be positive");
    if(stop < start) throw ConfigError("sweep.stop must not be below sweep.start");
    const auto n = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
    std::vector<double> h;
    h.reserve(static_cast<std::size_t>(n));
    for(long i = 0; i < n; ++i) h.push_back(start + double(i) * step);
    return h;
}

std::vector<MeasurementSettings> symmetry_images(const MeasurementSettings &settings, const SymmetryMode &mode) {
    const int u = static_cast<int>(settings.size());
    std::vector<MeasurementSettings> out;
    // global: swap a<->a', y -> -y, (x,y) -> -(x,y), z -> -z; per site: (a,a') -> -(a,a')
    const int global = 16;
    const int local  = 1 << u;
    for(int g = 0; g < global; ++g) {
        for(int l = 0; l < local; ++l) {
            MeasurementSettings s = settings;
            for(int k = 0; k < u; ++k) {
                auto &p = s[static_cast<std::size_t>(k)];
                if(g & 1) std::swap(p.a, p.a_prime);
                for(UnitVector *v : {&p.a, &p.a_prime}) {
                    if(g & 2) v->y = -v->y;
                    if(g & 4) {
                        v->x = -v->x;
                        v->y = -v->y;
                    }
                    if(g & 8) v->z = -v->z;
                    if(l & (1 << k)) *v = -*v;
                    *v = angles_to_vector(vector_to_angles(*v));
                }
            }
            // stay inside the mode family
            const auto back = expand_settings(reduce_settings(s, mode), mode, u);
            if(!same_settings(back, s, 1e-9)) continue;
            bool dup = false;
            for(const auto &o : out) dup = dup || same_settings(o, s, 1e-12);
            if(!dup) out.push_back(std::move(s));
        }
    }
    return out;
}

SweepRecord optimize_point(const UniformMPS &mps, const OptimizerConfig &config, const std::vector<BlochAngles> *warm) {
    const int u = mps.spec.u;
    const TransferObjective obj(mps, u);
    std::vector<std::vector<BlochAngles>> extra;
    if(warm != nullptr && !warm->empty()) extra.push_back(*warm);
    const auto res = optimize_settings(obj, config, extra);

    SweepRecord rec;
    rec.h               = mps.spec.h;
    rec.J               = mps.spec.J;
    rec.settings        = res.settings;
    rec.reduced_angles  = res.reduced_angles;
    rec.converged       = res.converged;
    rec.energy_per_site = mps.energy_per_site;
    rec.evaluations     = res.evaluations;
    const auto spec     = obj.transfer().spectrum(res.settings, 6);
    rec.lambda1         = spec.lambda1_per_site;
    rec.lambda2         = spec.lambda2_per_site;
    rec.gap             = rec.lambda1 - rec.lambda2;
    rec.top             = spec.top;
    if(!res.converged) rec.error = fmt::format("ascent stopped after {} iterations", res.iterations);
    return rec;
}

std::vector<SweepRecord> sweep(const ModelSpec &model, const std::vector<double> &h_values, const SweepOptions &options) {
    options.optimizer.validate();
    options.optimizer.mode.validate(model.u);
    std::function<UniformMPS(const ModelSpec &)> ground = options.ground_state;
    if(!ground) ground = [&](const ModelSpec &s) { return ground_state_umps(s, options.chi, options.schedule); };

    auto solve = [&](double h, const std::vector<BlochAngles> *warm) -> std::pair<SweepRecord, std::unique_ptr<UniformMPS>> {
        ModelSpec spec = model;
        spec.h         = h;
        try {
            auto mps = std::make_unique<UniformMPS>(ground(spec));
            auto rec = optimize_point(*mps, options.optimizer, warm);
            return {std::move(rec), std::move(mps)};
        } catch(const ConfigError &) {
            throw;
        } catch(const std::exception &e) {
            spdlog::warn("h={:.6f}: {}", h, e.what());
            return {failed_record(spec, e.what()), nullptr};
        }
    };

    std::vector<SweepRecord> out(h_values.size());
    if(options.warm_start || options.workers <= 1) {
        const SweepRecord *prev = nullptr;
        for(std::size_t i = 0; i < h_values.size(); ++i) {
            const std::vector<BlochAngles> *warm = (options.warm_start && prev != nullptr) ? &prev->reduced_angles : nullptr;
            auto [rec, mps] = solve(h_values[i], warm);
            if(mps && prev != nullptr) {
                const TransferObjective obj(*mps, model.u);
                fix_gauge(rec, *prev, obj, options.optimizer.mode);
            }
            out[i] = std::move(rec);
            if(options.progress) options.progress(out[i]);
            if(out[i].error.empty() || !std::isnan(out[i].lambda1)) prev = &out[i];
        }
    } else {
        // independent points: fan out, then gauge-fix sequentially
        std::vector<std::unique_ptr<UniformMPS>> states(h_values.size());
        std::size_t next = 0;
        while(next < h_values.size()) {
            std::vector<std::future<std::pair<SweepRecord, std::unique_ptr<UniformMPS>>>> batch;
            const std::size_t end = std::min(h_values.size(), next + static_cast<std::size_t>(options.workers));
            for(std::size_t i = next; i < end; ++i) batch.push_back(std::async(std::launch::async, solve, h_values[i], nullptr));
            for(std::size_t i = next; i < end; ++i) {
                auto [rec, mps] = batch[i - next].get();
                out[i]          = std::move(rec);
                states[i]       = std::move(mps);
                if(options.progress) options.progress(out[i]);
            }
            next = end;
        }
        for(std::size_t i = 1; i < out.size(); ++i) {
            if(!states[i] || std::isnan(out[i - 1].lambda1)) continue;
            const TransferObjective obj(*states[i], model.u);
            fix_gauge(out[i], out[i - 1], obj, options.optimizer.mode);
        }
    }
    if(out.size() >= 3) susceptibility(out);
    return out;
}

void susceptibility(std::vector<SweepRecord> &records) {
    const std::size_t n = records.size();
    if(n < 3) throw ConfigError("susceptibility needs at least three sweep points");
    const double step = records[1].h - records[0].h;
    for(std::size_t i = 1; i < n; ++i)
        if(std::abs((records[i].h - records[i - 1].h) - step) > 1e-9 * std::max(1.0, std::abs(step)))
            throw ConfigError("susceptibility needs a uniform field grid");
    for(std::size_t i = 0; i < n; ++i) {
        if(i == 0) records[i].dlambda_dh = (records[1].lambda1 - records[0].lambda1) / step;
        else if(i == n - 1) records[i].dlambda_dh = (records[i].lambda1 - records[i - 1].lambda1) / step;
        else records[i].dlambda_dh = (records[i + 1].lambda1 - records[i - 1].lambda1) / (2.0 * step);
    }
}

namespace {

/// Interior local maxima of `v` with their topographic prominence. NaN entries never qualify.
std::vector<std::pair<std::size_t, double>> peaks(const std::vector<double> &v) {
    std::vector<std::pair<std::size_t, double>> out;
    const std::size_t n = v.size();
    for(std::size_t i = 1; i + 1 < n; ++i) {
        if(std::isnan(v[i])) continue;
        // plateaus count once, at their left edge, if both sides drop
        std::size_t j = i;
        while(j + 1 < n && v[j + 1] == v[i]) ++j;
        if(j + 1 >= n) break;
        const bool left_ok  = !std::isnan(v[i - 1]) && v[i - 1] < v[i];
        const bool right_ok = !std::isnan(v[j + 1]) && v[j + 1] < v[i];
        if(!(left_ok && right_ok)) {
            i = j;
            continue;
        }
        double lmin = v[i];
        for(std::size_t k = i; k-- > 0;) {
            if(std::isnan(v[k])) continue;
            if(v[k] > v[i]) break;
            lmin = std::min(lmin, v[k]);
        }
        double rmin = v[i];
        for(std::size_t k = j + 1; k < n; ++k) {
            if(std::isnan(v[k])) continue;
            if(v[k] > v[i]) break;
            rmin = std::min(rmin, v[k]);
        }
        out.emplace_back(i, v[i] - std::max(lmin, rmin));
        i = j;
    }
    return out;
}

} // namespace

std::vector<CriticalEstimate> detect_critical_points(const std::vector<SweepRecord> &records, const DetectionThresholds &thresholds) {
    std::vector<CriticalEstimate> out;
    if(records.size() < 3) return out;
    const double step = records[1].h - records[0].h;

    std::vector<double> chi, neg_gap, gaps;
    double chi_max = 0.0;
    for(const auto &r : records) {
        const double c = std::abs(r.dlambda_dh);
        chi.push_back(c);
        if(!std::isnan(c)) chi_max = std::max(chi_max, c);
        neg_gap.push_back(-r.gap);
        if(!std::isnan(r.gap)) gaps.push_back(r.gap);
    }
    if(chi_max > 0.0) {
        for(auto [i, prom] : peaks(chi))
            if(prom >= thresholds.prominence * chi_max) out.push_back({records[i].h, CriticalMethod::Susceptibility, prom, false});
    }
    if(!gaps.empty()) {
        std::sort(gaps.begin(), gaps.end());
        const std::size_t m = gaps.size();
        const double median = m % 2 == 1 ? gaps[m / 2] : 0.5 * (gaps[m / 2 - 1] + gaps[m / 2]);
        for(auto [i, depth] : peaks(neg_gap))
            if(depth > 0.0 && depth >= thresholds.gap_depth * median) out.push_back({records[i].h, CriticalMethod::Gap, depth, false});
    }
    for(auto &a : out)
        for(const auto &b : out)
            if(a.method != b.method && std::abs(a.h - b.h) <= 2.0 * std::abs(step) + 1e-12) a.confirmed = true;
    std::stable_sort(out.begin(), out.end(), [](const auto &a, const auto &b) { return a.h < b.h; });
    return out;
}

std::vector<double> consolidate_critical_points(const std::vector<CriticalEstimate> &estimates, double grid_step) {
    std::vector<CriticalEstimate> sorted = estimates;
    // susceptibility estimates claim their neighbourhood first
    std::stable_sort(sorted.begin(), sorted.end(), [](const auto &a, const auto &b) {
        if(a.method != b.method) return a.method == CriticalMethod::Susceptibility;
        return a.h < b.h;
    });
    std::vector<double> out;
    for(const auto &e : sorted) {
        bool merged = false;
        for(double h : out) merged = merged || std::abs(h - e.h) <= 2.0 * std::abs(grid_step) + 1e-12;
        if(!merged) out.push_back(e.h);
    }
    std::sort(out.begin(), out.end());
    return out;
}

AngleTrack classify_series(const std::vector<double> &h, const std::vector<double> &values, bool circular, double tau_lock, double tau_jump) {
    AngleTrack t;
    t.is_phi  = circular;
    t.samples = static_cast<int>(values.size());
    auto dist = [&](double a, double b) { return circular ? circular_distance(a, b) : std::abs(a - b); };

    std::size_t seg_start = 0;
    auto seg_range        = [&](std::size_t b, std::size_t e) {
        double r = 0.0;
        for(std::size_t i = b; i < e; ++i)
            for(std::size_t j = i + 1; j < e; ++j) r = std::max(r, dist(values[i], values[j]));
        return r;
    };
    for(std::size_t i = 1; i < values.size(); ++i) {
        const double d = dist(values[i], values[i - 1]);
        t.max_step     = std::max(t.max_step, d);
        if(d > tau_jump) {
            t.jumps.push_back(0.5 * (h[i] + h[i - 1]));
            t.max_drift = std::max(t.max_drift, seg_range(seg_start, i));
            seg_start   = i;
        }
    }
    t.max_drift = std::max(t.max_drift, seg_range(seg_start, values.size()));
    t.verdict   = t.max_drift < tau_lock ? AngleVerdict::Locked : AngleVerdict::Rotating;
    return t;
}

PairRelation pair_relation_of(const SettingPair &pair, double tol) {
    const auto a  = vector_to_angles(pair.a);
    const auto ap = vector_to_angles(pair.a_prime);
    const bool polar = std::abs(ap.theta - (kPi - a.theta)) <= tol && circular_distance(ap.phi, a.phi) <= tol;
    const bool azim  = std::abs(ap.theta - a.theta) <= tol && circular_distance(ap.phi, 2.0 * kPi - a.phi) <= tol;
    if(polar && !azim) return PairRelation::PolarMirror;
    if(azim && !polar) return PairRelation::AzimuthalMirror;
    return PairRelation::Free; // neither, or both (degenerate pair)
}

GeometryReport classify_geometry(const std::vector<SweepRecord> &records, double tau_lock, double tau_jump) {
    GeometryReport rep;
    rep.tau_lock = tau_lock;
    rep.tau_jump = tau_jump;

    std::vector<const SweepRecord *> used;
    for(const auto &r : records)
        if(!std::isnan(r.lambda1) && r.lambda1 > 1.0 + 1e-6 && !r.settings.empty()) used.push_back(&r);
    if(used.empty()) return rep;
    const std::size_t u = used.front()->settings.size();
    constexpr double pole = 1e-3;

    for(std::size_t op = 0; op < 2 * u; ++op) {
        const std::string label = fmt::format("{}{}", op % 2 == 0 ? "a" : "a'", op / 2 + 1);
        std::vector<double> hs, th, hp, ph;
        for(const auto *r : used) {
            const auto &p  = r->settings[op / 2];
            const auto ang = vector_to_angles(op % 2 == 0 ? p.a : p.a_prime);
            hs.push_back(r->h);
            th.push_back(ang.theta);
            if(ang.theta > pole && ang.theta < kPi - pole) { // phi is undefined at the poles
                hp.push_back(r->h);
                ph.push_back(ang.phi);
            }
        }
        auto tt     = classify_series(hs, th, false, tau_lock, tau_jump);
        tt.name     = fmt::format("theta[{}]", label);
        tt.op_index = static_cast<int>(op);
        rep.angles.push_back(std::move(tt));
        auto tp     = classify_series(hp, ph, true, tau_lock, tau_jump);
        tp.name     = fmt::format("phi[{}]", label);
        tp.op_index = static_cast<int>(op);
        rep.angles.push_back(std::move(tp));
    }
    for(const auto &t : rep.angles)
        for(double j : t.jumps)
            if(std::none_of(rep.jump_locations.begin(), rep.jump_locations.end(), [&](double x) { return std::abs(x - j) < 1e-12; }))
                rep.jump_locations.push_back(j);
    std::sort(rep.jump_locations.begin(), rep.jump_locations.end());

    for(std::size_t k = 0; k < u; ++k) {
        PairRelation last = PairRelation::Free;
        double last_h     = 0.0;
        bool have         = false;
        for(const auto *r : used) {
            const auto rel = pair_relation_of(r->settings[k], tau_lock);
            if(rel == PairRelation::Free) continue;
            if(have && rel != last) {
                const double at = 0.5 * (last_h + r->h);
                if(std::none_of(rep.relation_switches.begin(), rep.relation_switches.end(), [&](double x) { return std::abs(x - at) < 1e-12; }))
                    rep.relation_switches.push_back(at);
            }
            last   = rel;
            last_h = r->h;
            have   = true;
        }
    }
    std::sort(rep.relation_switches.begin(), rep.relation_switches.end());
    return rep;
}

std::vector<std::tuple<double, UnitVector, UnitVector>> bloch_trajectory(const std::vector<SweepRecord> &records, int site) {
    std::vector<std::tuple<double, UnitVector, UnitVector>> out;
    for(const auto &r : records) {
        if(site < 1 || static_cast<std::size_t>(site) > r.settings.size()) continue;
        const auto &p = r.settings[static_cast<std::size_t>(site - 1)];
        out.emplace_back(r.h, p.a, p.a_prime);
    }
    return out;
}

std::string_view to_string(CriticalMethod method) {
    return method == CriticalMethod::Susceptibility ? "SUSCEPTIBILITY" : "GAP";
}

std::string_view to_string(AngleVerdict verdict) {
    return verdict == AngleVerdict::Locked ? "LOCKED" : "ROTATING";
}

} // namespace bellnav
