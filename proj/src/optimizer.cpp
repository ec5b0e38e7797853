#include "bellnav/optimizer.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace bellnav {

void OptimizerConfig::validate() const {
    if(grid_resolution < 8) throw ConfigError(fmt::format("optimizer.grid_resolution must be >= 8, got {}", grid_resolution));
    if(!(eta > 0.0)) throw ConfigError("optimizer.eta must be positive");
    if(!(tol > 0.0)) throw ConfigError("optimizer.tol must be positive");
    if(!(fd_step > 0.0)) throw ConfigError("optimizer.fd_step must be positive");
    if(max_iters < 1) throw ConfigError("optimizer.max_iters must be positive");
    if(n_starts < 1) throw ConfigError("optimizer.n_starts must be >= 1");
    if(max_grid_points < 1) throw ConfigError("optimizer.max_grid_points must be positive");
}

SearchDomain OptimizerConfig::effective_domain() const {
    return mode.relation() == PairRelation::Free ? SearchDomain::Sphere : domain;
}

TransferObjective::TransferObjective(const UniformMPS &mps, int u) : transfer_(mps), u_(u) {
    if(transfer_.cell_sites() % u != 0) throw ConfigError("unit cell does not divide the MPS cell");
}

double TransferObjective::value(const MeasurementSettings &settings) const {
    count();
    return transfer_.lambda1_per_site(settings);
}

double TransferObjective::gap(const MeasurementSettings &settings) const {
    count();
    return transfer_.spectrum(settings, 2).gap;
}

FiniteChainObjective::FiniteChainObjective(FiniteGroundState state, int u) : state_(std::move(state)), u_(u) {
    if(state_.n_sites % u != 0) throw ConfigError("unit cell does not divide the chain length");
}

double FiniteChainObjective::value(const MeasurementSettings &settings) const {
    count();
    return bell_value_finite(state_, settings);
}

std::vector<double> flatten(const std::vector<BlochAngles> &angles) {
    std::vector<double> p;
    p.reserve(2 * angles.size());
    for(const auto &a : angles) {
        p.push_back(a.theta);
        p.push_back(a.phi);
    }
    return p;
}

std::vector<BlochAngles> unflatten(const std::vector<double> &params) {
    std::vector<BlochAngles> out;
    for(std::size_t i = 0; i + 1 < params.size(); i += 2) out.push_back(wrap_angles(params[i], params[i + 1]));
    return out;
}

namespace {

double evaluate(const Objective &obj, const SymmetryMode &mode, const std::vector<double> &params) {
    const auto angles = unflatten(params);
    return obj.value(expand_settings(angles, mode, obj.unit_cell()));
}

std::vector<BlochAngles> to_domain(const std::vector<BlochAngles> &angles, SearchDomain domain) {
    std::vector<BlochAngles> out;
    for(const auto &a : angles) out.push_back(domain == SearchDomain::Fundamental ? canonicalize_to_domain(a) : wrap_angles(a.theta, a.phi));
    return out;
}

bool lex_less(const std::vector<BlochAngles> &a, const std::vector<BlochAngles> &b) {
    for(std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
        if(a[i].theta != b[i].theta) return a[i].theta < b[i].theta;
        if(a[i].phi != b[i].phi) return a[i].phi < b[i].phi;
    }
    return a.size() < b.size();
}

} // namespace

int effective_grid_resolution(const OptimizerConfig &config, int reduced_pairs) {
    const int axes = 2 * reduced_pairs;
    if(axes == 0) return 1;
    int r = config.grid_resolution;
    while(r > 2 && std::pow(double(r), axes) > double(config.max_grid_points)) --r;
    return r;
}

std::vector<Candidate> grid_scan(const Objective &objective, const OptimizerConfig &config) {
    config.validate();
    const int u     = objective.unit_cell();
    const int pairs = config.mode.reduced_count(u);
    const int r     = effective_grid_resolution(config, pairs);
    if(r != config.grid_resolution)
        spdlog::debug("grid resolution reduced from {} to {} per axis ({} axes)", config.grid_resolution, r, 2 * pairs);

    const bool sphere  = config.effective_domain() == SearchDomain::Sphere;
    const double tmax  = sphere ? kPi : FundamentalDomain::theta_max;
    // the sphere grid uses cell centres in theta so coarse grids do not collapse onto the poles
    auto theta_at = [&](int i) { return sphere ? tmax * (i + 0.5) / r : (r == 1 ? 0.0 : tmax * i / (r - 1)); };
    auto phi_at        = [&](int j) { return sphere ? 2.0 * kPi * j / r : (r == 1 ? 0.0 : kPi * j / (r - 1)); };

    std::vector<Candidate> all;
    std::vector<int> idx(static_cast<std::size_t>(2 * pairs), 0);
    while(true) {
        std::vector<BlochAngles> angles;
        for(int p = 0; p < pairs; ++p)
            angles.push_back(wrap_angles(theta_at(idx[static_cast<std::size_t>(2 * p)]), phi_at(idx[static_cast<std::size_t>(2 * p + 1)])));
        const double v = objective.value(expand_settings(angles, config.mode, u));
        all.push_back({std::move(angles), v});

        std::size_t k = 0;
        while(k < idx.size() && ++idx[k] == r) idx[k++] = 0;
        if(k == idx.size()) break;
    }
    std::stable_sort(all.begin(), all.end(), [](const Candidate &a, const Candidate &b) {
        if(a.value != b.value) return a.value > b.value;
        return lex_less(a.angles, b.angles);
    });
    if(all.size() > static_cast<std::size_t>(config.n_starts)) all.resize(static_cast<std::size_t>(config.n_starts));
    return all;
}

std::vector<double> fd_gradient(const Objective &objective, const SymmetryMode &mode, const std::vector<double> &params, double step) {
    std::vector<double> g(params.size());
    std::vector<double> p = params;
    for(std::size_t i = 0; i < params.size(); ++i) {
        p[i]           = params[i] + step;
        const double f1 = evaluate(objective, mode, p);
        p[i]           = params[i] - step;
        const double f0 = evaluate(objective, mode, p);
        p[i]           = params[i];
        g[i]           = (f1 - f0) / (2.0 * step);
    }
    return g;
}

OptResult gradient_ascent(const Objective &objective, const std::vector<BlochAngles> &start, const OptimizerConfig &config) {
    config.validate();
    const int u = objective.unit_cell();
    if(static_cast<int>(start.size()) != config.mode.reduced_count(u))
        throw ConfigError(fmt::format("start has {} angle pairs, mode needs {}", start.size(), config.mode.reduced_count(u)));

    OptResult res;
    std::vector<double> x = flatten(start);
    double f              = evaluate(objective, config.mode, x);
    res.trace.emplace_back(0, f);
    double step = config.eta;

    for(int it = 1; it <= config.max_iters; ++it) {
        res.iterations = it;
        double h       = config.fd_step;
        if(objective.gap(expand_settings(unflatten(x), config.mode, u)) < 10.0 * h) h *= 0.1;
        const auto g     = fd_gradient(objective, config.mode, x, h);
        double gnorm     = 0.0;
        for(double gi : g) gnorm += gi * gi;
        if(gnorm == 0.0) {
            res.converged = true;
            break;
        }

        bool accepted = false;
        double s      = step;
        std::vector<double> trial(x.size());
        double ft = f;
        for(int halving = 0; halving <= 20; ++halving) {
            for(std::size_t i = 0; i < x.size(); ++i) trial[i] = x[i] + s * g[i];
            ft = evaluate(objective, config.mode, trial);
            if(ft > f) {
                accepted = true;
                break;
            }
            s *= 0.5;
        }
        if(!accepted) {
            // no ascent left at the smallest step: a stationary point to working precision
            res.converged = true;
            break;
        }
        const double gain = ft - f;
        x                 = trial;
        f                 = ft;
        res.trace.emplace_back(it, f);
        step = std::min(2.0 * s, 16.0 * config.eta);
        if(gain < config.tol) {
            res.converged = true;
            break;
        }
    }

    auto angles = unflatten(x);
    if(config.effective_domain() == SearchDomain::Fundamental) {
        // keep the folded representative only if the objective agrees there
        const auto folded = to_domain(angles, SearchDomain::Fundamental);
        const double ff   = objective.value(expand_settings(folded, config.mode, u));
        if(std::abs(ff - f) <= 1e-9) angles = folded;
        else
            spdlog::debug("domain fold changes the objective by {:.3e}; keeping unfolded angles", ff - f);
    }
    res.reduced_angles   = angles;
    res.settings         = expand_settings(angles, config.mode, u);
    res.lambda1_per_site = f;
    return res;
}

OptResult optimize_settings(const Objective &objective, const OptimizerConfig &config, const std::vector<std::vector<BlochAngles>> &extra_starts) {
    config.validate();
    const long evals_before = objective.evaluations();
    const int u             = objective.unit_cell();

    std::vector<std::vector<BlochAngles>> starts;
    for(auto &c : grid_scan(objective, config)) starts.push_back(std::move(c.angles));
    for(const auto &s : extra_starts)
        if(static_cast<int>(s.size()) == config.mode.reduced_count(u)) starts.push_back(s);

    if(config.mode.relation() == PairRelation::Free) {
        // constrained optima are feasible free points, so seeding from them keeps FREE >= constrained
        for(PairRelation rel : {PairRelation::PolarMirror, PairRelation::AzimuthalMirror}) {
            OptimizerConfig sub = config;
            sub.mode            = config.mode;
            sub.mode.tag        = config.mode.locked_sites.empty() ? (rel == PairRelation::PolarMirror ? ModeTag::PolarMirror : ModeTag::AzimuthalMirror)
                                                                   : ModeTag::AxisLocked;
            sub.mode.axis_relation = rel;
            const auto seeded      = optimize_settings(objective, sub);
            starts.push_back(reduce_settings(seeded.settings, config.mode));
        }
    }

    OptResult best;
    bool have = false;
    std::vector<double> start_values;
    for(const auto &s : starts) {
        auto r = gradient_ascent(objective, s, config);
        start_values.push_back(r.lambda1_per_site);
        const bool better = !have || r.lambda1_per_site > best.lambda1_per_site ||
                            (r.lambda1_per_site == best.lambda1_per_site && lex_less(r.reduced_angles, best.reduced_angles));
        if(better) {
            best = std::move(r);
            have = true;
        }
    }
    best.start_values = std::move(start_values);
    best.evaluations  = objective.evaluations() - evals_before;
    return best;
}

OptResult optimize_settings(const UniformMPS &mps, const OptimizerConfig &config, int u) {
    const TransferObjective obj(mps, u);
    return optimize_settings(obj, config);
}

} // namespace bellnav
