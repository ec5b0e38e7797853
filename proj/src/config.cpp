#include "bellnav/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "bellnav/cache.hpp"

namespace bellnav {

namespace {

std::string_view trim(std::string_view s) {
    while(!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while(!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

double to_double(std::string_view key, std::string_view v) {
    double x       = 0.0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), x);
    if(res.ec != std::errc() || res.ptr != v.data() + v.size()) throw ConfigError(fmt::format("{}: expected a number, got '{}'", key, v));
    return x;
}

long to_long(std::string_view key, std::string_view v) {
    long x         = 0;
    const auto res = std::from_chars(v.data(), v.data() + v.size(), x);
    if(res.ec != std::errc() || res.ptr != v.data() + v.size()) throw ConfigError(fmt::format("{}: expected an integer, got '{}'", key, v));
    return x;
}

int to_int(std::string_view key, std::string_view v) {
    const long x = to_long(key, v);
    if(x < -2147483647L || x > 2147483647L) throw ConfigError(fmt::format("{}: value out of range", key));
    return static_cast<int>(x);
}

bool to_bool(std::string_view key, std::string_view v) {
    if(v == "true" || v == "1" || v == "yes") return true;
    if(v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(fmt::format("{}: expected true or false, got '{}'", key, v));
}

std::vector<std::string_view> split_list(std::string_view v) {
    std::vector<std::string_view> out;
    while(!v.empty()) {
        const auto c = v.find(',');
        const auto item = trim(v.substr(0, c));
        if(!item.empty()) out.push_back(item);
        if(c == std::string_view::npos) break;
        v.remove_prefix(c + 1);
    }
    return out;
}

template <class F> auto wrap(std::string_view key, F &&f) {
    try {
        return f();
    } catch(const ConfigError &) {
        throw;
    } catch(const std::exception &e) {
        throw ConfigError(fmt::format("{}: {}", key, e.what()));
    }
}

} // namespace

void RunConfig::validate() const {
    wrap("model", [&] { model.validate(); });
    if(!(sweep_step > 0.0)) throw ConfigError("sweep.step must be positive");
    if(!(sweep_start < sweep_stop)) throw ConfigError("sweep.start must be below sweep.stop");
    if(chi < 2 || chi > 64) throw ConfigError(fmt::format("chi must lie in [2, 64], got {}", chi));
    optimizer.validate();
    wrap("optimizer.mode", [&] { optimizer.mode.validate(model.u); });
    if(schedule.steps.empty()) throw ConfigError("ground_state.steps must not be empty");
    if(!(schedule.tol > 0.0)) throw ConfigError("ground_state.tol must be positive");
    if(!(tau_lock > 0.0) || !(tau_jump > 0.0)) throw ConfigError("indicators.tau_lock and indicators.tau_jump must be positive");
    if(workers < 1) throw ConfigError("workers must be >= 1");
}

std::vector<double> RunConfig::h_grid() const { return uniform_grid(sweep_start, sweep_stop, sweep_step); }

std::string RunConfig::canonical() const {
    std::vector<std::string> lines;
    auto add = [&](std::string_view k, const std::string &v) { lines.push_back(fmt::format("{} = {}", k, v)); };
    auto num = [](double x) { return fmt::format("{:.17g}", x); };
    add("model.kind", std::string(to_string(model.kind)));
    add("model.J", num(model.J));
    add("model.h", num(model.h));
    add("model.delta", num(model.delta));
    add("model.u", std::to_string(model.u));
    add("sweep.start", num(sweep_start));
    add("sweep.stop", num(sweep_stop));
    add("sweep.step", num(sweep_step));
    add("chi", std::to_string(chi));
    std::string steps;
    for(double s : schedule.steps) steps += (steps.empty() ? "" : ",") + num(s);
    add("ground_state.steps", steps);
    add("ground_state.tol", num(schedule.tol));
    add("ground_state.max_steps", std::to_string(schedule.max_steps));
    add("optimizer.grid_resolution", std::to_string(optimizer.grid_resolution));
    add("optimizer.eta", num(optimizer.eta));
    add("optimizer.fd_step", num(optimizer.fd_step));
    add("optimizer.tol", num(optimizer.tol));
    add("optimizer.max_iters", std::to_string(optimizer.max_iters));
    add("optimizer.n_starts", std::to_string(optimizer.n_starts));
    add("optimizer.max_grid_points", std::to_string(optimizer.max_grid_points));
    add("optimizer.mode", std::string(to_string(optimizer.mode.tag)));
    std::string locked;
    for(int s : optimizer.mode.locked_sites) locked += (locked.empty() ? "" : ",") + std::to_string(s);
    add("optimizer.locked_sites", locked);
    add("optimizer.relation", std::string(to_string(optimizer.mode.axis_relation)));
    add("optimizer.domain", optimizer.domain == SearchDomain::Sphere ? "SPHERE" : "FUNDAMENTAL");
    add("indicators.tau_lock", num(tau_lock));
    add("indicators.tau_jump", num(tau_jump));
    add("indicators.prominence", num(thresholds.prominence));
    add("indicators.gap_depth", num(thresholds.gap_depth));
    add("seed", std::to_string(seed));
    add("warm_start", warm_start ? "true" : "false");
    // outputs, cache and workers do not change results
    std::sort(lines.begin(), lines.end());
    std::string out;
    for(const auto &l : lines) out += l + "\n";
    return out;
}

std::string RunConfig::hash() const { return sha256_hex(canonical()).substr(0, 16); }

void apply_setting(RunConfig &c, std::string_view key, std::string_view raw) {
    const auto v = trim(raw);
    auto &o      = c.optimizer;
    if(key == "model.kind") {
        c.model.kind = wrap(key, [&] { return parse_model_kind(v); });
        if(!c.unit_cell_set) c.model.u = ModelSpec::default_unit_cell(c.model.kind);
    } else if(key == "model.J") c.model.J = to_double(key, v);
    else if(key == "model.h") c.model.h = to_double(key, v);
    else if(key == "model.delta") c.model.delta = to_double(key, v);
    else if(key == "model.u") {
        c.model.u       = to_int(key, v);
        c.unit_cell_set = true;
    } else if(key == "sweep.start") c.sweep_start = to_double(key, v);
    else if(key == "sweep.stop") c.sweep_stop = to_double(key, v);
    else if(key == "sweep.step") c.sweep_step = to_double(key, v);
    else if(key == "chi" || key == "ground_state.chi") c.chi = to_int(key, v);
    else if(key == "ground_state.tol") c.schedule.tol = to_double(key, v);
    else if(key == "ground_state.max_steps") c.schedule.max_steps = to_int(key, v);
    else if(key == "ground_state.steps") {
        c.schedule.steps.clear();
        for(auto item : split_list(v)) c.schedule.steps.push_back(to_double(key, item));
    } else if(key == "optimizer.grid_resolution") o.grid_resolution = to_int(key, v);
    else if(key == "optimizer.eta") o.eta = to_double(key, v);
    else if(key == "optimizer.fd_step") o.fd_step = to_double(key, v);
    else if(key == "optimizer.tol") o.tol = to_double(key, v);
    else if(key == "optimizer.max_iters") o.max_iters = to_int(key, v);
    else if(key == "optimizer.n_starts") o.n_starts = to_int(key, v);
    else if(key == "optimizer.max_grid_points") o.max_grid_points = to_long(key, v);
    else if(key == "optimizer.mode") o.mode.tag = wrap(key, [&] { return parse_mode_tag(v); });
    else if(key == "optimizer.locked_sites") {
        o.mode.locked_sites.clear();
        for(auto item : split_list(v)) o.mode.locked_sites.insert(to_int(key, item));
    } else if(key == "optimizer.relation") o.mode.axis_relation = wrap(key, [&] { return parse_pair_relation(v); });
    else if(key == "optimizer.domain") {
        if(v == "FUNDAMENTAL") o.domain = SearchDomain::Fundamental;
        else if(v == "SPHERE") o.domain = SearchDomain::Sphere;
        else throw ConfigError(fmt::format("{}: expected FUNDAMENTAL or SPHERE, got '{}'", key, v));
    } else if(key == "indicators.tau_lock") c.tau_lock = to_double(key, v);
    else if(key == "indicators.tau_jump") c.tau_jump = to_double(key, v);
    else if(key == "indicators.prominence") c.thresholds.prominence = to_double(key, v);
    else if(key == "indicators.gap_depth") c.thresholds.gap_depth = to_double(key, v);
    else if(key == "outputs") c.outputs = std::string(v);
    else if(key == "cache") c.cache = std::string(v);
    else if(key == "seed") c.seed = static_cast<unsigned long>(to_long(key, v));
    else if(key == "workers") c.workers = to_int(key, v);
    else if(key == "warm_start") c.warm_start = to_bool(key, v);
    else throw ConfigError(fmt::format("{}: unknown configuration key", key));
}

void apply_override(RunConfig &config, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if(eq == std::string_view::npos) throw ConfigError(fmt::format("{}: override must look like key=value", assignment));
    apply_setting(config, trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

RunConfig parse_config(std::string_view text, const std::string &source) {
    RunConfig c;
    std::string section;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while(std::getline(in, line)) {
        ++lineno;
        std::string_view l = line;
        if(const auto hash = l.find('#'); hash != std::string_view::npos) l = l.substr(0, hash);
        l = trim(l);
        if(l.empty()) continue;
        if(l.front() == '[') {
            if(l.back() != ']') throw ConfigError(fmt::format("{}:{}: unterminated section header", source, lineno));
            section = std::string(trim(l.substr(1, l.size() - 2)));
            continue;
        }
        const auto eq = l.find('=');
        if(eq == std::string_view::npos) {
            const auto key = std::string(trim(l));
            throw ConfigError(fmt::format("{}:{}: {}: missing '='", source, lineno, section.empty() ? key : section + "." + key));
        }
        const auto key  = std::string(trim(l.substr(0, eq)));
        // dotted keys are absolute, bare keys take the current section
        const auto full = (section.empty() || key.find('.') != std::string::npos) ? key : section + "." + key;
        try {
            apply_setting(c, full, l.substr(eq + 1));
        } catch(const ConfigError &e) {
            throw ConfigError(fmt::format("{}:{}: {}", source, lineno, e.what()));
        }
    }
    return c;
}

RunConfig load_config(const std::filesystem::path &path) {
    std::ifstream in(path);
    if(!in) throw ConfigError(fmt::format("cannot open config file {}", path.string()));
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.string());
}

} // namespace bellnav
