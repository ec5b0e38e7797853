#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "bellnav/indicators.hpp"
#include "bellnav/optimizer.hpp"
#include "bellnav/umps.hpp"

namespace bellnav {

/// Everything a CLI run needs. Loaded from a flat `key = value` file where keys
/// carry dotted sections (model.J, optimizer.eta); `[section]` lines prefix the
/// bare keys that follow. `#` starts a comment.
struct RunConfig {
    ModelSpec model;
    bool unit_cell_set = false; // model.u given explicitly
    double sweep_start = 0.5;
    double sweep_stop  = 1.5;
    double sweep_step  = 0.01;
    int chi            = 16;
    ImaginaryTimeSchedule schedule;
    OptimizerConfig optimizer;
    DetectionThresholds thresholds;
    double tau_lock = 0.05;
    double tau_jump = 0.2;
    std::string outputs = "bellnav-out";
    std::string cache   = "bellnav-cache";
    unsigned long seed  = 20240611;
    int workers         = 1;
    bool warm_start     = true;

    void validate() const;
    [[nodiscard]] std::vector<double> h_grid() const;
    /// Sorted `key = value` dump of every field; hashed for output headers.
    [[nodiscard]] std::string canonical() const;
    /// First 16 hex digits of the SHA-256 of canonical().
    [[nodiscard]] std::string hash() const;
};

/// Sets one dotted key; unknown keys and malformed values raise ConfigError naming the key.
void apply_setting(RunConfig &config, std::string_view key, std::string_view value);

/// `--set` style "key=value".
void apply_override(RunConfig &config, std::string_view assignment);

RunConfig parse_config(std::string_view text, const std::string &source = "<config>");
RunConfig load_config(const std::filesystem::path &path);

} // namespace bellnav
