#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "bellnav/indicators.hpp"

namespace bellnav {

struct CsvHeader {
    std::string config_hash;
    double tau_lock   = 0.05;
    double tau_jump   = 0.2;
    double prominence = 0.25;
    double gap_depth  = 0.10;
};

/// Sweep records as CSV. Angles are written in units of pi.
std::string records_to_csv(const std::vector<SweepRecord> &records, const CsvHeader &header);

/// Reads back what records_to_csv wrote (settings rebuilt from the angles).
std::vector<SweepRecord> records_from_csv(const std::string &text, CsvHeader *header = nullptr);

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y; // NaN breaks the line
};

struct PlotPanel {
    std::string ylabel;
    std::vector<PlotSeries> series;
    std::vector<double> markers; // vertical dashed lines at these x
};

/// SVG 1.1 document with vertically stacked panels sharing the x axis.
std::string render_svg(const std::string &title, const std::string &xlabel, const std::vector<PlotPanel> &panels);

/// lambda1, lambda2, gap and dlambda/dh against h.
std::string indicator_svg(const std::vector<SweepRecord> &records, const std::vector<double> &critical);
/// theta and phi of every operator against h, in units of pi.
std::string angle_svg(const std::vector<SweepRecord> &records, const std::vector<double> &jumps);

std::string geometry_report_text(const GeometryReport &geometry, const std::vector<CriticalEstimate> &estimates, const std::vector<double> &consolidated);

/// Angles in units of pi with six decimals.
std::string format_angles_pi(const MeasurementSettings &settings);

void write_text_file(const std::filesystem::path &path, const std::string &text);
std::string read_text_file(const std::filesystem::path &path);

} // namespace bellnav
