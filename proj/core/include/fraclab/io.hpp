#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fraclab/geometry.hpp"
#include "fraclab/homogenize.hpp"
#include "fraclab/stochastic.hpp"

namespace fraclab::io {

/// 17-significant-digit decimal rendering; round-trips doubles exactly.
std::string format_g17(double v);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hash_hex(std::string_view bytes);

void write_pointset_csv(const PointSet& ps, const std::string& path);
PointSet read_pointset_csv(const std::string& path);

void write_limit_data_json(const EmpiricalLimitData& data, const std::string& path);
void write_kernel_json(const FractionalKernel& kernel, const std::string& path);
FractionalKernel read_kernel_json(const std::string& path);
void write_capacity_table_csv(const CapacityTable& table, const std::string& path);

void write_minima_csv(const ConvergenceStudy& study, const std::string& path);
void write_study_json(const ConvergenceStudy& study, const std::string& path);

void write_random_aggregate_csv(const RandomGammaReport& report, const std::string& path);
void write_random_seed_json(const RandomGammaReport& report, const std::string& out_dir);

struct Series {
    std::string name;
    std::vector<double> x, y;
};

void write_svg_line_plot(const std::vector<Series>& series, bool logx, bool logy,
                         const std::string& title, const std::string& xlabel,
                         const std::string& ylabel, const std::string& path);
void write_svg_heatmap(const ScalarField& field, const std::string& title,
                       const std::string& path);
/// Plain-text plotting alternative: a .dat table next to a gnuplot script.
void write_gnuplot_script(const std::vector<Series>& series, bool logx, bool logy,
                          const std::string& title, const std::string& path_base);

struct RunRecord {
    std::string subcommand;
    std::string config_snapshot;  // the config document as submitted
    std::string input_hash;
    std::uint64_t seed = 0;
    int threads = 0;
    double wall_seconds = 0.0;
    std::vector<std::string> artifacts;
    std::vector<std::pair<std::string, bool>> verdicts;
    int exit_code = 0;
};

void write_run_record(const RunRecord& record, const std::string& path);

}  // namespace fraclab::io
