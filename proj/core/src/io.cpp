#include "fraclab/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fraclab::io {

using nlohmann::json;

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hash_hex(std::string_view bytes) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes)));
    return buf;
}

namespace {

std::FILE* open_or_throw(const std::string& path, const char* mode) {
    std::FILE* fp = std::fopen(path.c_str(), mode);
    if (!fp) throw Error("io", "cannot open " + path);
    return fp;
}

void dump_json(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("io", "cannot open " + path);
    out << j.dump(2) << "\n";
}

}  // namespace

void write_pointset_csv(const PointSet& ps, const std::string& path) {
    std::FILE* fp = open_or_throw(path, "w");
    std::fprintf(fp, ps.dim == 2 ? "label,x,y\n" : "label,x,y,z\n");
    for (std::size_t i = 0; i < ps.size(); ++i) {
        if (ps.dim == 2)
            std::fprintf(fp, "%d,%s,%s\n", ps.labels[i], format_g17(ps.points[i][0]).c_str(),
                         format_g17(ps.points[i][1]).c_str());
        else
            std::fprintf(fp, "%d,%s,%s,%s\n", ps.labels[i],
                         format_g17(ps.points[i][0]).c_str(),
                         format_g17(ps.points[i][1]).c_str(),
                         format_g17(ps.points[i][2]).c_str());
    }
    std::fclose(fp);
}

PointSet read_pointset_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("io", "cannot open " + path);
    std::string header;
    std::getline(in, header);
    const int dim = std::count(header.begin(), header.end(), ',') == 2 ? 2 : 3;
    PointSet ps;
    ps.dim = dim;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        int label;
        Point p{};
        ss >> label >> p[0] >> p[1];
        if (dim == 3) ss >> p[2];
        if (ss.fail()) throw Error("io", "malformed point row in " + path);
        ps.labels.push_back(label);
        ps.points.push_back(p);
    }
    if (ps.points.empty()) throw Error("io", "no points in " + path);
    return ps;
}

void write_limit_data_json(const EmpiricalLimitData& data, const std::string& path) {
    json j;
    j["r_user"] = data.r_user;
    j["theta_hat"] = data.theta_hat;
    j["theta_hat_all_points"] = data.theta_hat_all;
    j["n_interior"] = data.n_interior;
    j["n_all_in_u"] = data.n_all_in_u;
    j["count_discrepancy"] = data.count_discrepancy;
    j["histogram"]["lo"] = {data.hist_box.lo[0], data.hist_box.lo[1]};
    j["histogram"]["hi"] = {data.hist_box.hi[0], data.hist_box.hi[1]};
    j["histogram"]["shape"] = {data.hist_shape[0], data.hist_shape[1]};
    j["histogram"]["cell"] = {data.hist_cell[0], data.hist_cell[1]};
    j["beta"] = data.beta;
    j["beta_all_points"] = data.beta_all;
    if (!data.warning.empty()) j["warning"] = data.warning;
    dump_json(j, path);
}

void write_kernel_json(const FractionalKernel& kernel, const std::string& path) {
    json j;
    j["dim"] = kernel.dim;
    j["s"] = kernel.s;
    j["p"] = kernel.p;
    j["alpha"] = kernel.alpha();
    j["anisotropy"]["id"] = kernel.aniso.name();
    j["anisotropy"]["strength"] = kernel.aniso.strength;
    j["anisotropy"]["axis"] = {kernel.aniso.axis[0], kernel.aniso.axis[1], kernel.aniso.axis[2]};
    dump_json(j, path);
}

FractionalKernel read_kernel_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("io", "cannot open " + path);
    json j;
    in >> j;
    Anisotropy a;
    if (j.contains("anisotropy") && j["anisotropy"]["id"] == "cos2") {
        a.id = Anisotropy::Id::Cos2;
        a.strength = j["anisotropy"]["strength"].get<double>();
        const auto& ax = j["anisotropy"]["axis"];
        a.axis = {ax[0].get<double>(), ax[1].get<double>(), ax[2].get<double>()};
    }
    return FractionalKernel(j["dim"].get<int>(), j["s"].get<double>(), j["p"].get<double>(), a);
}

void write_capacity_table_csv(const CapacityTable& table, const std::string& path) {
    std::FILE* fp = open_or_throw(path, "w");
    std::fprintf(fp, "r,R,value,residual,iterations\n");
    for (const auto& row : table.rows)
        std::fprintf(fp, "%s,%s,%s,%s,%d\n", format_g17(row.r).c_str(),
                     format_g17(row.R).c_str(), format_g17(row.value_truncated).c_str(),
                     format_g17(row.residual).c_str(), row.iterations);
    std::fclose(fp);
}

void write_minima_csv(const ConvergenceStudy& study, const std::string& path) {
    std::FILE* fp = open_or_throw(path, "w");
    std::fprintf(fp, "epsilon,h,m_j,gap,distance\n");
    for (const auto& rec : study.records)
        std::fprintf(fp, "%s,%s,%s,%s,%s\n", format_g17(rec.epsilon).c_str(),
                     format_g17(rec.h).c_str(), format_g17(rec.m_total).c_str(),
                     format_g17(rec.gap_rel).c_str(),
                     format_g17(rec.minimizer_distance).c_str());
    std::fclose(fp);
}

void write_study_json(const ConvergenceStudy& study, const std::string& path) {
    json j;
    j["m_inf"] = study.m_inf;
    j["m_inf_energy"] = study.m_inf_energy;
    j["m_inf_mass"] = study.m_inf_mass;
    j["m_inf_forcing"] = study.m_inf_forcing;
    j["m_inf_band"] = study.m_inf_band;
    j["theta"] = study.theta_used;
    j["capT"] = study.capT_used;
    j["capT_uncertainty"] = study.capT_uncertainty;
    j["hom_grid_n"] = study.hom_grid_n;
    j["threshold"] = study.threshold;
    j["gaps_nonincreasing"] = study.gaps_nonincreasing;
    j["final_gap"] = study.final_gap;
    j["pass"] = study.pass;
    j["note"] = study.note;
    for (const auto& rec : study.records) {
        json r;
        r["epsilon"] = rec.epsilon;
        r["h"] = rec.h;
        r["grid_n"] = rec.grid_n;
        r["m_total"] = rec.m_total;
        r["m_energy"] = rec.m_energy;
        r["m_forcing"] = rec.m_forcing;
        r["gap_rel"] = rec.gap_rel;
        r["minimizer_distance"] = rec.minimizer_distance;
        r["iterations"] = rec.iterations;
        r["residual"] = rec.residual;
        r["obstacle_nodes"] = rec.obstacle_nodes;
        j["records"].push_back(r);
    }
    dump_json(j, path);
}

void write_random_aggregate_csv(const RandomGammaReport& report, const std::string& path) {
    std::FILE* fp = open_or_throw(path, "w");
    std::fprintf(fp, "seed,epsilon,m_j,gap\n");
    for (const auto& c : report.cells)
        std::fprintf(fp, "%llu,%s,%s,%s\n", static_cast<unsigned long long>(c.seed),
                     format_g17(c.epsilon).c_str(), format_g17(c.m_value).c_str(),
                     format_g17(c.gap_rel).c_str());
    std::fclose(fp);
}

void write_random_seed_json(const RandomGammaReport& report, const std::string& out_dir) {
    std::vector<std::uint64_t> seeds;
    for (const auto& c : report.cells)
        if (std::find(seeds.begin(), seeds.end(), c.seed) == seeds.end())
            seeds.push_back(c.seed);
    for (std::uint64_t s : seeds) {
        json j;
        j["seed"] = s;
        j["m_inf"] = report.m_inf;
        j["expected_gamma"] = report.expected_gamma;
        for (const auto& c : report.cells)
            if (c.seed == s) {
                json r;
                r["epsilon"] = c.epsilon;
                r["m_j"] = c.m_value;
                r["gap"] = c.gap_rel;
                r["grid_n"] = c.grid_n;
                j["records"].push_back(r);
            }
        dump_json(j, out_dir + "/seed_" + std::to_string(s) + ".json");
    }
}

namespace {

struct AxisMap {
    double lo, hi;
    bool log;
    double map(double v, double a, double b) const {
        const double t = log ? (std::log(v) - std::log(lo)) / (std::log(hi) - std::log(lo))
                             : (v - lo) / (hi - lo);
        return a + t * (b - a);
    }
};

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

}  // namespace

void write_svg_line_plot(const std::vector<Series>& series, bool logx, bool logy,
                         const std::string& title, const std::string& xlabel,
                         const std::string& ylabel, const std::string& path) {
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (logx && s.x[i] <= 0.0) continue;
            if (logy && s.y[i] <= 0.0) continue;
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, s.y[i]);
            ymax = std::max(ymax, s.y[i]);
        }
    if (!(xmin < xmax)) {
        xmin -= 0.5;
        xmax += 0.5;
    }
    if (!(ymin < ymax)) {
        ymin = ymin - 0.5;
        ymax = ymax + 0.5;
    }
    const AxisMap X{xmin, xmax, logx};
    const AxisMap Y{ymin, ymax, logy};
    const double W = 640, H = 440, L = 70, R = 20, T = 40, B = 50;

    std::FILE* fp = open_or_throw(path, "w");
    std::fprintf(fp,
                 "<svg xmlns='http://www.w3.org/2000/svg' width='%g' height='%g' "
                 "viewBox='0 0 %g %g'>\n",
                 W, H, W, H);
    std::fprintf(fp, "<rect width='%g' height='%g' fill='white'/>\n", W, H);
    std::fprintf(fp,
                 "<text x='%g' y='20' font-family='sans-serif' font-size='14' "
                 "text-anchor='middle'>%s</text>\n",
                 W / 2, title.c_str());
    std::fprintf(fp,
                 "<rect x='%g' y='%g' width='%g' height='%g' fill='none' "
                 "stroke='black'/>\n",
                 L, T, W - L - R, H - T - B);
    std::fprintf(fp,
                 "<text x='%g' y='%g' font-family='sans-serif' font-size='12' "
                 "text-anchor='middle'>%s%s</text>\n",
                 L + (W - L - R) / 2, H - 12, xlabel.c_str(), logx ? " (log)" : "");
    std::fprintf(fp,
                 "<text x='14' y='%g' font-family='sans-serif' font-size='12' "
                 "text-anchor='middle' transform='rotate(-90 14 %g)'>%s%s</text>\n",
                 T + (H - T - B) / 2, T + (H - T - B) / 2, ylabel.c_str(),
                 logy ? " (log)" : "");
    // axis extremes
    std::fprintf(fp,
                 "<text x='%g' y='%g' font-family='sans-serif' font-size='10'>%s</text>\n",
                 L, H - B + 14, format_g17(xmin).substr(0, 8).c_str());
    std::fprintf(fp,
                 "<text x='%g' y='%g' font-family='sans-serif' font-size='10' "
                 "text-anchor='end'>%s</text>\n",
                 W - R, H - B + 14, format_g17(xmax).substr(0, 8).c_str());
    std::fprintf(fp,
                 "<text x='%g' y='%g' font-family='sans-serif' font-size='10' "
                 "text-anchor='end'>%s</text>\n",
                 L - 4, H - B, format_g17(ymin).substr(0, 8).c_str());
    std::fprintf(fp,
                 "<text x='%g' y='%g' font-family='sans-serif' font-size='10' "
                 "text-anchor='end'>%s</text>\n",
                 L - 4, T + 10, format_g17(ymax).substr(0, 8).c_str());

    int color = 0;
    for (const auto& s : series) {
        std::string pts;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (logx && s.x[i] <= 0.0) continue;
            if (logy && s.y[i] <= 0.0) continue;
            const double px = X.map(s.x[i], L, W - R);
            const double py = Y.map(s.y[i], H - B, T);
            pts += format_g17(px).substr(0, 8) + "," + format_g17(py).substr(0, 8) + " ";
        }
        const char* col = kPalette[color % 6];
        std::fprintf(fp,
                     "<polyline points='%s' fill='none' stroke='%s' stroke-width='1.5'/>\n",
                     pts.c_str(), col);
        std::fprintf(fp,
                     "<text x='%g' y='%g' font-family='sans-serif' font-size='11' "
                     "fill='%s'>%s</text>\n",
                     L + 8.0, T + 16.0 + 14.0 * color, col, s.name.c_str());
        ++color;
    }
    std::fprintf(fp, "</svg>\n");
    std::fclose(fp);
}

void write_svg_heatmap(const ScalarField& field, const std::string& title,
                       const std::string& path) {
    if (field.grid.dim != 2) throw Error("io", "heatmaps are 2d only");
    const std::int64_t nx = field.grid.shape[0], ny = field.grid.shape[1];
    const std::int64_t step = std::max<std::int64_t>(1, std::max(nx, ny) / 128);
    double vmin = 1e300, vmax = -1e300;
    for (double v : field.values) {
        vmin = std::min(vmin, v);
        vmax = std::max(vmax, v);
    }
    if (!(vmin < vmax)) vmax = vmin + 1.0;
    const double W = 560, H = 560, T = 30;
    const double cw = (W - 20) / std::ceil(double(nx) / step);
    const double ch = (H - T - 10) / std::ceil(double(ny) / step);
    std::FILE* fp = open_or_throw(path, "w");
    std::fprintf(fp,
                 "<svg xmlns='http://www.w3.org/2000/svg' width='%g' height='%g'>\n", W, H);
    std::fprintf(fp,
                 "<text x='%g' y='20' font-family='sans-serif' font-size='13' "
                 "text-anchor='middle'>%s (min %s, max %s)</text>\n",
                 W / 2, title.c_str(), format_g17(vmin).substr(0, 9).c_str(),
                 format_g17(vmax).substr(0, 9).c_str());
    for (std::int64_t j = 0; j < ny; j += step)
        for (std::int64_t i = 0; i < nx; i += step) {
            const double v = field.values[field.grid.index(i, j)];
            const double t = (v - vmin) / (vmax - vmin);
            const int r = static_cast<int>(255 * std::clamp(1.5 * t - 0.25, 0.0, 1.0));
            const int g = static_cast<int>(255 * std::clamp(1.0 - std::abs(2 * t - 1.0), 0.0, 1.0));
            const int b = static_cast<int>(255 * std::clamp(1.25 - 1.5 * t, 0.0, 1.0));
            std::fprintf(fp,
                         "<rect x='%g' y='%g' width='%g' height='%g' fill='rgb(%d,%d,%d)'/>\n",
                         10 + cw * (i / step), H - 10 - ch * (j / step + 1), cw + 0.5,
                         ch + 0.5, r, g, b);
        }
    std::fprintf(fp, "</svg>\n");
    std::fclose(fp);
}

void write_gnuplot_script(const std::vector<Series>& series, bool logx, bool logy,
                          const std::string& title, const std::string& path_base) {
    {
        std::FILE* fp = open_or_throw(path_base + ".dat", "w");
        std::size_t rows = 0;
        for (const auto& s : series) rows = std::max(rows, s.x.size());
        std::fprintf(fp, "# columns: per series (x y)\n");
        for (std::size_t r = 0; r < rows; ++r) {
            for (const auto& s : series) {
                if (r < s.x.size())
                    std::fprintf(fp, "%s %s ", format_g17(s.x[r]).c_str(),
                                 format_g17(s.y[r]).c_str());
                else
                    std::fprintf(fp, "nan nan ");
            }
            std::fprintf(fp, "\n");
        }
        std::fclose(fp);
    }
    std::FILE* fp = open_or_throw(path_base + ".gp", "w");
    std::fprintf(fp, "set title '%s'\n", title.c_str());
    if (logx) std::fprintf(fp, "set logscale x\n");
    if (logy) std::fprintf(fp, "set logscale y\n");
    std::fprintf(fp, "plot ");
    for (std::size_t s = 0; s < series.size(); ++s)
        std::fprintf(fp, "%s'%s.dat' using %zu:%zu with linespoints title '%s'",
                     s ? ", " : "", path_base.c_str(), 2 * s + 1, 2 * s + 2,
                     series[s].name.c_str());
    std::fprintf(fp, "\n");
    std::fclose(fp);
}

void write_run_record(const RunRecord& record, const std::string& path) {
    json j;
    j["subcommand"] = record.subcommand;
    j["config"] = json::parse(record.config_snapshot, nullptr, false);
    if (j["config"].is_discarded()) j["config"] = record.config_snapshot;
    j["input_hash"] = record.input_hash;
    j["seed"] = record.seed;
    j["threads"] = record.threads;
    j["wall_seconds"] = record.wall_seconds;
    j["artifacts"] = record.artifacts;
    for (const auto& [name, ok] : record.verdicts) j["verdicts"][name] = ok;
    j["exit_code"] = record.exit_code;
    dump_json(j, path);
}

}  // namespace fraclab::io
