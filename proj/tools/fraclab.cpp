// fraclab: experiment runner for the fractional-obstacle homogenization lab.
//
// Exit codes: 0 pass, 1 verdict failure, 2 config error, 3 numerical failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

#include "fraclab/io.hpp"
#include "fraclab/parallel.hpp"
#include "fraclab/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fraclab;

namespace {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require_keys(const json& j, const std::set<std::string>& allowed,
                  const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [key, _] : j.items())
        if (!allowed.count(key))
            throw ConfigError(where + ": unknown key '" + key + "'");
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("key '" + key + "' has the wrong type");
    }
}

Point get_point(const json& j, const std::string& key, Point fallback) {
    if (!j.contains(key)) return fallback;
    const auto& a = j.at(key);
    if (!a.is_array() || a.size() < 2) throw ConfigError("key '" + key + "' must be [x, y(, z)]");
    Point p{};
    for (std::size_t d = 0; d < a.size() && d < 3; ++d) p[d] = a[d].get<double>();
    return p;
}

CompactSetSpec parse_set(const json& j) {
    require_keys(j, {"shape", "radius", "center", "half_widths", "radius2", "center2"}, "T");
    const std::string shape = get_or<std::string>(j, "shape", "ball");
    if (shape == "ball")
        return CompactSetSpec::ball(get_or(j, "radius", 1.0), get_point(j, "center", {}));
    if (shape == "box")
        return CompactSetSpec::box(get_point(j, "half_widths", {1.0, 1.0, 1.0}),
                                   get_point(j, "center", {}));
    if (shape == "two_balls")
        return CompactSetSpec::two_balls(get_or(j, "radius", 1.0), get_point(j, "center", {}),
                                         get_or(j, "radius2", 1.0),
                                         get_point(j, "center2", {}));
    throw ConfigError("T.shape must be ball, box or two_balls");
}

Diffeomorphism parse_phi(const json& j) {
    require_keys(j, {"shear", "amp", "center", "width", "M", "nu"}, "phi");
    Diffeomorphism phi;
    phi.shear = get_or(j, "shear", 0.0);
    phi.amp = get_or(j, "amp", 0.0);
    phi.center = get_point(j, "center", {0.5, 0.5, 0.0});
    phi.width = get_or(j, "width", 0.35);
    phi.bound_M = get_or(j, "M", 2.0);
    phi.bound_nu = get_or(j, "nu", 0.5);
    return phi;
}

Anisotropy parse_anisotropy(const json& j) {
    require_keys(j, {"id", "strength", "axis"}, "anisotropy");
    Anisotropy a;
    const std::string id = get_or<std::string>(j, "id", "isotropic");
    if (id == "cos2") {
        a.id = Anisotropy::Id::Cos2;
        a.strength = get_or(j, "strength", 0.5);
        a.axis = get_point(j, "axis", {1.0, 0.0, 0.0});
    } else if (id != "isotropic") {
        throw ConfigError("anisotropy.id must be isotropic or cos2");
    }
    return a;
}

GeneratorSpec::Kind parse_kind(const std::string& kind) {
    if (kind == "cubic") return GeneratorSpec::Kind::Cubic;
    if (kind == "rescaled") return GeneratorSpec::Kind::Rescaled;
    if (kind == "diffeo_outside") return GeneratorSpec::Kind::DiffeoOutside;
    if (kind == "diffeo_inside") return GeneratorSpec::Kind::DiffeoInside;
    throw ConfigError("kind must be cubic, rescaled, diffeo_outside or diffeo_inside");
}

BBox parse_box(const json& j, const std::string& key) {
    if (!j.contains(key)) return BBox{{0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}, 2};
    const auto& a = j.at(key);
    if (!a.is_array() || a.size() != 2) throw ConfigError(key + " must be [[lo...],[hi...]]");
    BBox b;
    b.dim = static_cast<int>(a[0].size());
    for (int d = 0; d < b.dim; ++d) {
        b.lo[d] = a[0][d].get<double>();
        b.hi[d] = a[1][d].get<double>();
    }
    return b;
}

struct RunContext {
    std::string out_dir;
    io::RunRecord record;
    std::vector<io::Series> gap_series;

    std::string artifact(const std::string& name) {
        const std::string path = out_dir + "/" + name;
        record.artifacts.push_back(path);
        return path;
    }
    void verdict(const std::string& name, bool ok) {
        record.verdicts.emplace_back(name, ok);
        std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", name.c_str());
    }
    bool all_pass() const {
        for (const auto& [_, ok] : record.verdicts)
            if (!ok) return false;
        return true;
    }
};

// ---------------------------------------------------------------------------

int run_delone(const json& cfg, std::uint64_t seed, RunContext& ctx) {
    require_keys(cfg, {"kind", "epsilon", "box", "margin", "jitter", "phi", "r_user",
                       "hist_cell", "trials", "probe_spacing"},
                 "delone config");
    GeneratorSpec spec;
    spec.kind = parse_kind(get_or<std::string>(cfg, "kind", "cubic"));
    spec.epsilon = get_or(cfg, "epsilon", 0.125);
    spec.box = parse_box(cfg, "box");
    spec.margin = get_or(cfg, "margin", -1.0);
    spec.base_jitter = get_or(cfg, "jitter", 0.3);
    if (cfg.contains("phi")) spec.phi = parse_phi(cfg["phi"]);
    const int trials = get_or(cfg, "trials", 1);
    const double hist_cell = get_or(cfg, "hist_cell", 0.25);

    const Domain U = Domain::rect(spec.box.lo, spec.box.hi, spec.box.dim);
    bool counting_all = true;
    EmpiricalLimitData first_limit;
    for (int t = 0; t < trials; ++t) {
        const PointSet ps = generate(spec, seed + static_cast<std::uint64_t>(t));
        const DeloneCertificate cert =
            delone_certificate(ps, U, get_or(cfg, "probe_spacing", 0.0));
        const IndexSets idx = index_sets(ps, U, cert, cert.r_packing / 4.0);
        const CountingReport rep = counting_check(ps, U, idx, cert);
        counting_all = counting_all && rep.pass;
        if (t == 0) {
            io::write_pointset_csv(ps, ctx.artifact("points.csv"));
            const double r_user = get_or(cfg, "r_user", cert.r_packing);
            first_limit = estimate_limit_data(ps, U, r_user, hist_cell);
            io::write_limit_data_json(first_limit, ctx.artifact("limit_data.json"));
        }
    }
    ctx.verdict("counting bounds (" + std::to_string(trials) + " trials)", counting_all);
    std::printf("theta_hat = %s (interior), %s (all points)\n",
                io::format_g17(first_limit.theta_hat).c_str(),
                io::format_g17(first_limit.theta_hat_all).c_str());
    return ctx.all_pass() ? 0 : 1;
}

int run_capacity(const json& cfg, RunContext& ctx) {
    require_keys(cfg, {"T", "r_list", "R_ratio", "s", "p", "anisotropy", "resolution",
                       "cg_tol", "defect_R_list", "defect_r"},
                 "capacity config");
    const CompactSetSpec T = cfg.contains("T") ? parse_set(cfg["T"]) : CompactSetSpec::ball(0.3);
    const FractionalKernel kernel(
        2, get_or(cfg, "s", 0.55), get_or(cfg, "p", 2.0),
        cfg.contains("anisotropy") ? parse_anisotropy(cfg["anisotropy"]) : Anisotropy{});
    std::vector<double> r_list = get_or<std::vector<double>>(cfg, "r_list", {2.0, 4.0, 8.0});
    const CapacityTable table =
        capacity_limit_table(T, r_list, get_or(cfg, "R_ratio", 1.5), kernel,
                             get_or<std::int64_t>(cfg, "resolution", 192),
                             get_or(cfg, "cg_tol", 1e-9));
    io::write_capacity_table_csv(table, ctx.artifact("capacity.csv"));
    io::Series curve{"C(T,B_r)", {}, {}};
    for (const auto& row : table.rows) {
        curve.x.push_back(row.r);
        curve.y.push_back(row.value_truncated);
    }
    io::write_svg_line_plot({curve}, false, false, "truncated capacity vs r", "r", "C(T,B_r)",
                            ctx.artifact("capacity_vs_r.svg"));
    io::write_gnuplot_script({curve}, false, false, "truncated capacity vs r",
                             ctx.out_dir + "/capacity_vs_r");
    ctx.record.artifacts.push_back(ctx.out_dir + "/capacity_vs_r.gp");
    ctx.verdict("C(T,B_r) monotone non-increasing", table.monotone);
    ctx.verdict("Cauchy trend of the truncation sweep", table.cauchy_trend);
    ctx.verdict("annulus value below the truncated value", table.annulus_ordering);
    std::printf("cap estimate = %s (+/- %s), annulus constant fit = %s\n",
                io::format_g17(table.cap_estimate).c_str(),
                io::format_g17(table.cauchy_gap).c_str(),
                io::format_g17(table.annulus_c_fit).c_str());

    if (cfg.contains("defect_R_list")) {
        const DefectDecayReport rep = locality_defect_decay_check(
            T, get_or(cfg, "defect_r", r_list.front()),
            cfg["defect_R_list"].get<std::vector<double>>(), kernel,
            get_or<std::int64_t>(cfg, "resolution", 192));
        ctx.verdict("locality defect decay", rep.decreasing && rep.tail_small);
    }
    return ctx.all_pass() ? 0 : 1;
}

GammaStudyConfig parse_study(const json& cfg, std::uint64_t seed) {
    require_keys(cfg, {"epsilon_list", "s", "p", "anisotropy", "U", "lattice", "jitter",
                       "phi", "r_factor", "T", "f", "grid", "capT", "theta", "beta", "cap",
                       "threshold", "cg_tol", "collar", "keep_minimizers"},
                 "homogenize config");
    GammaStudyConfig sc;
    sc.epsilon_list = get_or<std::vector<double>>(cfg, "epsilon_list", sc.epsilon_list);
    sc.s = get_or(cfg, "s", sc.s);
    sc.p = get_or(cfg, "p", sc.p);
    if (cfg.contains("anisotropy")) sc.aniso = parse_anisotropy(cfg["anisotropy"]);
    const BBox ub = parse_box(cfg, "U");
    sc.U_lo = ub.lo;
    sc.U_hi = ub.hi;
    sc.dim = ub.dim;
    sc.lattice = parse_kind(get_or<std::string>(cfg, "lattice", "cubic"));
    sc.base_jitter = get_or(cfg, "jitter", sc.base_jitter);
    if (cfg.contains("phi")) sc.phi = parse_phi(cfg["phi"]);
    sc.r_factor = get_or(cfg, "r_factor", sc.r_factor);
    if (cfg.contains("T")) sc.T = parse_set(cfg["T"]);
    if (cfg.contains("f")) {
        require_keys(cfg["f"], {"center", "width", "mass"}, "f");
        sc.f_center = get_point(cfg["f"], "center", sc.f_center);
        sc.f_width = get_or(cfg["f"], "width", sc.f_width);
        sc.f_mass = get_or(cfg["f"], "mass", sc.f_mass);
    }
    if (cfg.contains("grid")) {
        require_keys(cfg["grid"], {"lambda_over_h", "n_min", "n_max", "override",
                                   "hom_resolution"},
                     "grid");
        sc.lambda_over_h = get_or(cfg["grid"], "lambda_over_h", sc.lambda_over_h);
        sc.n_min = get_or<std::int64_t>(cfg["grid"], "n_min", sc.n_min);
        sc.n_max = get_or<std::int64_t>(cfg["grid"], "n_max", sc.n_max);
        sc.grid_override =
            get_or<std::vector<std::int64_t>>(cfg["grid"], "override", {});
        sc.hom_resolution = get_or<std::int64_t>(cfg["grid"], "hom_resolution", 0);
    }
    sc.capT_value = get_or(cfg, "capT", -1.0);
    sc.theta_value = get_or(cfg, "theta", -1.0);
    sc.beta_constant = get_or(cfg, "beta", -1.0);
    if (cfg.contains("cap")) {
        require_keys(cfg["cap"], {"resolution", "r_list", "R_ratio"}, "cap");
        sc.cap_resolution = get_or<std::int64_t>(cfg["cap"], "resolution", sc.cap_resolution);
        sc.cap_r_list = get_or<std::vector<double>>(cfg["cap"], "r_list", sc.cap_r_list);
        sc.cap_R_ratio = get_or(cfg["cap"], "R_ratio", sc.cap_R_ratio);
    }
    sc.threshold = get_or(cfg, "threshold", sc.threshold);
    sc.cg_tol = get_or(cfg, "cg_tol", sc.cg_tol);
    sc.collar_width = get_or(cfg, "collar", sc.collar_width);
    sc.keep_minimizers = get_or(cfg, "keep_minimizers", false);
    sc.seed = seed;
    return sc;
}

int run_homogenize(const json& cfg, std::uint64_t seed, RunContext& ctx) {
    const GammaStudyConfig sc = parse_study(cfg, seed);
    const ConvergenceStudy study = gamma_study(sc);
    io::write_minima_csv(study, ctx.artifact("minima.csv"));
    io::write_study_json(study, ctx.artifact("study.json"));

    io::Series gaps{"relative gap", {}, {}};
    for (const auto& rec : study.records) {
        gaps.x.push_back(rec.epsilon);
        gaps.y.push_back(rec.gap_rel);
    }
    io::write_svg_line_plot({gaps}, true, true, "minima gap vs epsilon", "epsilon",
                            "|m_j - m_inf| / |m_inf|", ctx.artifact("gap_vs_eps.svg"));
    io::write_gnuplot_script({gaps}, true, true, "minima gap vs epsilon",
                             ctx.out_dir + "/gap_vs_eps");
    ctx.record.artifacts.push_back(ctx.out_dir + "/gap_vs_eps.gp");
    io::write_svg_heatmap(study.hom_minimizer, "homogenized minimizer",
                          ctx.artifact("minimizer_hom.svg"));

    std::printf("m_inf = %s (band %s), final gap = %s\n",
                io::format_g17(study.m_inf).c_str(),
                io::format_g17(study.m_inf_band).c_str(),
                io::format_g17(study.final_gap).c_str());
    std::printf("note: %s\n", study.note.c_str());
    ctx.verdict("gap non-increasing over the sweep", study.gaps_nonincreasing);
    ctx.verdict("final gap within threshold", study.final_gap <= study.threshold);
    return ctx.all_pass() ? 0 : 1;
}

int run_random(const json& cfg, std::uint64_t seed, RunContext& ctx) {
    require_keys(cfg, {"task", "epsilon_list", "s", "p", "rho_min", "rho_max", "seeds",
                       "delta_exponent", "kind", "epsilon", "M", "mixture", "grid",
                       "cap_resolution", "V"},
                 "random config");
    const std::string task = get_or<std::string>(cfg, "task", "ergodic");

    if (task == "ergodic") {
        StationaryProcess proc;
        proc.base_seed = seed;
        proc.rho_min = get_or(cfg, "rho_min", 0.5);
        proc.rho_max = get_or(cfg, "rho_max", 1.0);
        proc.cap_unit = 1.0;
        proc.n_minus_sp = 2.0 - get_or(cfg, "s", 0.55) * get_or(cfg, "p", 2.0);
        const BBox vb = parse_box(cfg, "V");
        const Domain V = Domain::rect(vb.lo, vb.hi, vb.dim);
        const ErgodicReport rep = ergodic_average(
            proc, V, get_or<std::vector<double>>(cfg, "epsilon_list", {0.02, 0.01}),
            get_or(cfg, "seeds", 5));
        io::Series running{"running mean error", {}, {}};
        for (const auto& rec : rep.records) {
            running.x.push_back(static_cast<double>(rec.n_sites));
            running.y.push_back(std::abs(rec.mean - rep.expected_gamma));
        }
        io::write_svg_line_plot({running}, true, true, "ergodic mean error vs N", "N",
                                "|mean - E|", ctx.artifact("ergodic_mean.svg"));
        ctx.verdict("ergodic gate (<= 1 failing seed)", rep.pass);
        return ctx.all_pass() ? 0 : 1;
    }
    if (task == "separation") {
        StationaryProcess proc;
        proc.rho_max = get_or(cfg, "rho_max", 0.35);
        proc.rho_min = std::min(proc.rho_max, get_or(cfg, "rho_min", 0.2));
        const SeparationReport rep = separation_check(
            proc, get_or(cfg, "delta_exponent", 1.3),
            get_or<std::vector<double>>(cfg, "epsilon_list", {0.25, 0.125, 0.0625}), 2,
            get_or(cfg, "s", 0.55) * get_or(cfg, "p", 2.0));
        ctx.verdict("strong separation", rep.pass);
        if (!rep.note.empty()) std::printf("%s\n", rep.note.c_str());
        return ctx.all_pass() ? 0 : 1;
    }
    if (task == "delone") {
        RandomDeloneParams prm;
        const std::string kind = get_or<std::string>(cfg, "kind", "perturbed_lattice");
        prm.kind = kind == "perturbed_lattice" ? RandomDeloneKind::PerturbedLattice
                   : kind == "diffeo_outside"  ? RandomDeloneKind::StochasticDiffeoOutside
                                               : RandomDeloneKind::StochasticDiffeoInside;
        prm.epsilon = get_or(cfg, "epsilon", 0.0625);
        prm.M = get_or(cfg, "M", 0.4);
        const Domain U = Domain::rect({0, 0, 0}, {1, 1, 1}, 2);
        const RandomDeloneReport rep = random_delone(prm, seed, U);
        io::write_pointset_csv(rep.points, ctx.artifact("random_points.csv"));
        std::printf("r_packing = %s, theta_hat = %s, beta L1 distance to uniform = %s\n",
                    io::format_g17(rep.certificate.r_packing).c_str(),
                    io::format_g17(rep.theta_hat).c_str(),
                    io::format_g17(rep.beta_l1_to_uniform).c_str());
        ctx.verdict("Delone certificate", rep.certificate.r_packing > 0.0);
        if (rep.stationarity_applicable)
            ctx.verdict("sequential stationarity exact", rep.stationarity_exact);
        return ctx.all_pass() ? 0 : 1;
    }
    if (task == "study" || task == "control") {
        RandomGammaConfig rc;
        rc.epsilon_list =
            get_or<std::vector<double>>(cfg, "epsilon_list", rc.epsilon_list);
        rc.s = get_or(cfg, "s", rc.s);
        rc.p = get_or(cfg, "p", rc.p);
        rc.rho_min = get_or(cfg, "rho_min", rc.rho_min);
        rc.rho_max = get_or(cfg, "rho_max", rc.rho_max);
        rc.mixture = task == "control" || get_or(cfg, "mixture", false);
        if (cfg.contains("seeds")) {
            rc.omega_seeds.clear();
            for (int i = 0; i < cfg["seeds"].get<int>(); ++i)
                rc.omega_seeds.push_back(seed + static_cast<std::uint64_t>(i));
        }
        if (cfg.contains("grid")) {
            require_keys(cfg["grid"], {"lambda_over_h", "n_min", "n_max"}, "grid");
            rc.lambda_over_h = get_or(cfg["grid"], "lambda_over_h", rc.lambda_over_h);
            rc.n_min = get_or<std::int64_t>(cfg["grid"], "n_min", rc.n_min);
            rc.n_max = get_or<std::int64_t>(cfg["grid"], "n_max", rc.n_max);
        }
        rc.cap_resolution = get_or<std::int64_t>(cfg, "cap_resolution", rc.cap_resolution);
        const RandomGammaReport rep = random_gamma_study(rc);
        io::write_random_aggregate_csv(rep, ctx.artifact("random_minima.csv"));
        io::write_random_seed_json(rep, ctx.out_dir);
        if (rc.mixture) {
            ctx.verdict("bimodal minima under the mixture control", rep.bimodal);
        } else {
            ctx.verdict("cross-seed spread below the epsilon gap",
                        rep.deterministic_limit_ok);
        }
        return ctx.all_pass() ? 0 : 1;
    }
    throw ConfigError("task must be ergodic, separation, delone, study or control");
}

int run_check(RunContext& ctx) {
    // Small-scale invariant sweep touching every module; budget ~2 minutes.
    const FractionalKernel k(2, 0.55, 2.0);

    {  // delone_geometry
        GeneratorSpec spec;
        spec.epsilon = 0.125;
        const PointSet ps = generate(spec, 1);
        const Domain U = Domain::rect({0, 0, 0}, {1, 1, 1}, 2);
        const DeloneCertificate cert = delone_certificate(ps, U, 0.0);
        ctx.verdict("geometry: cubic certificate",
                    std::abs(cert.r_packing - 0.0625) < 1e-12 &&
                        std::abs(cert.R_covering - 0.0625 * std::sqrt(2.0)) < 2e-3);
        const IndexSets idx = index_sets(ps, U, cert, cert.r_packing / 4.0);
        ctx.verdict("geometry: counting bounds", counting_check(ps, U, idx, cert).pass);
    }
    {  // nonlocal_energy
        BBox box{{0, 0, 0}, {1, 1, 0}, 2};
        const UniformGrid g = UniformGrid::over(box, 48);
        ScalarField u = ScalarField::zeros(g);
        rng::Sequence rs(2);
        for (auto& v : u.values) v = rs.next_in(-1.0, 1.0);
        const ScalarField vf = apply_operator(u, k, mask_all(g), OperatorMethod::Fft);
        const ScalarField vd = apply_operator(u, k, mask_all(g), OperatorMethod::Direct);
        double rel = 0.0, scale = 0.0;
        for (std::int64_t i = 0; i < g.size(); ++i) {
            rel = std::max(rel, std::abs(vf.values[i] - vd.values[i]));
            scale = std::max(scale, std::abs(vd.values[i]));
        }
        ctx.verdict("energy: fft/direct operator agreement", rel / scale <= 1e-10);
    }
    {  // capacity
        const CapacityTable table =
            capacity_limit_table(CompactSetSpec::ball(0.3), {2.0, 4.0}, 1.5, k, 96);
        ctx.verdict("capacity: truncation monotone", table.monotone);
    }
    {  // homogenization
        GammaStudyConfig sc;
        sc.epsilon_list = {1.0 / 3.0};
        sc.lambda_over_h = 2.0;
        sc.n_max = 320;
        sc.cap_resolution = 96;
        sc.threshold = 1.0;
        const ConvergenceStudy study = gamma_study(sc);
        ctx.verdict("homogenization: sweep runs and records",
                    study.records.size() == 1 && std::isfinite(study.final_gap));
    }
    {  // stochastic
        StationaryProcess proc;
        proc.base_seed = 7;
        proc.cap_unit = 2.0;
        const Domain V = Domain::rect({0, 0, 0}, {1, 1, 1}, 2);
        const ErgodicReport rep = ergodic_average(proc, V, {1.0 / 40.0}, 3);
        ctx.verdict("stochastic: ergodic gate", rep.pass);
    }
    return ctx.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fraclab: aperiodic fractional obstacle homogenization laboratory"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "fraclab_out";
    std::uint64_t seed = 1;
    int threads = 0;

    for (const char* name : {"delone", "capacity", "homogenize", "random", "check"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON config file");
        sub->add_option("--seed", seed, "base RNG seed");
        sub->add_option("--threads", threads, "worker threads (FRACLAB_THREADS fallback)");
        sub->add_option("--out", out_dir, "output directory");
    }

    CLI11_PARSE(app, argc, argv);
    const std::string sub = app.get_subcommands().front()->get_name();

    if (threads > 0) set_thread_count(threads);

    json cfg = json::object();
    std::string snapshot = "{}";
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) {
            std::fprintf(stderr, "config error: cannot open %s\n", config_path.c_str());
            return 2;
        }
        std::stringstream ss;
        ss << in.rdbuf();
        snapshot = ss.str();
        cfg = json::parse(snapshot, nullptr, false);
        if (cfg.is_discarded()) {
            std::fprintf(stderr, "config error: %s is not valid JSON\n", config_path.c_str());
            return 2;
        }
    }

    std::error_code ec;
    fs::create_directories(out_dir, ec);

    RunContext ctx;
    ctx.out_dir = out_dir;
    ctx.record.subcommand = sub;
    ctx.record.config_snapshot = snapshot;
    ctx.record.input_hash = io::hash_hex(snapshot + "|seed=" + std::to_string(seed));
    ctx.record.seed = seed;
    ctx.record.threads = thread_count();

    const auto t0 = std::chrono::steady_clock::now();
    int code = 0;
    try {
        if (sub == "delone") code = run_delone(cfg, seed, ctx);
        else if (sub == "capacity") code = run_capacity(cfg, ctx);
        else if (sub == "homogenize") code = run_homogenize(cfg, seed, ctx);
        else if (sub == "random") code = run_random(cfg, seed, ctx);
        else code = run_check(ctx);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        code = 2;
    } catch (const Error& e) {
        std::fprintf(stderr, "numerical failure in %s: %s\n", e.module().c_str(), e.what());
        code = 3;
    } catch (const json::exception& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        code = 2;
    }
    ctx.record.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    ctx.record.exit_code = code;
    try {
        io::write_run_record(ctx.record, out_dir + "/run_record.json");
    } catch (const Error&) {
        // record writing must never mask the run outcome
    }
    return code;
}
