#pragma once

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "config.hpp"
#include "harness.hpp"
#include "integral_suite.hpp"

namespace liouville::cli {

namespace fs = std::filesystem;
using nlohmann::json;

enum ExitCode : int { kOk = 0, kCheckFailed = 1, kUsage = 2 };

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::vector<double> parse_list(const std::string& text, std::size_t n, const std::string& what) {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stod(cell, &used));
            if (used != cell.size()) throw std::invalid_argument(cell);
        } catch (const std::exception&) {
            throw UsageError(what + ": malformed number '" + cell + "'");
        }
    }
    if (v.size() != n) throw UsageError(what + ": expected " + std::to_string(n) + " comma-separated numbers");
    return v;
}

inline fs::path prepare_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    const fs::path probe = dir / ".write_test";
    std::ofstream os(probe);
    if (ec || !os) throw UsageError("output directory not writable: " + dir.string());
    os.close();
    fs::remove(probe, ec);
    return dir;
}

inline void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os || !(os << text)) throw UsageError("cannot write " + path.string());
}

inline json potential_json(const PotentialCoeffs& c) {
    return {{"A0", c.A0}, {"A1", c.A1}, {"A2", c.A2}, {"D0", c.D0}, {"D1", c.D1}, {"D2", c.D2}, {"D3", c.D3}};
}

inline json point_json(std::optional<Point> p) { return p ? json::array({p->x1, p->x2}) : json(nullptr); }

inline std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

// --- subcommands -------------------------------------------------------------------------------

inline int check_potential(const RunConfig& cfg, std::ostream& out) {
    const HypothesisReport rep = check_hypotheses(cfg.potential, cfg.check_grid);
    out << "positivity   " << (rep.positive ? "ok" : "FAIL") << "  (min V = " << fmt(rep.positivity_margin) << ")\n"
        << "evenness     " << (rep.even ? "ok" : "FAIL") << '\n'
        << "V(0) = 1     " << (rep.normalized ? "ok" : "FAIL") << '\n'
        << "A0=2,A1=0,A2=4 " << (rep.constraint ? "ok" : "FAIL") << '\n';
    for (const auto& v : rep.violations) out << "violation: " << v << '\n';
    return rep.all_pass() ? kOk : kCheckFailed;
}

inline int find_zeros_cmd(const RunConfig& cfg, const fs::path& dir, std::ostream& out) {
    const ZeroSearch zs = find_zeros(cfg.potential, cfg.box, cfg.starts, cfg.zero_tol);
    std::ostringstream csv;
    csv << "xi1,xi2,residual,degree,eig1,eig2,type,stable\n" << std::setprecision(17);
    if (zs.degenerate_field) out << "reduced field vanishes identically; no isolated zeros\n";
    out << std::left << std::setw(24) << "xi" << std::setw(12) << "|F|" << std::setw(8) << "degree" << std::setw(26) << "eigenvalues"
        << "type\n";
    for (const auto& z : zs.zeros) {
        std::ostringstream xi, ev;
        xi << std::setprecision(8) << '(' << z.xi.x1 << ", " << z.xi.x2 << ')';
        ev << std::setprecision(8) << '{' << z.hessian_eigs[0] << ", " << z.hessian_eigs[1] << '}';
        std::ostringstream res;
        res << std::setprecision(3) << z.residual;
        out << std::setw(24) << xi.str() << std::setw(12) << res.str() << std::setw(8) << z.degree << std::setw(26) << ev.str()
            << to_string(z.type) << (z.stable ? "" : " (degree 0)") << '\n';
        csv << z.xi.x1 << ',' << z.xi.x2 << ',' << z.residual << ',' << z.degree << ',' << z.hessian_eigs[0] << ','
            << z.hessian_eigs[1] << ',' << to_string(z.type) << ',' << (z.stable ? 1 : 0) << '\n';
    }
    write_text(dir / "zeros.csv", csv.str());
    return kOk;
}

inline int verify_integrals(const RunConfig& cfg, const fs::path& dir, std::ostream& out) {
    const auto rows = integral_suite(cfg.integral_tol);
    std::ostringstream csv;
    write_suite_csv(rows, csv);
    write_text(dir / "integrals.csv", csv.str());
    out << csv.str();
    for (const auto& r : rows)
        if (!r.pass) return kCheckFailed;
    return kOk;
}

struct SolveFlags {
    double lambda = 0;
    std::optional<Point> b;
    bool deflate = false;
};

inline int solve_cmd(const RunConfig& cfg, const SolveFlags& f, const fs::path& dir, std::ostream& out) {
    if (!(f.lambda > 0)) throw UsageError("solve: --lambda must be positive");
    const PotentialCoeffs& c = cfg.potential;
    json report;
    report["lambda"] = f.lambda;
    report["potential"] = potential_json(c);
    std::optional<Point> b = f.b;
    if (!b) {
        // Locate the zero of the multiplier map nearest the reduced-field target.
        const std::optional<Point> xi0 = reduced_target(c);
        report["xi0"] = point_json(xi0);
        NewtonOptions nopt;
        nopt.tol = cfg.newton_tol;
        const MultiplierMap map(f.lambda, c, cfg.n_r, cfg.n_theta, nopt);
        const Eigen::Vector2d start = xi0 ? Eigen::Vector2d(xi0->x1, xi0->x2) : Eigen::Vector2d::Zero();
        BranchOptions bopt;
        bopt.newton = nopt;
        const BranchPoint bp = find_branch(map, start, bopt, Vec());
        report["branch"] = {{"converged", bp.converged}, {"xi", {bp.xi(0), bp.xi(1)}}, {"message", bp.message}};
        b = bp.converged ? bp.b : map.b_of(start);
        if (!bp.converged) out << "warning: no zero of the multiplier map found (" << bp.message << "); starting from the predicted centre\n";
    }
    SolveConfig sc;
    sc.lambda = f.lambda;
    sc.b = b;
    sc.deflate_radial = f.deflate;
    sc.n_r = cfg.n_r;
    sc.n_theta = cfg.n_theta;
    sc.newton_tol = cfg.newton_tol;
    sc.max_iter = cfg.max_iter;
    sc.gmres_tol = cfg.gmres_tol;
    const Background bg = make_background(sc, c);
    const SolveResult r = newton_solve(sc, c);
    report["start_b"] = point_json(b);
    report["converged"] = r.converged;
    report["iterations"] = r.iterations;
    report["residual_history"] = r.residual_history;
    report["residual_floor"] = r.residual_floor;
    report["quadratic_certificate"] = {{"ok", r.certificate.ok}, {"max_ratio", r.certificate.max_ratio}, {"pairs", r.certificate.pairs}};
    report["message"] = r.message;
    out << "newton: " << (r.converged ? "converged" : "FAILED") << " in " << r.iterations << " iterations, residual " << fmt(r.residual)
        << '\n';
    if (!r.converged) {
        if (std::isfinite(r.min_sv)) report["min_sv"] = r.min_sv;
        write_text(dir / "solve.json", report.dump(2) + "\n");
        return kCheckFailed;
    }
    dskf::save(r.w, (dir / "w.dskf").string());
    dskf::export_csv(r.w, (dir / "w.csv").string());
    const DiskField u = pull_back(r.w);
    dskf::export_csv(u, (dir / "u.csv").string());

    const RefinementCheck ref = grid_doubling_check(bg, r.phi, NewtonOptions::from(sc));
    report["grid_doubling"] = {{"fine_converged", ref.fine_converged}, {"max_diff", ref.max_diff}, {"relative_to_phi", ref.relative}};
    out << "grid doubling: sup |w_n - w_2n| = " << fmt(ref.max_diff) << " (" << fmt(ref.relative) << " of sup |phi|)\n";

    const MassReport mass = mass_identity(r.w, f.lambda, c);
    const MaximaCensus census = maxima_census(u, f.lambda, c);
    report["mass"] = {{"x_side", mass.x_side}, {"y_side", mass.y_side}, {"concentration", mass.concentration}};
    json maxima = json::array();
    for (const Point& p : census.locations) maxima.push_back({p.x1, p.x2});
    report["maxima"] = {{"count", census.count}, {"locations", maxima}, {"antipodal", census.antipodal}, {"radial", census.radial}};
    try {
        const BubbleFit fit = fit_bubble(r.w);
        report["bubble_fit"] = {{"delta", fit.params.delta}, {"b", {fit.params.b.x1, fit.params.b.x2}}, {"rms", fit.rms_residual},
                                {"low_confidence", fit.low_confidence}};
        out << "bubble fit: b = (" << fmt(fit.params.b.x1) << ", " << fmt(fit.params.b.x2) << "), delta = " << fmt(fit.params.delta) << '\n';
    } catch (const std::exception& e) {
        report["bubble_fit"] = {{"error", e.what()}};
    }
    out << "mass lambda int V e^u = " << fmt(mass.x_side) << " (16 pi = " << fmt(16 * std::numbers::pi) << "), maxima: " << census.count
        << (census.antipodal ? " antipodal" : "") << '\n';
    write_text(dir / "solve.json", report.dump(2) + "\n");
    return ref.fine_converged ? kOk : kCheckFailed;
}

struct SweepFlags {
    std::optional<double> lambda_max, lambda_min, ratio;
};

inline int sweep_cmd(RunConfig cfg, const SweepFlags& f, const fs::path& dir, std::ostream& out) {
    if (f.lambda_max) cfg.lambda_max = *f.lambda_max;
    if (f.lambda_min) cfg.lambda_min = *f.lambda_min;
    if (f.ratio) cfg.ratio = *f.ratio;
    try {
        cfg.validate();
    } catch (const ConfigError& e) {
        throw UsageError(e.what());
    }
    SweepConfig sc;
    sc.coeffs = cfg.potential;
    sc.xi0 = reduced_target(cfg.potential);
    sc.lambda_max = cfg.lambda_max;
    sc.lambda_min = cfg.lambda_min;
    sc.ratio = cfg.ratio;
    sc.n_r = cfg.n_r;
    sc.n_theta = cfg.n_theta;
    sc.newton_tol = cfg.newton_tol;
    sc.compute_min_sv = cfg.compute_min_sv;
    sc.seed = static_cast<unsigned>(cfg.seed);
    const SweepResult s = run_sweep(sc);
    std::ostringstream csv;
    write_sweep_csv(s, csv);
    write_text(dir / "sweep.csv", csv.str());
    write_text(dir / "config.ini", serialize_config(cfg));
    json rows = json::array();
    for (const auto& r : s.rows)
        rows.push_back({{"lambda", r.lambda},
                        {"converged", r.converged},
                        {"xi", {r.xi(0), r.xi(1)}},
                        {"b_branch", {r.b_branch.x1, r.b_branch.x2}},
                        {"delta_fit", r.delta_fit},
                        {"fit_rms", r.fit_rms},
                        {"mass_y", r.mass_y},
                        {"concentration", r.concentration},
                        {"maxima", r.maxima},
                        {"antipodal_error", r.antipodal_error},
                        {"residual", r.residual},
                        {"branch_gap", r.branch_gap},
                        {"message", r.message}});
    write_text(dir / "sweep_rows.json", json{{"xi0", point_json(sc.xi0)}, {"rows", rows}}.dump(2) + "\n");
    out << csv.str();
    return s.terminal() ? kOk : kCheckFailed;
}

inline json summary_json(const SweepSummary& sm, const PotentialCoeffs& c, std::optional<Point> xi0) {
    json j;
    j["potential"] = potential_json(c);
    j["xi0"] = point_json(xi0);
    j["converged_rows"] = sm.converged_rows;
    j["terminal_lambda"] = sm.terminal_lambda;
    json errs;
    errs["mass_rel"] = sm.mass.terminal_rel_error;
    if (sm.scaling) {
        errs[sm.scaling->has_target ? "btilde_rel" : "btilde_norm"] = sm.scaling->terminal_error;
        errs["btilde"] = {sm.scaling->terminal_btilde.x1, sm.scaling->terminal_btilde.x2};
    }
    j["terminal_errors"] = errs;
    json ex = json::object();
    if (sm.phi_fit) ex["phi_h1"] = sm.phi_fit->exponent;
    j["fitted_exponents"] = ex;
    json flags;
    flags["two_antipodal_maxima"] = sm.terminal_two_maxima;
    flags["mass_within_5pct"] = sm.mass.within_5_percent;
    flags["btilde_within_20pct"] = sm.scaling && sm.scaling->has_target ? json(sm.btilde_within(0.2)) : json(nullptr);
    flags["delta_over_b_decreasing"] = sm.scaling ? json(sm.scaling->delta_over_b_decreasing) : json(false);
    flags["phi_exponent_ge_1_8"] = sm.phi_fit ? json(sm.phi_fit->exponent >= 1.8) : json(false);
    flags["min_sv_log_spread_lt_0_5"] = std::isfinite(sm.min_sv_log_spread) ? json(sm.min_sv_log_spread < 0.5) : json(false);
    if (sm.scaling) j["notes"] = {{"delta_over_b_decreasing_from_row", sm.scaling->first_decreasing_row}, {"scaling", sm.scaling->note}};
    j["pass_flags"] = flags;
    return j;
}

inline int report_cmd(const RunConfig& base, const fs::path& run_dir, std::ostream& out) {
    const fs::path csv = run_dir / "sweep.csv";
    std::ifstream in(csv);
    if (!in) throw UsageError("report: cannot read " + csv.string());
    const RunConfig cfg = fs::exists(run_dir / "config.ini") ? load_config(run_dir / "config.ini") : base;
    const SweepResult s = read_sweep_csv(in);
    const std::optional<Point> xi0 = reduced_target(cfg.potential);
    const json j = summary_json(summarize(s, xi0), cfg.potential, xi0);
    prepare_dir(run_dir);
    write_text(run_dir / "report.json", j.dump(2) + "\n");
    out << j.dump(2) << '\n';
    for (const auto& [k, v] : j["pass_flags"].items())
        if (v.is_boolean() && !v.get<bool>()) return kCheckFailed;
    return kOk;
}

// --- entry point -------------------------------------------------------------------------------

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Blow-up solutions of a singular Liouville problem on the unit disk"};
    app.require_subcommand(1);
    std::string config_path, out_dir;
    app.add_option("--config", config_path, "INI run configuration")->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "output directory (overrides [run] output_dir)");

    int grid = 0;
    auto* check = app.add_subcommand("check-potential", "check the hypotheses on V");
    check->add_option("--grid", grid, "validation grid size")->check(CLI::PositiveNumber);

    std::string box;
    int starts = 0;
    double ztol = 0;
    auto* zeros = app.add_subcommand("find-zeros", "zeros of the reduced vector field");
    zeros->add_option("--box", box, "search box x_min,x_max,y_min,y_max");
    zeros->add_option("--starts", starts, "Newton starts per axis")->check(CLI::PositiveNumber);
    zeros->add_option("--tol", ztol, "residual tolerance")->check(CLI::PositiveNumber);

    double itol = 0;
    auto* integrals = app.add_subcommand("verify-integrals", "bubble integral identities and rates");
    integrals->add_option("--tol", itol, "relative tolerance of the exact identities")->check(CLI::PositiveNumber);

    SolveFlags sf;
    std::string bstr;
    auto* solve = app.add_subcommand("solve", "solve at one lambda");
    solve->add_option("--lambda", sf.lambda, "lambda")->required()->check(CLI::PositiveNumber);
    solve->add_option("--b", bstr, "bubble centre x,y of the initial guess");
    solve->add_flag("--deflate", sf.deflate, "deflate the branch reached from the symmetric seed");

    SweepFlags wf;
    auto* sweep = app.add_subcommand("sweep", "continuation in lambda");
    sweep->add_option("--lambda-max", wf.lambda_max)->check(CLI::PositiveNumber);
    sweep->add_option("--lambda-min", wf.lambda_min)->check(CLI::PositiveNumber);
    sweep->add_option("--ratio", wf.ratio)->check(CLI::Range(0.0, 1.0));

    std::string run_dir;
    auto* report = app.add_subcommand("report", "summarize a sweep directory");
    report->add_option("--run", run_dir, "directory holding sweep.csv")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
        if (!out_dir.empty()) cfg.output_dir = out_dir;
        if (grid) cfg.check_grid = grid;
        if (!box.empty()) {
            const auto v = parse_list(box, 4, "--box");
            cfg.box = Box{v[0], v[1], v[2], v[3]};
        }
        if (starts) cfg.starts = starts;
        if (ztol > 0) cfg.zero_tol = ztol;
        if (itol > 0) cfg.integral_tol = itol;
        if (!bstr.empty()) {
            const auto v = parse_list(bstr, 2, "--b");
            sf.b = Point{v[0], v[1]};
            if (!(sf.b->norm2() < 1)) throw UsageError("--b must lie inside the unit disk");
        }
        cfg.validate();

        if (*check) return check_potential(cfg, out);
        if (*report) return report_cmd(cfg, run_dir, out);
        const fs::path dir = prepare_dir(cfg.output_dir);
        if (*zeros) return find_zeros_cmd(cfg, dir, out);
        if (*integrals) return verify_integrals(cfg, dir, out);
        if (*solve) return solve_cmd(cfg, sf, dir, out);
        if (*sweep) return sweep_cmd(cfg, wf, dir, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        err << "failed: " << e.what() << '\n';
        return kCheckFailed;
    }
    return kUsage;
}

}  // namespace liouville::cli
