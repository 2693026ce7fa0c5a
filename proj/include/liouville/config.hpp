#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "potential.hpp"
#include "reduced_field.hpp"

namespace liouville {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr const char* kSchemaVersion = "liouville-run/1";

// Run configuration, read from an INI file. Every key is optional except [run] schema; unknown
// sections and keys are rejected.
struct RunConfig {
    std::string schema = kSchemaVersion;
    std::string output_dir = "out";
    std::uint64_t seed = 12345;  // start vectors of the Krylov eigensolvers

    PotentialCoeffs potential = PotentialCoeffs::example();

    int check_grid = 401;

    Box box;
    int starts = 20;
    double zero_tol = 1e-12;

    double integral_tol = 1e-8;

    int n_r = 256, n_theta = 256;
    double newton_tol = 1e-11;
    int max_iter = 30;
    double gmres_tol = 1e-12;

    double lambda_max = 1e-2, lambda_min = 1e-6, ratio = 0.5;
    bool compute_min_sv = true;

    void validate() const {
        if (schema != kSchemaVersion) throw ConfigError("unsupported schema '" + schema + "' (expected " + kSchemaVersion + ")");
        if (!(zero_tol > 0 && integral_tol > 0 && newton_tol > 0 && gmres_tol > 0)) throw ConfigError("tolerances must be positive");
        if (starts < 1 || check_grid < 2 || max_iter < 1) throw ConfigError("counts must be positive");
        if (n_r < 8 || n_theta < 8 || n_theta % 2) throw ConfigError("grid: n_r >= 8 and even n_theta >= 8 required");
        if (!(box.x_min < box.x_max && box.y_min < box.y_max)) throw ConfigError("box: need x_min < x_max and y_min < y_max");
        if (!(lambda_max > 0 && lambda_min > 0 && lambda_min <= lambda_max)) throw ConfigError("sweep: need 0 < lambda_min <= lambda_max");
        if (!(ratio > 0 && ratio < 1)) throw ConfigError("sweep: ratio must lie in (0,1)");
        if (output_dir.empty()) throw ConfigError("run: output_dir must not be empty");
    }
};

namespace detail {

inline std::string fmt17(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

template <class T>
T parse_value(const std::string& key, const std::string& text) {
    std::istringstream is(text);
    T v{};
    if (!(is >> v)) throw ConfigError("malformed value for " + key + ": '" + text + "'");
    if (!is.eof()) is >> std::ws;
    if (!is.eof()) throw ConfigError("malformed value for " + key + ": '" + text + "'");
    return v;
}

template <>
inline bool parse_value<bool>(const std::string& key, const std::string& text) {
    if (text == "true" || text == "1") return true;
    if (text == "false" || text == "0") return false;
    throw ConfigError("malformed boolean for " + key + ": '" + text + "'");
}

inline Box parse_box(const std::string& key, const std::string& text) {
    std::istringstream is(text);
    double v[4];
    char comma;
    for (int k = 0; k < 4; ++k) {
        if (k > 0 && !(is >> comma && comma == ',')) throw ConfigError("malformed box for " + key + ": '" + text + "'");
        if (!(is >> v[k])) throw ConfigError("malformed box for " + key + ": '" + text + "'");
    }
    if (!is.eof()) is >> std::ws;
    if (!is.eof()) throw ConfigError("malformed box for " + key + ": '" + text + "'");
    return Box{v[0], v[1], v[2], v[3]};
}

inline const std::map<std::string, std::set<std::string>>& documented_keys() {
    static const std::map<std::string, std::set<std::string>> keys = {
        {"run", {"schema", "output_dir", "seed"}},
        {"potential", {"A0", "A1", "A2", "D0", "D1", "D2", "D3"}},
        {"check", {"grid"}},
        {"zeros", {"box", "starts", "tol"}},
        {"integrals", {"tol"}},
        {"solver", {"n_r", "n_theta", "newton_tol", "max_iter", "gmres_tol"}},
        {"sweep", {"lambda_max", "lambda_min", "ratio", "min_sv"}},
    };
    return keys;
}

}  // namespace detail

inline RunConfig parse_config(std::istream& in) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    const auto& keys = detail::documented_keys();
    for (const auto& [section, body] : tree) {
        const auto it = keys.find(section);
        if (it == keys.end() || body.empty()) throw ConfigError("unknown section or top-level key: " + section);
        for (const auto& kv : body)
            if (!it->second.count(kv.first)) throw ConfigError("unknown key: " + section + "." + kv.first);
    }
    RunConfig cfg;
    const auto opt = [&](const std::string& path) -> std::optional<std::string> {
        if (auto v = tree.get_optional<std::string>(pt::ptree::path_type(path, '.'))) return *v;
        return std::nullopt;
    };
    const auto set = [&](const std::string& path, auto& field) {
        if (auto v = opt(path)) field = detail::parse_value<std::decay_t<decltype(field)>>(path, *v);
    };
    const auto schema = opt("run.schema");
    if (!schema) throw ConfigError("missing schema version tag run.schema");
    cfg.schema = *schema;
    if (auto v = opt("run.output_dir")) cfg.output_dir = *v;
    set("run.seed", cfg.seed);
    set("potential.A0", cfg.potential.A0);
    set("potential.A1", cfg.potential.A1);
    set("potential.A2", cfg.potential.A2);
    set("potential.D0", cfg.potential.D0);
    set("potential.D1", cfg.potential.D1);
    set("potential.D2", cfg.potential.D2);
    set("potential.D3", cfg.potential.D3);
    set("check.grid", cfg.check_grid);
    if (auto v = opt("zeros.box")) cfg.box = detail::parse_box("zeros.box", *v);
    set("zeros.starts", cfg.starts);
    set("zeros.tol", cfg.zero_tol);
    set("integrals.tol", cfg.integral_tol);
    set("solver.n_r", cfg.n_r);
    set("solver.n_theta", cfg.n_theta);
    set("solver.newton_tol", cfg.newton_tol);
    set("solver.max_iter", cfg.max_iter);
    set("solver.gmres_tol", cfg.gmres_tol);
    set("sweep.lambda_max", cfg.lambda_max);
    set("sweep.lambda_min", cfg.lambda_min);
    set("sweep.ratio", cfg.ratio);
    set("sweep.min_sv", cfg.compute_min_sv);
    cfg.validate();
    return cfg;
}

inline RunConfig parse_config(const std::string& text) {
    std::istringstream is(text);
    return parse_config(is);
}

inline RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path.string());
    return parse_config(in);
}

// Normalized form: every key, fixed order, 17 significant digits.
inline std::string serialize_config(const RunConfig& c) {
    using detail::fmt17;
    std::ostringstream os;
    os << "[run]\nschema = " << c.schema << "\noutput_dir = " << c.output_dir << "\nseed = " << c.seed << "\n\n";
    const auto& p = c.potential;
    os << "[potential]\nA0 = " << fmt17(p.A0) << "\nA1 = " << fmt17(p.A1) << "\nA2 = " << fmt17(p.A2) << "\nD0 = " << fmt17(p.D0)
       << "\nD1 = " << fmt17(p.D1) << "\nD2 = " << fmt17(p.D2) << "\nD3 = " << fmt17(p.D3) << "\n\n";
    os << "[check]\ngrid = " << c.check_grid << "\n\n";
    os << "[zeros]\nbox = " << fmt17(c.box.x_min) << ',' << fmt17(c.box.x_max) << ',' << fmt17(c.box.y_min) << ','
       << fmt17(c.box.y_max) << "\nstarts = " << c.starts << "\ntol = " << fmt17(c.zero_tol) << "\n\n";
    os << "[integrals]\ntol = " << fmt17(c.integral_tol) << "\n\n";
    os << "[solver]\nn_r = " << c.n_r << "\nn_theta = " << c.n_theta << "\nnewton_tol = " << fmt17(c.newton_tol)
       << "\nmax_iter = " << c.max_iter << "\ngmres_tol = " << fmt17(c.gmres_tol) << "\n\n";
    os << "[sweep]\nlambda_max = " << fmt17(c.lambda_max) << "\nlambda_min = " << fmt17(c.lambda_min) << "\nratio = " << fmt17(c.ratio)
       << "\nmin_sv = " << (c.compute_min_sv ? "true" : "false") << "\n";
    return os.str();
}

}  // namespace liouville
