#include "perihom/pipeline.hpp"

#include <iostream>

#include "perihom/io.hpp"
#include "perihom/presets.hpp"

namespace perihom {

namespace {

using nlohmann::json;

void require_keys(const json& j, const std::string& where,
                  std::initializer_list<const char*> allowed) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) ok = true;
        if (!ok) throw ConfigError("unknown key '" + it.key() + "' in " + where);
    }
}

double require_number(const json& j, const std::string& where) {
    if (!j.is_number()) throw ConfigError(where + " must be a number");
    return j.get<double>();
}

std::string require_string(const json& j, const std::string& where) {
    if (!j.is_string()) throw ConfigError(where + " must be a string");
    return j.get<std::string>();
}

}  // namespace

TorusGrid RunConfig::make_grid() const {
    std::array<int, 3> n = grid_sizes;
    for (int a = 0; a < dim; ++a) {
        if (n[a] == 0) n[a] = (dim == 1) ? 256 : (dim == 2 ? 128 : 64);
    }
    return TorusGrid(dim, n);
}

RunConfig config_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    require_keys(j, "config",
                 {"preset", "name", "dim", "a", "b", "grid", "problem", "mc", "tolerances",
                  "force_noncentered"});

    RunConfig cfg;
    if (j.contains("preset")) cfg = preset_config(require_string(j["preset"], "preset"));

    if (j.contains("name")) cfg.name = require_string(j["name"], "name");
    if (j.contains("dim")) {
        if (!j["dim"].is_number_integer()) throw ConfigError("dim must be an integer");
        cfg.dim = j["dim"].get<int>();
        if (cfg.dim < 1 || cfg.dim > 3) throw ConfigError("dim must be 1, 2, or 3");
    }

    if (j.contains("a")) {
        const json& a = j["a"];
        if (!a.is_array()) throw ConfigError("a must be a matrix of expression strings");
        cfg.a_exprs.clear();
        for (const auto& row : a) {
            if (!row.is_array()) throw ConfigError("a must be a matrix of expression strings");
            std::vector<std::string> r;
            for (const auto& e : row) r.push_back(require_string(e, "a entry"));
            cfg.a_exprs.push_back(std::move(r));
        }
    }
    if (j.contains("b")) {
        const json& b = j["b"];
        if (!b.is_array()) throw ConfigError("b must be a vector of expression strings");
        cfg.b_exprs.clear();
        for (const auto& e : b) cfg.b_exprs.push_back(require_string(e, "b entry"));
    }
    if (j.contains("grid")) {
        const json& g = j["grid"];
        if (!g.is_array() || g.empty() || g.size() > 3)
            throw ConfigError("grid must list 1..3 per-axis sizes");
        cfg.grid_sizes = {0, 0, 0};
        for (std::size_t a = 0; a < g.size(); ++a) {
            if (!g[a].is_number_integer()) throw ConfigError("grid sizes must be integers");
            cfg.grid_sizes[a] = g[a].get<int>();
        }
    }

    if (j.contains("problem")) {
        const json& p = j["problem"];
        require_keys(p, "problem", {"f", "g", "eps", "domain"});
        cfg.has_problem = true;
        if (p.contains("f")) cfg.f_expr = require_string(p["f"], "problem.f");
        if (p.contains("g")) {
            const json& g = p["g"];
            if (g.is_number()) {
                cfg.g0 = cfg.g1 = g.get<double>();
                cfg.g_expr = format_double(g.get<double>());
            } else if (g.is_array() && g.size() == 2) {
                cfg.g0 = require_number(g[0], "problem.g[0]");
                cfg.g1 = require_number(g[1], "problem.g[1]");
            } else if (g.is_string()) {
                cfg.g_expr = g.get<std::string>();
            } else {
                throw ConfigError("problem.g must be a number, [g0,g1], or an expression");
            }
        }
        if (p.contains("eps")) {
            if (!p["eps"].is_array()) throw ConfigError("problem.eps must be an array");
            cfg.eps_list.clear();
            for (const auto& e : p["eps"]) cfg.eps_list.push_back(require_number(e, "eps"));
            validate_eps_list(cfg.eps_list);
        }
    }

    if (j.contains("mc")) {
        const json& m = j["mc"];
        require_keys(m, "mc", {"dt", "T", "paths", "seed", "lookup", "burn_in", "threads"});
        cfg.has_mc = true;
        if (m.contains("dt")) cfg.mc.dt = require_number(m["dt"], "mc.dt");
        if (m.contains("T")) cfg.mc.horizon = require_number(m["T"], "mc.T");
        if (m.contains("paths")) cfg.mc.paths = static_cast<std::int64_t>(
            require_number(m["paths"], "mc.paths"));
        if (m.contains("seed")) cfg.mc.seed = static_cast<std::uint64_t>(
            require_number(m["seed"], "mc.seed"));
        if (m.contains("burn_in")) cfg.mc.burn_in = require_number(m["burn_in"], "mc.burn_in");
        if (m.contains("threads"))
            cfg.mc.threads = static_cast<int>(require_number(m["threads"], "mc.threads"));
        if (m.contains("lookup")) {
            const std::string lk = require_string(m["lookup"], "mc.lookup");
            if (lk == "trig") cfg.mc.lookup = CoefficientLookup::Trigonometric;
            else if (lk == "linear") cfg.mc.lookup = CoefficientLookup::Multilinear;
            else throw ConfigError("mc.lookup must be 'trig' or 'linear'");
        }
        cfg.mc.validate();
    }

    if (j.contains("tolerances")) {
        const json& t = j["tolerances"];
        require_keys(t, "tolerances",
                     {"measure_tol", "cell_tol", "centering_tol", "mesh_per_period",
                      "mesh_per_period_2d"});
        if (t.contains("measure_tol"))
            cfg.measure_opts.tol = require_number(t["measure_tol"], "measure_tol");
        if (t.contains("cell_tol")) cfg.cell_opts.tol = require_number(t["cell_tol"], "cell_tol");
        if (t.contains("centering_tol"))
            cfg.transform_opts.centering.centered_tol =
                require_number(t["centering_tol"], "centering_tol");
        if (t.contains("mesh_per_period"))
            cfg.bvp_opts.mesh_per_period =
                static_cast<int>(require_number(t["mesh_per_period"], "mesh_per_period"));
        if (t.contains("mesh_per_period_2d"))
            cfg.rect_opts.mesh_per_period =
                static_cast<int>(require_number(t["mesh_per_period_2d"], "mesh_per_period_2d"));
    }

    if (j.contains("force_noncentered")) {
        if (!j["force_noncentered"].is_boolean())
            throw ConfigError("force_noncentered must be a boolean");
        cfg.force_noncentered = j["force_noncentered"].get<bool>();
    }
    cfg.transform_opts.force_noncentered = cfg.force_noncentered;

    if (cfg.a_exprs.empty() || cfg.b_exprs.empty())
        throw ConfigError("config needs coefficient expressions 'a' and 'b' (or a preset)");

    // a must be symmetric as text; otherwise it is symmetrized with a warning
    const int d = cfg.dim;
    if (static_cast<int>(cfg.a_exprs.size()) != d)
        throw ConfigError("a must be a " + std::to_string(d) + "x" + std::to_string(d) +
                          " matrix of expressions");
    for (const auto& row : cfg.a_exprs)
        if (static_cast<int>(row.size()) != d) throw ConfigError("a matrix is not square");
    for (int i = 0; i < d; ++i)
        for (int jj = i + 1; jj < d; ++jj)
            if (cfg.a_exprs[i][jj] != cfg.a_exprs[jj][i]) {
                std::cerr << "warning: a[" << i + 1 << "][" << jj + 1
                          << "] differs from its transpose entry as text; symmetrizing with "
                             "the upper-triangle entry\n";
                cfg.a_exprs[jj][i] = cfg.a_exprs[i][jj];
            }
    if (static_cast<int>(cfg.b_exprs.size()) != d)
        throw ConfigError("b must list " + std::to_string(d) + " expressions");

    return cfg;
}

nlohmann::json config_to_json(const RunConfig& cfg) {
    json j;
    j["name"] = cfg.name;
    j["dim"] = cfg.dim;
    j["a"] = cfg.a_exprs;
    j["b"] = cfg.b_exprs;
    json grid = json::array();
    for (int a = 0; a < cfg.dim; ++a) grid.push_back(cfg.make_grid().size(a));
    j["grid"] = grid;
    if (cfg.has_problem) {
        json p;
        if (!cfg.f_expr.empty()) p["f"] = cfg.f_expr;
        if (!cfg.g_expr.empty()) p["g"] = cfg.g_expr;
        else p["g"] = json::array({cfg.g0, cfg.g1});
        p["eps"] = cfg.eps_list;
        j["problem"] = p;
    }
    if (cfg.has_mc) {
        json m;
        m["dt"] = cfg.mc.dt;
        m["T"] = cfg.mc.horizon;
        m["paths"] = cfg.mc.paths;
        m["seed"] = cfg.mc.seed;
        m["burn_in"] = cfg.mc.burn_in;
        m["lookup"] = cfg.mc.lookup == CoefficientLookup::Trigonometric ? "trig" : "linear";
        j["mc"] = m;
    }
    j["force_noncentered"] = cfg.force_noncentered;
    return j;
}

Pipeline::Pipeline(RunConfig cfg) : cfg_(std::move(cfg)) {}

const CoefficientSet& Pipeline::coefficients() {
    if (!coeffs_) {
        const TorusGrid grid = cfg_.make_grid();
        std::vector<std::vector<Expression>> a;
        for (const auto& row : cfg_.a_exprs) {
            std::vector<Expression> r;
            for (const auto& e : row) r.push_back(parse_expression(e, cfg_.dim));
            a.push_back(std::move(r));
        }
        std::vector<Expression> b;
        for (const auto& e : cfg_.b_exprs) b.push_back(parse_expression(e, cfg_.dim));
        coeffs_ = sample_coefficients(a, b, grid);
    }
    return *coeffs_;
}

const InvariantMeasure& Pipeline::measure() {
    if (!measure_) measure_ = solve_invariant_measure(coefficients(), cfg_.measure_opts);
    return *measure_;
}

const TransformedCoefficients& Pipeline::transformed() {
    if (!tc_) tc_ = transform(coefficients(), measure(), cfg_.transform_opts);
    return *tc_;
}

const HomogenizationResult& Pipeline::homogenization() {
    if (!homog_) homog_ = homogenize(transformed(), coefficients(), cfg_.cell_opts);
    return *homog_;
}

BVProblem Pipeline::problem_1d() const {
    if (!cfg_.has_problem) throw ConfigError("config has no problem block");
    BVProblem prob;
    if (!cfg_.f_expr.empty()) prob.f = parse_expression(cfg_.f_expr, 1);
    prob.g0 = cfg_.g0;
    prob.g1 = cfg_.g1;
    prob.eps_list = cfg_.eps_list;
    return prob;
}

Rect2DProblem Pipeline::problem_2d() const {
    if (!cfg_.has_problem) throw ConfigError("config has no problem block");
    Rect2DProblem prob;
    if (!cfg_.f_expr.empty()) prob.f = parse_expression(cfg_.f_expr, 2);
    if (!cfg_.g_expr.empty()) prob.g = parse_expression(cfg_.g_expr, 2);
    prob.eps_list = cfg_.eps_list;
    return prob;
}

RateReport Pipeline::rates() {
    if (cfg_.dim != 1) throw ConfigError("the rates sweep needs a 1D configuration");
    const Real a_bar = homogenization().tensor.a_bar(0, 0);
    return rate_sweep(transformed(), problem_1d(), a_bar, cfg_.bvp_opts);
}

Rect2DReport Pipeline::rates_2d() {
    if (cfg_.dim != 2) throw ConfigError("the 2D sweep needs a 2D configuration");
    const Eigen::Matrix2d a_bar = homogenization().tensor.a_bar;
    return rect2d_sweep(transformed(), problem_2d(), a_bar, cfg_.rect_opts);
}

DiffusivityEstimate Pipeline::monte_carlo() {
    if (!cfg_.has_mc) throw ConfigError("config has no mc block");
    return run_sde_validation(coefficients(), cfg_.mc);
}

}  // namespace perihom
