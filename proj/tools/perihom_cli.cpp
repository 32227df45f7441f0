/// @file perihom_cli.cpp
/// @brief Command-line driver: one JSON config (or named preset) feeds the
/// subcommands validate, measure, transform, homogenize, rates,
/// counterexample, mc, and all. Every subcommand writes JSON/CSV artifacts
/// plus a manifest into the output directory.
///
/// Exit codes: 0 success; 2 config error; 3 centering violation without
/// --force-noncentered; 4 numerical failure; 5 --check threshold failure.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "perihom/io.hpp"
#include "perihom/pipeline.hpp"
#include "perihom/presets.hpp"

using namespace perihom;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "1.0.0";

/// --check threshold misses map to exit code 5, distinct from numerical
/// failures.
struct CheckFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CliOptions {
    std::string config_path;
    std::string preset;
    std::string out_dir = "out";
    bool check = false;
    bool force = false;
    bool emit_endpoints = false;
    std::int64_t seed_override = -1;
};

RunConfig load_config(const CliOptions& opt) {
    RunConfig cfg;
    if (!opt.config_path.empty()) {
        std::ifstream is(opt.config_path);
        if (!is) throw ConfigError("cannot open config file " + opt.config_path);
        json j;
        try {
            j = json::parse(is);
        } catch (const json::parse_error& e) {
            throw ConfigError(std::string("config is not valid JSON: ") + e.what());
        }
        cfg = config_from_json(j);
    } else if (!opt.preset.empty()) {
        cfg = preset_config(opt.preset);
    } else {
        throw ConfigError("pass --config FILE or --preset NAME");
    }
    if (opt.force) {
        cfg.force_noncentered = true;
        cfg.transform_opts.force_noncentered = true;
    }
    if (opt.seed_override >= 0) cfg.mc.seed = static_cast<std::uint64_t>(opt.seed_override);
    return cfg;
}

/// Minimal structural check applied to every report before exit 0.
void validate_output_json(const json& j, std::initializer_list<const char*> required) {
    for (const char* key : required)
        if (!j.contains(key))
            throw Error(std::string("output schema violation: missing key '") + key + "'");
}

void write_report(const fs::path& dir, const std::string& name, const json& j,
                  std::initializer_list<const char*> required) {
    validate_output_json(j, required);
    write_json((dir / name).string(), j);
}

void write_manifest(const fs::path& dir, const RunConfig& cfg, const std::string& command) {
    json m;
    m["tool"] = "perihom";
    m["version"] = kVersion;
    m["command"] = command;
    m["config"] = config_to_json(cfg);
    m["seed"] = cfg.mc.seed;
    m["tolerances"] = {{"measure_tol", cfg.measure_opts.tol},
                       {"cell_tol", cfg.cell_opts.tol},
                       {"centered_tol", cfg.transform_opts.centering.centered_tol},
                       {"warn_tol", cfg.transform_opts.centering.warn_tol},
                       {"mesh_per_period", cfg.bvp_opts.mesh_per_period}};
    // the timestamp lives only here so every other payload is reproducible
    m["timestamp_utc"] = static_cast<std::int64_t>(
        std::chrono::duration_cast<std::chrono::seconds>(
            std::chrono::system_clock::now().time_since_epoch())
            .count());
    write_json((dir / "manifest.json").string(), m);
}

json measure_to_json(const InvariantMeasure& meas) {
    json j;
    j["residual"] = meas.residual;
    j["residual_raw"] = meas.residual_raw;
    j["min_value"] = meas.min_value;
    j["max_value"] = meas.max_value;
    j["oscillation"] = meas.oscillation();
    j["centering_defect"] = vector_to_json(meas.centering_defect);
    j["solver"] = meas.solver;
    j["iterations"] = meas.iterations;
    return j;
}

int run_validate(Pipeline& pipe, const fs::path& dir) {
    const CoefficientSet& cs = pipe.coefficients();
    json j;
    j["dim"] = cs.dim();
    j["grid"] = cs.grid().describe();
    j["lambda"] = cs.lambda;
    j["Lambda"] = cs.Lambda;
    write_report(dir, "validate.json", j, {"dim", "grid", "lambda", "Lambda"});
    std::cout << "validate: lambda = " << cs.lambda << ", Lambda = " << cs.Lambda << "\n";
    return 0;
}

int run_measure(Pipeline& pipe, const fs::path& dir) {
    const InvariantMeasure& meas = pipe.measure();
    write_field_binary((dir / "m.fld").string(), {meas.m});
    write_field_csv((dir / "m.csv").string(), {meas.m}, {"m"});
    write_report(dir, "measure.json", measure_to_json(meas),
                 {"residual", "min_value", "centering_defect"});
    const CenteringStatus st =
        classify_centering(meas.centering_defect, pipe.config().transform_opts.centering);
    std::cout << "measure: residual = " << meas.residual << ", min m = " << meas.min_value
              << ", defect = " << meas.centering_defect.cwiseAbs().maxCoeff() << "\n";
    if (st == CenteringStatus::Marginal)
        std::cerr << "warning: centering defect in the marginal band (1e-8, 1e-4]\n";
    if (st == CenteringStatus::NonCentered && !pipe.config().force_noncentered)
        throw CenteringError("centering defect " +
                             std::to_string(meas.centering_defect.cwiseAbs().maxCoeff()) +
                             " exceeds the non-centered threshold");
    return 0;
}

int run_transform(Pipeline& pipe, const fs::path& dir) {
    const TransformedCoefficients& tc = pipe.transformed();
    const int d = tc.dim();
    std::vector<ScalarField> qc, pc, bc;
    std::vector<std::string> qn, pn, bn;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            qc.push_back(tc.q.comp(i, j));
            qn.push_back("q" + std::to_string(i + 1) + std::to_string(j + 1));
            pc.push_back(tc.phi.comp(i, j));
            pn.push_back("phi" + std::to_string(i + 1) + std::to_string(j + 1));
        }
    for (int j = 0; j < d; ++j) {
        bc.push_back(tc.beta.comp(j));
        bn.push_back("beta" + std::to_string(j + 1));
    }
    write_field_binary((dir / "q.fld").string(), qc);
    write_field_csv((dir / "q.csv").string(), qc, qn);
    write_field_binary((dir / "phi.fld").string(), pc);
    write_field_csv((dir / "phi.csv").string(), pc, pn);
    write_field_binary((dir / "beta.fld").string(), bc);
    write_field_csv((dir / "beta.csv").string(), bc, bn);

    json j;
    j["lambda1"] = tc.lambda1;
    j["Lambda1"] = tc.Lambda1;
    j["divergence_residual"] = tc.flux_identity_inf;
    j["div_beta_inf"] = tc.div_beta_inf;
    j["mean_beta_max"] = tc.mean_beta_max;
    j["harmonic_div_f"] = tc.harmonic_div_f;
    j["homogenization_valid"] = tc.homogenization_valid;
    write_report(dir, "transform.json", j, {"lambda1", "Lambda1", "divergence_residual"});
    std::cout << "transform: lambda1 = " << tc.lambda1 << ", Lambda1 = " << tc.Lambda1 << "\n";
    return 0;
}

int run_homogenize(Pipeline& pipe, const fs::path& dir) {
    const HomogenizationResult& h = pipe.homogenization();
    const int d = pipe.coefficients().dim();
    std::vector<ScalarField> chis;
    std::vector<std::string> names;
    for (int j = 0; j < d; ++j) {
        chis.push_back(h.cells.chi[j]);
        names.push_back("chi" + std::to_string(j + 1));
    }
    write_field_binary((dir / "chi.fld").string(), chis);
    write_field_csv((dir / "chi.csv").string(), chis, names);

    json j;
    j["q_bar"] = matrix_to_json(h.tensor.q_bar);
    j["a_bar"] = matrix_to_json(h.tensor.a_bar);
    j["a_bar_direct"] = matrix_to_json(h.tensor.a_bar_direct);
    j["lambda1_check"] = h.tensor.lambda1_check;
    j["cross_formula_gap"] = h.tensor.cross_formula_gap;
    j["chi_identification_gap"] = h.cells.identification_gap();
    j["cell_residual_div"] = vector_to_json(h.cells.residual_div);
    j["cell_residual_nondiv"] = vector_to_json(h.cells.residual_nondiv);
    write_report(dir, "homogenize.json", j, {"q_bar", "a_bar", "lambda1_check"});
    std::cout << "homogenize: a_bar =\n" << h.tensor.a_bar << "\n";
    return 0;
}

int run_rates(Pipeline& pipe, const fs::path& dir, bool check) {
    json j;
    bool pass = true;
    if (pipe.config().dim == 1) {
        RateReport rep = pipe.rates();
        std::vector<std::vector<std::string>> rows;
        for (const auto& r : rep.rows)
            rows.push_back({format_double(r.eps), format_double(r.err.l2),
                            format_double(r.err.linf), format_double(r.err.h1_raw),
                            format_double(r.err.h1_corrected), format_double(r.grad_sup)});
        write_csv((dir / "rates.csv").string(),
                  {"eps", "l2", "linf", "h1_raw", "h1_corrected", "lip"}, rows);

        auto fit_json = [](const RateFit& f) {
            return json{{"slope", f.slope},
                        {"intercept", f.intercept},
                        {"max_log_residual", f.max_log_residual},
                        {"note", f.note}};
        };
        j["a_bar"] = rep.a_bar;
        j["slopes"] = {{"l2", fit_json(rep.l2)},
                       {"linf", fit_json(rep.linf)},
                       {"h1_raw", fit_json(rep.h1_raw)},
                       {"h1_corrected", fit_json(rep.h1_corrected)}};
        j["lipschitz"] = {{"grad_sup_spread", rep.lipschitz.grad_sup_spread},
                          {"holder_growth_exponent", rep.lipschitz.holder_growth_exponent}};
        json holder = json::array();
        for (const auto& r : rep.lipschitz.rows)
            holder.push_back({{"eps", r.eps},
                              {"grad_sup", r.grad_sup},
                              {"holder_half", r.holder_half}});
        j["lipschitz"]["rows"] = holder;
        write_report(dir, "rates.json", j, {"a_bar", "slopes", "lipschitz"});
        std::cout << "rates: l2 slope = " << rep.l2.slope << ", linf slope = " << rep.linf.slope
                  << ", corrected H1 slope = " << rep.h1_corrected.slope << "\n";
        if (check) {
            pass = rep.l2.slope >= 0.9 && rep.linf.slope >= 0.9 &&
                   rep.h1_corrected.slope >= 0.9 && rep.h1_raw.slope <= 0.2;
            const auto& last = rep.rows.back();
            pass = pass && last.err.h1_raw >= 10.0 * last.err.h1_corrected;
        }
    } else {
        Rect2DReport rep = pipe.rates_2d();
        std::vector<std::vector<std::string>> rows;
        for (const auto& r : rep.rows)
            rows.push_back(
                {format_double(r.eps), std::to_string(r.grid), format_double(r.l2)});
        write_csv((dir / "rates2d.csv").string(), {"eps", "grid", "l2"}, rows);
        j["experimental"] = true;
        j["norms"] = "l2 only: a rectangle is not C^{1,1}";
        j["l2_slope"] = rep.l2_fit.slope;
        write_report(dir, "rates2d.json", j, {"experimental", "l2_slope"});
        std::cout << "rates (2D, experimental): l2 slope = " << rep.l2_fit.slope << "\n";
        if (check) pass = rep.l2_fit.slope >= 0.8;
    }
    if (check && !pass) throw CheckFailure("rate thresholds not met (--check)");
    return 0;
}

int run_counterexample(Pipeline& pipe, const fs::path& dir, bool check) {
    std::vector<Real> eps = pipe.config().eps_list;
    if (eps.empty()) eps = {0.5, 0.25, 0.1, 0.05, 0.02, 0.01};
    CounterexampleReport rep = noncentered_counterexample(eps, pipe.config().bvp_opts);

    std::vector<std::vector<std::string>> rows;
    for (const auto& r : rep.rows)
        rows.push_back({format_double(r.eps), format_double(r.closed_form_gap),
                        format_double(r.sup_norm)});
    write_csv((dir / "counterexample.csv").string(), {"eps", "closed_form_gap", "sup_norm"},
              rows);

    json j;
    j["sup_bounded_by_eps"] = rep.sup_bounded_by_eps;
    j["note"] = rep.note;
    Real worst = 0.0;
    for (const auto& r : rep.rows) worst = std::max(worst, r.closed_form_gap);
    j["max_closed_form_gap"] = worst;
    write_report(dir, "counterexample.json", j,
                 {"sup_bounded_by_eps", "max_closed_form_gap", "note"});
    std::cout << "counterexample: max gap to closed form = " << worst << "\n";
    if (check && (!rep.sup_bounded_by_eps || worst > 1e-10))
        throw CheckFailure("counterexample thresholds not met (--check)");
    return 0;
}

int run_mc(Pipeline& pipe, const fs::path& dir, bool check, bool emit_endpoints) {
    const CoefficientSet& cs = pipe.coefficients();
    const InvariantMeasure& meas = pipe.measure();
    if (classify_centering(meas.centering_defect, pipe.config().transform_opts.centering) ==
        CenteringStatus::NonCentered)
        std::cerr << "warning: non-centered coefficients, the mean drift will dominate\n";

    MatrixField sigma = pointwise_matrix_sqrt(cs.a_tilde, cs.lambda * (1.0 - 1e-12));
    PathEnsemble ens = simulate_paths(cs, sigma, pipe.config().mc);
    DiffusivityEstimate est = estimate_diffusivity(ens);

    json j;
    j["D"] = matrix_to_json(est.D);
    j["stderr"] = matrix_to_json(est.stderr_);
    j["drift"] = vector_to_json(est.mean_drift);
    j["drift_stderr"] = vector_to_json(est.mean_drift_stderr);
    j["seed"] = pipe.config().mc.seed;
    j["config"] = {{"dt", pipe.config().mc.dt},
                   {"T", pipe.config().mc.horizon},
                   {"paths", pipe.config().mc.paths},
                   {"burn_in", pipe.config().mc.burn_in}};
    write_report(dir, "mc.json", j, {"D", "stderr", "drift", "seed", "config"});
    std::cout << "mc: D =\n" << est.D << "\n";

    if (emit_endpoints) {
        std::vector<std::string> header;
        for (int a = 0; a < cs.dim(); ++a) header.push_back("start" + std::to_string(a + 1));
        for (int a = 0; a < cs.dim(); ++a) header.push_back("end" + std::to_string(a + 1));
        std::vector<std::vector<std::string>> rows;
        for (Eigen::Index p = 0; p < ens.start.rows(); ++p) {
            std::vector<std::string> row;
            for (int a = 0; a < cs.dim(); ++a) row.push_back(format_double(ens.start(p, a)));
            for (int a = 0; a < cs.dim(); ++a) row.push_back(format_double(ens.end(p, a)));
            rows.push_back(std::move(row));
        }
        write_csv((dir / "endpoints.csv").string(), header, rows);
    }

    if (check) {
        const Eigen::MatrixXd a_bar = pipe.homogenization().tensor.a_bar;
        const Real tol = std::max(3.0 * est.stderr_.maxCoeff(),
                                  0.05 * a_bar.cwiseAbs().maxCoeff());
        const Real gap = (est.D - a_bar).cwiseAbs().maxCoeff();
        if (gap > tol)
            throw CheckFailure("mc: |D - a_bar|_max = " + std::to_string(gap) + " > " +
                               std::to_string(tol) + " (--check)");
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"perihom: constructive homogenization of non-divergence elliptic operators "
                 "with large periodic drift"};
    app.set_version_flag("--version", kVersion);

    CliOptions opt;
    app.add_option("--config", opt.config_path, "JSON config file");
    app.add_option("--preset", opt.preset, "built-in preset name")
        ->check(CLI::IsMember(preset_names()));
    app.add_option("--out", opt.out_dir, "output directory");
    app.add_flag("--check", opt.check, "enforce acceptance thresholds (exit 5 on failure)");
    app.add_flag("--force-noncentered", opt.force,
                 "build the transform even when centering fails");
    app.add_flag("--endpoints", opt.emit_endpoints, "mc: also write endpoint CSV");
    app.add_option("--seed", opt.seed_override, "override the MC seed");

    app.require_subcommand(1);
    const std::vector<std::string> subnames = {"validate",   "measure",        "transform",
                                               "homogenize", "rates",          "counterexample",
                                               "mc",         "all"};
    for (const auto& s : subnames) app.add_subcommand(s, "");

    CLI11_PARSE(app, argc, argv);
    const std::string sub = app.get_subcommands().front()->get_name();

    try {
        RunConfig cfg = load_config(opt);
        fs::path dir(opt.out_dir);
        fs::create_directories(dir);
        Pipeline pipe(std::move(cfg));

        write_manifest(dir, pipe.config(), sub);
        if (sub == "validate") return run_validate(pipe, dir);
        if (sub == "measure") return run_measure(pipe, dir);
        if (sub == "transform") {
            run_measure(pipe, dir);
            return run_transform(pipe, dir);
        }
        if (sub == "homogenize") {
            run_measure(pipe, dir);
            run_transform(pipe, dir);
            return run_homogenize(pipe, dir);
        }
        if (sub == "rates") return run_rates(pipe, dir, opt.check);
        if (sub == "counterexample") return run_counterexample(pipe, dir, opt.check);
        if (sub == "mc") return run_mc(pipe, dir, opt.check, opt.emit_endpoints);
        if (sub == "all") {
            run_validate(pipe, dir);
            run_measure(pipe, dir);
            run_transform(pipe, dir);
            run_homogenize(pipe, dir);
            if (pipe.config().has_problem) run_rates(pipe, dir, opt.check);
            if (pipe.config().has_mc) run_mc(pipe, dir, opt.check, opt.emit_endpoints);
            return 0;
        }
        throw ConfigError("unknown subcommand " + sub);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const CenteringError& e) {
        std::cerr << "centering violation: " << e.what() << "\n";
        return 3;
    } catch (const CheckFailure& e) {
        std::cerr << "check failure: " << e.what() << "\n";
        return 5;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 4;
    } catch (const Error& e) {
        std::cerr << "failure: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
