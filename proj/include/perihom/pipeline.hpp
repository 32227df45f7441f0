/// @file pipeline.hpp
/// @brief Run configuration (the JSON config model) and the staged pipeline
/// shared by the CLI and the acceptance suite: coefficients -> invariant
/// measure -> drift-free transform -> cells/tensor -> rates / Monte Carlo.
#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "perihom/bvp1d.hpp"
#include "perihom/cell_homogenize.hpp"
#include "perihom/rect2d.hpp"
#include "perihom/sde.hpp"

namespace perihom {

struct RunConfig {
    std::string name = "custom";
    int dim = 1;
    std::vector<std::vector<std::string>> a_exprs;
    std::vector<std::string> b_exprs;
    std::array<int, 3> grid_sizes{0, 0, 0};  // 0: per-dimension default

    // problem block (optional)
    bool has_problem = false;
    std::string f_expr;            // right-hand side in x
    Real g0 = 0.0, g1 = 0.0;       // 1D boundary values
    std::string g_expr;            // 2D boundary expression
    std::vector<Real> eps_list;

    // mc block (optional)
    bool has_mc = false;
    SDEConfig mc;

    // tolerance overrides and flags
    InvariantMeasureOptions measure_opts;
    TransformOptions transform_opts;
    CellOptions cell_opts;
    SolveOptions bvp_opts;
    Rect2DOptions rect_opts;
    bool force_noncentered = false;

    TorusGrid make_grid() const;
};

/// Parse and structurally validate a JSON config (see docs/config-schema.md).
/// Unknown keys and type mismatches throw ConfigError. A "preset" key loads
/// the named preset first and applies overrides on top.
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& cfg);

/// Staged pipeline with caching; each stage is computed once on demand.
class Pipeline {
public:
    explicit Pipeline(RunConfig cfg);

    const RunConfig& config() const { return cfg_; }
    const CoefficientSet& coefficients();
    const InvariantMeasure& measure();
    const TransformedCoefficients& transformed();
    const HomogenizationResult& homogenization();

    /// 1D problem from the config's problem block.
    BVProblem problem_1d() const;
    /// 2D rectangle problem from the config's problem block.
    Rect2DProblem problem_2d() const;

    RateReport rates();
    Rect2DReport rates_2d();
    DiffusivityEstimate monte_carlo();

private:
    RunConfig cfg_;
    std::optional<CoefficientSet> coeffs_;
    std::optional<InvariantMeasure> measure_;
    std::optional<TransformedCoefficients> tc_;
    std::optional<HomogenizationResult> homog_;
};

}  // namespace perihom
