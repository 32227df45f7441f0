#include "perihom/presets.hpp"

namespace perihom {

std::vector<std::string> preset_names() {
    return {"identity",     "centered-1d", "noncentered-1d",
            "laminated-2d", "shear-2d",    "harmonic-1d"};
}

RunConfig preset_config(const std::string& name) {
    RunConfig cfg;
    cfg.name = name;
    cfg.has_mc = true;  // every preset carries the default MC block

    auto sweep_1d = [&cfg]() {
        cfg.has_problem = true;
        cfg.f_expr = "1";
        cfg.g0 = 0.0;
        cfg.g1 = 0.0;
        cfg.eps_list = {1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128};
    };

    if (name == "identity") {
        cfg.dim = 2;
        cfg.a_exprs = {{"1", "0"}, {"0", "1"}};
        cfg.b_exprs = {"0", "0"};
    } else if (name == "centered-1d") {
        cfg.dim = 1;
        cfg.a_exprs = {{"1"}};
        cfg.b_exprs = {"cos(2*pi*y1)"};
        sweep_1d();
    } else if (name == "noncentered-1d") {
        cfg.dim = 1;
        cfg.a_exprs = {{"1"}};
        cfg.b_exprs = {"1"};
        cfg.has_problem = true;
        cfg.f_expr = "1";
        cfg.g0 = 0.0;
        cfg.g1 = 0.0;
        cfg.eps_list = {0.5, 0.25, 0.1, 0.05, 0.02, 0.01};
    } else if (name == "laminated-2d") {
        cfg.dim = 2;
        cfg.a_exprs = {{"1", "0"}, {"0", "1"}};
        cfg.b_exprs = {"cos(2*pi*y1)", "cos(2*pi*y1)"};
    } else if (name == "shear-2d") {
        cfg.dim = 2;
        cfg.a_exprs = {{"1", "0"}, {"0", "1"}};
        cfg.b_exprs = {"0", "cos(2*pi*y1)"};
        cfg.has_problem = true;
        cfg.f_expr = "1";
        cfg.g_expr = "0";
        cfg.eps_list = {1.0 / 4, 1.0 / 8, 1.0 / 16, 1.0 / 32};
    } else if (name == "harmonic-1d") {
        cfg.dim = 1;
        cfg.a_exprs = {{"2+sin(2*pi*y1)"}};
        cfg.b_exprs = {"0"};
        sweep_1d();
    } else {
        throw ConfigError("unknown preset '" + name + "'");
    }
    return cfg;
}

}  // namespace perihom
