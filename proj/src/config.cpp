#include "voltran/config.hpp"

#include "voltran/errors.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace voltran {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::string& where, std::initializer_list<std::string_view> allowed) {
    if (!obj.is_object()) throw ConfigError(where, "expected an object");
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (auto a : allowed) ok = ok || key == a;
        if (!ok) throw ConfigError(where.empty() ? key : where + "." + key, "unknown key");
    }
}

std::string join(const std::string& where, std::string_view key) {
    return where.empty() ? std::string(key) : where + "." + std::string(key);
}

double number(const json& obj, const std::string& where, std::string_view key) {
    const auto& v = obj.at(std::string(key));
    if (!v.is_number()) throw ConfigError(join(where, key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(join(where, key), "must be finite");
    return d;
}

std::optional<double> opt_number(const json& obj, const std::string& where, std::string_view key) {
    if (!obj.contains(std::string(key))) return std::nullopt;
    return number(obj, where, key);
}

std::size_t count(const json& obj, const std::string& where, std::string_view key) {
    const auto& v = obj.at(std::string(key));
    if (!v.is_number_integer() || v.get<long long>() < 0)
        throw ConfigError(join(where, key), "expected a non-negative integer");
    return v.get<std::size_t>();
}

bool flag(const json& obj, const std::string& where, std::string_view key) {
    const auto& v = obj.at(std::string(key));
    if (!v.is_boolean()) throw ConfigError(join(where, key), "expected true or false");
    return v.get<bool>();
}

std::string text(const json& obj, const std::string& where, std::string_view key) {
    const auto& v = obj.at(std::string(key));
    if (!v.is_string()) throw ConfigError(join(where, key), "expected a string");
    return v.get<std::string>();
}

CostParams parse_cost(const json& j) {
    check_keys(j, "cost", {"sigma_bar", "p", "q", "a", "beta_min", "beta_max"});
    if (!j.contains("sigma_bar")) throw ConfigError("cost.sigma_bar", "is required");
    CostParams c;
    c.sigma_bar = number(j, "cost", "sigma_bar");
    if (auto v = opt_number(j, "cost", "p")) c.p_exp = *v;
    if (auto v = opt_number(j, "cost", "q")) c.q_exp = *v;
    if (auto v = opt_number(j, "cost", "a")) c.a = *v;
    c.beta_min = opt_number(j, "cost", "beta_min");
    c.beta_max = opt_number(j, "cost", "beta_max");
    return c;
}

GridConfig parse_grid(const json& j) {
    check_keys(j, "grid", {"n_x", "n_t", "x_margin_sigmas", "dt_max", "x_min", "x_max", "state_space"});
    GridConfig g;
    if (j.contains("n_x")) g.n_x = count(j, "grid", "n_x");
    if (j.contains("n_t")) g.n_t = count(j, "grid", "n_t");
    if (auto v = opt_number(j, "grid", "x_margin_sigmas")) g.x_margin_sigmas = *v;
    if (auto v = opt_number(j, "grid", "dt_max")) g.dt_max = *v;
    g.x_min = opt_number(j, "grid", "x_min");
    g.x_max = opt_number(j, "grid", "x_max");
    if (j.contains("state_space")) {
        try {
            g.state_space = parse_state_space(text(j, "grid", "state_space"));
        } catch (const ConfigError& e) {
            throw ConfigError("grid.state_space", e.what());
        }
    }
    return g;
}

Instrument parse_instrument(const json& j, std::size_t index) {
    const std::string where = "instruments[" + std::to_string(index) + "]";
    check_keys(j, where, {"id", "kind", "strike", "barrier", "maturity", "target_price", "weight"});
    for (auto key : {"kind", "strike", "maturity", "target_price"})
        if (!j.contains(key)) throw ConfigError(join(where, key), "is required");
    Instrument inst;
    inst.id = j.contains("id") ? text(j, where, "id") : "inst" + std::to_string(index);
    inst.kind = parse_instrument_kind(text(j, where, "kind"));
    inst.strike = number(j, where, "strike");
    inst.barrier = opt_number(j, where, "barrier");
    inst.maturity = number(j, where, "maturity");
    inst.target_price = number(j, where, "target_price");
    if (auto w = opt_number(j, where, "weight")) inst.weight = *w;
    return inst;
}

OptimizerConfig parse_optimizer(const json& j) {
    check_keys(j, "optimizer", {"tol_price", "max_outer_iters", "line_search", "use_bfgs"});
    OptimizerConfig o;
    if (auto v = opt_number(j, "optimizer", "tol_price")) o.tol_price = *v;
    if (j.contains("max_outer_iters")) o.max_outer_iters = count(j, "optimizer", "max_outer_iters");
    if (j.contains("use_bfgs")) o.use_bfgs = flag(j, "optimizer", "use_bfgs");
    if (j.contains("line_search")) {
        const auto& ls = j.at("line_search");
        check_keys(ls, "optimizer.line_search", {"c1", "shrink"});
        if (auto v = opt_number(ls, "optimizer.line_search", "c1")) o.line_search.c1 = *v;
        if (auto v = opt_number(ls, "optimizer.line_search", "shrink")) o.line_search.shrink = *v;
    }
    if (!(o.tol_price > 0.0)) throw ConfigError("optimizer.tol_price", "must be positive");
    if (!(o.line_search.c1 > 0.0 && o.line_search.c1 < 1.0))
        throw ConfigError("optimizer.line_search.c1", "must lie in (0, 1)");
    if (!(o.line_search.shrink > 0.0 && o.line_search.shrink < 1.0))
        throw ConfigError("optimizer.line_search.shrink", "must lie in (0, 1)");
    return o;
}

McConfig parse_mc(const json& j) {
    check_keys(j, "mc", {"n_paths", "n_steps", "seed", "antithetic", "brownian_bridge"});
    McConfig m;
    if (j.contains("n_paths")) m.n_paths = count(j, "mc", "n_paths");
    if (j.contains("n_steps")) m.n_steps = count(j, "mc", "n_steps");
    if (j.contains("seed")) {
        const auto& v = j.at("seed");
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
            throw ConfigError("mc.seed", "expected a non-negative integer");
        m.seed = v.get<std::uint64_t>();
    }
    if (j.contains("antithetic")) m.antithetic = flag(j, "mc", "antithetic");
    if (j.contains("brownian_bridge")) m.brownian_bridge = flag(j, "mc", "brownian_bridge");
    if (m.n_paths < 2) throw ConfigError("mc.n_paths", "must be at least 2");
    if (m.antithetic && m.n_paths % 2 != 0) throw ConfigError("mc.n_paths", "must be even with antithetic sampling");
    return m;
}

}  // namespace

RunConfig parse_config(const json& doc) {
    check_keys(doc, "", {"spot", "cost", "grid", "instruments", "optimizer", "mc", "output"});
    RunConfig rc;
    if (!doc.contains("spot")) throw ConfigError("spot", "is required");
    rc.spot = number(doc, "", "spot");
    if (!(rc.spot > 0.0)) throw ConfigError("spot", "must be positive");
    if (!doc.contains("cost")) throw ConfigError("cost", "is required");
    rc.cost = parse_cost(doc.at("cost"));
    if (doc.contains("grid")) rc.grid = parse_grid(doc.at("grid"));
    if (!doc.contains("instruments") || !doc.at("instruments").is_array())
        throw ConfigError("instruments", "expected an array");
    std::set<std::string> ids;
    for (std::size_t i = 0; i < doc.at("instruments").size(); ++i) {
        Instrument inst = parse_instrument(doc.at("instruments")[i], i);
        if (!ids.insert(inst.id).second) throw ConfigError(inst.id, "duplicate instrument id");
        rc.instruments.push_back(std::move(inst));
    }
    if (doc.contains("optimizer")) rc.optimizer = parse_optimizer(doc.at("optimizer"));
    if (doc.contains("mc") && !doc.at("mc").is_null()) rc.mc = parse_mc(doc.at("mc"));
    if (doc.contains("output")) {
        const auto& out = doc.at("output");
        if (out.is_string()) {
            rc.output_dir = out.get<std::string>();
        } else {
            check_keys(out, "output", {"dir"});
            if (out.contains("dir")) rc.output_dir = text(out, "output", "dir");
        }
    }
    return rc;
}

RunConfig parse_config_text(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        // byte is 1-based and points just past the offending character
        const std::size_t at = e.byte == 0 ? 0 : std::min<std::size_t>(e.byte - 1, text.size());
        std::size_t line = 1;
        std::size_t col = 1;
        for (std::size_t i = 0; i < at; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError("json", "malformed JSON at line " + std::to_string(line) + ", column " +
                                      std::to_string(col));
    }
    return parse_config(doc);
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("config", "cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

}  // namespace voltran
