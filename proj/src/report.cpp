#include "voltran/report.hpp"

#include "voltran/errors.hpp"
#include "voltran/hjb.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

namespace voltran {

namespace {

using nlohmann::json;

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("cannot write " + p.string());
    return out;
}

}  // namespace

json grid_json(const StateGrid& grid) {
    json g;
    g["state_space"] = std::string(to_string(grid.kind.tag));
    g["n_x"] = grid.spot.n_x;
    g["dx"] = grid.spot.dx;
    g["x_min"] = grid.spot.x_min;
    g["x_max"] = grid.spot.x_max();
    g["spot_node"] = grid.spot.spot_node;
    g["n_steps"] = grid.time.steps();
    g["horizon"] = grid.time.horizon();
    g["maturities"] = grid.time.maturities;
    g["maturity_knots"] = grid.time.maturity_knots;
    g["rows"] = grid.rows.size();
    g["nodes_per_slice"] = grid.slice_size;
    json levels = json::array();
    for (std::size_t k = 0; k < grid.kind.levels.size(); ++k) {
        levels.push_back({{"raw", grid.raw_levels[k]},
                          {"snapped", grid.kind.levels[k]},
                          {"node", grid.level_nodes[k]},
                          {"snap_distance", grid.snap_distance[k]}});
    }
    g["barrier_levels"] = levels;
    return g;
}

json report_json(const CalibrationRun& run, const std::vector<Instrument>& user_instruments, double spot,
                 const McResult* mc) {
    const CalibrationReport& r = run.report;
    json doc;
    doc["converged"] = r.converged;
    doc["iterations"] = r.iterations;
    doc["evaluations"] = r.evaluations;
    doc["dual_value"] = r.dual_value;
    doc["primal_cost"] = r.primal_cost;
    doc["duality_gap"] = r.duality_gap;
    doc["lambda_star"] = r.lambda_star;
    doc["model_prices"] = r.model_prices;
    doc["price_errors"] = r.price_errors;
    json insts = json::array();
    for (std::size_t i = 0; i < user_instruments.size(); ++i) {
        const Instrument& u = user_instruments[i];
        const Instrument& s = run.instruments[i];
        json e;
        e["id"] = u.id;
        e["kind"] = std::string(to_string(u.kind));
        e["strike"] = u.strike;
        e["barrier"] = u.barrier ? json(*u.barrier) : json(nullptr);
        e["maturity"] = u.maturity;
        e["weight"] = u.weight;
        e["target_price"] = u.target_price;
        e["model_price"] = quoted_price(s, r.model_prices[i], spot);
        e["price_error"] = r.price_errors[i];
        e["lambda"] = r.lambda_star[i];
        e["converted_from_call"] = s.from_call;
        insts.push_back(e);
    }
    doc["instruments"] = insts;
    json trace = json::array();
    for (const auto& t : r.trace)
        trace.push_back({{"iteration", t.iteration},
                         {"objective", t.objective},
                         {"max_abs_error", t.max_abs_error},
                         {"step", t.step},
                         {"evaluations", t.evaluations}});
    doc["trace"] = trace;
    doc["grid"] = grid_json(run.grid);
    doc["surfaces"] = {{"sigma", "surfaces/sigma.csv"}, {"phi", "surfaces/phi.csv"}};
    if (mc) {
        json m;
        m["n_paths"] = mc->n_paths;
        m["n_steps"] = mc->n_steps;
        m["passed"] = mc->passes();
        json est = json::array();
        for (std::size_t i = 0; i < mc->instruments.size(); ++i) {
            const McEstimate& e = mc->instruments[i];
            const Instrument& s = run.instruments[i];
            est.push_back({{"id", e.id},
                           {"price", quoted_price(s, e.price, spot)},
                           {"std_error", e.std_error},
                           {"target_price", quoted_price(s, e.target, spot)},
                           {"z_score", number_or_null(e.z_score)}});
        }
        m["instruments"] = est;
        json mart = json::array();
        for (const auto& c : mc->martingale)
            mart.push_back({{"maturity", c.maturity},
                            {"mean_exp_x", c.mean},
                            {"std_error", c.std_error},
                            {"z_score", number_or_null(c.z_score)}});
        m["martingale"] = mart;
        doc["mc"] = m;
    } else {
        doc["mc"] = nullptr;
    }
    return doc;
}

void write_trace_csv(std::ostream& os, const CalibrationReport& report) {
    os << "iteration,objective,max_abs_error,step,evaluations\n";
    for (const auto& t : report.trace)
        os << t.iteration << ',' << g17(t.objective) << ',' << g17(t.max_abs_error) << ',' << g17(t.step) << ','
           << t.evaluations << '\n';
}

void write_outputs(const std::filesystem::path& dir, const CalibrationRun& run, const nlohmann::json& report) {
    std::filesystem::create_directories(dir / "surfaces");
    {
        auto out = open_out(dir / "report.json");
        out << report.dump(2) << '\n';
    }
    {
        auto out = open_out(dir / "trace.csv");
        write_trace_csv(out, run.report);
    }
    const auto& knots = run.grid.time.knots;
    {
        auto out = open_out(dir / "surfaces" / "phi.csv");
        write_surface_csv(out, run.grid, run.solution.phi, knots, false);
    }
    {
        const Surface sigma = extract_vol(run.solution);
        auto out = open_out(dir / "surfaces" / "sigma.csv");
        write_surface_csv(out, run.grid, sigma, std::span<const double>(knots.data(), knots.size() - 1), true);
    }
}

}  // namespace voltran
