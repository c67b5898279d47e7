#include "voltran/app.hpp"

#include "voltran/calibrate.hpp"
#include "voltran/config.hpp"
#include "voltran/errors.hpp"
#include "voltran/hjb.hpp"
#include "voltran/mc.hpp"
#include "voltran/report.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <ostream>
#include <thread>

namespace voltran::cli {

namespace {

std::size_t resolve_threads(int flag_value, std::ostream& err) {
    if (flag_value > 0) return static_cast<std::size_t>(flag_value);
    if (const char* env = std::getenv("VOLTRAN_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
        err << "warning: ignoring VOLTRAN_THREADS=" << env << '\n';
    }
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

void print_grid(std::ostream& out, const StateGrid& grid) {
    out << "state space   " << to_string(grid.kind.tag) << '\n'
        << "spot nodes    " << grid.spot.n_x << "  dx " << grid.spot.dx << "  x in [" << grid.spot.x_min << ", "
        << grid.spot.x_max() << "]  spot node " << grid.spot.spot_node << '\n'
        << "time steps    " << grid.time.steps() << "  horizon " << grid.time.horizon() << '\n'
        << "maturities   ";
    for (std::size_t k = 0; k < grid.time.maturities.size(); ++k)
        out << ' ' << grid.time.maturities[k] << "@" << grid.time.maturity_knots[k];
    out << '\n';
    for (std::size_t k = 0; k < grid.kind.levels.size(); ++k)
        out << "barrier       " << grid.raw_levels[k] << " -> node " << grid.level_nodes[k] << " (snap "
            << grid.snap_distance[k] << ")\n";
    out << "rows          " << grid.rows.size() << "  nodes per slice " << grid.slice_size << '\n';
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Path-dependent volatility calibration by optimal transport"};
    std::string config_path;
    std::string output_dir;
    bool dry_run = false;
    bool no_mc = false;
    int threads_flag = 0;
    app.add_option("--config", config_path, "JSON run configuration")->required();
    app.add_flag("--dry-run", dry_run, "validate the config, print the grid and exit");
    app.add_flag("--no-mc", no_mc, "skip Monte Carlo verification");
    app.add_option("--threads", threads_flag, "worker threads (default: VOLTRAN_THREADS or all cores)")
        ->check(CLI::PositiveNumber);
    app.add_option("--output", output_dir, "output directory (overrides the config)");
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return config_error;
    }

    RunConfig cfg;
    CostSpec cost;
    std::vector<Instrument> bounded;
    StateGrid grid;
    try {
        cfg = load_config(config_path);
        cost = make_cost_spec(cfg.cost);
        if (cfg.instruments.empty()) throw ConfigError("instruments", "at least one instrument is required");
        for (const auto& inst : cfg.instruments) validate_instrument(inst, cfg.spot);
        bounded = to_bounded_payoffs(cfg.instruments, cfg.spot);
        grid = build_grid(cfg.grid, bounded, cfg.spot, cost.sigma_bar);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const Error& e) {
        err << "config error: " << e.what() << '\n';
        return config_error;
    }
    if (!output_dir.empty()) cfg.output_dir = output_dir;

    if (dry_run) {
        out << "config ok: " << cfg.instruments.size() << " instruments, spot " << cfg.spot << ", sigma_bar "
            << cost.sigma_bar << '\n';
        print_grid(out, grid);
        return ok;
    }

    const std::size_t threads = resolve_threads(threads_flag, err);
    CalibrationRun result;
    try {
        result = calibrate(cfg.instruments, cost, cfg.grid, cfg.spot, cfg.optimizer);
    } catch (const SolverError& e) {
        err << "solver error: " << e.what() << '\n';
        return not_converged;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return config_error;
    }
    const CalibrationReport& rep = result.report;
    out << (rep.converged ? "converged" : "NOT converged") << " after " << rep.iterations << " iterations ("
        << rep.evaluations << " sweeps)\n"
        << "max weighted error " << (rep.trace.empty() ? 0.0 : rep.trace.back().max_abs_error) << "  dual "
        << rep.dual_value << "  primal " << rep.primal_cost << "  gap " << rep.duality_gap << '\n';

    std::optional<McResult> mc;
    if (cfg.mc && !no_mc && rep.converged) {
        try {
            mc = simulate_and_price(extract_vol(result.solution), result.instruments, result.grid, *cfg.mc, threads);
        } catch (const ConfigError& e) {
            err << "config error: " << e.what() << '\n';
            return config_error;
        }
        for (std::size_t i = 0; i < mc->instruments.size(); ++i) {
            const McEstimate& e = mc->instruments[i];
            out << "mc " << e.id << "  price " << quoted_price(result.instruments[i], e.price, cfg.spot) << " +- "
                << e.std_error << "  z " << e.z_score << '\n';
        }
        for (const auto& m : mc->martingale)
            out << "mc martingale T=" << m.maturity << "  mean " << m.mean << "  z " << m.z_score << '\n';
    }

    try {
        const auto doc = report_json(result, cfg.instruments, cfg.spot, mc ? &*mc : nullptr);
        write_outputs(cfg.output_dir, result, doc);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return config_error;
    }
    out << "wrote " << cfg.output_dir << '\n';

    if (!rep.converged) return not_converged;
    if (mc && !mc->passes()) return mc_failed;
    return ok;
}

}  // namespace voltran::cli
