#include "helpers.hpp"
#include "oracles.hpp"

#include "voltran/errors.hpp"
#include "voltran/hjb.hpp"
#include "voltran/linpde.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace voltran;
using testing::make;
using testing::put;
using IK = InstrumentKind;

namespace {

const CostSpec kCost = make_cost_spec(CostParams{});

GridConfig cfg(std::size_t n_x, std::size_t n_t) {
    GridConfig g;
    g.n_x = n_x;
    g.n_t = n_t;
    return g;
}

Surface flat_beta(const StateGrid& grid, double v = 0.04) { return Surface(grid, grid.time.steps(), v); }

double price_under(const StateGrid& grid, const Surface& beta, const Instrument& inst) {
    LinearProblem p;
    p.grid = &grid;
    p.beta = &beta;
    p.jumps.push_back({grid.time.knot_of(inst.maturity), payoff_slice(grid, inst)});
    return solve_linear(p).initial_value;
}

}  // namespace

TEST_CASE("exponential of spot is a discrete martingale") {
    const std::vector<Instrument> insts{put("p", 1.0, 1.0)};
    const auto grid = build_grid(cfg(201, 100), insts, 1.0, 0.2);
    const Surface beta = flat_beta(grid);
    LinearProblem p;
    p.grid = &grid;
    p.beta = &beta;
    std::vector<double> ex(grid.slice_size);
    for (std::size_t i = 0; i < grid.spot.n_x; ++i) ex[grid.index(0, i)] = std::exp(grid.spot.x(i));
    p.jumps.push_back({grid.time.steps(), ex});
    CHECK(std::abs(solve_linear(p).initial_value - 1.0) < 1e-3);
}

TEST_CASE("European put matches Black-Scholes") {
    const std::vector<Instrument> insts{put("p", 1.0, 1.0)};
    const auto grid = build_grid(cfg(401, 200), insts, 1.0, 0.2);
    const Surface beta = flat_beta(grid);
    const double bs = oracle::bs_put(1.0, 1.0, 1.0, 0.2);
    CHECK(std::abs(price_under(grid, beta, insts[0]) - bs) < 1e-3 * bs);

    const std::vector<double> lambda{0.0};
    const auto dual = solve_dual(kCost, insts, lambda, grid);
    CHECK(std::abs(model_prices(dual, insts, grid)[0] - bs) < 1e-3 * bs);
}

TEST_CASE("refinement differences shrink at first order or better") {
    const std::vector<Instrument> insts{put("p", 1.0, 1.0)};
    std::vector<double> v;
    for (std::size_t f : {1, 2, 4}) {
        const auto grid = build_grid(cfg(100 * f + 1, 50 * f), insts, 1.0, 0.2);
        v.push_back(price_under(grid, flat_beta(grid), insts[0]));
    }
    const double ratio = (v[1] - v[0]) / (v[2] - v[1]);
    CHECK(ratio >= 1.5);
    CHECK(ratio <= 4.0);
}

TEST_CASE("running cost vanishes at the reference variance and is positive elsewhere") {
    const std::vector<Instrument> insts{put("p", 1.0, 1.0)};
    const auto grid = build_grid(cfg(101, 40), insts, 1.0, 0.2);
    const std::vector<double> zero{0.0};
    const auto trivial = solve_dual(kCost, insts, zero, grid);
    CHECK(primal_cost(trivial, kCost, grid) == 0.0);

    const std::vector<double> lam{2.0};
    const auto dual = solve_dual(kCost, insts, lam, grid);
    CHECK(primal_cost(dual, kCost, grid) > 0.0);

    Surface src(grid, grid.time.steps(), penalty(kCost, 0.04));
    const Surface beta = flat_beta(grid);
    LinearProblem p;
    p.grid = &grid;
    p.beta = &beta;
    p.source = &src;
    CHECK(solve_linear(p).initial_value == 0.0);
}

TEST_CASE("knock-in plus knock-out equals the vanilla under any fields") {
    const std::vector<Instrument> insts{put("p", 1.0, 1.0), make("do", IK::barrier_down_out_put, 1.0, 1.0, 0.85),
                                        make("di", IK::barrier_down_in_put, 1.0, 1.0, 0.85)};
    const auto grid = build_grid(cfg(151, 60), insts, 1.0, 0.2);
    const std::vector<double> lambda{-3.0, 2.0, 4.0};
    const auto dual = solve_dual(kCost, insts, lambda, grid);
    const auto pr = model_prices(dual, insts, grid);
    CHECK(std::abs(pr[1] + pr[2] - pr[0]) < 1e-10);

    GridConfig lg = cfg(151, 60);
    lg.state_space = StateSpaceKind::Tag::lookback;
    const auto lgrid = build_grid(lg, insts, 1.0, 0.2);
    const auto ldual = solve_dual(kCost, insts, lambda, lgrid);
    const auto lp = model_prices(ldual, insts, lgrid);
    CHECK(std::abs(lp[1] + lp[2] - lp[0]) < 1e-10);
}

TEST_CASE("superposition and positivity") {
    const std::vector<Instrument> insts{put("p", 1.0, 0.5), make("lb", IK::lookback_fixed_strike_put, 0.95, 1.0)};
    const auto grid = build_grid(cfg(101, 40), insts, 1.0, 0.2);
    const std::vector<double> lambda{-2.0, 3.0};
    const auto dual = solve_dual(kCost, insts, lambda, grid);

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Surface src(grid, grid.time.steps());
    for (double& v : src.values()) v = u(rng);
    auto jump_of = [&](const Instrument& inst) {
        return LinearProblem::Jump{grid.time.knot_of(inst.maturity), payoff_slice(grid, inst)};
    };
    auto solve = [&](bool with_a, bool with_b, bool with_src) {
        LinearProblem p;
        p.grid = &grid;
        p.beta = &dual.beta;
        if (with_src) p.source = &src;
        if (with_a) p.jumps.push_back(jump_of(insts[0]));
        if (with_b) p.jumps.push_back(jump_of(insts[1]));
        return solve_linear(p);
    };
    const auto a = solve(true, false, false);
    const auto b = solve(false, true, false);
    const auto s = solve(false, false, true);
    const auto all = solve(true, true, true);
    CHECK(std::abs(all.initial_value - (a.initial_value + b.initial_value + s.initial_value)) < 1e-13);
    for (std::size_t k = 0; k < all.values.values().size(); ++k) {
        CHECK(all.values.values()[k] >= 0.0);
        CHECK(std::abs(all.values.values()[k] - a.values.values()[k] - b.values.values()[k] - s.values.values()[k]) <
              1e-12);
    }
}

TEST_CASE("explicit drift equal to the martingale drift changes nothing") {
    const std::vector<Instrument> insts{put("p", 1.0, 1.0)};
    const auto grid = build_grid(cfg(101, 40), insts, 1.0, 0.2);
    const Surface beta = flat_beta(grid, 0.05);
    const Surface drift(grid, grid.time.steps(), -0.025);
    LinearProblem p;
    p.grid = &grid;
    p.beta = &beta;
    p.jumps.push_back({grid.time.steps(), payoff_slice(grid, insts[0])});
    const double implicit_drift = solve_linear(p).initial_value;
    p.drift = &drift;
    CHECK(std::abs(solve_linear(p).initial_value - implicit_drift) < 1e-14);
}

TEST_CASE("mismatched fields are contract violations") {
    const std::vector<Instrument> insts{put("p", 1.0, 1.0)};
    const auto grid = build_grid(cfg(101, 40), insts, 1.0, 0.2);
    const auto other = build_grid(cfg(121, 40), insts, 1.0, 0.2);
    const Surface wrong = flat_beta(other);
    LinearProblem p;
    p.grid = &grid;
    p.beta = &wrong;
    CHECK_THROWS_AS((void)solve_linear(p), ContractViolation);
    const Surface beta = flat_beta(grid);
    p.beta = &beta;
    p.jumps.push_back({grid.time.steps(), std::vector<double>(3, 0.0)});
    CHECK_THROWS_AS((void)solve_linear(p), ContractViolation);
    LinearProblem none;
    CHECK_THROWS_AS((void)solve_linear(none), ContractViolation);
}
