#include <doctest.h>

#include <cmath>
#include <numbers>

#include "bsch/diagnostics.hpp"
#include "bsch/errors.hpp"
#include "bsch/studies.hpp"
#include "oracles.hpp"

using namespace bsch;

namespace {

ModelParams params(GraphSpec kind, double L, double delta = 1.0, double eps = 0.1) {
    ModelParams p;
    p.L = L;
    p.delta = delta;
    p.eps = eps;
    p.potentials = {kind, kind, 1.0, 0.0};
    p.tau = 1.0 / 64.0;
    p.T = 4.0 / 64.0;
    p.newton_tol = 1e-12;
    return p;
}

std::vector<GraphSpec> kinds() {
    return {GraphSpec::logarithmic(2.0), GraphSpec::double_obstacle(1.0), GraphSpec::regular_quartic()};
}

double total_mass(const StripGrid& g, const SolverState& s) { return masses(g, s).total; }

}  // namespace

TEST_CASE("zero state is a fixed point") {
    const StripGrid g(8, 5, 1.0);
    for (const auto& k : kinds())
        for (double L : {0.0, 1.0, kInfinity}) {
            const auto p = params(k, L);
            const auto s0 = initial_state(p, g, cosine_mode(g, 0.0, 1, 0, 0.0));
            CHECK(assemble_residual(p, g, s0, s0, false).residual.lpNorm<Eigen::Infinity>() <= 1e-12);
            const auto s1 = advance(p, g, s0);
            CHECK(oracle::max_diff(s1.phi, s0.phi) == 0.0);
            CHECK(oracle::max_diff(s1.mu, s0.mu) <= 1e-14);
            CHECK(oracle::max_diff(s1.theta, s0.theta) <= 1e-14);
        }
}

TEST_CASE("constant chemical potential states are fixed points") {
    const StripGrid g(8, 5, 1.0);
    for (const auto& k : kinds())
        for (double L : {0.0, 0.5, 3.0}) {
            const auto p = params(k, L);
            const auto s0 = initial_state(p, g, cosine_mode(g, 0.0, 1, 0, 0.3));
            CHECK(oracle::max_diff(s0.mu, std::vector<double>(s0.mu.size(), s0.mu[0])) <= 1e-13);
            CHECK(oracle::max_diff(s0.theta, std::vector<double>(s0.theta.size(), s0.mu[0])) <= 1e-13);
            const auto s1 = advance(p, g, s0);
            CHECK(oracle::max_diff(s1.phi, s0.phi) <= 1e-12);
            CHECK(oracle::max_diff(s1.theta, s0.theta) <= 1e-11);
        }
}

TEST_CASE("Jacobian matches finite differences") {
    const StripGrid g(8, 5, 1.0);
    std::mt19937_64 rng(21);
    for (const auto& k : kinds())
        for (double L : {0.0, 0.7, kInfinity})
            for (double delta : {0.0, 1.0}) {
                const auto p = params(k, L, delta);
                const auto prev = initial_state(p, g, cosine_mode(g, 0.4, 1, 1, 0.05));
                SolverState trial = prev;
                Eigen::VectorXd x = pack_unknowns(g, prev);
                const auto noise = oracle::random_values(rng, x.size(), 0.05);
                for (Eigen::Index i = 0; i < x.size(); ++i) x[i] += noise[i];
                unpack_unknowns(p, g, x, trial);
                const Eigen::MatrixXd J(assemble_residual(p, g, prev, trial, true).jacobian);
                const double h = 1e-7;
                double worst = 0.0;
                for (Eigen::Index c = 0; c < x.size(); ++c) {
                    SolverState sp = trial, sm = trial;
                    Eigen::VectorXd xp = x, xm = x;
                    xp[c] += h;
                    xm[c] -= h;
                    unpack_unknowns(p, g, xp, sp);
                    unpack_unknowns(p, g, xm, sm);
                    const Eigen::VectorXd fd = (assemble_residual(p, g, prev, sp, false).residual -
                                                assemble_residual(p, g, prev, sm, false).residual) /
                                               (2 * h);
                    worst = std::max(worst, (fd - J.col(c)).cwiseAbs().maxCoeff() /
                                                (1.0 + J.col(c).cwiseAbs().maxCoeff()));
                }
                CAPTURE(to_string(k.kind()));
                CAPTURE(L);
                CAPTURE(delta);
                CHECK(worst <= 1e-5);
            }
}

TEST_CASE("residual is affine in the chemical potentials") {
    const StripGrid g(8, 5, 1.0);
    const auto p = params(GraphSpec::regular_quartic(), 1.0);
    const auto prev = initial_state(p, g, cosine_mode(g, 0.3, 1, 1, 0.0));
    std::mt19937_64 rng(22);
    SolverState a = prev, b = prev, m = prev;
    a.mu = oracle::random_values(rng, g.bulk_size());
    b.mu = oracle::random_values(rng, g.bulk_size());
    a.theta = oracle::random_values(rng, g.surf_size());
    b.theta = oracle::random_values(rng, g.surf_size());
    for (std::size_t k = 0; k < m.mu.size(); ++k) m.mu[k] = 0.5 * (a.mu[k] + b.mu[k]);
    for (std::size_t k = 0; k < m.theta.size(); ++k) m.theta[k] = 0.5 * (a.theta[k] + b.theta[k]);
    const auto ra = assemble_residual(p, g, prev, a, false).residual;
    const auto rb = assemble_residual(p, g, prev, b, false).residual;
    const auto rm = assemble_residual(p, g, prev, m, false).residual;
    CHECK((0.5 * (ra + rb) - rm).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("single step conserves total mass") {
    const StripGrid g(64, 33, 1.0);
    auto p = params(GraphSpec::regular_quartic(), 1.0, 1.0, 0.1);
    p.tau = 1.0 / 512.0;
    const auto s0 = initial_state(p, g, cosine_mode(g, 0.1, 1, 0, 0.0));
    const auto s1 = advance(p, g, s0);
    CHECK(std::abs(total_mass(g, s1) - total_mass(g, s0)) <= 1e-10);
}

TEST_CASE("advance matches a dense Newton oracle on 8x5") {
    const StripGrid g(8, 5, 1.0);
    for (const auto& k : kinds())
        for (double L : {0.0, 1.0, kInfinity})
            for (double delta : {0.0, 1.0}) {
                const auto p = params(k, L, delta);
                const auto s0 = initial_state(p, g, cosine_mode(g, 0.4, 1, 1, 0.1));
                const auto a = advance(p, g, s0);
                const auto b = oracle::newton_step(p, g, s0);
                CAPTURE(to_string(k.kind()));
                CAPTURE(L);
                CAPTURE(delta);
                CHECK(oracle::max_diff(a.phi, b.phi) <= 1e-8);
                CHECK(oracle::max_diff(a.psi, b.psi) <= 1e-8);
                CHECK(oracle::max_diff(a.mu, b.mu) <= 1e-8);
                CHECK(oracle::max_diff(a.theta, b.theta) <= 1e-8);
                CHECK(oracle::max_diff(a.xi, b.xi) <= 1e-8);
                CHECK(oracle::max_diff(a.xi_G, b.xi_G) <= 1e-8);
            }
}

TEST_CASE("regime constraints hold after a step") {
    const StripGrid g(16, 9, 1.0);
    const auto init = cosine_mode(g, 0.3, 1, 1, 0.0);
    {
        const auto p = params(GraphSpec::regular_quartic(), 0.0);
        const auto s = advance(p, g, initial_state(p, g, init));
        CHECK(oracle::max_diff(trace(g, s.mu), s.theta) <= 1e-10);
        CHECK(is_conforming(g, CoupledField{s.phi, s.psi}));
    }
    {
        const auto p = params(GraphSpec::regular_quartic(), kInfinity);
        const auto s = advance(p, g, initial_state(p, g, init));
        CHECK(oracle::max_diff(s.dn_mu, std::vector<double>(s.dn_mu.size(), 0.0)) <= 1e-12);
        const auto s0 = initial_state(p, g, init);
        CHECK(masses(g, s).bulk == doctest::Approx(masses(g, s0).bulk).scale(1.0).epsilon(1e-12));
        CHECK(masses(g, s).surf == doctest::Approx(masses(g, s0).surf).scale(1.0).epsilon(1e-12));
    }
    {
        const auto p = params(GraphSpec::regular_quartic(), 2.0);
        const auto s = advance(p, g, initial_state(p, g, init));
        const auto mt = trace(g, s.mu);
        double worst = 0.0;
        for (std::size_t k = 0; k < mt.size(); ++k) worst = std::max(worst, std::abs(2.0 * s.dn_mu[k] - (s.theta[k] - mt[k])));
        CHECK(worst <= 1e-9);
        CHECK(is_conforming(g, CoupledField{s.phi, s.psi}));
    }
}

TEST_CASE("state invariants") {
    const StripGrid g(16, 9, 1.0);
    auto p = params(GraphSpec::double_obstacle(1.0), 1.0, 1.0, 0.05);
    p.potentials.rho = 2.0;
    const auto s = advance(p, g, initial_state(p, g, cosine_mode(g, 0.9, 1, 1, 0.0)));
    for (std::size_t k = 0; k < s.phi.size(); ++k) CHECK(s.xi[k] == yosida(p.potentials.bulk, p.eps, s.phi[k]));
    for (std::size_t k = 0; k < s.psi.size(); ++k)
        CHECK(s.xi_G[k] == yosida(p.potentials.boundary, p.eps, s.psi[k], 2.0));
    CHECK(s.newton_iters >= 1);
}

TEST_CASE("initial data validation") {
    const StripGrid g(8, 5, 1.0);
    const auto p = params(GraphSpec::logarithmic(2.0), 1.0);
    auto init = cosine_mode(g, 0.2, 1, 1, 0.0);
    init.psi0[2] += 0.1;
    CHECK_THROWS_AS(initial_state(p, g, init), ConfigError);
    CHECK_THROWS_AS(initial_state(p, g, cosine_mode(g, 0.5, 1, 1, 0.8)), ConfigError);
    InitialData bad{std::vector<double>(3), std::vector<double>(3)};
    CHECK_THROWS_AS(initial_state(p, g, bad), ShapeError);
    // Double obstacle at the constant 1: finite potential, but the mean is not interior.
    const auto po = params(GraphSpec::double_obstacle(1.0), 1.0);
    CHECK_THROWS_AS(initial_state(po, g, cosine_mode(g, 0.0, 1, 1, 1.0)), ConfigError);
}

TEST_CASE("run") {
    const StripGrid g(8, 5, 1.0);
    auto p = params(GraphSpec::regular_quartic(), 1.0);
    p.T = 0.0;
    CHECK_THROWS_AS(run(p, g, cosine_mode(g, 0.1, 1, 1, 0.0)), ConfigError);

    p.T = 10 * p.tau;
    const auto zero = run(p, g, cosine_mode(g, 0.0, 1, 1, 0.0));
    REQUIRE(zero.diagnostics.size() == 11);
    for (const auto& d : zero.diagnostics) {
        CHECK(d.energy == zero.diagnostics[0].energy);
        CHECK(d.mass_total == 0.0);
    }
    CHECK(zero.states.size() == 11);

    int calls = 0;
    RunOptions o;
    o.store_every = 0;
    o.hook = [&](const SolverState& a, const SolverState& b) {
        ++calls;
        CHECK(b.t == doctest::Approx(a.t + p.tau));
    };
    const auto tr = run(p, g, cosine_mode(g, 0.3, 1, 1, 0.0), o);
    CHECK(calls == 10);
    CHECK(tr.states.size() == 2);
    CHECK(tr.states.back().t == doctest::Approx(p.T));

    o.hook = nullptr;
    o.store_every = 5;
    CHECK(run(p, g, cosine_mode(g, 0.3, 1, 1, 0.0), o).states.size() == 3);
}

TEST_CASE("deterministic replay") {
    const StripGrid g(16, 9, 1.0);
    auto p = params(GraphSpec::logarithmic(2.0), 1.0);
    auto csv = [&] {
        std::string s;
        for (const auto& d : run(p, g, cosine_mode(g, 0.3, 1, 1, 0.0)).diagnostics) s += diagnostics_csv_row(d) + "\n";
        return s;
    };
    CHECK(csv() == csv());
}

TEST_CASE("step failures carry the step index") {
    const StripGrid g(8, 5, 1.0);
    auto p = params(GraphSpec::regular_quartic(), 1.0);
    p.newton_max = 1;
    p.newton_tol = 1e-300;
    try {
        run(p, g, cosine_mode(g, 0.3, 1, 1, 0.0));
        FAIL("expected NewtonDivergence");
    } catch (const NewtonDivergence& e) {
        CHECK(std::string(e.what()).rfind("step 1: ", 0) == 0);
        CHECK(e.trace().size() >= 1);
    }
}

TEST_CASE("forcing enters the chemical potential") {
    const StripGrid g(8, 5, 1.0);
    auto p = params(GraphSpec::regular_quartic(), 1.0);
    const auto s0 = initial_state(p, g, cosine_mode(g, 0.0, 1, 1, 0.0));
    p.forcing = [](const StripGrid& gr, double) { return CoupledField::constant(gr, 0.2, 0.2); };
    const auto s1 = advance(p, g, s0);
    // Equal uniform forcing shifts mu and theta alike and drives no flux.
    CHECK(oracle::max_diff(s1.phi, s0.phi) <= 1e-12);
    CHECK(oracle::max_diff(s1.mu, std::vector<double>(s1.mu.size(), -0.2)) <= 1e-12);
    CHECK(oracle::max_diff(s1.theta, std::vector<double>(s1.theta.size(), -0.2)) <= 1e-12);

    p.forcing = [](const StripGrid& gr, double) { return CoupledField::constant(gr, 0.2, -0.1); };
    const auto s2 = advance(p, g, s0);
    CHECK(oracle::max_diff(s2.phi, s0.phi) > 1e-6);
    CHECK(std::abs(total_mass(g, s2)) <= 1e-12);
}
