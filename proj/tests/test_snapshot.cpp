#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "bsch/errors.hpp"
#include "bsch/snapshot.hpp"
#include "oracles.hpp"

using namespace bsch;

namespace {

SolverState random_state(const StripGrid& g, unsigned seed) {
    std::mt19937_64 rng(seed);
    SolverState s;
    s.t = 0.1 * seed + 1.0 / 3.0;
    s.phi = oracle::random_values(rng, g.bulk_size());
    s.mu = oracle::random_values(rng, g.bulk_size());
    s.xi = oracle::random_values(rng, g.bulk_size());
    s.psi = oracle::random_values(rng, g.surf_size());
    s.theta = oracle::random_values(rng, g.surf_size());
    s.xi_G = oracle::random_values(rng, g.surf_size());
    s.phi[0] = std::numeric_limits<double>::denorm_min();
    s.mu[1] = -1e300;
    s.xi[2] = 0.1;
    return s;
}

}  // namespace

TEST_CASE("snapshot round trip is bit exact") {
    const StripGrid g(12, 7, 2.5);
    const SolverState s = random_state(g, 3);
    const Snapshot r = parse_snapshot(format_snapshot(g, s));
    CHECK(r.nx == 12);
    CHECK(r.ny == 7);
    CHECK(r.lx == 2.5);
    CHECK(r.state.t == s.t);
    CHECK(r.state.phi == s.phi);
    CHECK(r.state.mu == s.mu);
    CHECK(r.state.xi == s.xi);
    CHECK(r.state.psi == s.psi);
    CHECK(r.state.theta == s.theta);
    CHECK(r.state.xi_G == s.xi_G);
    CHECK(format_snapshot(g, r.state) == format_snapshot(g, s));
}

TEST_CASE("snapshot layout") {
    const StripGrid g(4, 4, 1.0);
    SolverState s = random_state(g, 1);
    const std::string text = format_snapshot(g, s);
    std::istringstream is(text);
    std::string line;
    std::getline(is, line);
    CHECK(line.rfind("bsch-snapshot v1 nx=4 ny=4 lx=1 t=", 0) == 0);
    std::getline(is, line);
    CHECK(line == "phi");
    std::getline(is, line);
    std::istringstream vals(line);
    int n = 0;
    for (double v; vals >> v;) ++n;
    CHECK(n == 16);
}

TEST_CASE("malformed snapshots") {
    const StripGrid g(4, 4, 1.0);
    const std::string good = format_snapshot(g, random_state(g, 2));
    auto pointer_of = [](const std::string& text) {
        try {
            parse_snapshot(text);
        } catch (const ConfigError& e) {
            return e.pointer();
        }
        return std::string("<none>");
    };
    CHECK(pointer_of("") == "/header");
    CHECK(pointer_of("bsch-snapshot v2 nx=4 ny=4 lx=1 t=0\n") == "/header");
    CHECK(pointer_of(good.substr(0, good.find("mu"))) == "/mu");
    std::string renamed = good;
    renamed.replace(renamed.find("\nmu\n"), 4, "\nmv\n");
    CHECK(pointer_of(renamed) == "/mu");
    std::string bad_value = good;
    const auto p = bad_value.find('\n', bad_value.find("\nphi\n") + 1) + 1;
    bad_value.insert(p, "x");
    CHECK(pointer_of(bad_value) == "/phi");
    CHECK_THROWS_AS(load_snapshot("/nonexistent/snap.txt"), ConfigError);
}
