#include <doctest.h>

#include <cmath>
#include <limits>

#include "bsch/errors.hpp"
#include "bsch/graphs.hpp"
#include "oracles.hpp"

using namespace bsch;

namespace {

double log_beta(double s) { return std::log((1.0 + s) / (1.0 - s)); }

// Convex part of the logarithmic potential, (1+s)ln(1+s) + (1-s)ln(1-s).
double log_beta_hat(double s) { return (1.0 + s) * std::log1p(s) + (1.0 - s) * std::log1p(-s); }

double log_resolvent_oracle(double lambda, double r) {
    return oracle::bisect(log_beta, lambda, r, -1.0 + 1e-16, 1.0 - 1e-16);
}

std::vector<GraphSpec> three_kinds() {
    return {GraphSpec::logarithmic(2.0), GraphSpec::double_obstacle(1.0), GraphSpec::regular_quartic()};
}

// 10^3 sample points in the closure of the domain (or [-3, 3]).
std::vector<double> sweep(const GraphSpec& g) {
    const Interval d = g.domain();
    const double lo = d.bounded() ? d.lo : -3.0, hi = d.bounded() ? d.hi : 3.0;
    std::vector<double> r;
    for (int k = 0; k < 1000; ++k) {
        double v = lo + (hi - lo) * (k + 0.5) / 1000.0;
        if (d.contains(v)) r.push_back(v);
    }
    if (d.contains(lo)) r.push_back(lo);
    if (d.contains(hi)) r.push_back(hi);
    return r;
}

}  // namespace

TEST_CASE("kind names round-trip") {
    for (auto k : {GraphKind::Logarithmic, GraphKind::DoubleObstacle, GraphKind::RegularQuartic, GraphKind::Linear,
                   GraphKind::Custom})
        CHECK(graph_kind_from_string(to_string(k)) == k);
    CHECK_THROWS_AS(graph_kind_from_string("quadratic"), DomainError);
}

TEST_CASE("minimal section") {
    CHECK(minimal_section(GraphSpec::logarithmic(2.0), 0.0) == 0.0);
    CHECK(minimal_section(GraphSpec::double_obstacle(1.0), 0.7) == 0.0);
    CHECK(minimal_section(GraphSpec::logarithmic(2.0), 0.5) == doctest::Approx(std::log(3.0)).epsilon(1e-14));
    CHECK(minimal_section(GraphSpec::regular_quartic(), 2.0) == 8.0);
    CHECK(minimal_section(GraphSpec::linear(3.0), 2.0) == 6.0);
    CHECK_THROWS_AS(minimal_section(GraphSpec::logarithmic(2.0), 1.0), DomainError);
    CHECK_THROWS_AS(minimal_section(GraphSpec::double_obstacle(1.0), 1.5), DomainError);
}

TEST_CASE("resolvent") {
    for (const auto& g : three_kinds()) CHECK(resolvent(g, 0.3, 0.0) == 0.0);
    CHECK(resolvent(GraphSpec::double_obstacle(1.0), 0.1, 1.2) == 1.0);
    CHECK(resolvent(GraphSpec::double_obstacle(1.0), 0.1, -3.0) == -1.0);

    const double s = resolvent(GraphSpec::logarithmic(2.0), 0.5, 0.5);
    CHECK(std::abs(s - log_resolvent_oracle(0.5, 0.5)) <= 1e-13);
    CHECK(std::abs(s + 0.5 * log_beta(s) - 0.5) <= 1e-13);

    // Quartic: s + lambda s^3 = r against bisection.
    for (double r : {-4.0, -0.3, 0.01, 2.5}) {
        const double q = resolvent(GraphSpec::regular_quartic(), 0.2, r);
        CHECK(std::abs(q - oracle::bisect([](double v) { return v * v * v; }, 0.2, r, -5.0, 5.0)) <= 1e-13);
    }
    CHECK_THROWS_AS(resolvent(GraphSpec::regular_quartic(), 0.0, 1.0), DomainError);
}

TEST_CASE("resolvent residual and contraction on sweeps") {
    for (const auto& g : three_kinds()) {
        for (double eps : {1e-1, 1e-2, 1e-3}) {
            double prev_r = -6.0, prev_j = resolvent(g, eps, prev_r);
            for (int k = 1; k <= 1000; ++k) {
                const double r = -6.0 + 12.0 * k / 1000.0;
                const double j = resolvent(g, eps, r);
                CAPTURE(to_string(g.kind()));
                CAPTURE(eps);
                CAPTURE(r);
                if (g.kind() != GraphKind::DoubleObstacle && g.domain().contains_interior(j))
                {
                    // Near the edge of a bounded domain the residual is limited by the spacing of doubles at j.
                    const double jn = std::nextafter(j, r > j ? 2.0 * std::abs(r) + 1.0 : -2.0 * std::abs(r) - 1.0);
                    const double ulp_effect = g.domain().contains_interior(jn)
                                                  ? std::abs(jn - j + eps * (minimal_section(g, jn) - minimal_section(g, j)))
                                                  : std::numeric_limits<double>::infinity();
                    CHECK(std::abs(j + eps * minimal_section(g, j) - r) <=
                          1e-13 * std::max(1.0, std::abs(r)) + 2.0 * ulp_effect);
                }
                CHECK(std::abs(j - prev_j) <= std::abs(r - prev_r) * (1.0 + 1e-12));
                CHECK(j >= prev_j);
                prev_r = r;
                prev_j = j;
            }
        }
    }
}

TEST_CASE("log resolvent matches bisection across scales") {
    double worst = 0.0;
    for (double lambda : {1e-4, 1e-3, 1e-2, 0.1, 0.5, 1.0, 10.0})
        for (int k = 0; k <= 400; ++k) {
            const double r = -20.0 + 40.0 * k / 400.0;
            worst = std::max(worst, std::abs(resolvent(GraphSpec::logarithmic(2.0), lambda, r) -
                                             log_resolvent_oracle(lambda, r)));
        }
    CHECK(worst <= 1e-13);
}

TEST_CASE("yosida examples") {
    const auto obst = GraphSpec::double_obstacle(1.0);
    const auto lg = GraphSpec::logarithmic(2.0);
    for (const auto& g : three_kinds()) CHECK(yosida(g, 0.1, 0.0) == 0.0);
    CHECK(yosida(obst, 0.1, 1.2) == doctest::Approx(2.0).epsilon(1e-14));
    const double s = log_resolvent_oracle(0.5, 0.5);
    CHECK(yosida(lg, 0.5, 0.5) == doctest::Approx((0.5 - s) / 0.5).epsilon(1e-12));
    // Boundary scale: lambda = eps * rho.
    CHECK(yosida(obst, 0.1, 1.2, 2.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(yosida(GraphSpec::linear(2.0), 0.25, 3.0) == doctest::Approx(2.0 * 3.0 / 1.5).epsilon(1e-14));
}

TEST_CASE("yosida derivative") {
    const auto obst = GraphSpec::double_obstacle(1.0);
    CHECK(yosida_derivative(obst, 0.1, 0.5) == 0.0);
    CHECK(yosida_derivative(obst, 0.1, 1.2) == doctest::Approx(10.0));
    CHECK(yosida_derivative(obst, 0.1, 1.0) == 0.0);
    CHECK(yosida_derivative(obst, 0.1, -1.0) == 0.0);
    const double h = 1e-6;
    for (const auto& g : {GraphSpec::logarithmic(2.0), GraphSpec::regular_quartic(), GraphSpec::linear(0.7)}) {
        for (double eps : {0.5, 1e-1, 1e-2})
            for (double r : {-2.0, -0.9, -0.2, 0.3, 0.5, 0.95, 1.7}) {
                const double fd = (yosida(g, eps, r + h) - yosida(g, eps, r - h)) / (2.0 * h);
                const double d = yosida_derivative(g, eps, r);
                CAPTURE(to_string(g.kind()));
                CAPTURE(eps);
                CAPTURE(r);
                CHECK(std::abs(d - fd) <= 1e-6 * (1.0 + std::abs(yosida(g, eps, r))));
                CHECK(d >= 0.0);
                CHECK(d <= 1.0 / eps * (1.0 + 1e-12));
            }
    }
}

TEST_CASE("moreau envelope") {
    const auto obst = GraphSpec::double_obstacle(1.0);
    for (const auto& g : three_kinds()) CHECK(moreau(g, 0.1, 0.0) == 0.0);
    CHECK(moreau(obst, 0.1, 1.2) == doctest::Approx(0.2).epsilon(1e-14));
    const double s = log_resolvent_oracle(0.5, 0.5);
    CHECK(moreau(GraphSpec::logarithmic(2.0), 0.5, 0.5) ==
          doctest::Approx((0.5 - s) * (0.5 - s) / 1.0 + log_beta_hat(s)).epsilon(1e-12));
    // Derivative of the envelope is the Yosida map.
    const double h = 1e-5;
    for (const auto& g : three_kinds())
        for (double r : {-1.4, -0.6, 0.2, 0.8, 1.3}) {
            const double fd = (moreau(g, 0.1, r + h) - moreau(g, 0.1, r - h)) / (2.0 * h);
            CHECK(fd == doctest::Approx(yosida(g, 0.1, r)).epsilon(1e-6));
        }
}

TEST_CASE("Yosida bounds on 10^3-point sweeps") {
    for (const auto& g : three_kinds()) {
        for (double eps : {1e-1, 1e-2, 1e-3}) {
            const auto rs = sweep(g);
            double prev_r = std::numeric_limits<double>::quiet_NaN(), prev_b = 0.0;
            for (double r : rs) {
                CAPTURE(to_string(g.kind()));
                CAPTURE(eps);
                CAPTURE(r);
                const double b = yosida(g, eps, r);
                const double b0 = minimal_section(g, r);
                CHECK(std::abs(b) <= std::abs(b0) * (1.0 + 1e-12) + 1e-15);
                const double m = moreau(g, eps, r);
                CHECK(m >= 0.0);
                CHECK(m <= g.beta_hat(r) * (1.0 + 1e-12) + 1e-15);
                if (!std::isnan(prev_r) && r > prev_r) {
                    CHECK(b >= prev_b);
                    CHECK(std::abs(b - prev_b) <= (r - prev_r) / eps * (1.0 + 1e-9));
                }
                prev_r = r;
                prev_b = b;
            }
        }
    }
}

TEST_CASE("Lipschitz bound on random pairs, boundary scale") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-4.0, 4.0);
    for (const auto& g : three_kinds())
        for (double rho : {0.5, 1.0, 3.0})
            for (int k = 0; k < 300; ++k) {
                const double a = u(rng), b = u(rng);
                CHECK(std::abs(yosida(g, 1e-2, a, rho) - yosida(g, 1e-2, b, rho)) <=
                      std::abs(a - b) / (1e-2 * rho) * (1.0 + 1e-9));
            }
}

TEST_CASE("concave parts") {
    CHECK(pi_eval(GraphSpec::logarithmic(2.0), 0.5) == -2.0);
    CHECK(pi_eval(GraphSpec::double_obstacle(1.0), 0.3) == doctest::Approx(-0.6));
    CHECK(pi_eval(GraphSpec::regular_quartic(), 1.0) == -1.0);
    CHECK(pi_eval(GraphSpec::linear(2.0), 1.0) == 0.0);
    for (const auto& g : three_kinds()) {
        CHECK(pihat_eval(g, 0.0) == 0.0);
        const double h = 1e-6;
        for (double r : {-0.8, 0.1, 0.6})
            CHECK((pihat_eval(g, r + h) - pihat_eval(g, r - h)) / (2 * h) ==
                  doctest::Approx(pi_eval(g, r)).epsilon(1e-8));
    }
    // F'(r) = beta + pi = r^3 - r for the quartic split.
    CHECK(minimal_section(GraphSpec::regular_quartic(), 1.5) + pi_eval(GraphSpec::regular_quartic(), 1.5) ==
          doctest::Approx(1.5 * 1.5 * 1.5 - 1.5));
    CHECK(GraphSpec::logarithmic(2.0).lipschitz_pi() == 4.0);
    CHECK(GraphSpec::double_obstacle(1.5).lipschitz_pi() == 3.0);
    CHECK(GraphSpec::regular_quartic().lipschitz_pi() == 1.0);
    CHECK(GraphSpec::double_obstacle(1.0).energy_offset() == 1.0);
    CHECK(GraphSpec::regular_quartic().energy_offset() == 0.25);
    CHECK(GraphSpec::logarithmic(2.0).energy_offset() == 0.0);
}

TEST_CASE("beta_hat") {
    const auto lg = GraphSpec::logarithmic(2.0);
    CHECK(lg.beta_hat(0.0) == 0.0);
    CHECK(lg.beta_hat(0.5) == doctest::Approx(log_beta_hat(0.5)));
    CHECK(lg.beta_hat(1.0) == doctest::Approx(2.0 * std::log(2.0)));
    CHECK(std::isinf(lg.beta_hat(1.1)));
    CHECK(GraphSpec::double_obstacle(1.0).beta_hat(0.9) == 0.0);
    CHECK(std::isinf(GraphSpec::double_obstacle(1.0).beta_hat(1.01)));
    CHECK(GraphSpec::regular_quartic().beta_hat(2.0) == 4.0);
}

TEST_CASE("compatibility") {
    const auto lg = GraphSpec::logarithmic(2.0);
    const auto ob = GraphSpec::double_obstacle(1.0);
    CHECK(check_compatibility({lg, lg, 1.0, 0.0}, 200).pass);
    CHECK(check_compatibility({ob, ob, 1.0, 0.0}, 200).pass);
    const auto bad = check_compatibility({lg, ob, 1.0, 0.0}, 200);
    CHECK_FALSE(bad.pass);
    CHECK(bad.worst_margin < 0.0);
    // The failure shows up near the edge of D(beta_G) at eps = 0.1.
    CHECK(std::abs(yosida(lg, 0.1, 0.999)) > std::abs(yosida(ob, 0.1, 0.999)));
    // D(beta_G) = R is not inside D(beta) = (-1, 1).
    const auto rev = check_compatibility({lg, GraphSpec::regular_quartic(), 1.0, 0.0}, 50);
    CHECK_FALSE(rev.domains_nested);
    CHECK_FALSE(rev.pass);
}

TEST_CASE("custom graph") {
    CustomGraph c;
    c.beta = [](double r) { return 2.0 * r; };
    c.beta_prime = [](double) { return 2.0; };
    c.beta_hat = [](double r) { return r * r; };
    c.pi = [](double r) { return -r; };
    c.pi_hat = [](double r) { return -0.5 * r * r; };
    c.lipschitz_pi = 1.0;
    const auto g = GraphSpec::custom(c);
    CHECK(g.kind() == GraphKind::Custom);
    CHECK(resolvent(g, 0.5, 2.0) == doctest::Approx(1.0));
    CHECK(yosida(g, 0.5, 2.0) == doctest::Approx(2.0));
    CHECK(yosida_derivative(g, 0.5, 2.0) == doctest::Approx(1.0));
    CHECK(moreau(g, 0.5, 2.0) == doctest::Approx(1.0 * 1.0 / 1.0 + 1.0));
    CHECK(pi_eval(g, 3.0) == -3.0);
}
