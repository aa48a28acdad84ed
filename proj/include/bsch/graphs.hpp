#pragma once

// Convex/concave splitting of double-well potentials F = beta_hat + pi_hat,
// where beta = d(beta_hat) is a maximal monotone graph and pi is globally
// Lipschitz. Everything here is a pure function of its arguments.

#include <functional>
#include <memory>
#include <limits>
#include <string>
#include <string_view>

namespace bsch {

enum class GraphKind { Logarithmic, DoubleObstacle, RegularQuartic, Linear, Custom };

std::string_view to_string(GraphKind kind);
GraphKind graph_kind_from_string(std::string_view name);

struct Interval {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    bool lo_closed = false;
    bool hi_closed = false;

    bool contains(double r) const noexcept;
    bool contains_interior(double r) const noexcept { return r > lo && r < hi; }
    bool bounded() const noexcept;
    // Inclusion as sets, endpoint openness included.
    bool subset_of(const Interval& other) const noexcept;

    static Interval real_line() { return {}; }
};

// User-provided single-valued graph. beta must be monotone on the domain and
// vanish at 0; pi_hat(0) == 0.
struct CustomGraph {
    std::function<double(double)> beta;
    std::function<double(double)> beta_prime;
    std::function<double(double)> beta_hat;
    std::function<double(double)> pi;
    std::function<double(double)> pi_hat;
    double lipschitz_pi = 0.0;
    double energy_offset = 0.0;
    Interval domain;
};

class GraphSpec {
public:
    static GraphSpec logarithmic(double c1 = 2.0);
    static GraphSpec double_obstacle(double c2 = 1.0);
    static GraphSpec regular_quartic();
    static GraphSpec linear(double slope);
    static GraphSpec custom(CustomGraph g);

    GraphKind kind() const noexcept { return kind_; }
    // c1, c2 or slope; unused for the quartic.
    double constant() const noexcept { return constant_; }
    const Interval& domain() const noexcept { return domain_; }
    double lipschitz_pi() const noexcept;
    // F(0) - beta_hat(0): the additive constant that turns beta_hat + pi_hat into F.
    double energy_offset() const noexcept;

    // Convex part; +inf outside the closure of the domain.
    double beta_hat(double r) const;
    const CustomGraph* custom_graph() const noexcept { return custom_.get(); }

private:
    GraphSpec(GraphKind k, double c, Interval d) : kind_(k), constant_(c), domain_(d) {}

    GraphKind kind_;
    double constant_;
    Interval domain_;
    std::shared_ptr<const CustomGraph> custom_;
};

struct PotentialPair {
    GraphSpec bulk = GraphSpec::regular_quartic();
    GraphSpec boundary = GraphSpec::regular_quartic();
    double rho = 1.0;
    double c0 = 0.0;
};

// Least-modulus element of beta(r). Throws DomainError outside D(beta).
double minimal_section(const GraphSpec& g, double r);

// (I + lambda*beta)^{-1}(r). Throws ConvergenceError if the safeguarded
// Newton iteration does not reach an absolute residual of 1e-13.
double resolvent(const GraphSpec& g, double lambda, double r);

// Yosida approximation with parameter eps*scale (scale = rho on the boundary).
double yosida(const GraphSpec& g, double eps, double r, double scale = 1.0);
double yosida_derivative(const GraphSpec& g, double eps, double r, double scale = 1.0);
// Moreau envelope, the antiderivative of yosida() vanishing at 0.
double moreau(const GraphSpec& g, double eps, double r, double scale = 1.0);

double pi_eval(const GraphSpec& g, double r);
// Antiderivative of pi with pihat_eval(g, 0) == 0.
double pihat_eval(const GraphSpec& g, double r);

struct CompatibilityReport {
    bool pass = true;
    bool domains_nested = true;
    // min over samples of rho*|beta_G,eps(r)| + c0 - |beta_eps(r)|
    double worst_margin = std::numeric_limits<double>::infinity();
    double worst_r = 0.0;
    double worst_eps = 0.0;
};

// Checks |beta_eps(r)| <= rho |beta_G,eps(r)| + c0 on `samples` equispaced
// points of D(beta_G) for eps in {1e-1, 1e-2, 1e-3}. Unbounded domains are
// sampled on [-3, 3].
CompatibilityReport check_compatibility(const PotentialPair& p, int samples);

}  // namespace bsch
