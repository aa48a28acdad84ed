#include "bsch/graphs.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bsch/errors.hpp"

namespace bsch {
namespace {

constexpr double kResolventTol = 1e-13;
constexpr int kResolventBudget = 200;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Safeguarded Newton for an increasing function f on [a, b] with f(a) <= 0 <= f(b).
// Returns x with |f(x)| <= tol.
template <class F, class DF>
double safeguarded_newton(F f, DF df, double a, double b, double x, double tol) {
    x = std::clamp(x, a, b);
    for (int it = 0; it < kResolventBudget; ++it) {
        const double fx = f(x);
        if (std::abs(fx) <= tol) return x;
        if (fx < 0.0)
            a = x;
        else
            b = x;
        const double d = df(x);
        double next = (d > 0.0 && std::isfinite(d)) ? x - fx / d : 0.5 * (a + b);
        if (!(next > a && next < b)) next = 0.5 * (a + b);
        if (next == x) break;
        x = next;
    }
    if (std::abs(f(x)) <= tol) return x;
    throw ConvergenceError("resolvent iteration did not converge (residual " +
                           std::to_string(std::abs(f(x))) + ")");
}

// The logarithmic resolvent is solved for t = atanh(s): tanh(t) + 2*lambda*t = r.
// This keeps s = tanh(t) representable arbitrarily close to +-1.
double log_resolvent_t(double lambda, double r) {
    if (r == 0.0) return 0.0;
    const double a = (r - 1.0) / (2.0 * lambda);
    const double b = (r + 1.0) / (2.0 * lambda);
    auto f = [&](double t) { return std::tanh(t) + 2.0 * lambda * t - r; };
    auto df = [&](double t) {
        const double c = std::cosh(t);
        return 1.0 / (c * c) + 2.0 * lambda;
    };
    const double start = std::abs(r) < 1.0 ? std::atanh(r) / (1.0 + 2.0 * lambda) : 0.5 * (a + b);
    return safeguarded_newton(f, df, a, b, start, kResolventTol);
}

double log_beta_hat(double s) {
    if (std::abs(s) > 1.0) return kInf;
    double v = 0.0;
    if (s > -1.0) v += (1.0 + s) * std::log1p(s);
    if (s < 1.0) v += (1.0 - s) * std::log1p(-s);
    return v;
}

double quartic_resolvent(double lambda, double r) {
    if (r == 0.0) return 0.0;
    auto f = [&](double s) { return s + lambda * s * s * s - r; };
    auto df = [&](double s) { return 1.0 + 3.0 * lambda * s * s; };
    return safeguarded_newton(f, df, std::min(0.0, r), std::max(0.0, r), r, kResolventTol);
}

double custom_resolvent(const CustomGraph& c, double lambda, double r) {
    if (r == 0.0) return 0.0;
    double a = std::min(0.0, r);
    double b = std::max(0.0, r);
    a = std::max(a, std::nextafter(c.domain.lo, 0.0));
    b = std::min(b, std::nextafter(c.domain.hi, 0.0));
    if (c.domain.lo_closed) a = std::max(std::min(0.0, r), c.domain.lo);
    if (c.domain.hi_closed) b = std::min(std::max(0.0, r), c.domain.hi);
    auto f = [&](double s) { return s + lambda * c.beta(s) - r; };
    auto df = [&](double s) { return 1.0 + lambda * c.beta_prime(s); };
    return safeguarded_newton(f, df, a, b, 0.5 * (a + b), kResolventTol);
}

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v))
        throw DomainError(std::string(what) + " must be positive and finite");
}

}  // namespace

std::string_view to_string(GraphKind kind) {
    switch (kind) {
        case GraphKind::Logarithmic: return "logarithmic";
        case GraphKind::DoubleObstacle: return "double-obstacle";
        case GraphKind::RegularQuartic: return "regular-quartic";
        case GraphKind::Linear: return "linear";
        case GraphKind::Custom: return "custom";
    }
    return "unknown";
}

GraphKind graph_kind_from_string(std::string_view name) {
    for (auto k : {GraphKind::Logarithmic, GraphKind::DoubleObstacle, GraphKind::RegularQuartic,
                   GraphKind::Linear, GraphKind::Custom}) {
        if (to_string(k) == name) return k;
    }
    throw DomainError("unknown graph kind '" + std::string(name) + "'");
}

bool Interval::contains(double r) const noexcept {
    if (std::isnan(r)) return false;
    const bool above = lo_closed ? r >= lo : r > lo;
    const bool below = hi_closed ? r <= hi : r < hi;
    return above && below;
}

bool Interval::bounded() const noexcept { return std::isfinite(lo) && std::isfinite(hi); }

bool Interval::subset_of(const Interval& o) const noexcept {
    const bool lo_ok = lo > o.lo || (lo == o.lo && (o.lo_closed || !lo_closed));
    const bool hi_ok = hi < o.hi || (hi == o.hi && (o.hi_closed || !hi_closed));
    return lo_ok && hi_ok;
}

GraphSpec GraphSpec::logarithmic(double c1) {
    if (!(c1 > 0.0)) throw DomainError("logarithmic constant c1 must be positive");
    return GraphSpec(GraphKind::Logarithmic, c1, Interval{-1.0, 1.0, false, false});
}

GraphSpec GraphSpec::double_obstacle(double c2) {
    if (!(c2 > 0.0)) throw DomainError("double-obstacle constant c2 must be positive");
    return GraphSpec(GraphKind::DoubleObstacle, c2, Interval{-1.0, 1.0, true, true});
}

GraphSpec GraphSpec::regular_quartic() {
    return GraphSpec(GraphKind::RegularQuartic, 0.0, Interval::real_line());
}

GraphSpec GraphSpec::linear(double slope) {
    if (!(slope >= 0.0)) throw DomainError("linear graph slope must be nonnegative");
    return GraphSpec(GraphKind::Linear, slope, Interval::real_line());
}

GraphSpec GraphSpec::custom(CustomGraph g) {
    if (!g.beta || !g.beta_prime || !g.beta_hat || !g.pi || !g.pi_hat)
        throw DomainError("custom graph requires beta, beta_prime, beta_hat, pi and pi_hat");
    if (!g.domain.contains_interior(0.0))
        throw DomainError("custom graph domain must contain 0 in its interior");
    GraphSpec s(GraphKind::Custom, 0.0, g.domain);
    s.custom_ = std::make_shared<const CustomGraph>(std::move(g));
    return s;
}

double GraphSpec::lipschitz_pi() const noexcept {
    switch (kind_) {
        case GraphKind::Logarithmic:
        case GraphKind::DoubleObstacle: return 2.0 * constant_;
        case GraphKind::RegularQuartic: return 1.0;
        case GraphKind::Linear: return 0.0;
        case GraphKind::Custom: return custom_->lipschitz_pi;
    }
    return 0.0;
}

double GraphSpec::energy_offset() const noexcept {
    switch (kind_) {
        case GraphKind::DoubleObstacle: return constant_;
        case GraphKind::RegularQuartic: return 0.25;
        case GraphKind::Custom: return custom_->energy_offset;
        default: return 0.0;
    }
}

double GraphSpec::beta_hat(double r) const {
    switch (kind_) {
        case GraphKind::Logarithmic: return log_beta_hat(r);
        case GraphKind::DoubleObstacle: return std::abs(r) <= 1.0 ? 0.0 : kInf;
        case GraphKind::RegularQuartic: return 0.25 * r * r * r * r;
        case GraphKind::Linear: return 0.5 * constant_ * r * r;
        case GraphKind::Custom:
            if (!domain_.contains(r) && !(r == domain_.lo || r == domain_.hi)) return kInf;
            return custom_->beta_hat(r);
    }
    return kInf;
}

double minimal_section(const GraphSpec& g, double r) {
    if (!g.domain().contains(r))
        throw DomainError("minimal_section: r = " + std::to_string(r) + " outside D(beta)");
    switch (g.kind()) {
        case GraphKind::Logarithmic: return 2.0 * std::atanh(r);
        case GraphKind::DoubleObstacle: return 0.0;
        case GraphKind::RegularQuartic: return r * r * r;
        case GraphKind::Linear: return g.constant() * r;
        case GraphKind::Custom: return g.custom_graph()->beta(r);
    }
    return 0.0;
}

double resolvent(const GraphSpec& g, double lambda, double r) {
    require_positive(lambda, "resolvent parameter");
    switch (g.kind()) {
        case GraphKind::Logarithmic: return std::tanh(log_resolvent_t(lambda, r));
        case GraphKind::DoubleObstacle: return std::clamp(r, -1.0, 1.0);
        case GraphKind::RegularQuartic: return quartic_resolvent(lambda, r);
        case GraphKind::Linear: return r / (1.0 + lambda * g.constant());
        case GraphKind::Custom: return custom_resolvent(*g.custom_graph(), lambda, r);
    }
    return r;
}

// For single-valued graphs beta_eps(r) = beta(J(r)); evaluating it that way
// avoids the cancellation in (r - J(r)) / lambda when lambda is small.
double yosida(const GraphSpec& g, double eps, double r, double scale) {
    require_positive(eps, "eps");
    require_positive(scale, "scale");
    const double lambda = eps * scale;
    switch (g.kind()) {
        case GraphKind::Logarithmic: return 2.0 * log_resolvent_t(lambda, r);
        case GraphKind::DoubleObstacle: return (r - std::clamp(r, -1.0, 1.0)) / lambda;
        case GraphKind::RegularQuartic: {
            const double s = quartic_resolvent(lambda, r);
            return s * s * s;
        }
        case GraphKind::Linear: return g.constant() * r / (1.0 + lambda * g.constant());
        case GraphKind::Custom: return g.custom_graph()->beta(resolvent(g, lambda, r));
    }
    return 0.0;
}

double yosida_derivative(const GraphSpec& g, double eps, double r, double scale) {
    require_positive(eps, "eps");
    require_positive(scale, "scale");
    const double lambda = eps * scale;
    switch (g.kind()) {
        case GraphKind::Logarithmic: {
            // beta'(s) = 2 cosh^2(t); beta_eps' = beta' / (1 + lambda beta')
            const double c = std::cosh(log_resolvent_t(lambda, r));
            return 1.0 / (lambda + 0.5 / (c * c));
        }
        case GraphKind::DoubleObstacle: return std::abs(r) > 1.0 ? 1.0 / lambda : 0.0;
        case GraphKind::RegularQuartic: {
            const double s = quartic_resolvent(lambda, r);
            const double bp = 3.0 * s * s;
            return bp / (1.0 + lambda * bp);
        }
        case GraphKind::Linear: return g.constant() / (1.0 + lambda * g.constant());
        case GraphKind::Custom: {
            const double bp = g.custom_graph()->beta_prime(resolvent(g, lambda, r));
            return bp / (1.0 + lambda * bp);
        }
    }
    return 0.0;
}

double moreau(const GraphSpec& g, double eps, double r, double scale) {
    require_positive(eps, "eps");
    require_positive(scale, "scale");
    const double lambda = eps * scale;
    const double s = resolvent(g, lambda, r);
    const double d = r - s;
    return d * d / (2.0 * lambda) + g.beta_hat(s);
}

double pi_eval(const GraphSpec& g, double r) {
    switch (g.kind()) {
        case GraphKind::Logarithmic:
        case GraphKind::DoubleObstacle: return -2.0 * g.constant() * r;
        case GraphKind::RegularQuartic: return -r;
        case GraphKind::Linear: return 0.0;
        case GraphKind::Custom: return g.custom_graph()->pi(r);
    }
    return 0.0;
}

double pihat_eval(const GraphSpec& g, double r) {
    switch (g.kind()) {
        case GraphKind::Logarithmic:
        case GraphKind::DoubleObstacle: return -g.constant() * r * r;
        case GraphKind::RegularQuartic: return -0.5 * r * r;
        case GraphKind::Linear: return 0.0;
        case GraphKind::Custom: return g.custom_graph()->pi_hat(r);
    }
    return 0.0;
}

CompatibilityReport check_compatibility(const PotentialPair& p, int samples) {
    if (samples < 2) throw DomainError("check_compatibility needs at least two samples");
    CompatibilityReport rep;
    const Interval& db = p.boundary.domain();
    rep.domains_nested = db.subset_of(p.bulk.domain());
    if (!rep.domains_nested) rep.pass = false;

    double lo = db.bounded() ? db.lo : -3.0;
    double hi = db.bounded() ? db.hi : 3.0;
    if (db.bounded()) {
        // Open endpoints are pulled inward by a fraction of the spacing.
        const double pad = 1e-3 * (hi - lo) / (samples - 1);
        if (!db.lo_closed) lo += pad;
        if (!db.hi_closed) hi -= pad;
    }
    for (double eps : {1e-1, 1e-2, 1e-3}) {
        for (int k = 0; k < samples; ++k) {
            const double r = lo + (hi - lo) * k / (samples - 1);
            if (!p.bulk.domain().contains(r)) continue;
            const double lhs = std::abs(yosida(p.bulk, eps, r, 1.0));
            const double rhs = p.rho * std::abs(yosida(p.boundary, eps, r, p.rho)) + p.c0;
            const double margin = rhs - lhs;
            if (margin < rep.worst_margin) {
                rep.worst_margin = margin;
                rep.worst_r = r;
                rep.worst_eps = eps;
            }
        }
    }
    if (rep.worst_margin < -1e-12 * (1.0 + std::abs(rep.worst_margin))) rep.pass = false;
    return rep;
}

}  // namespace bsch
