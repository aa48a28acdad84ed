#include "bsch/stepper.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bsch/errors.hpp"

namespace bsch {
namespace {

struct Layout {
    std::size_t nb, ns;
    std::size_t phi() const { return 0; }
    std::size_t mu() const { return nb; }
    std::size_t theta() const { return 2 * nb; }
    std::size_t dphi() const { return 2 * nb + ns; }
    std::size_t dmu() const { return 2 * nb + 2 * ns; }
    std::size_t size() const { return 2 * nb + 3 * ns; }
};

Layout layout(const StripGrid& g) { return {g.bulk_size(), g.surf_size()}; }

double kappa(double L) {
    if (std::isinf(L)) return 1.0;
    return L / (1.0 + L);
}

double inf_norm(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

template <class Fn>
auto with_potential_errors(Fn fn) {
    try {
        return fn();
    } catch (const ConvergenceError& e) {
        throw PotentialDomainError(std::string("resolvent failure: ") + e.what());
    }
}

// Adds the coefficients of lap_h (without the flux term) at bulk node (i, j)
// to row `row`, column block starting at `col0`, scaled by `s`.
void add_bulk_laplacian(std::vector<Eigen::Triplet<double>>& t, const StripGrid& g,
                        std::size_t row, std::size_t col0, int i, int j, double s) {
    const int nx = g.nx(), ny = g.ny();
    const double cx = 1.0 / (g.hx() * g.hx());
    const double cy = 1.0 / (g.hy() * g.hy());
    t.emplace_back(row, col0 + g.idx(i, j), s * (-2.0 * cx - 2.0 * cy));
    t.emplace_back(row, col0 + g.idx((i + 1) % nx, j), s * cx);
    t.emplace_back(row, col0 + g.idx((i + nx - 1) % nx, j), s * cx);
    if (j == 0) {
        t.emplace_back(row, col0 + g.idx(i, 1), s * 2.0 * cy);
    } else if (j == ny - 1) {
        t.emplace_back(row, col0 + g.idx(i, ny - 2), s * 2.0 * cy);
    } else {
        t.emplace_back(row, col0 + g.idx(i, j - 1), s * cy);
        t.emplace_back(row, col0 + g.idx(i, j + 1), s * cy);
    }
}

// Surface second difference at (line, i); `col` maps a surface index to a column.
template <class Col>
void add_surf_laplacian(std::vector<Eigen::Triplet<double>>& t, const StripGrid& g,
                        std::size_t row, Col col, int line, int i, double s) {
    const int nx = g.nx();
    const double c = 1.0 / (g.hx() * g.hx());
    t.emplace_back(row, col(line * nx + i), -2.0 * c * s);
    t.emplace_back(row, col(line * nx + (i + 1) % nx), c * s);
    t.emplace_back(row, col(line * nx + (i + nx - 1) % nx), c * s);
}

}  // namespace

int ModelParams::steps() const {
    if (!(T > 0.0)) throw ConfigError("/time/T", "T must be positive");
    if (!(tau > 0.0)) throw ConfigError("/time/tau", "tau must be positive");
    const double n = T / tau;
    const double r = std::round(n);
    if (r < 1.0 || std::abs(n - r) > 1e-9 * std::max(1.0, n))
        throw ConfigError("/time", "T / tau must be a positive integer");
    return int(r);
}

void ModelParams::validate() const {
    if (!(L >= 0.0)) throw ConfigError("/model/L", "L must be >= 0 or \"inf\"");
    if (!(delta >= 0.0) || !std::isfinite(delta))
        throw ConfigError("/model/delta", "delta must be >= 0");
    if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("/model/eps", "eps must be in (0,1)");
    if (!(potentials.rho > 0.0)) throw ConfigError("/potentials/rho", "rho must be positive");
    if (!(potentials.c0 >= 0.0)) throw ConfigError("/potentials/c0", "c0 must be >= 0");
    if (!(newton_tol > 0.0)) throw ConfigError("/tolerances/newton", "must be positive");
    if (newton_max < 1) throw ConfigError("/tolerances/newton_max", "must be positive");
    steps();
}

std::size_t newton_unknowns(const StripGrid& g) { return layout(g).size(); }

Eigen::VectorXd pack_unknowns(const StripGrid& g, const SolverState& s) {
    const Layout lo = layout(g);
    Eigen::VectorXd x(lo.size());
    std::copy(s.phi.begin(), s.phi.end(), x.data() + lo.phi());
    std::copy(s.mu.begin(), s.mu.end(), x.data() + lo.mu());
    std::copy(s.theta.begin(), s.theta.end(), x.data() + lo.theta());
    std::copy(s.dn_phi.begin(), s.dn_phi.end(), x.data() + lo.dphi());
    std::copy(s.dn_mu.begin(), s.dn_mu.end(), x.data() + lo.dmu());
    return x;
}

void unpack_unknowns(const ModelParams& p, const StripGrid& g, const Eigen::VectorXd& x,
                     SolverState& s) {
    const Layout lo = layout(g);
    auto take = [&](std::size_t off, std::size_t n, std::vector<double>& v) {
        v.assign(x.data() + off, x.data() + off + n);
    };
    take(lo.phi(), lo.nb, s.phi);
    take(lo.mu(), lo.nb, s.mu);
    take(lo.theta(), lo.ns, s.theta);
    take(lo.dphi(), lo.ns, s.dn_phi);
    take(lo.dmu(), lo.ns, s.dn_mu);
    s.psi = trace(g, s.phi);
    s.xi.resize(lo.nb);
    s.xi_G.resize(lo.ns);
    with_potential_errors([&] {
        for (std::size_t k = 0; k < lo.nb; ++k) s.xi[k] = yosida(p.potentials.bulk, p.eps, s.phi[k]);
        for (std::size_t k = 0; k < lo.ns; ++k)
            s.xi_G[k] = yosida(p.potentials.boundary, p.eps, s.psi[k], p.potentials.rho);
        return 0;
    });
}

NewtonSystem assemble_residual(const ModelParams& p, const StripGrid& g, const SolverState& prev,
                               const SolverState& trial, bool with_jacobian) {
    const Layout lo = layout(g);
    const int nx = g.nx();
    const double tau = p.tau, eps = p.eps, delta = p.delta, rho = p.potentials.rho;
    const GraphSpec& gb = p.potentials.bulk;
    const GraphSpec& gs = p.potentials.boundary;
    const double kap = kappa(p.L);
    const double t1 = prev.t + tau;

    CoupledField force = CoupledField::zeros(g);
    if (p.forcing) force = p.forcing(g, t1);

    const auto psi = trace(g, trial.phi);
    const auto psi_n = trace(g, prev.phi);
    const auto lap_mu = laplacian_bulk(g, trial.mu, trial.dn_mu);
    const auto lap_phi = laplacian_bulk(g, trial.phi, trial.dn_phi);
    const auto lap_theta = laplacian_surface(g, trial.theta);
    const auto lap_psi = laplacian_surface(g, psi);

    NewtonSystem sys;
    sys.residual.resize(lo.size());
    auto& R = sys.residual;

    with_potential_errors([&] {
        for (std::size_t k = 0; k < lo.nb; ++k) {
            const double dphi = trial.phi[k] - prev.phi[k];
            R[lo.phi() + k] = dphi - tau * lap_mu[k];
            R[lo.mu() + k] = trial.mu[k] - eps * dphi / tau + lap_phi[k] -
                             yosida(gb, eps, trial.phi[k]) - pi_eval(gb, prev.phi[k]) +
                             force.bulk[k];
        }
        for (std::size_t k = 0; k < lo.ns; ++k) {
            const double dpsi = psi[k] - psi_n[k];
            const int line = int(k) / nx, i = int(k) % nx;
            const double mu_b = trial.mu[g.idx(i, g.boundary_row(line))];
            R[lo.theta() + k] = trial.theta[k] - eps * dpsi / tau - trial.dn_phi[k] +
                                delta * lap_psi[k] - yosida(gs, eps, psi[k], rho) -
                                pi_eval(gs, psi_n[k]) + force.surf[k];
            R[lo.dphi() + k] = dpsi - tau * (lap_theta[k] - trial.dn_mu[k]);
            R[lo.dmu() + k] = kap * trial.dn_mu[k] - (1.0 - kap) * (trial.theta[k] - mu_b);
        }
        return 0;
    });

    if (!with_jacobian) return sys;

    std::vector<Eigen::Triplet<double>> t;
    t.reserve(16 * lo.size());
    const double two_over_hy = 2.0 / g.hy();
    with_potential_errors([&] {
        for (int j = 0; j < g.ny(); ++j) {
            for (int i = 0; i < nx; ++i) {
                const std::size_t k = g.idx(i, j);
                // (i)
                t.emplace_back(lo.phi() + k, lo.phi() + k, 1.0);
                add_bulk_laplacian(t, g, lo.phi() + k, lo.mu(), i, j, -tau);
                // (iv)
                t.emplace_back(lo.mu() + k, lo.mu() + k, 1.0);
                t.emplace_back(lo.mu() + k, lo.phi() + k,
                               -eps / tau - yosida_derivative(gb, eps, trial.phi[k]));
                add_bulk_laplacian(t, g, lo.mu() + k, lo.phi(), i, j, 1.0);
                if (j == 0 || j == g.ny() - 1) {
                    const int line = j == 0 ? 0 : 1;
                    const std::size_t s = std::size_t(line) * nx + i;
                    t.emplace_back(lo.phi() + k, lo.dmu() + s, -tau * two_over_hy);
                    t.emplace_back(lo.mu() + k, lo.dphi() + s, two_over_hy);
                }
            }
        }
        auto bulk_col = [&](std::size_t s) {
            const int line = int(s) / nx, i = int(s) % nx;
            return lo.phi() + g.idx(i, g.boundary_row(line));
        };
        auto theta_col = [&](std::size_t s) { return lo.theta() + s; };
        for (int line = 0; line < 2; ++line) {
            for (int i = 0; i < nx; ++i) {
                const std::size_t s = std::size_t(line) * nx + i;
                const std::size_t kb = bulk_col(s);
                // (v)
                t.emplace_back(lo.theta() + s, lo.theta() + s, 1.0);
                t.emplace_back(lo.theta() + s, kb,
                               -eps / tau - yosida_derivative(gs, eps, psi[s], rho));
                t.emplace_back(lo.theta() + s, lo.dphi() + s, -1.0);
                if (delta != 0.0) add_surf_laplacian(t, g, lo.theta() + s, bulk_col, line, i, delta);
                // (ii)
                t.emplace_back(lo.dphi() + s, kb, 1.0);
                add_surf_laplacian(t, g, lo.dphi() + s, theta_col, line, i, -tau);
                t.emplace_back(lo.dphi() + s, lo.dmu() + s, tau);
                // (iii)
                t.emplace_back(lo.dmu() + s, lo.dmu() + s, kap);
                if (kap < 1.0) {
                    t.emplace_back(lo.dmu() + s, lo.theta() + s, -(1.0 - kap));
                    t.emplace_back(lo.dmu() + s, lo.mu() + (kb - lo.phi()), 1.0 - kap);
                }
            }
        }
        return 0;
    });
    sys.jacobian.resize(lo.size(), lo.size());
    sys.jacobian.setFromTriplets(t.begin(), t.end());
    sys.jacobian.makeCompressed();
    return sys;
}

SolverState initial_state(const ModelParams& p, const StripGrid& g, const InitialData& init) {
    if (init.phi0.size() != g.bulk_size() || init.psi0.size() != g.surf_size())
        throw ShapeError("initial data does not match grid");
    CoupledField f0{init.phi0, init.psi0};
    if (!is_finite(f0)) throw ConfigError("/init", "initial data must be finite");
    if (!is_conforming(g, f0, 1e-12)) throw ConfigError("/init", "psi0 must be the trace of phi0");
    const auto& pot = p.potentials;
    for (double v : init.phi0)
        if (!std::isfinite(pot.bulk.beta_hat(v)))
            throw ConfigError("/init", "bulk potential is infinite at the initial data");
    for (double v : init.psi0)
        if (!std::isfinite(pot.boundary.beta_hat(v)))
            throw ConfigError("/init", "boundary potential is infinite at the initial data");
    const double m0 = generalized_mean(g, f0);
    if (!pot.boundary.domain().contains_interior(m0))
        throw ConfigError("/init", "generalized mean of the initial data must lie inside D(beta_G)");

    SolverState s;
    s.t = 0.0;
    s.phi = init.phi0;
    s.psi = trace(g, s.phi);
    s.dn_phi = normal_derivative(g, s.phi);
    s.dn_mu.assign(g.surf_size(), 0.0);
    s.xi.resize(g.bulk_size());
    s.xi_G.resize(g.surf_size());
    CoupledField force = p.forcing ? p.forcing(g, 0.0) : CoupledField::zeros(g);
    with_potential_errors([&] {
        for (std::size_t k = 0; k < s.phi.size(); ++k) s.xi[k] = yosida(pot.bulk, p.eps, s.phi[k]);
        for (std::size_t k = 0; k < s.psi.size(); ++k)
            s.xi_G[k] = yosida(pot.boundary, p.eps, s.psi[k], pot.rho);
        return 0;
    });
    s.mu = laplacian_bulk(g, s.phi, s.dn_phi);
    for (std::size_t k = 0; k < s.mu.size(); ++k)
        s.mu[k] = -s.mu[k] + s.xi[k] + pi_eval(pot.bulk, s.phi[k]) - force.bulk[k];
    const auto lap_psi = laplacian_surface(g, s.psi);
    s.theta.resize(g.surf_size());
    for (std::size_t k = 0; k < s.theta.size(); ++k)
        s.theta[k] = s.dn_phi[k] - p.delta * lap_psi[k] + s.xi_G[k] +
                     pi_eval(pot.boundary, s.psi[k]) - force.surf[k];
    return s;
}

Stepper::Stepper(ModelParams params, StripGrid grid)
    : params_(std::move(params)), grid_(std::move(grid)) {
    params_.validate();
}

SolverState Stepper::advance(const SolverState& state) {
    const StripGrid& g = grid_;
    const ModelParams& p = params_;
    if (!is_conforming(g, CoupledField{state.phi, state.psi}))
        throw ConformityError("advance: state is not conforming");
    trace_.clear();

    SolverState trial = state;
    trial.t = state.t + p.tau;
    Eigen::VectorXd x = pack_unknowns(g, trial);
    auto sys = assemble_residual(p, g, state, trial, true);
    double rnorm = inf_norm(sys.residual);
    auto scale = [&] {
        const double a = std::max({inf_norm(Eigen::Map<const Eigen::VectorXd>(trial.phi.data(), trial.phi.size())),
                                   inf_norm(Eigen::Map<const Eigen::VectorXd>(trial.mu.data(), trial.mu.size())),
                                   inf_norm(Eigen::Map<const Eigen::VectorXd>(trial.theta.data(), trial.theta.size()))});
        return 1.0 + a;
    };
    int it = 0;
    while (rnorm > p.newton_tol * scale()) {
        if (it >= p.newton_max) {
            throw NewtonDivergence("Newton did not converge in " + std::to_string(p.newton_max) +
                                       " iterations (residual " + std::to_string(rnorm) + ")",
                                   trace_);
        }
        if (!analyzed_) {
            lu_.analyzePattern(sys.jacobian);
            analyzed_ = true;
        }
        lu_.factorize(sys.jacobian);
        if (lu_.info() != Eigen::Success)
            throw NewtonDivergence("Newton: singular Jacobian", trace_);
        const Eigen::VectorXd dx = lu_.solve(sys.residual);
        if (!dx.allFinite()) throw NewtonDivergence("Newton: non-finite update", trace_);

        double alpha = 1.0;
        bool accepted = false;
        for (int halving = 0; halving <= 30; ++halving) {
            const Eigen::VectorXd xt = x - alpha * dx;
            SolverState cand = trial;
            unpack_unknowns(p, g, xt, cand);
            auto r = assemble_residual(p, g, state, cand, false);
            const double rn = inf_norm(r.residual);
            if (rn < rnorm || (halving == 0 && rn <= p.newton_tol * scale())) {
                x = xt;
                trial = std::move(cand);
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) {
            throw NewtonDivergence("Newton: line search failed after 30 halvings (residual " +
                                       std::to_string(rnorm) + ")",
                                   trace_);
        }
        ++it;
        sys = assemble_residual(p, g, state, trial, true);
        rnorm = inf_norm(sys.residual);
        trace_.push_back(rnorm);
    }
    if (it == 0) unpack_unknowns(p, g, x, trial);
    trial.newton_iters = it;
    return trial;
}

SolverState advance(const ModelParams& p, const StripGrid& g, const SolverState& state) {
    Stepper s(p, g);
    return s.advance(state);
}

namespace {

template <class E>
[[noreturn]] void rethrow_annotated(const E& e, int step) {
    throw E(std::string("step ") + std::to_string(step) + ": " + e.what());
}

}  // namespace

Trajectory run(const ModelParams& p, const StripGrid& g, const InitialData& init,
               const RunOptions& opts) {
    const int n = p.steps();
    Stepper stepper(p, g);
    Trajectory tr{g, p.tau, {}, {}, opts.store_every};
    SolverState s = initial_state(p, g, init);
    tr.states.push_back(s);
    if (opts.diagnostics) tr.diagnostics.push_back(diagnose(p, g, s));
    for (int k = 1; k <= n; ++k) {
        SolverState next;
        try {
            next = stepper.advance(s);
        } catch (const NewtonDivergence& e) {
            throw NewtonDivergence(std::string("step ") + std::to_string(k) + ": " + e.what(),
                                   e.trace());
        } catch (const PotentialDomainError& e) {
            rethrow_annotated(e, k);
        } catch (const ConformityError& e) {
            rethrow_annotated(e, k);
        }
        next.t = k * p.tau;
        if (opts.hook) opts.hook(s, next);
        if (opts.diagnostics) tr.diagnostics.push_back(diagnose(p, g, next));
        const bool keep = opts.store_every > 0 ? (k % opts.store_every == 0) : (k == n);
        s = std::move(next);
        if (keep || k == n) {
            if (tr.states.empty() || tr.states.back().t != s.t) tr.states.push_back(s);
        }
    }
    return tr;
}

}  // namespace bsch
