#include "bsch/diagnostics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>

#include "bsch/errors.hpp"
#include "bsch/stepper.hpp"

namespace bsch {
namespace {

double potential_sum(const StripGrid& g, std::span<const double> w, std::span<const double> v,
                     const GraphSpec& gr, double eps, double scale) {
    double s = 0.0;
    const double off = gr.energy_offset();
    for (std::size_t k = 0; k < v.size(); ++k)
        s += w[k] * (moreau(gr, eps, v[k], scale) + pihat_eval(gr, v[k]) + off);
    (void)g;
    return s;
}

double moreau_sum(std::span<const double> w, std::span<const double> v, const GraphSpec& gr,
                  double eps, double scale) {
    double s = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) s += w[k] * moreau(gr, eps, v[k], scale);
    return s;
}

std::string fmt17(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

}  // namespace

double energy(const ModelParams& p, const StripGrid& g, const SolverState& s) {
    const auto& pot = p.potentials;
    double e = 0.5 * dirichlet_bulk(g, s.phi, s.phi);
    if (p.delta != 0.0) e += 0.5 * p.delta * dirichlet_surf(g, s.psi, s.psi);
    e += potential_sum(g, g.bulk_weights(), s.phi, pot.bulk, p.eps, 1.0);
    e += potential_sum(g, g.surf_weights(), s.psi, pot.boundary, p.eps, pot.rho);
    return e;
}

Masses masses(const StripGrid& g, const SolverState& s) {
    Masses m;
    m.bulk = g.area() * bulk_mean(g, s.phi);
    m.surf = g.perimeter() * surf_mean(g, s.psi);
    m.total = m.bulk + m.surf;
    return m;
}

DissipationTerms dissipation_terms(const StripGrid& g, const SolverState& s) {
    DissipationTerms d;
    d.grad_mu_sq = dirichlet_bulk(g, s.mu, s.mu);
    d.grad_theta_sq = dirichlet_surf(g, s.theta, s.theta);
    auto gap = trace(g, s.mu);
    for (std::size_t k = 0; k < gap.size(); ++k) gap[k] -= s.theta[k];
    d.robin_gap_sq = inner_surf(g, gap, gap);
    return d;
}

DiagRecord diagnose(const ModelParams& p, const StripGrid& g, const SolverState& s) {
    DiagRecord r;
    r.t = s.t;
    const Masses m = masses(g, s);
    r.mass_total = m.total;
    r.mass_bulk = m.bulk;
    r.mass_surf = m.surf;
    r.energy = energy(p, g, s);
    const DissipationTerms d = dissipation_terms(g, s);
    r.grad_mu_sq = d.grad_mu_sq;
    r.grad_theta_sq = d.grad_theta_sq;
    r.robin_gap_sq = d.robin_gap_sq;
    r.dissipation = d.grad_mu_sq + d.grad_theta_sq + chi(p.L) * d.robin_gap_sq;
    r.xi_l2 = std::sqrt(inner_bulk(g, s.xi, s.xi));
    r.xiG_l2 = std::sqrt(inner_surf(g, s.xi_G, s.xi_G));
    r.newton_iters = s.newton_iters;
    return r;
}

double dissipation_defect(const ModelParams& p, const StripGrid& g, const SolverState& prev,
                          const SolverState& next) {
    const double tau = next.t - prev.t;
    const DissipationTerms d = dissipation_terms(g, next);
    std::vector<double> dphi(next.phi.size()), dpsi(next.psi.size());
    for (std::size_t k = 0; k < dphi.size(); ++k) dphi[k] = (next.phi[k] - prev.phi[k]) / tau;
    for (std::size_t k = 0; k < dpsi.size(); ++k) dpsi[k] = (next.psi[k] - prev.psi[k]) / tau;
    const double visc = p.eps * (inner_bulk(g, dphi, dphi) + inner_surf(g, dpsi, dpsi));
    return (energy(p, g, next) - energy(p, g, prev)) / tau + d.grad_mu_sq + d.grad_theta_sq +
           chi(p.L) * d.robin_gap_sq + visc;
}

UniformEstimates uniform_estimates(const ModelParams& p, const StripGrid& g,
                                   const Trajectory& tr) {
    UniformEstimates u;
    const auto& pot = p.potentials;
    const double dt = tr.tau * std::max(1, tr.store_every);
    for (std::size_t n = 0; n < tr.states.size(); ++n) {
        const SolverState& s = tr.states[n];
        const double v1 = inner_bulk(g, s.phi, s.phi) + dirichlet_bulk(g, s.phi, s.phi) +
                          inner_surf(g, s.psi, s.psi) + dirichlet_surf(g, s.psi, s.psi);
        u.max_V1 = std::max(u.max_V1, std::sqrt(v1));
        const double me = moreau_sum(g.bulk_weights(), s.phi, pot.bulk, p.eps, 1.0) +
                          moreau_sum(g.surf_weights(), s.psi, pot.boundary, p.eps, pot.rho);
        u.max_moreau_l1 = std::max(u.max_moreau_l1, me);
        if (n > 0) u.sum_xi_sq += dt * (inner_bulk(g, s.xi, s.xi) + inner_surf(g, s.xi_G, s.xi_G));
    }
    return u;
}

double l2_gap(const StripGrid& g, const Trajectory& tr) {
    const double dt = tr.tau * std::max(1, tr.store_every);
    double s = 0.0;
    for (std::size_t n = 1; n < tr.states.size(); ++n) {
        s += dt * dissipation_terms(g, tr.states[n]).robin_gap_sq;
    }
    return std::sqrt(s);
}

TrajectoryError trajectory_error(const EllipticContext& ctx_ref, const Trajectory& a,
                                 const Trajectory& b, double delta) {
    const StripGrid& g = ctx_ref.grid();
    if (!(a.grid == g) || !(b.grid == g)) throw ShapeError("trajectory_error: grid mismatch");
    if (a.states.size() != b.states.size() || a.tau != b.tau || a.store_every != b.store_every)
        throw ShapeError("trajectory_error: trajectories have different time grids");
    for (std::size_t n = 0; n < a.states.size(); ++n) {
        if (std::abs(a.states[n].t - b.states[n].t) > 1e-12 * (1.0 + std::abs(a.states[n].t)))
            throw ShapeError("trajectory_error: snapshot times differ");
    }
    const double dt = a.tau * std::max(1, a.store_every);
    TrajectoryError e;
    double v1 = 0.0, gap = 0.0, bg = 0.0;
    for (std::size_t n = 0; n < a.states.size(); ++n) {
        const SolverState& sa = a.states[n];
        const SolverState& sb = b.states[n];
        CoupledField d{sa.phi, sa.psi};
        d -= CoupledField{sb.phi, sb.psi};
        const bool zero = std::all_of(d.bulk.begin(), d.bulk.end(), [](double v) { return v == 0.0; }) &&
                          std::all_of(d.surf.begin(), d.surf.end(), [](double v) { return v == 0.0; });
        if (!zero) e.linf_dual = std::max(e.linf_dual, dual_norm_0star(ctx_ref, project_P(g, d)));
        if (n == 0) continue;
        const double grad = dirichlet_bulk(g, d.bulk, d.bulk);
        v1 += dt * (grad + delta * dirichlet_surf(g, d.surf, d.surf) + inner_L2(g, d, d));
        bg += dt * grad;
        gap += dt * dissipation_terms(g, sa).robin_gap_sq;
    }
    e.l2_V1 = std::sqrt(v1);
    e.l2_gap = std::sqrt(gap);
    e.l2_bulk_grad = std::sqrt(bg);
    return e;
}

std::string diagnostics_csv_header() {
    return "t,mass_total,mass_bulk,mass_surf,energy,dissipation,grad_mu_sq,grad_theta_sq,"
           "robin_gap_sq,xi_l2,xiG_l2,newton_iters";
}

std::string diagnostics_csv_row(const DiagRecord& r) {
    std::string s;
    for (double v : {r.t, r.mass_total, r.mass_bulk, r.mass_surf, r.energy, r.dissipation,
                     r.grad_mu_sq, r.grad_theta_sq, r.robin_gap_sq, r.xi_l2, r.xiG_l2}) {
        s += fmt17(v);
        s += ',';
    }
    s += std::to_string(r.newton_iters);
    return s;
}

}  // namespace bsch
