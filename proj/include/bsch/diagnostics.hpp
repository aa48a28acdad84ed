#pragma once

#include <string>
#include <vector>

#include "bsch/elliptic.hpp"
#include "bsch/state.hpp"

namespace bsch {

struct DiagRecord {
    double t = 0.0;
    double mass_total = 0.0;
    double mass_bulk = 0.0;
    double mass_surf = 0.0;
    double energy = 0.0;
    double dissipation = 0.0;
    double grad_mu_sq = 0.0;
    double grad_theta_sq = 0.0;
    double robin_gap_sq = 0.0;
    double xi_l2 = 0.0;
    double xiG_l2 = 0.0;
    int newton_iters = 0;
};

struct Masses {
    double total = 0.0;
    double bulk = 0.0;
    double surf = 0.0;
};

struct DissipationTerms {
    double grad_mu_sq = 0.0;
    double grad_theta_sq = 0.0;
    double robin_gap_sq = 0.0;
};

// Regularized free energy: bulk and surface Dirichlet energies plus the
// Moreau envelopes of the convex parts and the concave parts (with the
// additive constant of F, G).
double energy(const ModelParams& p, const StripGrid& g, const SolverState& s);
Masses masses(const StripGrid& g, const SolverState& s);
DissipationTerms dissipation_terms(const StripGrid& g, const SolverState& s);
DiagRecord diagnose(const ModelParams& p, const StripGrid& g, const SolverState& s);

// (E(next) - E(prev)) / tau + |grad mu|^2 + |grad_G theta|^2 + chi(L)|mu - theta|^2
//   + eps (|phi_t|^2 + |psi_t|^2), evaluated with next-step potentials.
// Vanishes as tau -> 0 along a smooth trajectory.
double dissipation_defect(const ModelParams& p, const StripGrid& g, const SolverState& prev,
                          const SolverState& next);

// Uniform-estimate monitors along one trajectory.
struct UniformEstimates {
    double max_V1 = 0.0;           // max_t |(phi, psi)|_{V^1}
    double max_moreau_l1 = 0.0;    // max_t (int beta_hat_eps(phi) + int beta_hat_G,eps(psi))
    double sum_xi_sq = 0.0;        // sum_n tau |(xi, xi_G)|^2_{L^2}
};

struct Trajectory;

UniformEstimates uniform_estimates(const ModelParams& p, const StripGrid& g, const Trajectory& tr);

struct TrajectoryError {
    double linf_dual = 0.0;     // max_n |P(phi_a - phi_b)|_{0,*}
    double l2_V1 = 0.0;         // (sum_n tau [b_delta(d, d) + |d|^2])^{1/2}
    double l2_gap = 0.0;        // (sum_n tau |mu_a - theta_a|^2_Gamma)^{1/2}
    double l2_bulk_grad = 0.0;  // (sum_n tau |grad d|^2_Omega)^{1/2}
};

// Both trajectories must share grid, step and horizon. The dual norm is taken
// in ctx_ref (conventionally L = 1) so errors are comparable across runs.
TrajectoryError trajectory_error(const EllipticContext& ctx_ref, const Trajectory& a,
                                 const Trajectory& b, double delta);

// tau-weighted |mu - theta|_{L^2(Sigma)} of a single trajectory.
double l2_gap(const StripGrid& g, const Trajectory& tr);

std::string diagnostics_csv_header();
std::string diagnostics_csv_row(const DiagRecord& r);

}  // namespace bsch
