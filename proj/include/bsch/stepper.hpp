#pragma once

// Backward-Euler / Newton integration of the regularized system in mixed
// form. Unknowns per step, in this order:
//   phi (bulk), mu (bulk), theta (surf), dn_phi (surf), dn_mu (surf).
// The boundary rows of the bulk Laplacian eliminate their ghost values with
// the normal-derivative unknowns, so the discrete system satisfies summation
// by parts exactly; mass conservation and the energy inequality hold at the
// discrete level.

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "bsch/diagnostics.hpp"
#include "bsch/state.hpp"

namespace bsch {

struct NewtonSystem {
    Eigen::VectorXd residual;
    Eigen::SparseMatrix<double> jacobian;  // empty unless requested
};

// Residual rows (scaled so that every row is O(1) in the unknowns):
//   (i)   phi - phi_n - tau * lap_h(mu; dn_mu)                      bulk
//   (iv)  mu - eps (phi - phi_n)/tau + lap_h(phi; dn_phi)
//            - beta_eps(phi) - pi(phi_n) + f                         bulk
//   (v)   theta - eps (psi - psi_n)/tau - dn_phi + delta lap_G(psi)
//            - beta_G,eps(psi) - pi_G(psi_n) + f_G                   surf
//   (ii)  psi - psi_n - tau (lap_G(theta) - dn_mu)                  surf
//   (iii) kappa dn_mu - (1 - kappa)(theta - mu|_G),
//            kappa = L/(1+L)  (L = 0: theta = mu|_G; L = inf: dn_mu = 0)   surf
NewtonSystem assemble_residual(const ModelParams& p, const StripGrid& g, const SolverState& prev,
                               const SolverState& trial, bool with_jacobian = true);

std::size_t newton_unknowns(const StripGrid& g);
Eigen::VectorXd pack_unknowns(const StripGrid& g, const SolverState& s);
// Writes phi, mu, theta, dn_phi, dn_mu and refreshes psi, xi, xi_G.
void unpack_unknowns(const ModelParams& p, const StripGrid& g, const Eigen::VectorXd& x,
                     SolverState& s);

// Validates conformity and finiteness of beta_hat, then builds the t = 0
// state with xi, xi_G from the Yosida maps and mu, theta from the static
// chemical-potential relations.
SolverState initial_state(const ModelParams& p, const StripGrid& g, const InitialData& init);

// Owns the sparse LU workspace so the symbolic factorization is reused
// across Newton iterations and steps. Not thread-safe; use one per run.
class Stepper {
public:
    Stepper(ModelParams params, StripGrid grid);

    const ModelParams& params() const noexcept { return params_; }
    const StripGrid& grid() const noexcept { return grid_; }

    SolverState advance(const SolverState& state);
    // Residual infinity norm after each Newton iteration of the last advance.
    const std::vector<double>& last_trace() const noexcept { return trace_; }

private:
    ModelParams params_;
    StripGrid grid_;
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
    bool analyzed_ = false;
    std::vector<double> trace_;
};

SolverState advance(const ModelParams& p, const StripGrid& g, const SolverState& state);

struct Trajectory {
    StripGrid grid;
    double tau = 0.0;
    std::vector<SolverState> states;  // every stored step, states[0] at t = 0
    std::vector<DiagRecord> diagnostics;  // one record per step, including t = 0
    int store_every = 1;
};

struct RunOptions {
    int store_every = 1;  // 0 keeps only the initial and final states
    bool diagnostics = true;
    std::function<void(const SolverState& prev, const SolverState& next)> hook;
};

// Errors from a step are rethrown with the failing step index prepended.
Trajectory run(const ModelParams& p, const StripGrid& g, const InitialData& init,
               const RunOptions& opts = {});

}  // namespace bsch
