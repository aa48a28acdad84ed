#pragma once

// Model parameters and per-step solver state for the regularized
// Cahn-Hilliard system with kinetic-rate dynamic boundary conditions.

#include <functional>
#include <vector>

#include "bsch/graphs.hpp"
#include "bsch/grid.hpp"

namespace bsch {

// Bulk and boundary forcing (f, f_G) at time t.
using ForcingFn = std::function<CoupledField(const StripGrid&, double t)>;

struct ModelParams {
    double L = 1.0;      // kinetic parameter in [0, inf]; inf selects the decoupled regime
    double delta = 1.0;  // surface diffusion
    double eps = 1e-2;   // Yosida / viscosity parameter in (0, 1)
    PotentialPair potentials;
    ForcingFn forcing;  // empty means zero forcing
    double T = 0.25;
    double tau = 1.0 / 512.0;
    double newton_tol = 1e-10;
    int newton_max = 50;

    // Number of steps T / tau; throws ConfigError unless it is a positive integer.
    int steps() const;
    void validate() const;
};

struct SolverState {
    double t = 0.0;
    std::vector<double> phi;     // bulk
    std::vector<double> psi;     // surf, trace of phi
    std::vector<double> mu;      // bulk
    std::vector<double> theta;   // surf
    std::vector<double> xi;      // beta_eps(phi)
    std::vector<double> xi_G;    // beta_G,eps(psi)
    std::vector<double> dn_phi;  // discrete outward normal derivative of phi
    std::vector<double> dn_mu;   // discrete outward normal derivative of mu
    int newton_iters = 0;
};

struct InitialData {
    std::vector<double> phi0;
    std::vector<double> psi0;
};

}  // namespace bsch
