#pragma once

// Coupled bulk-surface elliptic problems on the strip:
//   a_L((u,u_G),(z,z_G)) = <(f,f_G),(z,z_G)>  for all test pairs,
// with a_L = bulk Dirichlet + surface Dirichlet + chi(L) * Robin gap, plus the
// Neumann / periodic inverse Laplacians and the induced dual norms.

#include <Eigen/SparseCore>
#include <limits>
#include <span>
#include <vector>

#include "bsch/grid.hpp"

namespace bsch {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// 1/L for L in (0, inf), 0 for L = 0 and L = inf.
double chi(double L) noexcept;

struct SolveStats {
    int iterations = 0;
    double relative_residual = 0.0;
};

// Immutable after construction; safe to share between threads.
class EllipticContext {
public:
    EllipticContext(StripGrid grid, double L, double tolerance = 1e-11, int max_iterations = 20000);

    const StripGrid& grid() const noexcept { return grid_; }
    double L() const noexcept { return L_; }
    double tolerance() const noexcept { return tol_; }
    int max_iterations() const noexcept { return max_it_; }
    // L = 0: unknowns are the bulk nodes only (u_G is the trace).
    bool conforming() const noexcept { return L_ == 0.0; }

    // Weak stiffness matrix of a_L on the unknown vector: [bulk; surf] for
    // L > 0, bulk only for L = 0.
    const Eigen::SparseMatrix<double>& stiffness() const noexcept { return K_; }
    // Lumped mass (quadrature weights) on the same unknown vector.
    std::span<const double> mass() const noexcept { return mass_; }
    std::size_t unknowns() const noexcept { return mass_.size(); }

    // Strong form M^{-1} K x on the unknown vector.
    void apply(std::span<const double> x, std::span<double> out) const;

    std::vector<double> pack(const CoupledField& f) const;
    CoupledField unpack(std::span<const double> x) const;
    // M^{-1} times the weak load of `rhs` on the unknown vector.
    std::vector<double> load(const CoupledField& rhs) const;

private:
    StripGrid grid_;
    double L_;
    double tol_;
    int max_it_;
    Eigen::SparseMatrix<double> K_;
    std::vector<double> mass_;
    std::vector<double> diag_;

    friend CoupledField solve_SL(const EllipticContext&, const CoupledField&, SolveStats*);
};

double generalized_mean(const StripGrid& g, const CoupledField& f);
CoupledField project_P(const StripGrid& g, const CoupledField& f);

// Throws ConformityError for L = 0 with a non-conforming argument.
double apply_aL(const StripGrid& g, double L, const CoupledField& f, const CoupledField& h);
double apply_aL(const EllipticContext& ctx, const CoupledField& f, const CoupledField& h);
double apply_bdelta(const StripGrid& g, double delta, const CoupledField& f, const CoupledField& h);

// Mean-free solution of the coupled problem. rhs must satisfy
// |Omega|<f>_Omega + |Gamma|<f_G>_Gamma = 0 (MeanError otherwise). Not
// defined for L = inf.
CoupledField solve_SL(const EllipticContext& ctx, const CoupledField& rhs,
                      SolveStats* stats = nullptr);

// Homogeneous-Neumann bulk problem and periodic per-line surface problem.
std::vector<double> solve_NOmega(const StripGrid& g, std::span<const double> y,
                                 double tolerance = 1e-11, SolveStats* stats = nullptr);
std::vector<double> solve_NGamma(const StripGrid& g, std::span<const double> y,
                                 double tolerance = 1e-11, SolveStats* stats = nullptr);

// sqrt(<f, S^L f>) for mean-free f.
double dual_norm_0star(const EllipticContext& ctx, const CoupledField& f);
// sqrt(|P f|_{0,*}^2 + mean(f)^2)
double dual_norm_star(const EllipticContext& ctx, const CoupledField& f);

}  // namespace bsch
