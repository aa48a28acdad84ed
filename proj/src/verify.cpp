#include "bsch/verify.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "bsch/elliptic.hpp"
#include "bsch/kernels.hpp"
#include "bsch/stepper.hpp"
#include "bsch/studies.hpp"

namespace bsch {
namespace {

std::vector<GraphSpec> all_kinds() {
    return {GraphSpec::logarithmic(2.0), GraphSpec::double_obstacle(1.0), GraphSpec::regular_quartic(),
            GraphSpec::linear(1.5)};
}

// Bisection on s + lambda beta(s) = r over the closed domain.
double bisect_resolvent(const GraphSpec& g, double lambda, double r) {
    if (g.kind() == GraphKind::DoubleObstacle) return std::clamp(r, -1.0, 1.0);
    const Interval d = g.domain();
    double lo = d.bounded() ? std::nextafter(d.lo, 0.0) : -std::abs(r) - 1.0;
    double hi = d.bounded() ? std::nextafter(d.hi, 0.0) : std::abs(r) + 1.0;
    for (int k = 0; k < 2000 && hi - lo > 0.0; ++k) {
        const double m = 0.5 * (lo + hi);
        if (m == lo || m == hi) break;
        (m + lambda * minimal_section(g, m) < r ? lo : hi) = m;
    }
    return 0.5 * (lo + hi);
}

CheckResult check_resolvent(bool quick) {
    CheckResult c{"resolvent-oracle", true, 0.0, 1e-12, ""};
    const int n = quick ? 201 : 1001;
    for (const auto& g : all_kinds()) {
        for (double eps : {1e-1, 1e-2, 1e-3}) {
            for (int k = 0; k < n; ++k) {
                const double r = -5.0 + 10.0 * k / (n - 1);
                const double j = resolvent(g, eps, r);
                const double ref = bisect_resolvent(g, eps, r);
                const double dev = std::abs(j - ref);
                if (dev > c.measured) {
                    c.measured = dev;
                    std::ostringstream os;
                    os << to_string(g.kind()) << " eps=" << eps << " r=" << r;
                    c.detail = os.str();
                }
            }
        }
    }
    c.pass = c.measured <= c.tolerance;
    return c;
}

Eigen::VectorXd random_vector(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::VectorXd v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

CoupledField field_from(const StripGrid& g, bool conforming, const Eigen::VectorXd& z) {
    std::vector<double> bulk(z.data(), z.data() + g.bulk_size());
    if (conforming) return CoupledField::conforming(g, std::move(bulk));
    return CoupledField{std::move(bulk), std::vector<double>(z.data() + g.bulk_size(), z.data() + z.size())};
}

// Dense bordered solve of a_L(u, v) = (f, v) for all v with zero generalized mean.
CoupledField dense_SL(const StripGrid& g, double L, const CoupledField& f) {
    const bool conf = L == 0.0;
    const std::size_t n = g.bulk_size() + (conf ? 0 : g.surf_size());
    std::vector<CoupledField> basis;
    for (std::size_t k = 0; k < n; ++k) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
        e[k] = 1.0;
        basis.push_back(field_from(g, conf, e));
    }
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n + 1, n + 1);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n + 1);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) A(i, j) = apply_aL(g, L, basis[i], basis[j]);
        const double w = inner_L2(g, basis[i], CoupledField::constant(g, 1.0, 1.0));
        A(i, n) = A(n, i) = w;
        b[i] = inner_L2(g, basis[i], f);
    }
    const Eigen::VectorXd z = A.partialPivLu().solve(b);
    return field_from(g, conf, z.head(n));
}

double max_abs_diff(const CoupledField& a, const CoupledField& b) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.bulk.size(); ++k) m = std::max(m, std::abs(a.bulk[k] - b.bulk[k]));
    for (std::size_t k = 0; k < a.surf.size(); ++k) m = std::max(m, std::abs(a.surf[k] - b.surf[k]));
    return m;
}

CheckResult check_elliptic(bool quick) {
    CheckResult c{"elliptic-dense-oracle", true, 0.0, 1e-9, ""};
    const StripGrid g(8, 5, 1.0);
    std::mt19937_64 rng(7);
    const std::vector<double> Ls = quick ? std::vector<double>{0.0, 1.0} : std::vector<double>{0.0, 0.1, 1.0, 10.0};
    for (double L : Ls) {
        const EllipticContext ctx(g, L, 1e-13);
        const Eigen::VectorXd zb = random_vector(rng, g.bulk_size());
        const Eigen::VectorXd zs = random_vector(rng, g.surf_size());
        CoupledField f{std::vector<double>(zb.data(), zb.data() + zb.size()),
                       std::vector<double>(zs.data(), zs.data() + zs.size())};
        f = project_P(g, f);
        const double dev = max_abs_diff(solve_SL(ctx, f), dense_SL(g, L, f));
        if (dev > c.measured) {
            c.measured = dev;
            c.detail = "L=" + std::to_string(L);
        }
    }
    c.pass = c.measured <= c.tolerance;
    return c;
}

ModelParams small_params(const GraphSpec& kind, double L) {
    ModelParams p;
    p.L = L;
    p.delta = 0.5;
    p.eps = 0.05;
    p.potentials = {kind, kind, 1.0, 0.0};
    p.T = 1.0 / 64.0;
    p.tau = 1.0 / 64.0;
    p.newton_tol = 1e-13;
    return p;
}

CheckResult check_jacobian(bool quick) {
    CheckResult c{"jacobian-fd", true, 0.0, 1e-5, ""};
    const StripGrid g(8, 5, 1.0);
    const InitialData init = cosine_mode(g, 0.3, 1, 1, 0.05);
    std::mt19937_64 rng(11);
    const std::vector<double> Ls = quick ? std::vector<double>{1.0} : std::vector<double>{0.0, 1.0, kInfinity};
    for (const auto& kind : all_kinds()) {
        for (double L : Ls) {
            const ModelParams p = small_params(kind, L);
            const SolverState prev = initial_state(p, g, init);
            SolverState trial = prev;
            Eigen::VectorXd x = pack_unknowns(g, prev) + 0.05 * random_vector(rng, newton_unknowns(g));
            unpack_unknowns(p, g, x, trial);
            const Eigen::MatrixXd J(assemble_residual(p, g, prev, trial, true).jacobian);
            const double h = 1e-7;
            double worst = 0.0;
            for (Eigen::Index k = 0; k < x.size(); ++k) {
                SolverState sp = trial, sm = trial;
                Eigen::VectorXd xp = x, xm = x;
                xp[k] += h;
                xm[k] -= h;
                unpack_unknowns(p, g, xp, sp);
                unpack_unknowns(p, g, xm, sm);
                const Eigen::VectorXd col = (assemble_residual(p, g, prev, sp, false).residual -
                                             assemble_residual(p, g, prev, sm, false).residual) /
                                            (2.0 * h);
                const double scale = 1.0 + J.col(k).cwiseAbs().maxCoeff();
                worst = std::max(worst, (col - J.col(k)).cwiseAbs().maxCoeff() / scale);
            }
            if (worst > c.measured) {
                c.measured = worst;
                c.detail = std::string(to_string(kind.kind())) + " L=" + std::to_string(L);
            }
        }
    }
    c.pass = c.measured <= c.tolerance;
    return c;
}

// Newton with a finite-difference dense Jacobian and dense LU.
SolverState dense_newton_step(const ModelParams& p, const StripGrid& g, const SolverState& prev) {
    SolverState trial = prev;
    trial.t = prev.t + p.tau;
    Eigen::VectorXd x = pack_unknowns(g, trial);
    for (int it = 0; it < 60; ++it) {
        const Eigen::VectorXd r = assemble_residual(p, g, prev, trial, false).residual;
        if (r.cwiseAbs().maxCoeff() < 1e-13) break;
        Eigen::MatrixXd J(x.size(), x.size());
        const double h = 1e-7;
        for (Eigen::Index k = 0; k < x.size(); ++k) {
            SolverState sp = trial, sm = trial;
            Eigen::VectorXd xp = x, xm = x;
            xp[k] += h;
            xm[k] -= h;
            unpack_unknowns(p, g, xp, sp);
            unpack_unknowns(p, g, xm, sm);
            J.col(k) = (assemble_residual(p, g, prev, sp, false).residual -
                        assemble_residual(p, g, prev, sm, false).residual) /
                       (2.0 * h);
        }
        x -= J.partialPivLu().solve(r);
        unpack_unknowns(p, g, x, trial);
    }
    return trial;
}

CheckResult check_newton(bool quick) {
    CheckResult c{"newton-dense-oracle", true, 0.0, 1e-8, ""};
    const StripGrid g(8, 5, 1.0);
    const InitialData init = cosine_mode(g, 0.3, 1, 1, 0.05);
    const std::vector<double> Ls = quick ? std::vector<double>{1.0} : std::vector<double>{0.0, 1.0, kInfinity};
    for (const auto& kind : all_kinds()) {
        for (double L : Ls) {
            const ModelParams p = small_params(kind, L);
            const SolverState prev = initial_state(p, g, init);
            const SolverState a = advance(p, g, prev);
            const SolverState b = dense_newton_step(p, g, prev);
            const double dev = (pack_unknowns(g, a) - pack_unknowns(g, b)).cwiseAbs().maxCoeff();
            if (dev > c.measured) {
                c.measured = dev;
                c.detail = std::string(to_string(kind.kind())) + " L=" + std::to_string(L);
            }
        }
    }
    c.pass = c.measured <= c.tolerance;
    return c;
}

CheckResult check_green(bool quick) {
    CheckResult c{"green-identities", true, 0.0, 1e-11, ""};
    std::mt19937_64 rng(3);
    const int trials = quick ? 3 : 20;
    for (const StripGrid& g : {StripGrid(8, 5, 1.0), StripGrid(16, 9, 2.5)}) {
        for (int t = 0; t < trials; ++t) {
            const Eigen::VectorXd u = random_vector(rng, g.bulk_size());
            const Eigen::VectorXd w = random_vector(rng, g.bulk_size());
            const Eigen::VectorXd p = random_vector(rng, g.surf_size());
            const Eigen::VectorXd v = random_vector(rng, g.surf_size());
            const Eigen::VectorXd z = random_vector(rng, g.surf_size());
            std::span<const double> us(u.data(), u.size()), ws(w.data(), w.size());
            std::span<const double> ps(p.data(), p.size()), vs(v.data(), v.size()), zs(z.data(), z.size());

            const auto lap = laplacian_bulk(g, us, ps);
            const auto wt = trace(g, ws);
            const double lhs = inner_bulk(g, lap, ws) - inner_surf(g, ps, wt);
            const double rhs = -dirichlet_bulk(g, us, ws);
            const double dev_b = std::abs(lhs - rhs) / (1.0 + std::abs(rhs));

            const auto lapg = laplacian_surface(g, vs);
            const double sl = inner_surf(g, lapg, zs);
            const double sr = -dirichlet_surf(g, vs, zs);
            const double dev_s = std::abs(sl - sr) / (1.0 + std::abs(sr));
            c.measured = std::max({c.measured, dev_b, dev_s});
        }
    }
    c.pass = c.measured <= c.tolerance;
    return c;
}

CheckResult check_kernels() {
    CheckResult c{"simd-kernels", true, 0.0, 1e-12, ""};
    const kernels::KernelTable* v = kernels::avx2_table();
    if (!v || !kernels::cpu_has_avx2()) {
        c.detail = "AVX2 variant unavailable; scalar only";
        return c;
    }
    const kernels::KernelTable& s = kernels::scalar_table();
    std::mt19937_64 rng(5);
    for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 31u, 64u, 1001u}) {
        const Eigen::VectorXd a = random_vector(rng, n + 2), b = random_vector(rng, n + 2),
                              d = random_vector(rng, n + 2);
        const double ds = s.dot(a.data(), b.data(), n), dv = v->dot(a.data(), b.data(), n);
        c.measured = std::max(c.measured, std::abs(ds - dv) / (1.0 + std::abs(ds)));
        const double ws = s.wdot(a.data(), b.data(), d.data(), n), wv = v->wdot(a.data(), b.data(), d.data(), n);
        c.measured = std::max(c.measured, std::abs(ws - wv) / (1.0 + std::abs(ws)));
        std::vector<double> ys(b.data(), b.data() + n), yv = ys;
        s.axpy(0.7, a.data(), ys.data(), n);
        v->axpy(0.7, a.data(), yv.data(), n);
        for (std::size_t k = 0; k < n; ++k) c.measured = std::max(c.measured, std::abs(ys[k] - yv[k]));
        s.xpby(a.data(), -0.3, ys.data(), n);
        v->xpby(a.data(), -0.3, yv.data(), n);
        for (std::size_t k = 0; k < n; ++k) c.measured = std::max(c.measured, std::abs(ys[k] - yv[k]));
        if (n >= 3) {
            std::vector<double> os(n, 0.0), ov(n, 0.0);
            s.stencil5(a.data(), b.data(), d.data(), 2.0, 3.0, os.data(), n);
            v->stencil5(a.data(), b.data(), d.data(), 2.0, 3.0, ov.data(), n);
            for (std::size_t k = 0; k < n; ++k) c.measured = std::max(c.measured, std::abs(os[k] - ov[k]));
            s.stencil3(a.data(), 2.0, os.data(), n);
            v->stencil3(a.data(), 2.0, ov.data(), n);
            for (std::size_t k = 0; k < n; ++k) c.measured = std::max(c.measured, std::abs(os[k] - ov[k]));
        }
    }
    c.pass = c.measured <= c.tolerance;
    return c;
}

}  // namespace

std::vector<CheckResult> run_verification(bool quick) {
    return {check_resolvent(quick), check_elliptic(quick), check_green(quick),
            check_jacobian(quick),  check_newton(quick),   check_kernels()};
}

}  // namespace bsch
