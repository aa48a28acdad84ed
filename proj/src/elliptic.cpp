#include "bsch/elliptic.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "bsch/errors.hpp"
#include "bsch/kernels.hpp"

namespace bsch {
namespace {

double weighted_sum(std::span<const double> w, std::span<const double> x) {
    return kernels::dot(w, x);
}

// Removes the w-weighted mean of x.
void remove_mean(std::span<const double> w, double wsum, std::span<double> x) {
    const double m = weighted_sum(w, x) / wsum;
    for (double& v : x) v -= m;
}

void check_mean_free(std::span<const double> w, std::span<const double> x, const char* what) {
    const double m = weighted_sum(w, x);
    const double scale = std::sqrt(kernels::wdot(w, x, x) * std::accumulate(w.begin(), w.end(), 0.0));
    if (std::abs(m) > 1e-10 * scale)
        throw MeanError(std::string(what) + ": right-hand side is not mean-free (weighted sum " +
                        std::to_string(m) + ")");
}

// Preconditioned CG for A x = b with A self-adjoint and semidefinite in the
// w-weighted inner product; `project` maps onto the complement of ker A and
// is applied to every search direction and iterate.
template <class Apply, class Project>
SolveStats pcg(Apply apply, Project project, std::span<const double> w,
               std::span<const double> diag, std::span<const double> b, std::span<double> x,
               double tol, int max_it) {
    const std::size_t n = b.size();
    std::vector<double> r(n), z(n), p(n), q(n);
    SolveStats st;
    const double bnorm = std::sqrt(kernels::wdot(w, b, b));
    if (bnorm == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        return st;
    }
    auto true_residual = [&] {
        apply(std::span<const double>(x), std::span<double>(q));
        for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
    };
    project(x);
    true_residual();
    double rnorm = std::sqrt(kernels::wdot(w, r, r));
    double rz = 0.0;
    bool restart = true;
    while (rnorm > tol * bnorm) {
        if (st.iterations >= max_it) {
            throw ConvergenceError("conjugate gradients: iteration budget " +
                                   std::to_string(max_it) + " exhausted (relative residual " +
                                   std::to_string(rnorm / bnorm) + ")");
        }
        for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag[i];
        project(z);
        const double rz_new = kernels::wdot(w, r, z);
        if (restart) {
            std::copy(z.begin(), z.end(), p.begin());
            restart = false;
        } else {
            kernels::xpby(z, rz_new / rz, p);
        }
        rz = rz_new;
        apply(std::span<const double>(p), std::span<double>(q));
        const double pq = kernels::wdot(w, p, q);
        if (!(pq > 0.0)) throw ConvergenceError("conjugate gradients: operator not positive");
        const double alpha = rz / pq;
        kernels::axpy(alpha, p, x);
        kernels::axpy(-alpha, q, r);
        project(x);
        ++st.iterations;
        rnorm = std::sqrt(kernels::wdot(w, r, r));
        if (rnorm <= tol * bnorm) {
            // Guard against drift of the recursive residual.
            true_residual();
            rnorm = std::sqrt(kernels::wdot(w, r, r));
            restart = true;
        }
    }
    st.relative_residual = rnorm / bnorm;
    return st;
}

}  // namespace

double chi(double L) noexcept { return (L > 0.0 && std::isfinite(L)) ? 1.0 / L : 0.0; }

EllipticContext::EllipticContext(StripGrid grid, double L, double tolerance, int max_iterations)
    : grid_(std::move(grid)), L_(L), tol_(tolerance), max_it_(max_iterations) {
    if (!(L >= 0.0)) throw DomainError("kinetic parameter L must be >= 0");
    if (!(tolerance > 0.0)) throw DomainError("elliptic tolerance must be positive");
    const StripGrid& g = grid_;
    const int nx = g.nx(), ny = g.ny();
    const std::size_t nb = g.bulk_size();
    const bool conf = conforming();
    const std::size_t n = conf ? nb : nb + g.surf_size();

    mass_.assign(g.bulk_weights().begin(), g.bulk_weights().end());
    if (conf) {
        for (int line = 0; line < 2; ++line)
            for (int i = 0; i < nx; ++i) mass_[g.idx(i, g.boundary_row(line))] += g.hx();
    } else {
        mass_.insert(mass_.end(), g.surf_weights().begin(), g.surf_weights().end());
    }

    std::vector<Eigen::Triplet<double>> t;
    t.reserve(10 * n);
    auto edge = [&](std::size_t a, std::size_t b, double c) {
        t.emplace_back(a, a, c);
        t.emplace_back(b, b, c);
        t.emplace_back(a, b, -c);
        t.emplace_back(b, a, -c);
    };
    const double hx = g.hx(), hy = g.hy();
    for (int j = 0; j < ny; ++j) {
        const double wy = (j == 0 || j == ny - 1) ? 0.5 * hy : hy;
        for (int i = 0; i < nx; ++i) edge(g.idx(i, j), g.idx((i + 1) % nx, j), wy / hx);
    }
    for (int j = 0; j + 1 < ny; ++j)
        for (int i = 0; i < nx; ++i) edge(g.idx(i, j), g.idx(i, j + 1), hx / hy);
    // Surface unknown index for line/column.
    auto surf_index = [&](int line, int i) -> std::size_t {
        return conf ? g.idx(i, g.boundary_row(line)) : nb + std::size_t(line) * nx + i;
    };
    for (int line = 0; line < 2; ++line)
        for (int i = 0; i < nx; ++i) edge(surf_index(line, i), surf_index(line, (i + 1) % nx), 1.0 / hx);
    const double c = chi(L_);
    if (!conf && c > 0.0) {
        for (int line = 0; line < 2; ++line)
            for (int i = 0; i < nx; ++i) edge(g.idx(i, g.boundary_row(line)), surf_index(line, i), c * hx);
    }
    K_.resize(n, n);
    K_.setFromTriplets(t.begin(), t.end());
    K_.makeCompressed();
    diag_.resize(n);
    for (std::size_t i = 0; i < n; ++i) diag_[i] = K_.coeff(i, i) / mass_[i];
}

void EllipticContext::apply(std::span<const double> x, std::span<double> out) const {
    const StripGrid& g = grid_;
    const int nx = g.nx();
    const std::size_t nb = g.bulk_size();
    const auto wb = g.bulk_weights();
    if (conforming()) {
        laplacian_bulk(g, x, {}, out);
        auto tr = trace(g, x);
        auto ls = laplacian_surface(g, tr);
        for (std::size_t k = 0; k < nb; ++k) out[k] = -out[k] * wb[k];
        for (int line = 0; line < 2; ++line) {
            for (int i = 0; i < nx; ++i) {
                const std::size_t k = g.idx(i, g.boundary_row(line));
                out[k] -= g.hx() * ls[line * nx + i];
            }
        }
        for (std::size_t k = 0; k < nb; ++k) out[k] /= mass_[k];
        return;
    }
    const auto y = x.first(nb);
    const auto yg = x.subspan(nb);
    const double c = chi(L_);
    std::vector<double> gap(g.surf_size(), 0.0);
    if (c > 0.0) {
        for (int line = 0; line < 2; ++line)
            for (int i = 0; i < nx; ++i)
                gap[line * nx + i] = c * (yg[line * nx + i] - y[g.idx(i, g.boundary_row(line))]);
    }
    auto ob = out.first(nb);
    auto os = out.subspan(nb);
    laplacian_bulk(g, y, gap, ob);
    for (double& v : ob) v = -v;
    laplacian_surface(g, yg, os);
    for (std::size_t k = 0; k < os.size(); ++k) os[k] = -os[k] + gap[k];
}

std::vector<double> EllipticContext::pack(const CoupledField& f) const {
    if (conforming()) return f.bulk;
    std::vector<double> x(f.bulk);
    x.insert(x.end(), f.surf.begin(), f.surf.end());
    return x;
}

CoupledField EllipticContext::unpack(std::span<const double> x) const {
    const std::size_t nb = grid_.bulk_size();
    std::vector<double> bulk(x.begin(), x.begin() + nb);
    if (conforming()) return CoupledField::conforming(grid_, std::move(bulk));
    return {std::move(bulk), std::vector<double>(x.begin() + nb, x.end())};
}

std::vector<double> EllipticContext::load(const CoupledField& rhs) const {
    if (!conforming()) return pack(rhs);
    const StripGrid& g = grid_;
    const int nx = g.nx();
    const auto wb = g.bulk_weights();
    std::vector<double> b(g.bulk_size());
    for (std::size_t k = 0; k < b.size(); ++k) b[k] = wb[k] * rhs.bulk[k];
    for (int line = 0; line < 2; ++line)
        for (int i = 0; i < nx; ++i)
            b[g.idx(i, g.boundary_row(line))] += g.hx() * rhs.surf[line * nx + i];
    for (std::size_t k = 0; k < b.size(); ++k) b[k] /= mass_[k];
    return b;
}

double generalized_mean(const StripGrid& g, const CoupledField& f) {
    const double total = inner_bulk(g, f.bulk, std::vector<double>(f.bulk.size(), 1.0)) +
                         kernels::dot(g.surf_weights(), f.surf);
    return total / (g.area() + g.perimeter());
}

CoupledField project_P(const StripGrid& g, const CoupledField& f) {
    const double m = generalized_mean(g, f);
    CoupledField out = f;
    for (double& v : out.bulk) v -= m;
    for (double& v : out.surf) v -= m;
    return out;
}

double apply_aL(const StripGrid& g, double L, const CoupledField& f, const CoupledField& h) {
    if (L == 0.0 && (!is_conforming(g, f) || !is_conforming(g, h)))
        throw ConformityError("a_0 requires conforming pairs");
    double v = dirichlet_bulk(g, f.bulk, h.bulk) + dirichlet_surf(g, f.surf, h.surf);
    const double c = chi(L);
    if (c > 0.0) {
        auto fg = trace(g, f.bulk);
        auto hg = trace(g, h.bulk);
        for (std::size_t k = 0; k < fg.size(); ++k) {
            fg[k] -= f.surf[k];
            hg[k] -= h.surf[k];
        }
        v += c * inner_surf(g, fg, hg);
    }
    return v;
}

double apply_aL(const EllipticContext& ctx, const CoupledField& f, const CoupledField& h) {
    return apply_aL(ctx.grid(), ctx.L(), f, h);
}

double apply_bdelta(const StripGrid& g, double delta, const CoupledField& f,
                    const CoupledField& h) {
    double v = dirichlet_bulk(g, f.bulk, h.bulk);
    if (delta != 0.0) v += delta * dirichlet_surf(g, f.surf, h.surf);
    return v;
}

CoupledField solve_SL(const EllipticContext& ctx, const CoupledField& rhs, SolveStats* stats) {
    if (std::isinf(ctx.L()))
        throw DomainError("solve_SL is defined for L in [0, inf) only");
    const StripGrid& g = ctx.grid();
    if (rhs.bulk.size() != g.bulk_size() || rhs.surf.size() != g.surf_size())
        throw ShapeError("solve_SL: rhs shape does not match grid");
    {
        std::vector<double> w(g.bulk_weights().begin(), g.bulk_weights().end());
        w.insert(w.end(), g.surf_weights().begin(), g.surf_weights().end());
        std::vector<double> v(rhs.bulk);
        v.insert(v.end(), rhs.surf.begin(), rhs.surf.end());
        check_mean_free(w, v, "solve_SL");
    }
    const auto b = ctx.load(rhs);
    const auto w = ctx.mass();
    const double wsum = std::accumulate(w.begin(), w.end(), 0.0);
    std::vector<double> x(b.size(), 0.0);
    auto st = pcg([&](std::span<const double> in, std::span<double> out) { ctx.apply(in, out); },
                  [&](std::span<double> v) { remove_mean(w, wsum, v); }, w, ctx.diag_, b, x,
                  ctx.tolerance(), ctx.max_iterations());
    if (stats) *stats = st;
    return ctx.unpack(x);
}

std::vector<double> solve_NOmega(const StripGrid& g, std::span<const double> y, double tolerance,
                                 SolveStats* stats) {
    if (y.size() != g.bulk_size()) throw ShapeError("solve_NOmega: wrong array size");
    const auto w = g.bulk_weights();
    check_mean_free(w, y, "solve_NOmega");
    const double wsum = g.area();
    const double hx = g.hx(), hy = g.hy();
    std::vector<double> diag(y.size(), 2.0 / (hx * hx) + 2.0 / (hy * hy));
    std::vector<double> x(y.size(), 0.0);
    auto st = pcg(
        [&](std::span<const double> in, std::span<double> out) {
            laplacian_bulk(g, in, {}, out);
            for (double& v : out) v = -v;
        },
        [&](std::span<double> v) { remove_mean(w, wsum, v); }, w, diag, y, x, tolerance, 20000);
    if (stats) *stats = st;
    return x;
}

std::vector<double> solve_NGamma(const StripGrid& g, std::span<const double> y, double tolerance,
                                 SolveStats* stats) {
    if (y.size() != g.surf_size()) throw ShapeError("solve_NGamma: wrong array size");
    const std::size_t nx = g.nx();
    const auto w = g.surf_weights();
    check_mean_free(w.first(nx), y.first(nx), "solve_NGamma (bottom line)");
    check_mean_free(w.last(nx), y.last(nx), "solve_NGamma (top line)");
    const double hx = g.hx();
    std::vector<double> diag(y.size(), 2.0 / (hx * hx));
    std::vector<double> x(y.size(), 0.0);
    auto st = pcg(
        [&](std::span<const double> in, std::span<double> out) {
            laplacian_surface(g, in, out);
            for (double& v : out) v = -v;
        },
        [&](std::span<double> v) {
            remove_mean(w.first(nx), g.lx(), v.first(nx));
            remove_mean(w.last(nx), g.lx(), v.last(nx));
        },
        w, diag, y, x, tolerance, 20000);
    if (stats) *stats = st;
    return x;
}

double dual_norm_0star(const EllipticContext& ctx, const CoupledField& f) {
    const auto u = solve_SL(ctx, f);
    return std::sqrt(std::max(0.0, inner_L2(ctx.grid(), f, u)));
}

double dual_norm_star(const EllipticContext& ctx, const CoupledField& f) {
    const double m = generalized_mean(ctx.grid(), f);
    const double n0 = dual_norm_0star(ctx, project_P(ctx.grid(), f));
    return std::sqrt(n0 * n0 + m * m);
}

}  // namespace bsch
