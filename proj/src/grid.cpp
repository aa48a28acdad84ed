#include "bsch/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bsch/errors.hpp"
#include "bsch/kernels.hpp"

namespace bsch {

StripGrid::StripGrid(int nx, int ny, double lx) : nx_(nx), ny_(ny), lx_(lx) {
    if (nx < 4) throw ShapeError("grid nx must be >= 4, got " + std::to_string(nx));
    if (ny < 4) throw ShapeError("grid ny must be >= 4, got " + std::to_string(ny));
    if (!(lx > 0.0) || !std::isfinite(lx)) throw ShapeError("grid lx must be positive");
    hx_ = lx / nx;
    hy_ = 1.0 / (ny - 1);
    wbulk_.assign(bulk_size(), hx_ * hy_);
    for (int i = 0; i < nx; ++i) {
        wbulk_[idx(i, 0)] *= 0.5;
        wbulk_[idx(i, ny - 1)] *= 0.5;
    }
    wsurf_.assign(surf_size(), hx_);
}

CoupledField CoupledField::zeros(const StripGrid& g) {
    return {std::vector<double>(g.bulk_size(), 0.0), std::vector<double>(g.surf_size(), 0.0)};
}

CoupledField CoupledField::constant(const StripGrid& g, double b, double s) {
    return {std::vector<double>(g.bulk_size(), b), std::vector<double>(g.surf_size(), s)};
}

CoupledField CoupledField::conforming(const StripGrid& g, std::vector<double> bulk) {
    if (bulk.size() != g.bulk_size()) throw ShapeError("bulk array has wrong size");
    auto s = trace(g, bulk);
    return {std::move(bulk), std::move(s)};
}

CoupledField& CoupledField::operator+=(const CoupledField& o) {
    kernels::axpy(1.0, o.bulk, bulk);
    kernels::axpy(1.0, o.surf, surf);
    return *this;
}

CoupledField& CoupledField::operator-=(const CoupledField& o) {
    kernels::axpy(-1.0, o.bulk, bulk);
    kernels::axpy(-1.0, o.surf, surf);
    return *this;
}

CoupledField& CoupledField::operator*=(double a) {
    for (double& v : bulk) v *= a;
    for (double& v : surf) v *= a;
    return *this;
}

bool is_finite(const CoupledField& f) {
    auto fin = [](double v) { return std::isfinite(v); };
    return std::all_of(f.bulk.begin(), f.bulk.end(), fin) &&
           std::all_of(f.surf.begin(), f.surf.end(), fin);
}

bool is_conforming(const StripGrid& g, const CoupledField& f, double tol) {
    const int nx = g.nx();
    for (int line = 0; line < 2; ++line) {
        const int j = g.boundary_row(line);
        for (int i = 0; i < nx; ++i) {
            if (std::abs(f.surf[line * nx + i] - f.bulk[g.idx(i, j)]) > tol) return false;
        }
    }
    return true;
}

std::vector<double> trace(const StripGrid& g, std::span<const double> bulk) {
    const int nx = g.nx();
    std::vector<double> s(g.surf_size());
    std::copy_n(bulk.begin() + g.idx(0, 0), nx, s.begin());
    std::copy_n(bulk.begin() + g.idx(0, g.ny() - 1), nx, s.begin() + nx);
    return s;
}

void laplacian_bulk(const StripGrid& g, std::span<const double> u, std::span<const double> flux,
                    std::span<double> out) {
    const int nx = g.nx(), ny = g.ny();
    const double cx = 1.0 / (g.hx() * g.hx());
    const double cy = 1.0 / (g.hy() * g.hy());
    const auto& k = kernels::active();
    for (int j = 0; j < ny; ++j) {
        // Boundary rows mirror the first interior row (ghost elimination).
        const int jlo = j == 0 ? 1 : j - 1;
        const int jhi = j == ny - 1 ? ny - 2 : j + 1;
        const double* lo = u.data() + g.idx(0, jlo);
        const double* mid = u.data() + g.idx(0, j);
        const double* hi = u.data() + g.idx(0, jhi);
        double* o = out.data() + g.idx(0, j);
        k.stencil5(lo, mid, hi, cx, cy, o, nx);
        o[0] = cx * (mid[nx - 1] - 2.0 * mid[0] + mid[1]) + cy * (lo[0] - 2.0 * mid[0] + hi[0]);
        o[nx - 1] = cx * (mid[nx - 2] - 2.0 * mid[nx - 1] + mid[0]) +
                    cy * (lo[nx - 1] - 2.0 * mid[nx - 1] + hi[nx - 1]);
    }
    if (!flux.empty()) {
        const double c = 2.0 / g.hy();
        for (int line = 0; line < 2; ++line) {
            double* o = out.data() + g.idx(0, g.boundary_row(line));
            for (int i = 0; i < nx; ++i) o[i] += c * flux[line * nx + i];
        }
    }
}

std::vector<double> laplacian_bulk(const StripGrid& g, std::span<const double> u,
                                   std::span<const double> flux) {
    std::vector<double> out(g.bulk_size());
    laplacian_bulk(g, u, flux, out);
    return out;
}

void laplacian_surface(const StripGrid& g, std::span<const double> v, std::span<double> out) {
    const int nx = g.nx();
    const double c = 1.0 / (g.hx() * g.hx());
    const auto& k = kernels::active();
    for (int line = 0; line < 2; ++line) {
        const double* a = v.data() + line * nx;
        double* o = out.data() + line * nx;
        k.stencil3(a, c, o, nx);
        o[0] = c * (a[nx - 1] - 2.0 * a[0] + a[1]);
        o[nx - 1] = c * (a[nx - 2] - 2.0 * a[nx - 1] + a[0]);
    }
}

std::vector<double> laplacian_surface(const StripGrid& g, std::span<const double> v) {
    std::vector<double> out(g.surf_size());
    laplacian_surface(g, v, out);
    return out;
}

std::vector<double> normal_derivative(const StripGrid& g, std::span<const double> u) {
    const int nx = g.nx(), ny = g.ny();
    const double c = 1.0 / (2.0 * g.hy());
    std::vector<double> d(g.surf_size());
    for (int i = 0; i < nx; ++i) {
        // Outward normal is -e_y at the bottom and +e_y at the top.
        d[i] = -c * (-3.0 * u[g.idx(i, 0)] + 4.0 * u[g.idx(i, 1)] - u[g.idx(i, 2)]);
        d[nx + i] = c * (3.0 * u[g.idx(i, ny - 1)] - 4.0 * u[g.idx(i, ny - 2)] +
                         u[g.idx(i, ny - 3)]);
    }
    return d;
}

double bulk_mean(const StripGrid& g, std::span<const double> y) {
    return kernels::dot(g.bulk_weights(), y) / g.area();
}

double surf_mean(const StripGrid& g, std::span<const double> v) {
    return kernels::dot(g.surf_weights(), v) / g.perimeter();
}

std::pair<double, double> line_means(const StripGrid& g, std::span<const double> v) {
    const auto nx = std::size_t(g.nx());
    const auto w = g.surf_weights();
    return {kernels::dot(w.first(nx), v.first(nx)) / g.lx(),
            kernels::dot(w.last(nx), v.last(nx)) / g.lx()};
}

std::pair<double, double> means(const StripGrid& g, const CoupledField& f) {
    return {bulk_mean(g, f.bulk), surf_mean(g, f.surf)};
}

double inner_bulk(const StripGrid& g, std::span<const double> a, std::span<const double> b) {
    return kernels::wdot(g.bulk_weights(), a, b);
}

double inner_surf(const StripGrid& g, std::span<const double> a, std::span<const double> b) {
    return kernels::wdot(g.surf_weights(), a, b);
}

double inner_L2(const StripGrid& g, const CoupledField& a, const CoupledField& b) {
    return inner_bulk(g, a.bulk, b.bulk) + inner_surf(g, a.surf, b.surf);
}

double norm_L2(const StripGrid& g, const CoupledField& a) {
    return std::sqrt(std::max(0.0, inner_L2(g, a, a)));
}

double dirichlet_bulk(const StripGrid& g, std::span<const double> u, std::span<const double> w) {
    const int nx = g.nx(), ny = g.ny();
    const double hx = g.hx(), hy = g.hy();
    double sx = 0.0, sy = 0.0;
    for (int j = 0; j < ny; ++j) {
        const double wy = (j == 0 || j == ny - 1) ? 0.5 * hy : hy;
        double row = 0.0;
        for (int i = 0; i < nx; ++i) {
            const int ip = i + 1 == nx ? 0 : i + 1;
            row += (u[g.idx(ip, j)] - u[g.idx(i, j)]) * (w[g.idx(ip, j)] - w[g.idx(i, j)]);
        }
        sx += wy * row;
    }
    for (int j = 0; j + 1 < ny; ++j) {
        for (int i = 0; i < nx; ++i)
            sy += (u[g.idx(i, j + 1)] - u[g.idx(i, j)]) * (w[g.idx(i, j + 1)] - w[g.idx(i, j)]);
    }
    return sx / hx + sy * hx / hy;
}

double dirichlet_surf(const StripGrid& g, std::span<const double> v, std::span<const double> w) {
    const int nx = g.nx();
    double s = 0.0;
    for (int line = 0; line < 2; ++line) {
        const double* a = v.data() + line * nx;
        const double* b = w.data() + line * nx;
        for (int i = 0; i < nx; ++i) {
            const int ip = i + 1 == nx ? 0 : i + 1;
            s += (a[ip] - a[i]) * (b[ip] - b[i]);
        }
    }
    return s / g.hx();
}

}  // namespace bsch
