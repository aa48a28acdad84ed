#pragma once

// Periodic strip (R / lx Z) x (0, 1). The bulk grid has nx periodic columns
// and ny rows including both boundary rows; the boundary Gamma is the pair of
// lines y = 0 (line 0) and y = 1 (line 1). Arrays are stored row-major with x
// fastest: bulk[j * nx + i], surf[line * nx + i].

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace bsch {

class StripGrid {
public:
    StripGrid(int nx, int ny, double lx);

    int nx() const noexcept { return nx_; }
    int ny() const noexcept { return ny_; }
    double lx() const noexcept { return lx_; }
    double hx() const noexcept { return hx_; }
    double hy() const noexcept { return hy_; }

    std::size_t bulk_size() const noexcept { return std::size_t(nx_) * ny_; }
    std::size_t surf_size() const noexcept { return 2 * std::size_t(nx_); }
    std::size_t idx(int i, int j) const noexcept { return std::size_t(j) * nx_ + i; }
    // Bulk row carrying the trace of surface line 0 (bottom) or 1 (top).
    int boundary_row(int line) const noexcept { return line == 0 ? 0 : ny_ - 1; }

    double x(int i) const noexcept { return i * hx_; }
    double y(int j) const noexcept { return j * hy_; }

    double area() const noexcept { return lx_; }             // |Omega|
    double perimeter() const noexcept { return 2.0 * lx_; }  // |Gamma|

    // Trapezoid in y, uniform in x.
    std::span<const double> bulk_weights() const noexcept { return wbulk_; }
    std::span<const double> surf_weights() const noexcept { return wsurf_; }

    bool operator==(const StripGrid& o) const noexcept {
        return nx_ == o.nx_ && ny_ == o.ny_ && lx_ == o.lx_;
    }

private:
    int nx_, ny_;
    double lx_, hx_, hy_;
    std::vector<double> wbulk_, wsurf_;
};

struct CoupledField {
    std::vector<double> bulk;
    std::vector<double> surf;

    static CoupledField zeros(const StripGrid& g);
    static CoupledField constant(const StripGrid& g, double bulk_value, double surf_value);
    // Pair whose surface part is the trace of `bulk`.
    static CoupledField conforming(const StripGrid& g, std::vector<double> bulk);

    CoupledField& operator+=(const CoupledField& o);
    CoupledField& operator-=(const CoupledField& o);
    CoupledField& operator*=(double a);
    friend CoupledField operator+(CoupledField a, const CoupledField& b) { return a += b; }
    friend CoupledField operator-(CoupledField a, const CoupledField& b) { return a -= b; }
    friend CoupledField operator*(double s, CoupledField a) { return a *= s; }
};

bool is_finite(const CoupledField& f);
bool is_conforming(const StripGrid& g, const CoupledField& f, double tol = 0.0);

// Bulk rows 0 and ny-1 as a surface array.
std::vector<double> trace(const StripGrid& g, std::span<const double> bulk);

// Five-point Laplacian, periodic in x. On the boundary rows the ghost value is
// eliminated with the supplied outward normal derivative `flux` (surface
// array; empty means zero flux):
//   lap u_0 = d_xx u_0 + 2 (u_1 - u_0) / hy^2 + 2 flux / hy.
std::vector<double> laplacian_bulk(const StripGrid& g, std::span<const double> u,
                                   std::span<const double> flux = {});
void laplacian_bulk(const StripGrid& g, std::span<const double> u,
                    std::span<const double> flux, std::span<double> out);

// Periodic three-point second difference on each boundary line.
std::vector<double> laplacian_surface(const StripGrid& g, std::span<const double> v);
void laplacian_surface(const StripGrid& g, std::span<const double> v, std::span<double> out);

// Second-order one-sided outward normal derivative on both boundary lines.
std::vector<double> normal_derivative(const StripGrid& g, std::span<const double> u);

// (<y>_Omega, <y_Gamma>_Gamma)
std::pair<double, double> means(const StripGrid& g, const CoupledField& f);
double bulk_mean(const StripGrid& g, std::span<const double> y);
double surf_mean(const StripGrid& g, std::span<const double> v);
// Per-line means (bottom, top).
std::pair<double, double> line_means(const StripGrid& g, std::span<const double> v);

double inner_bulk(const StripGrid& g, std::span<const double> a, std::span<const double> b);
double inner_surf(const StripGrid& g, std::span<const double> a, std::span<const double> b);
double inner_L2(const StripGrid& g, const CoupledField& a, const CoupledField& b);
double norm_L2(const StripGrid& g, const CoupledField& a);

// Discrete Dirichlet forms built from first differences:
//   bulk:  sum over x-edges (weight hx * trapezoid-y) and y-edges (weight hx*hy)
//   surf:  sum over periodic edges on each line (weight hx)
// laplacian_bulk/laplacian_surface are their exact summation-by-parts partners.
double dirichlet_bulk(const StripGrid& g, std::span<const double> u, std::span<const double> w);
double dirichlet_surf(const StripGrid& g, std::span<const double> v, std::span<const double> w);

}  // namespace bsch
