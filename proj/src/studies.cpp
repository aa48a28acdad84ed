#include "bsch/studies.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <optional>
#include <sstream>
#include <thread>

#include "bsch/errors.hpp"

namespace bsch {
namespace {

struct Job {
    ModelParams params;
    InitialData init;
    double tag;  // sweep value, for error messages
};

// Runs every job, at most `jobs` at a time. Results keep job order.
std::vector<Trajectory> run_all(const StripGrid& g, const std::vector<Job>& work, int jobs) {
    std::vector<std::optional<Trajectory>> out(work.size());
    std::vector<std::exception_ptr> errs(work.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k; (k = next.fetch_add(1)) < work.size();) {
            try {
                RunOptions o;
                o.store_every = 1;
                out[k] = run(work[k].params, g, work[k].init, o);
            } catch (...) {
                errs[k] = std::current_exception();
            }
        }
    };
    const int n = std::clamp(jobs, 1, int(std::max<std::size_t>(1, work.size())));
    if (n == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int i = 0; i < n; ++i) pool.emplace_back(worker);
    }
    for (std::size_t k = 0; k < work.size(); ++k) {
        if (!errs[k]) continue;
        std::ostringstream msg;
        msg << "sweep value " << work[k].tag << ": ";
        try {
            std::rethrow_exception(errs[k]);
        } catch (const std::exception& e) {
            msg << e.what();
        }
        throw Error(msg.str());
    }
    std::vector<Trajectory> res;
    res.reserve(out.size());
    for (auto& t : out) res.push_back(std::move(*t));
    return res;
}

void check_sweep(const StudySpec& spec, bool increasing, std::size_t min_points = 4) {
    const auto& s = spec.sweep;
    if (s.size() < min_points)
        throw DomainError("study sweep needs at least " + std::to_string(min_points) + " points");
    for (std::size_t k = 1; k < s.size(); ++k) {
        if (increasing ? !(s[k] > s[k - 1]) : !(s[k] < s[k - 1]))
            throw DomainError(std::string("study sweep must be strictly ") +
                              (increasing ? "increasing" : "decreasing"));
    }
}

FitResult fit_points(const std::vector<StudyPoint>& pts) {
    std::vector<std::pair<double, double>> v;
    for (const auto& p : pts) v.emplace_back(p.param, p.value);
    return fit_slope(v);
}

double spread(const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi / *lo;
}

std::vector<double> values(const std::vector<StudyPoint>& pts, const std::string& key) {
    std::vector<double> v;
    for (const auto& p : pts) v.push_back(key.empty() ? p.value : p.errors.at(key));
    return v;
}

double max_surface_gradient(const StripGrid& g, const Trajectory& tr) {
    double m = 0.0;
    for (const auto& s : tr.states) m = std::max(m, std::sqrt(dirichlet_surf(g, s.psi, s.psi)));
    return m;
}

std::string describe(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

InitialData cosine_mode(const StripGrid& g, double amplitude, int kx, int ky, double offset) {
    constexpr double pi = 3.14159265358979323846;
    InitialData d;
    d.phi0.resize(g.bulk_size());
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i)
            d.phi0[g.idx(i, j)] = amplitude * std::cos(2.0 * pi * kx * g.x(i) / g.lx()) *
                                      std::cos(pi * ky * g.y(j)) +
                                  offset;
    d.psi0 = trace(g, d.phi0);
    return d;
}

RunSetup default_scenario() {
    RunSetup s;
    s.grid = StripGrid(64, 33, 1.0);
    s.params = ModelParams{};
    s.params.L = 1.0;
    s.params.delta = 1.0;
    s.params.eps = 1e-2;
    s.params.T = 0.25;
    s.params.tau = 1.0 / 512.0;
    s.params.potentials = PotentialPair{};
    s.init = cosine_mode(s.grid, 0.2, 1, 1, 0.0);
    return s;
}

std::string_view to_string(StudyKind k) {
    switch (k) {
        case StudyKind::YosidaRate: return "yosida";
        case StudyKind::KineticZero: return "kinetic-zero";
        case StudyKind::KineticInfinity: return "kinetic-inf";
        case StudyKind::DeltaZero: return "delta-zero";
        case StudyKind::Stability: return "stability";
    }
    return "unknown";
}

StudyKind study_kind_from_string(std::string_view name) {
    for (auto k : {StudyKind::YosidaRate, StudyKind::KineticZero, StudyKind::KineticInfinity,
                   StudyKind::DeltaZero, StudyKind::Stability}) {
        if (to_string(k) == name) return k;
    }
    throw DomainError("unknown study kind '" + std::string(name) + "'");
}

StudySpec default_study(StudyKind kind) {
    StudySpec s;
    s.kind = kind;
    s.base = default_scenario();
    const std::vector<double> to_zero{1e-1, 2.5e-2, 6.25e-3, 1.5625e-3};
    switch (kind) {
        case StudyKind::YosidaRate:
            s.sweep = to_zero;
            s.reference_rule = ReferenceRule::SmallestOver16;
            break;
        case StudyKind::KineticZero:
            s.sweep = to_zero;
            s.reference_rule = ReferenceRule::DirectLimitRun;
            break;
        case StudyKind::KineticInfinity:
            s.sweep = {1e1, 1e2, 1e3, 1e4};
            s.reference_rule = ReferenceRule::DirectLimitRun;
            // pi must be W^{1,inf}: logarithmic potentials on both sides.
            s.base.params.potentials = {GraphSpec::logarithmic(2.0), GraphSpec::logarithmic(2.0), 1.0, 0.0};
            break;
        case StudyKind::DeltaZero:
            s.sweep = to_zero;
            s.reference_rule = ReferenceRule::DirectLimitRun;
            s.base.params.potentials = {GraphSpec::logarithmic(2.0), GraphSpec::logarithmic(2.0), 1.0, 0.0};
            break;
        case StudyKind::Stability:
            s.sweep = {1e-1, 1e-2, 1e-3};
            s.reference_rule = ReferenceRule::DirectLimitRun;
            break;
    }
    return s;
}

FitResult fit_slope(const std::vector<std::pair<double, double>>& points) {
    std::vector<double> xs, ys;
    FitResult f;
    for (const auto& [p, e] : points) {
        if (!(p > 0.0) || !std::isfinite(p)) throw DegenerateFit("fit_slope: parameters must be positive");
        if (e == 0.0) {
            ++f.excluded;
            continue;
        }
        if (!(e > 0.0) || !std::isfinite(e)) throw DegenerateFit("fit_slope: errors must be positive");
        xs.push_back(std::log(p));
        ys.push_back(std::log(e));
    }
    const std::size_t n = xs.size();
    if (n < 2) throw DegenerateFit("fit_slope: fewer than two nonzero errors");
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        mx += xs[k];
        my += ys[k];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        sxx += (xs[k] - mx) * (xs[k] - mx);
        sxy += (xs[k] - mx) * (ys[k] - my);
    }
    if (sxx == 0.0) throw DegenerateFit("fit_slope: all parameters coincide");
    f.slope = sxy / sxx;
    double ss = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double d = ys[k] - (my + f.slope * (xs[k] - mx));
        ss += d * d;
    }
    f.residual = std::sqrt(ss / n);
    return f;
}

bool strictly_decreasing(const std::vector<double>& v) {
    for (std::size_t k = 1; k < v.size(); ++k)
        if (!(v[k] < v[k - 1])) return false;
    return true;
}

double ratio_spread(const StudyResult& r, double power) {
    std::vector<double> v;
    for (const auto& p : r.points) v.push_back(p.value / std::pow(p.param, power));
    return spread(v);
}

StudyResult study_yosida(const StudySpec& spec) {
    check_sweep(spec, false);
    const RunSetup& b = spec.base;
    const double ref_eps = spec.sweep.back() / spec.reference_divisor;
    std::vector<Job> work;
    for (double e : spec.sweep) {
        Job j{b.params, b.init, e};
        j.params.eps = e;
        work.push_back(std::move(j));
    }
    Job ref{b.params, b.init, ref_eps};
    ref.params.eps = ref_eps;
    work.push_back(std::move(ref));
    auto trs = run_all(b.grid, work, spec.jobs);

    const EllipticContext ctx(b.grid, 1.0, b.linear_tol);
    StudyResult r;
    r.kind = StudyKind::YosidaRate;
    r.fit_quantity = "linf_dual + l2_V1";
    r.reference = "run at eps = " + describe(ref_eps) + " (smallest sweep value / " +
                  describe(spec.reference_divisor) + ")";
    for (std::size_t k = 0; k < spec.sweep.size(); ++k) {
        const auto e = trajectory_error(ctx, trs[k], trs.back(), b.params.delta);
        const auto u = uniform_estimates(work[k].params, b.grid, trs[k]);
        StudyPoint p;
        p.param = spec.sweep[k];
        p.value = e.linf_dual + e.l2_V1;
        p.errors = {{"linf_dual", e.linf_dual},
                    {"l2_V1", e.l2_V1},
                    {"total", p.value},
                    {"ratio_sqrt", p.value / std::sqrt(p.param)},
                    {"max_V1", u.max_V1},
                    {"max_moreau_l1", u.max_moreau_l1},
                    {"sum_xi_sq", u.sum_xi_sq}};
        r.points.push_back(std::move(p));
    }
    const FitResult f = fit_points(r.points);
    r.slope = f.slope;
    r.fit_residual = f.residual;
    r.summary["reference_param"] = ref_eps;
    r.summary["ratio_spread"] = ratio_spread(r, 0.5);
    r.summary["monotone"] = strictly_decreasing(values(r.points, "")) ? 1.0 : 0.0;
    r.summary["max_V1_spread"] = spread(values(r.points, "max_V1"));
    r.summary["max_moreau_l1_spread"] = spread(values(r.points, "max_moreau_l1"));
    r.summary["sum_xi_sq_spread"] = spread(values(r.points, "sum_xi_sq"));
    return r;
}

StudyResult study_kinetic_zero(const StudySpec& spec) {
    check_sweep(spec, false);
    const RunSetup& b = spec.base;
    if (!(b.params.delta > 0.0)) throw DomainError("kinetic-zero study requires delta > 0");
    std::vector<Job> work;
    for (double L : spec.sweep) {
        Job j{b.params, b.init, L};
        j.params.L = L;
        work.push_back(std::move(j));
    }
    Job gms{b.params, b.init, 0.0};
    gms.params.L = 0.0;
    work.push_back(std::move(gms));
    auto trs = run_all(b.grid, work, spec.jobs);

    const EllipticContext ctx(b.grid, 1.0, b.linear_tol);
    StudyResult r;
    r.kind = StudyKind::KineticZero;
    r.fit_quantity = "l2_gap";
    r.reference = "direct run at L = 0";
    for (std::size_t k = 0; k < spec.sweep.size(); ++k) {
        const auto e = trajectory_error(ctx, trs[k], trs.back(), b.params.delta);
        StudyPoint p;
        p.param = spec.sweep[k];
        p.value = e.l2_gap;
        p.errors = {{"l2_gap", e.l2_gap},
                    {"linf_dual", e.linf_dual},
                    {"l2_V1", e.l2_V1},
                    {"traj_total", e.linf_dual + e.l2_V1}};
        r.points.push_back(std::move(p));
    }
    const FitResult f = fit_points(r.points);
    r.slope = f.slope;
    r.fit_residual = f.residual;
    r.summary["gms_l2_gap"] = l2_gap(b.grid, trs.back());
    r.summary["traj_monotone"] = strictly_decreasing(values(r.points, "traj_total")) ? 1.0 : 0.0;
    r.summary["monotone"] = strictly_decreasing(values(r.points, "")) ? 1.0 : 0.0;
    return r;
}

StudyResult study_kinetic_infinity(const StudySpec& spec) {
    check_sweep(spec, true);
    const RunSetup& b = spec.base;
    if (!(b.params.delta > 0.0)) throw DomainError("kinetic-inf study requires delta > 0");
    std::vector<Job> work;
    for (double L : spec.sweep) {
        Job j{b.params, b.init, L};
        j.params.L = L;
        work.push_back(std::move(j));
    }
    Job lw{b.params, b.init, kInfinity};
    lw.params.L = kInfinity;
    work.push_back(std::move(lw));
    auto trs = run_all(b.grid, work, spec.jobs);

    const EllipticContext ctx(b.grid, 1.0, b.linear_tol);
    StudyResult r;
    r.kind = StudyKind::KineticInfinity;
    r.fit_quantity = "l2_gap / L";
    r.reference = "direct run at L = inf";
    for (std::size_t k = 0; k < spec.sweep.size(); ++k) {
        const auto e = trajectory_error(ctx, trs[k], trs.back(), b.params.delta);
        StudyPoint p;
        p.param = spec.sweep[k];
        p.value = e.l2_gap / p.param;
        p.errors = {{"l2_gap", e.l2_gap},
                    {"scaled_gap", p.value},
                    {"linf_dual", e.linf_dual},
                    {"l2_V1", e.l2_V1},
                    {"traj_total", e.linf_dual + e.l2_V1}};
        r.points.push_back(std::move(p));
    }
    const FitResult f = fit_points(r.points);
    r.slope = f.slope;
    r.fit_residual = f.residual;
    const auto& lw_diag = trs.back().diagnostics;
    double db = 0.0, ds = 0.0;
    for (const auto& d : lw_diag) {
        db = std::max(db, std::abs(d.mass_bulk - lw_diag.front().mass_bulk));
        ds = std::max(ds, std::abs(d.mass_surf - lw_diag.front().mass_surf));
    }
    r.summary["lw_bulk_mass_drift"] = db / std::max(1.0, std::abs(lw_diag.front().mass_bulk));
    r.summary["lw_surf_mass_drift"] = ds / std::max(1.0, std::abs(lw_diag.front().mass_surf));
    r.summary["traj_monotone"] = strictly_decreasing(values(r.points, "traj_total")) ? 1.0 : 0.0;
    r.summary["monotone"] = strictly_decreasing(values(r.points, "")) ? 1.0 : 0.0;
    return r;
}

StudyResult study_delta_zero(const StudySpec& spec) {
    check_sweep(spec, false);
    const RunSetup& b = spec.base;
    if (!(b.params.L > 0.0) || std::isinf(b.params.L))
        throw DomainError("delta-zero study requires L in (0, inf)");
    if (b.params.potentials.bulk.kind() != b.params.potentials.boundary.kind())
        throw DomainError("delta-zero study requires bulk and boundary graphs of the same kind");
    std::vector<Job> work;
    for (double d : spec.sweep) {
        Job j{b.params, b.init, d};
        j.params.delta = d;
        work.push_back(std::move(j));
    }
    Job ref{b.params, b.init, 0.0};
    ref.params.delta = 0.0;
    work.push_back(std::move(ref));
    auto trs = run_all(b.grid, work, spec.jobs);

    const EllipticContext ctx(b.grid, 1.0, b.linear_tol);
    StudyResult r;
    r.kind = StudyKind::DeltaZero;
    r.fit_quantity = "linf_dual + l2_bulk_grad";
    r.reference = "direct run at delta = 0";
    for (std::size_t k = 0; k < spec.sweep.size(); ++k) {
        const auto e = trajectory_error(ctx, trs[k], trs.back(), 0.0);
        StudyPoint p;
        p.param = spec.sweep[k];
        p.value = e.linf_dual + e.l2_bulk_grad;
        p.errors = {{"linf_dual", e.linf_dual},
                    {"l2_bulk_grad", e.l2_bulk_grad},
                    {"total", p.value},
                    {"sqrt_delta_grad", std::sqrt(p.param) * max_surface_gradient(b.grid, trs[k])}};
        r.points.push_back(std::move(p));
    }
    const FitResult f = fit_points(r.points);
    r.slope = f.slope;
    r.fit_residual = f.residual;
    const auto g = values(r.points, "sqrt_delta_grad");
    r.summary["sqrt_delta_grad_bound_ratio"] = *std::max_element(g.begin(), g.end()) / g.front();
    r.summary["monotone"] = strictly_decreasing(values(r.points, "")) ? 1.0 : 0.0;
    return r;
}

StudyResult study_stability(const StudySpec& spec) {
    check_sweep(spec, false, 3);
    const RunSetup& b = spec.base;
    const StripGrid& g = b.grid;
    std::vector<double> mode = spec.perturbation;
    if (mode.empty()) mode = cosine_mode(g, 1.0, 2, 0, 0.0).phi0;
    if (mode.size() != g.bulk_size()) throw ShapeError("stability perturbation has wrong size");
    const CoupledField mode_pair = CoupledField::conforming(g, mode);
    if (std::abs(generalized_mean(g, mode_pair)) > 1e-12)
        throw MeanError("stability perturbation must have zero generalized mean");

    std::vector<Job> work;
    for (double eta : spec.sweep) {
        Job j{b.params, b.init, eta};
        for (std::size_t k = 0; k < mode.size(); ++k) j.init.phi0[k] += eta * mode[k];
        j.init.psi0 = trace(g, j.init.phi0);
        work.push_back(std::move(j));
    }
    work.push_back(Job{b.params, b.init, 0.0});
    auto trs = run_all(g, work, spec.jobs);

    const EllipticContext ctx(g, 1.0, b.linear_tol);
    const double mode_norm = dual_norm_0star(ctx, mode_pair);
    StudyResult r;
    r.kind = StudyKind::Stability;
    r.fit_quantity = "sqrt(linf_dual^2 + l2_V1^2)";
    r.reference = "unperturbed run";
    for (std::size_t k = 0; k < spec.sweep.size(); ++k) {
        const auto e = trajectory_error(ctx, trs[k], trs.back(), b.params.delta);
        StudyPoint p;
        p.param = spec.sweep[k];
        p.value = std::hypot(e.linf_dual, e.l2_V1);
        const double data = p.param * mode_norm;
        p.errors = {{"linf_dual", e.linf_dual},
                    {"l2_V1", e.l2_V1},
                    {"error", p.value},
                    {"ratio", p.value * p.value / (data * data)}};
        r.points.push_back(std::move(p));
    }
    const FitResult f = fit_points(r.points);
    r.slope = f.slope;
    r.fit_residual = f.residual;
    r.summary["ratio_spread"] = spread(values(r.points, "ratio"));
    r.summary["perturbation_dual_norm"] = mode_norm;
    return r;
}

StudyResult run_study(const StudySpec& spec) {
    switch (spec.kind) {
        case StudyKind::YosidaRate: return study_yosida(spec);
        case StudyKind::KineticZero: return study_kinetic_zero(spec);
        case StudyKind::KineticInfinity: return study_kinetic_infinity(spec);
        case StudyKind::DeltaZero: return study_delta_zero(spec);
        case StudyKind::Stability: return study_stability(spec);
    }
    throw DomainError("unknown study kind");
}

}  // namespace bsch
