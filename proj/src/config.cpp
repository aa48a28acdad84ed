#include "bsch/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "bsch/elliptic.hpp"
#include "bsch/errors.hpp"
#include "bsch/snapshot.hpp"

namespace bsch {
namespace {

using json = nlohmann::json;

std::string child(const std::string& ptr, const std::string& key) { return ptr + "/" + key; }

void expect_object(const json& j, const std::string& ptr) {
    if (!j.is_object()) throw ConfigError(ptr.empty() ? "/" : ptr, "expected an object");
}

void allow_keys(const json& j, const std::string& ptr, std::initializer_list<const char*> keys) {
    expect_object(j, ptr);
    const std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& [k, v] : j.items())
        if (!ok.count(k)) throw ConfigError(child(ptr, k), "unknown key");
}

double number(const json& j, const std::string& key, const std::string& ptr, double fallback) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_number()) throw ConfigError(child(ptr, key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(child(ptr, key), "must be finite");
    return d;
}

int integer(const json& j, const std::string& key, const std::string& ptr, int fallback) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_number_integer()) throw ConfigError(child(ptr, key), "expected an integer");
    return v.get<int>();
}

std::string text(const json& j, const std::string& key, const std::string& ptr, std::string fallback) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_string()) throw ConfigError(child(ptr, key), "expected a string");
    return v.get<std::string>();
}

bool boolean(const json& j, const std::string& key, const std::string& ptr, bool fallback) {
    if (!j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (!v.is_boolean()) throw ConfigError(child(ptr, key), "expected a boolean");
    return v.get<bool>();
}

const json& section(const json& root, const std::string& key) {
    static const json empty = json::object();
    return root.contains(key) ? root.at(key) : empty;
}

GraphSpec parse_graph(const json& j, const std::string& ptr) {
    allow_keys(j, ptr, {"kind", "params"});
    if (!j.contains("kind")) throw ConfigError(child(ptr, "kind"), "missing");
    const std::string kind = text(j, "kind", ptr, "");
    const json& params = section(j, "params");
    const std::string pp = child(ptr, "params");
    if (kind == "logarithmic") {
        allow_keys(params, pp, {"c1"});
        const double c1 = number(params, "c1", pp, 2.0);
        if (!(c1 > 1.0)) throw ConfigError(child(pp, "c1"), "c1 must be > 1");
        return GraphSpec::logarithmic(c1);
    }
    if (kind == "double-obstacle") {
        allow_keys(params, pp, {"c2"});
        const double c2 = number(params, "c2", pp, 1.0);
        if (!(c2 > 0.0)) throw ConfigError(child(pp, "c2"), "c2 must be > 0");
        return GraphSpec::double_obstacle(c2);
    }
    if (kind == "regular-quartic") {
        allow_keys(params, pp, {});
        return GraphSpec::regular_quartic();
    }
    if (kind == "linear") {
        allow_keys(params, pp, {"slope"});
        const double k = number(params, "slope", pp, 1.0);
        if (!(k >= 0.0)) throw ConfigError(child(pp, "slope"), "slope must be >= 0");
        return GraphSpec::linear(k);
    }
    throw ConfigError(child(ptr, "kind"), "unknown graph kind '" + kind + "'");
}

}  // namespace

Config parse_config(const std::string& src) {
    json root;
    try {
        root = json::parse(src);
    } catch (const json::parse_error& e) {
        throw ConfigError("/", std::string("invalid JSON: ") + e.what());
    }
    allow_keys(root, "", {"grid", "model", "potentials", "time", "init", "forcing", "tolerances", "output"});
    Config c;

    const json& grid = section(root, "grid");
    allow_keys(grid, "/grid", {"nx", "ny", "lx"});
    c.nx = integer(grid, "nx", "/grid", c.nx);
    c.ny = integer(grid, "ny", "/grid", c.ny);
    c.lx = number(grid, "lx", "/grid", c.lx);
    if (c.nx < 4) throw ConfigError("/grid/nx", "nx must be >= 4");
    if (c.ny < 4) throw ConfigError("/grid/ny", "ny must be >= 4");
    if (!(c.lx > 0.0)) throw ConfigError("/grid/lx", "lx must be > 0");

    const json& model = section(root, "model");
    allow_keys(model, "/model", {"L", "delta", "eps"});
    if (model.contains("L") && model.at("L").is_string()) {
        if (model.at("L").get<std::string>() != "inf") throw ConfigError("/model/L", "expected a number or \"inf\"");
        c.L = kInfinity;
    } else {
        c.L = number(model, "L", "/model", c.L);
        if (!(c.L >= 0.0)) throw ConfigError("/model/L", "L must be >= 0 or \"inf\"");
    }
    c.delta = number(model, "delta", "/model", c.delta);
    if (!(c.delta >= 0.0)) throw ConfigError("/model/delta", "delta must be >= 0");
    c.eps = number(model, "eps", "/model", c.eps);
    if (!(c.eps > 0.0 && c.eps < 1.0)) throw ConfigError("/model/eps", "eps must be in (0,1)");

    const json& pot = section(root, "potentials");
    allow_keys(pot, "/potentials", {"bulk", "boundary", "rho", "c0"});
    if (pot.contains("bulk")) c.potentials.bulk = parse_graph(pot.at("bulk"), "/potentials/bulk");
    if (pot.contains("boundary")) c.potentials.boundary = parse_graph(pot.at("boundary"), "/potentials/boundary");
    c.potentials.rho = number(pot, "rho", "/potentials", 1.0);
    c.potentials.c0 = number(pot, "c0", "/potentials", 0.0);
    if (!(c.potentials.rho > 0.0)) throw ConfigError("/potentials/rho", "rho must be > 0");
    if (!(c.potentials.c0 >= 0.0)) throw ConfigError("/potentials/c0", "c0 must be >= 0");

    const json& time = section(root, "time");
    allow_keys(time, "/time", {"T", "tau"});
    c.T = number(time, "T", "/time", c.T);
    c.tau = number(time, "tau", "/time", c.tau);
    if (!(c.tau > 0.0)) throw ConfigError("/time/tau", "tau must be > 0");
    if (!(c.T > 0.0)) throw ConfigError("/time/T", "T must be > 0");
    const double steps = c.T / c.tau;
    if (std::abs(steps - std::round(steps)) > 1e-9 * steps)
        throw ConfigError("/time", "T / tau must be a positive integer");

    const json& init = section(root, "init");
    allow_keys(init, "/init", {"kind", "amplitude", "kx", "ky", "offset", "path", "seed"});
    c.init.kind = text(init, "kind", "/init", c.init.kind);
    if (c.init.kind == "cosine-mode") {
        allow_keys(init, "/init", {"kind", "amplitude", "kx", "ky", "offset"});
        c.init.amplitude = number(init, "amplitude", "/init", c.init.amplitude);
        c.init.kx = integer(init, "kx", "/init", c.init.kx);
        c.init.ky = integer(init, "ky", "/init", c.init.ky);
        c.init.offset = number(init, "offset", "/init", c.init.offset);
    } else if (c.init.kind == "file") {
        allow_keys(init, "/init", {"kind", "path"});
        c.init.path = text(init, "path", "/init", "");
        if (c.init.path.empty()) throw ConfigError("/init/path", "missing");
    } else if (c.init.kind == "random") {
        allow_keys(init, "/init", {"kind", "amplitude", "seed"});
        c.init.amplitude = number(init, "amplitude", "/init", 0.01);
        if (init.contains("seed") && !init.at("seed").is_number_unsigned())
            throw ConfigError("/init/seed", "expected a nonnegative integer");
        c.init.seed = init.value("seed", std::uint64_t{0});
    } else {
        throw ConfigError("/init/kind", "unknown init kind '" + c.init.kind + "'");
    }

    const json& forcing = section(root, "forcing");
    allow_keys(forcing, "/forcing", {"kind", "bulk_amplitude", "surface_amplitude", "kx", "ky", "omega"});
    c.forcing.kind = text(forcing, "kind", "/forcing", c.forcing.kind);
    if (c.forcing.kind == "zero") {
        allow_keys(forcing, "/forcing", {"kind"});
    } else if (c.forcing.kind == "cosine") {
        c.forcing.bulk_amplitude = number(forcing, "bulk_amplitude", "/forcing", 0.0);
        c.forcing.surface_amplitude = number(forcing, "surface_amplitude", "/forcing", 0.0);
        c.forcing.kx = integer(forcing, "kx", "/forcing", c.forcing.kx);
        c.forcing.ky = integer(forcing, "ky", "/forcing", c.forcing.ky);
        c.forcing.omega = number(forcing, "omega", "/forcing", 0.0);
    } else {
        throw ConfigError("/forcing/kind", "unknown forcing kind '" + c.forcing.kind + "'");
    }

    const json& tol = section(root, "tolerances");
    allow_keys(tol, "/tolerances", {"linear", "newton"});
    c.linear_tol = number(tol, "linear", "/tolerances", c.linear_tol);
    c.newton_tol = number(tol, "newton", "/tolerances", c.newton_tol);
    if (!(c.linear_tol > 0.0)) throw ConfigError("/tolerances/linear", "must be > 0");
    if (!(c.newton_tol > 0.0)) throw ConfigError("/tolerances/newton", "must be > 0");

    const json& out = section(root, "output");
    allow_keys(out, "/output", {"dir", "snapshot_every", "diagnostics"});
    c.output.dir = text(out, "dir", "/output", "");
    c.output.snapshot_every = integer(out, "snapshot_every", "/output", 0);
    c.output.diagnostics = boolean(out, "diagnostics", "/output", true);
    if (c.output.snapshot_every < 0) throw ConfigError("/output/snapshot_every", "must be >= 0");
    return c;
}

Config load_config(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("/", "cannot open " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str());
}

RunSetup make_setup(const Config& c) {
    RunSetup s;
    s.grid = StripGrid(c.nx, c.ny, c.lx);
    s.linear_tol = c.linear_tol;
    ModelParams& p = s.params;
    p.L = c.L;
    p.delta = c.delta;
    p.eps = c.eps;
    p.potentials = c.potentials;
    p.T = c.T;
    p.tau = c.tau;
    p.newton_tol = c.newton_tol;

    if (c.forcing.kind == "cosine") {
        const ForcingSpec f = c.forcing;
        p.forcing = [f](const StripGrid& g, double t) {
            constexpr double pi = std::numbers::pi;
            CoupledField out = CoupledField::zeros(g);
            const double ct = std::cos(f.omega * t);
            for (int i = 0; i < g.nx(); ++i) {
                const double cx = std::cos(2.0 * pi * f.kx * g.x(i) / g.lx()) * ct;
                for (int j = 0; j < g.ny(); ++j)
                    out.bulk[g.idx(i, j)] = f.bulk_amplitude * cx * std::cos(pi * f.ky * g.y(j));
                out.surf[i] = out.surf[g.nx() + i] = f.surface_amplitude * cx;
            }
            return out;
        };
    }

    const StripGrid& g = s.grid;
    if (c.init.kind == "cosine-mode") {
        s.init = cosine_mode(g, c.init.amplitude, c.init.kx, c.init.ky, c.init.offset);
    } else if (c.init.kind == "random") {
        std::mt19937_64 rng(c.init.seed);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        s.init.phi0.resize(g.bulk_size());
        for (double& v : s.init.phi0) v = c.init.amplitude * u(rng);
        s.init.psi0 = trace(g, s.init.phi0);
    } else {
        const Snapshot snap = load_snapshot(c.init.path);
        if (!(StripGrid(snap.nx, snap.ny, snap.lx) == g))
            throw ConfigError("/init/path", "snapshot grid does not match /grid");
        s.init.phi0 = snap.state.phi;
        s.init.psi0 = snap.state.psi;
    }

    const Interval db = p.potentials.bulk.domain();
    const Interval dg = p.potentials.boundary.domain();
    for (double v : s.init.phi0)
        if (!db.contains_interior(v) || !dg.contains_interior(v))
            throw ConfigError("/init", "initial data must lie strictly inside the graph domains");
    for (double v : s.init.psi0)
        if (!dg.contains_interior(v))
            throw ConfigError("/init", "initial boundary data must lie strictly inside D(beta_G)");
    const double m = generalized_mean(g, CoupledField{s.init.phi0, s.init.psi0});
    if (!dg.contains_interior(m))
        throw ConfigError("/init", "generalized mean must lie strictly inside D(beta_G)");
    return s;
}

std::string study_to_json(const StudyResult& r) {
    json j;
    j["kind"] = std::string(to_string(r.kind));
    j["points"] = json::array();
    for (const auto& p : r.points) {
        json e = json::object();
        for (const auto& [k, v] : p.errors) e[k] = v;
        j["points"].push_back({{"param", p.param}, {"errors", e}});
    }
    j["slope"] = r.slope;
    j["fit_residual"] = r.fit_residual;
    j["reference"] = r.reference;
    json s = json::object();
    for (const auto& [k, v] : r.summary) s[k] = v;
    j["summary"] = s;
    return j.dump(2) + "\n";
}

}  // namespace bsch
