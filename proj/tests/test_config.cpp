#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>

#include "bsch/config.hpp"
#include "bsch/elliptic.hpp"
#include "bsch/errors.hpp"
#include "bsch/snapshot.hpp"

using namespace bsch;

namespace {

std::string pointer_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.pointer();
    }
    return "<none>";
}

}  // namespace

TEST_CASE("empty document gives defaults") {
    const Config c = parse_config("{}");
    CHECK(c.nx == 64);
    CHECK(c.ny == 33);
    CHECK(c.L == 1.0);
    CHECK(c.eps == 1e-2);
    CHECK(c.potentials.bulk.kind() == GraphKind::RegularQuartic);
    CHECK(c.init.kind == "cosine-mode");
    const RunSetup s = make_setup(c);
    CHECK(s.params.steps() == 128);
    CHECK(s.init.phi0.size() == s.grid.bulk_size());
    CHECK_FALSE(static_cast<bool>(s.params.forcing));
}

TEST_CASE("L accepts inf") {
    CHECK(std::isinf(parse_config(R"({"model": {"L": "inf"}})").L));
    CHECK(parse_config(R"({"model": {"L": 0}})").L == 0.0);
    CHECK(pointer_of(R"({"model": {"L": "infinity"}})") == "/model/L");
    CHECK(pointer_of(R"({"model": {"L": -1}})") == "/model/L");
}

TEST_CASE("eps outside (0,1)") {
    try {
        parse_config(R"({"model": {"eps": 0}})");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.pointer() == "/model/eps");
        CHECK(std::string(e.what()).find("eps must be in (0,1)") != std::string::npos);
    }
    CHECK(pointer_of(R"({"model": {"eps": 1}})") == "/model/eps");
}

TEST_CASE("unknown keys carry their pointer") {
    CHECK(pointer_of(R"({"gird": {}})") == "/gird");
    CHECK(pointer_of(R"({"grid": {"nz": 3}})") == "/grid/nz");
    CHECK(pointer_of(R"({"potentials": {"bulk": {"kind": "logarithmic", "params": {"c2": 1}}}})") ==
          "/potentials/bulk/params/c2");
    CHECK(pointer_of(R"({"init": {"kind": "random", "kx": 2}})") == "/init/kx");
    CHECK(pointer_of(R"({"forcing": {"kind": "zero", "omega": 1}})") == "/forcing/omega");
    CHECK(pointer_of(R"({"output": {"every": 1}})") == "/output/every");
}

TEST_CASE("type and range errors") {
    CHECK(pointer_of("not json") == "/");
    CHECK(pointer_of("[]") == "/");
    CHECK(pointer_of(R"({"grid": {"nx": 3.5}})") == "/grid/nx");
    CHECK(pointer_of(R"({"grid": {"nx": 2}})") == "/grid/nx");
    CHECK(pointer_of(R"({"grid": {"lx": "one"}})") == "/grid/lx");
    CHECK(pointer_of(R"({"time": {"T": 0.25, "tau": 0.3}})") == "/time");
    CHECK(pointer_of(R"({"time": {"tau": -1}})") == "/time/tau");
    CHECK(pointer_of(R"({"potentials": {"rho": 0}})") == "/potentials/rho");
    CHECK(pointer_of(R"({"init": {"kind": "spiral"}})") == "/init/kind");
    CHECK(pointer_of(R"({"init": {"kind": "file"}})") == "/init/path");
    CHECK(pointer_of(R"({"init": {"kind": "random", "seed": -3}})") == "/init/seed");
    CHECK(pointer_of(R"({"output": {"diagnostics": 1}})") == "/output/diagnostics");
}

TEST_CASE("graph parameters") {
    const Config c = parse_config(R"({"potentials": {
        "bulk": {"kind": "logarithmic", "params": {"c1": 3}},
        "boundary": {"kind": "double-obstacle", "params": {"c2": 0.5}},
        "rho": 2, "c0": 0.1}})");
    CHECK(c.potentials.bulk.kind() == GraphKind::Logarithmic);
    CHECK(c.potentials.boundary.kind() == GraphKind::DoubleObstacle);
    CHECK(c.potentials.rho == 2.0);
    CHECK(c.potentials.c0 == 0.1);
    CHECK(parse_config(R"({"potentials": {"bulk": {"kind": "linear", "params": {"slope": 0}}}})")
              .potentials.bulk.kind() == GraphKind::Linear);
    CHECK(pointer_of(R"({"potentials": {"bulk": {"kind": "logarithmic", "params": {"c1": 1}}}})") ==
          "/potentials/bulk/params/c1");
    CHECK(pointer_of(R"({"potentials": {"boundary": {"kind": "double-obstacle", "params": {"c2": 0}}}})") ==
          "/potentials/boundary/params/c2");
    CHECK(pointer_of(R"({"potentials": {"bulk": {"kind": "quartic"}}})") == "/potentials/bulk/kind");
    CHECK(pointer_of(R"({"potentials": {"bulk": {}}})") == "/potentials/bulk/kind");
}

TEST_CASE("initial data inside the graph domains") {
    CHECK_NOTHROW(make_setup(parse_config(R"({"potentials": {"bulk": {"kind": "logarithmic"},
        "boundary": {"kind": "logarithmic"}}, "init": {"amplitude": 0.5, "offset": 0.1}})")));
    try {
        make_setup(parse_config(R"({"potentials": {"bulk": {"kind": "logarithmic"},
            "boundary": {"kind": "logarithmic"}}, "init": {"amplitude": 0.5, "offset": 0.6}})"));
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.pointer() == "/init");
    }
}

TEST_CASE("random init is seeded and bounded") {
    const char* doc = R"({"grid": {"nx": 8, "ny": 5}, "init": {"kind": "random", "amplitude": 0.05, "seed": 7}})";
    const RunSetup a = make_setup(parse_config(doc));
    const RunSetup b = make_setup(parse_config(doc));
    CHECK(a.init.phi0 == b.init.phi0);
    for (double v : a.init.phi0) CHECK(std::abs(v) <= 0.05);
    CHECK(a.init.psi0 == trace(a.grid, a.init.phi0));
    const RunSetup c = make_setup(parse_config(
        R"({"grid": {"nx": 8, "ny": 5}, "init": {"kind": "random", "amplitude": 0.05, "seed": 8}})"));
    CHECK(a.init.phi0 != c.init.phi0);
}

TEST_CASE("file init round-trips a snapshot") {
    const StripGrid g(8, 5, 1.0);
    SolverState s;
    const InitialData id = cosine_mode(g, 0.3, 1, 1, 0.05);
    s.phi = id.phi0;
    s.psi = id.psi0;
    s.mu = s.xi = std::vector<double>(g.bulk_size(), 0.0);
    s.theta = s.xi_G = std::vector<double>(g.surf_size(), 0.0);
    const auto path = (std::filesystem::temp_directory_path() / "bsch_test_init.txt").string();
    save_snapshot(path, g, s);
    const std::string doc = R"({"grid": {"nx": 8, "ny": 5}, "init": {"kind": "file", "path": ")" + path + R"("}})";
    const RunSetup r = make_setup(parse_config(doc));
    CHECK(r.init.phi0 == id.phi0);
    CHECK(r.init.psi0 == id.psi0);
    const std::string wrong = R"({"grid": {"nx": 16, "ny": 5}, "init": {"kind": "file", "path": ")" + path + R"("}})";
    try {
        make_setup(parse_config(wrong));
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.pointer() == "/init/path");
    }
    std::remove(path.c_str());
}

TEST_CASE("cosine forcing") {
    const RunSetup s = make_setup(parse_config(R"({"grid": {"nx": 8, "ny": 5},
        "forcing": {"kind": "cosine", "bulk_amplitude": 0.5, "surface_amplitude": 0.25, "kx": 1, "ky": 0, "omega": 0}})"));
    REQUIRE(static_cast<bool>(s.params.forcing));
    const CoupledField f = s.params.forcing(s.grid, 0.0);
    CHECK(f.bulk[s.grid.idx(0, 2)] == doctest::Approx(0.5));
    CHECK(f.surf[0] == doctest::Approx(0.25));
    CHECK(f.surf[s.grid.nx() + 4] == doctest::Approx(-0.25));
}

TEST_CASE("shipped configs parse") {
    for (const char* name : {"default.json", "lw_logarithmic.json"}) {
        const auto path = std::filesystem::path(BSCH_SOURCE_DIR) / "configs" / name;
        CHECK_NOTHROW(make_setup(load_config(path.string())));
    }
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("study json") {
    StudyResult r;
    r.kind = StudyKind::KineticZero;
    r.points = {{0.1, 0.01, {{"l2_gap", 0.01}}}};
    r.slope = 1.0;
    r.reference = "direct";
    r.summary["monotone"] = 1.0;
    const std::string j = study_to_json(r);
    CHECK(j.find("\"kind\": \"kinetic-zero\"") != std::string::npos);
    CHECK(j.find("\"l2_gap\": 0.01") != std::string::npos);
    CHECK(j.find("\"fit_residual\"") != std::string::npos);
    CHECK(j.back() == '\n');
}
