#include "bsch/snapshot.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <span>
#include <sstream>

#include "bsch/errors.hpp"

namespace bsch {
namespace {

constexpr std::array<const char*, 9> kLabels{"phi",          "mu",        "psi_bottom",
                                             "psi_top",      "theta_bottom", "theta_top",
                                             "xi",           "xiG_bottom",   "xiG_top"};

void put(std::ostream& os, double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    os.write(buf, end - buf);
}

void put_block(std::ostream& os, const char* label, std::span<const double> v) {
    os << label << '\n';
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (k) os << ' ';
        put(os, v[k]);
    }
    os << '\n';
}

double get(const std::string& tok, const std::string& where) {
    double v = 0.0;
    const char* end = tok.data() + tok.size();
    auto [p, ec] = std::from_chars(tok.data(), end, v);
    if (ec != std::errc() || p != end) throw ConfigError(where, "bad number '" + tok + "'");
    return v;
}

std::string header_field(std::istringstream& hs, const std::string& key) {
    std::string tok;
    if (!(hs >> tok) || tok.rfind(key + "=", 0) != 0)
        throw ConfigError("/header", "expected " + key + "=");
    return tok.substr(key.size() + 1);
}

}  // namespace

void write_snapshot(std::ostream& os, const StripGrid& g, const SolverState& s) {
    const std::size_t n = g.nx();
    os << "bsch-snapshot v1 nx=" << g.nx() << " ny=" << g.ny() << " lx=";
    put(os, g.lx());
    os << " t=";
    put(os, s.t);
    os << '\n';
    auto line = [n](const std::vector<double>& v, int k) {
        return std::span<const double>(v).subspan(k * n, n);
    };
    put_block(os, kLabels[0], s.phi);
    put_block(os, kLabels[1], s.mu);
    put_block(os, kLabels[2], line(s.psi, 0));
    put_block(os, kLabels[3], line(s.psi, 1));
    put_block(os, kLabels[4], line(s.theta, 0));
    put_block(os, kLabels[5], line(s.theta, 1));
    put_block(os, kLabels[6], s.xi);
    put_block(os, kLabels[7], line(s.xi_G, 0));
    put_block(os, kLabels[8], line(s.xi_G, 1));
}

std::string format_snapshot(const StripGrid& g, const SolverState& s) {
    std::ostringstream os;
    write_snapshot(os, g, s);
    return os.str();
}

Snapshot read_snapshot(std::istream& is) {
    std::string header;
    if (!std::getline(is, header)) throw ConfigError("/header", "empty snapshot");
    std::istringstream hs(header);
    std::string magic, version;
    hs >> magic >> version;
    if (magic != "bsch-snapshot" || version != "v1")
        throw ConfigError("/header", "not a bsch-snapshot v1 file");
    Snapshot snap;
    snap.nx = int(get(header_field(hs, "nx"), "/header/nx"));
    snap.ny = int(get(header_field(hs, "ny"), "/header/ny"));
    snap.lx = get(header_field(hs, "lx"), "/header/lx");
    snap.state.t = get(header_field(hs, "t"), "/header/t");
    const StripGrid g(snap.nx, snap.ny, snap.lx);

    std::array<std::vector<double>, kLabels.size()> blocks;
    for (std::size_t b = 0; b < kLabels.size(); ++b) {
        const std::string where = std::string("/") + kLabels[b];
        std::string label, values;
        if (!std::getline(is, label) || label != kLabels[b])
            throw ConfigError(where, "missing block label");
        if (!std::getline(is, values)) throw ConfigError(where, "missing values");
        std::istringstream vs(values);
        for (std::string tok; vs >> tok;) blocks[b].push_back(get(tok, where));
        const std::size_t want = (b == 0 || b == 1 || b == 6) ? g.bulk_size() : std::size_t(g.nx());
        if (blocks[b].size() != want)
            throw ConfigError(where, "expected " + std::to_string(want) + " values, got " +
                                         std::to_string(blocks[b].size()));
    }
    auto join = [](std::vector<double> a, const std::vector<double>& b) {
        a.insert(a.end(), b.begin(), b.end());
        return a;
    };
    SolverState& s = snap.state;
    s.phi = std::move(blocks[0]);
    s.mu = std::move(blocks[1]);
    s.psi = join(std::move(blocks[2]), blocks[3]);
    s.theta = join(std::move(blocks[4]), blocks[5]);
    s.xi = std::move(blocks[6]);
    s.xi_G = join(std::move(blocks[7]), blocks[8]);
    return snap;
}

Snapshot parse_snapshot(const std::string& text) {
    std::istringstream is(text);
    return read_snapshot(is);
}

void save_snapshot(const std::string& path, const StripGrid& g, const SolverState& s) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open " + path + " for writing");
    write_snapshot(os, g, s);
    if (!os) throw Error("write failed: " + path);
}

Snapshot load_snapshot(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("/init/path", "cannot open " + path);
    return read_snapshot(is);
}

}  // namespace bsch
