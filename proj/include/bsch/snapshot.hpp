#pragma once

// Plain-text field snapshots. A header line
//   bsch-snapshot v1 nx=<int> ny=<int> lx=<real> t=<real>
// is followed by labeled blocks (phi, mu, psi_bottom, psi_top, theta_bottom,
// theta_top, xi, xiG_bottom, xiG_top), each a label line and one line of
// values with 17 significant digits, x fastest.

#include <iosfwd>
#include <string>

#include "bsch/state.hpp"

namespace bsch {

struct Snapshot {
    int nx = 0;
    int ny = 0;
    double lx = 0.0;
    SolverState state;  // phi, mu, psi, theta, xi, xi_G are populated
};

void write_snapshot(std::ostream& os, const StripGrid& g, const SolverState& s);
std::string format_snapshot(const StripGrid& g, const SolverState& s);
// Throws ConfigError on malformed input, with the block label as pointer.
Snapshot read_snapshot(std::istream& is);
Snapshot parse_snapshot(const std::string& text);

void save_snapshot(const std::string& path, const StripGrid& g, const SolverState& s);
Snapshot load_snapshot(const std::string& path);

}  // namespace bsch
