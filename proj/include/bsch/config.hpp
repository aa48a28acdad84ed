#pragma once

// JSON run configuration. Every object rejects unknown keys; errors carry the
// JSON pointer of the offending value.

#include <cstdint>
#include <string>

#include "bsch/studies.hpp"

namespace bsch {

struct InitSpec {
    std::string kind = "cosine-mode";  // cosine-mode | file | random
    double amplitude = 0.2;
    int kx = 1;
    int ky = 1;
    double offset = 0.0;
    std::string path;
    std::uint64_t seed = 0;
};

struct ForcingSpec {
    std::string kind = "zero";  // zero | cosine
    // cosine: f = bulk_amplitude cos(2 pi kx x / lx) cos(pi ky y) cos(omega t),
    // f_G = surface_amplitude cos(2 pi kx x / lx) cos(omega t).
    double bulk_amplitude = 0.0;
    double surface_amplitude = 0.0;
    int kx = 1;
    int ky = 0;
    double omega = 0.0;
};

struct OutputSpec {
    std::string dir;
    int snapshot_every = 0;  // 0 writes only the initial and final states
    bool diagnostics = true;
};

struct Config {
    int nx = 64, ny = 33;
    double lx = 1.0;
    double L = 1.0;
    double delta = 1.0;
    double eps = 1e-2;
    PotentialPair potentials;
    double T = 0.25;
    double tau = 1.0 / 512.0;
    InitSpec init;
    ForcingSpec forcing;
    double linear_tol = 1e-11;
    double newton_tol = 1e-10;
    OutputSpec output;
};

Config parse_config(const std::string& text);
Config load_config(const std::string& path);

// Builds grid, parameters and initial data; validates that the initial data
// lie inside both graph domains nodewise with generalized mean interior to
// D(beta_G).
RunSetup make_setup(const Config& c);

std::string study_to_json(const StudyResult& r);

}  // namespace bsch
