#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dsmle/family.hpp"
#include "dsmle/inference.hpp"
#include "dsmle/likelihood.hpp"
#include "dsmle/types.hpp"

namespace dsmle::harness {

extern const char* kLibraryVersion;

/// A single value that is either a literal or a reference to a parameter
/// coordinate ("theta0", "theta1", "theta2" in config files).
struct ValueOrTheta {
    double value = 0.0;
    int theta_index = -1;  // -1: literal

    double resolve(const ParameterPoint& theta) const {
        return theta_index < 0 ? value : theta.at(static_cast<std::size_t>(theta_index));
    }
};

struct ObservationSpec {
    std::string kind;  // "gaussian" | "laplace" | "channel" | "bsc"
    std::vector<ValueOrTheta> means;
    ValueOrTheta scale;          // sigma (gaussian) or scale (laplace)
    std::vector<std::vector<double>> channel;  // literal channel matrix
    ValueOrTheta crossover;      // bsc
};

struct EquivalenceSpec {
    std::string kind = "singleton";  // "singleton" | "points" | "complement"
    std::vector<ParameterPoint> points;
};

struct VerifySettings {
    int m = 2;
    int t = 2;
    int ell = 1;
    long n = 1000;
    int reps = 200;
    int s5_tuples = 200;
    long erg_n = 20000;
    std::vector<long> lags = {1, 2, 5, 10, 20};
    std::optional<ParameterPoint> theta_alt;
    double neighborhood_radius = 0.05;
    int neighborhood_points = 5;
    int block_m = 20;
    int block_ell = 1;
    long block_n = 10000;
    int continuity_resolution = 41;
};

/// Parsed experiment configuration. `canonical` holds the canonicalized JSON
/// (sorted keys, defaults filled in) that the config hash is computed from.
struct Config {
    std::string family_name;
    ParameterBox box;
    ParameterPoint theta0;

    // family-specific knobs
    double bsc_hidden_flip = 0.25;
    int doubling_depth = 53;
    int alphabet = 2;
    std::vector<std::vector<int>> allowed;       // potential-linear / potential-table
    std::vector<std::vector<double>> potential;  // potential-linear table
    std::vector<double> theta_grid;              // potential-table
    std::vector<std::vector<std::vector<double>>> tables;  // potential-table

    ObservationSpec obs;
    EquivalenceSpec equivalence;

    long n = 1000;
    std::vector<long> n_list;
    int replications = 1;
    std::vector<int> grid_resolution = {101};
    std::uint64_t seed = 0;
    int mc_samples = 10000;
    int refine_iterations = 40;
    int threads = 1;
    std::string out_dir = "runs";

    VerifySettings verify;

    std::string canonical;  // canonical JSON text (hash input; stored in manifests)
};

/// Parse and validate a config; throws ConfigError with the offending field.
Config parse_config_file(const std::filesystem::path& path);
Config parse_config_text(const std::string& json_text);

/// "fnv1a64:<16 hex digits>" over the canonical JSON text.
std::string config_hash(const Config& cfg);

/// Update the seed and refresh the canonical text (the seed is part of it).
void set_config_seed(Config& cfg, std::uint64_t seed);

family::Family family_from_config(const Config& cfg);
inference::EquivalenceClass equivalence_from_config(const Config& cfg);

// ---------------------------------------------------------------------------
// Observation files: one observation per line (integers for channels,
// decimals otherwise) under a single '#'-header carrying metadata.
// ---------------------------------------------------------------------------

void write_observations(const std::filesystem::path& path, const likelihood::ObservationSequence& seq,
                        bool integer_valued, const std::string& family_name);

likelihood::ObservationSequence read_observations(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Run entry points. Each creates a timestamped subdirectory of cfg.out_dir,
// writes its data files plus a manifest.json, and returns the directory.
// All data files are byte-reproducible given (config, seed); the manifest
// carries the timestamp and wall time and is the one file that is not.
// ---------------------------------------------------------------------------

std::filesystem::path run_simulate(const Config& cfg);
std::filesystem::path run_likelihood_surface(const Config& cfg, const std::filesystem::path& data);
std::filesystem::path run_mle(const Config& cfg, const std::filesystem::path& data);
std::filesystem::path run_consistency(const Config& cfg);

struct VerifyOutcome {
    std::filesystem::path dir;
    bool failures_present = false;
};

VerifyOutcome run_verify_conditions(const Config& cfg);

// Parsers for the emitted tables (round-trip tested).
struct SurfaceRow {
    ParameterPoint theta;
    double value = 0.0;
    bool zero_likelihood = false;
};
std::vector<SurfaceRow> read_surface_csv(const std::filesystem::path& path);
std::vector<inference::SweepCell> read_sweep_csv(const std::filesystem::path& path);

}  // namespace dsmle::harness
