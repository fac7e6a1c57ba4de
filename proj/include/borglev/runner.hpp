#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "borglev/estimates.hpp"
#include "borglev/probe.hpp"
#include "borglev/report_io.hpp"

namespace borglev {

inline constexpr const char* kVersion = "0.1.0";

const std::vector<std::string>& experiment_kinds();

struct LemmaCase {
    double mu = 0.0;
    double nu = 2.0;
    double b = 0.0;                 // integral and sharpness cases
    std::optional<double> nu1;
    double jitter = 0.0;
};

struct LemmaPlan {
    std::vector<LemmaCase> lemma1, lemma2, lemma3, sharpness;
    double tau_min = 8.0;
    double tau_max = 256.0;
    int tau_count = 11;
    double eps = 0.05;
};

/// Validated experiment description. Potential specs are kept in canonical JSON form
/// (type plus every parameter, with seeds resolved).
struct ExperimentConfig {
    std::string kind;
    double lx = 1.0, ly = 1.0;
    int nx = 40, ny = 40;
    json potential;                 // q or q1
    std::optional<json> potential2; // q2, background or reference
    Index K = 0;
    Index N = 0;
    int m = 2;
    double eps = 0.25;
    std::vector<cplx> lambdas;
    std::optional<int> series_m;
    std::vector<double> decay_lambdas;
    std::vector<double> taus;
    std::vector<Vec2> xis;
    std::string source = "direct";
    Index N_drop = 0;
    double cutoff_multiplier = 6.0;
    double period_factor = 2.0;
    std::vector<double> family_t;
    std::vector<double> deltas;
    double alpha = 2.0;
    double A = 1.0;
    double tau = 10.0;
    LemmaPlan lemmas;
    bool use_cache = true;
    std::string out = "borglev-out";
    std::uint64_t seed = 0;
    int threads = 1;

    GridSpec grid() const { return GridSpec(lx, ly, nx, ny); }
    /// Canonical JSON of everything that affects the payload (excludes out and threads).
    json canonical() const;
};

/// Parses and validates a config object; unknown keys are rejected. `kind` overrides the
/// config's own "kind" when both are present they must agree.
ExperimentConfig parse_config(const json& j, const std::optional<std::string>& kind = std::nullopt,
                              std::optional<std::uint64_t> seed = std::nullopt);
ExperimentConfig load_config(const fs::path& path, const std::optional<std::string>& kind = std::nullopt,
                             std::optional<std::uint64_t> seed = std::nullopt);

/// Canonical form of a potential spec (string name or object); validates parameters.
json canonical_potential(const json& spec, std::uint64_t default_seed);
Potential build_potential(const json& canonical, const GridSpec& grid);

struct CachedSpectrum {
    std::shared_ptr<const SpectralData> data;
    std::string dataset_id;
    CacheStatus status = CacheStatus::Miss;
};

/// Spectral data of a canonical potential spec, via the content-addressed cache when enabled.
CachedSpectrum cache_spectral(const json& potential, const GridSpec& grid, Index K, const SpectralCache* cache);
CachedSpectrum cache_spectral(const ExperimentConfig& config, const SpectralCache& cache);

struct StageTiming {
    std::string name;
    double seconds = 0.0;
    bool ok = false;
};

struct RunManifest {
    std::string config_hash;
    json versions;
    double wall_time = 0.0;
    std::vector<StageTiming> stages;
    std::vector<std::string> outputs;
    bool complete = false;
    std::string failed_stage;
    std::string error;

    json to_json() const;
};

struct RunResult {
    int exit_code = 0;   // 0 success, 2 validation error, 3 numerical failure
    std::string message;
    RunManifest manifest;
};

/// Runs a validated config, writing CSV/JSON outputs and manifest.json into config.out.
RunResult run(const ExperimentConfig& config);
RunResult run(const ExperimentConfig& config, const SpectralCache& cache);
/// Loads, validates and runs; validation failures return exit code 2 without touching the output directory.
RunResult run(const std::string& kind, const fs::path& config_path, const std::optional<std::string>& out = std::nullopt,
              std::optional<int> threads = std::nullopt, std::optional<std::uint64_t> seed = std::nullopt);

} // namespace borglev
