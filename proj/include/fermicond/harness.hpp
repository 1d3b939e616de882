#pragma once

// Experiment orchestration: every registered experiment reads an
// ExperimentConfig, writes CSVs into run.out and finishes with manifest.json
// (written last, by rename). Outputs depend only on the config, never on the
// worker count.

#include "fermicond/checks.hpp"
#include "fermicond/config.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace fermicond {

const char* tool_version();

const std::vector<std::string>& experiment_registry();

struct OutputFile {
    std::string name;
    std::string sha256;
    std::uintmax_t bytes = 0;
};

struct RunManifest {
    std::string experiment;
    std::string config_hash;
    std::string tool_version;
    std::vector<OutputFile> files;
    std::vector<std::pair<std::string, double>> timings; // seconds
    std::vector<Gate> gates;
    std::vector<Gate> diagnostics; // reported, not gating
    bool passed = true;
};

nlohmann::json manifest_to_json(const RunManifest& m);

// throws unknown-experiment (listing the registry) and invalid-config
RunManifest run_experiment(const std::string& name, const ExperimentConfig& cfg);

// ---- invariant battery ----

struct BatteryModel {
    LatticeSpec spec;
    double beta = 1, theta = 0, lambda = 0;
    InterparticleInteraction ip;
    DisorderKind kind = DisorderKind::iid_uniform;
    std::uint64_t seed = 1;
    int samples = 1;
};

struct BatteryOptions {
    int kms_pairs = 10;
    int work_perturbations = 3;
    double eta = 0.5;          // cyclic fields of the heat check: flat and bump pulses
    DriveOptions drive{0.02, Integrator::cf4};
    std::vector<double> lr_times{0.5, 1.0, 2.0};
    double lr_dmin = 2, lr_dmax = 6;
    DecayFunction decay;
    std::vector<double> grid = symmetric_grid(10.0, 201);
    int workers = 1;
    const EigenCache* cache = nullptr;
};

struct BatteryRow {
    int model = 0;
    int sample = 0;
    Gate gate;
};

// d = 1, N ∈ {4,6,8}, β ∈ {0.5,1,2}, ϑ ∈ {0,0.5}, λ ∈ {0,1}, {none, hubbard(1)}
std::vector<BatteryModel> default_battery(std::uint64_t seed, int samples = 32);

// per sample: transport, measure and (for real hoppings) time-reversal gates;
// on sample 0 of each model also KMS, work, heat and Lieb–Robinson gates.
// Gate names carry a category prefix: transport:, measure:, time-reversal:,
// kms:, work:, heat:, lieb-robinson:.
std::vector<BatteryRow> run_battery(const std::vector<BatteryModel>& models, const BatteryOptions& opt);

// worst row per gate name
std::vector<Gate> summarize(const std::vector<BatteryRow>& rows);

} // namespace fermicond
