#pragma once

// Experiment configuration: a JSON tree with four required-shape blocks
// (model, field, disorder, run) and an optional analysis block. Every key has
// a default; unknown keys are errors. The canonical form is the fully
// defaulted tree with sorted keys. The config hash is SHA-256 of its compact
// dump without run.out, run.cache, run.cache_dir and run.workers.

#include "fermicond/lattice.hpp"
#include "fermicond/model.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace fermicond {

struct ModelBlock {
    int d = 1;
    int l = 1;                 // box {-l..l}^d, used when sizes is empty
    std::vector<int> sizes{6}; // sites per axis
    double theta = 0.5;
    double lambda = 1.0;
    double beta = 1.0;
    InterparticleInteraction ip;
    DecayFunction decay;

    LatticeSpec spec() const;
};

struct FieldBlock {
    std::string shape = "flat"; // flat | bump
    double t0 = 0.0, t1 = 1.0;
    std::vector<double> eta{0.02, 0.04, 0.08};
    std::vector<double> w{1.0};
    double l = 0.0; // 0: cover the box, l = largest half extent
};

struct DisorderBlock {
    DisorderKind kind = DisorderKind::iid_uniform;
    std::uint64_t seed = 1;
    int n_samples = 8;
};

struct RunBlock {
    double t_max = 10.0;
    int points = 201;   // symmetric grid [-t_max, t_max]
    double dt = 0.01;   // drive step
    std::string out = "fermicond-out";
    bool cache = false;
    std::string cache_dir; // empty: FERMICOND_CACHE_DIR, else the user cache dir
    int workers = 1;
};

struct AnalysisBlock {
    std::string battery = "default"; // invariants: default | config
    double drude_T = 1.0;
    int levy_paths = 100000;
    std::vector<double> levy_t{1.0, 5.0};
    double levy_alpha_max = 3.0;
    int levy_alpha_points = 21;
    std::vector<double> lr_times{0.5, 1.0, 2.0};
};

struct ExperimentConfig {
    ModelBlock model;
    FieldBlock field;
    DisorderBlock disorder;
    RunBlock run;
    AnalysisBlock analysis;

    double field_l() const;
    std::filesystem::path cache_path() const; // env var wins over run.cache_dir
};

// throws invalid-config listing every offending field as "block.key: reason"
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& p);
nlohmann::json config_to_json(const ExperimentConfig& c); // canonical form
std::string config_hash(const ExperimentConfig& c);

} // namespace fermicond
