#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "msr/em.hpp"
#include "msr/invariants.hpp"
#include "msr/solver.hpp"

namespace msr {

/// The four landscape-study cases.
enum class ExperimentCase {
    Uniform,         // uniform p, third-order term on
    NonUniformNoT,   // general p, lambda_t forced to 0
    NonUniform,      // general p, third-order term on
    Discrete,        // general p, ground-truth x drawn from {0,1,2,3}
};

ExperimentCase case_from_name(const std::string& name);
std::string case_name(ExperimentCase c);

struct ExperimentConfig {
    std::vector<int> d_list{6, 9, 12, 15};
    std::vector<int> m_list;  // empty: all m in 2..d; entries above d are skipped
    ExperimentCase exp_case = ExperimentCase::NonUniform;
    int n_trials = 50;
    double th = 1e-3;
    std::int64_t observation_count = 100000;  // K
    double sigma = 0.0;
    std::vector<double> sigmas;  // noise sweep levels
    Weights weights;
    std::uint64_t master_seed = 1;

    // Noise-sweep shape; the full-scale study uses d=45, m=25.
    int sweep_d = 15;
    int sweep_m = 8;
    int em_restarts = 5;
    int em_max_iters = 500;
    double em_ll_tol = 1e-6;

    int solver_max_iters = 5000;
    double solver_grad_tol = 1e-8;
    int solver_memory = 10;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& c);

struct GridCell {
    int d = 0;
    int m = 0;
    ExperimentCase exp_case = ExperimentCase::NonUniform;
    double p_rec = 0.0;
    double f_bar = 0.0;
    int m_tilde = 0;        // min_window_length(d) for the case
    bool m_tilde_ok = false;  // m >= m_tilde
    double rounded_mse_med = 0.0;  // discrete case; NaN otherwise
    TrialBatchReport trials;
};

struct PhaseGridResult {
    std::vector<GridCell> cells;          // sorted by (d, m)
    std::map<int, int> min_m_prec1;       // per d: smallest m with p_rec == 1, or -1
};

/// Landscape study over (d, m) at sigma = 0: fresh ground truth per cell
/// (seed derived from master_seed and the cell coordinates), population
/// features, multi_trial scoring. Cells are independent jobs.
PhaseGridResult run_phase_grid(const ExperimentConfig& cfg, int threads = 0);

/// Frozen columns: d,m,case,p_rec,f_bar,m_tilde,min_m_prec1,rounded_mse_med
/// (the last is nan outside the discrete case).
void write_phase_csv(const PhaseGridResult& res, const std::string& path);

nlohmann::json phase_summary_json(const PhaseGridResult& res,
                                  const ExperimentConfig& cfg);

struct NoiseSweepRow {
    double sigma = 0.0;
    std::string method;  // "moments" or "em"
    double mse_x = 0.0;
    double mse_p = 0.0;
    double wall_time_s = 0.0;
};

struct NoiseSweepResult {
    std::vector<NoiseSweepRow> rows;  // two per sigma, moments first
    std::vector<double> estimate_time_s;
    std::vector<double> truth_x, truth_p;
    nlohmann::json details;  // per-sigma methods breakdown
};

/// One ObservationSet per sigma; the moments pipeline (estimate ->
/// multi-restart solve, estimate picked by smallest final objective) and
/// EM (best log-likelihood over em_restarts seeded inits) run on the
/// same data. Timing covers compute only, after a small warm-up pass.
NoiseSweepResult run_noise_sweep(const ExperimentConfig& cfg, int threads = 0);

/// Columns: sigma,method,mse_x,mse_p,wall_time_s. Everything except
/// wall_time_s is a pure function of the config.
void write_noise_csv(const NoiseSweepResult& res, const std::string& path);

nlohmann::json noise_summary_json(const NoiseSweepResult& res,
                                  const ExperimentConfig& cfg);

/// Median wall time of empirical_moments over `reps` runs, one unmeasured
/// warm-up pass first. Used for the sample-complexity scaling check.
double time_empirical_moments(const ObservationSet& obs, int reps = 3);

}  // namespace msr
