// msr: command-line harness for multi-segment reconstruction.
//
// Subcommands compose through files: generate writes MSR1 observations
// and a truth JSON; estimate turns MSR1 into invariant-feature JSON;
// solve turns features into a report; em fits the baseline directly on
// MSR1 data. phase and noise-sweep reproduce the landscape and noise
// studies. Outputs are pure functions of inputs, flags and seeds, except
// for wall-clock timing fields. MSR_THREADS caps worker threads.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "msr/alignment.hpp"
#include "msr/em.hpp"
#include "msr/experiments.hpp"
#include "msr/invariants.hpp"
#include "msr/observation.hpp"
#include "msr/parallel.hpp"
#include "msr/rng.hpp"
#include "msr/serialize.hpp"
#include "msr/solver.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct GenerateOpts {
    int d = 9;
    int m = 9;
    std::int64_t count = 100000;
    double sigma = 0.0;
    std::uint64_t seed = 1;
    std::string p_mode = "dirichlet";
    std::string x_mode = "gauss";
    std::string out_dir = ".";
    std::string obs_name = "obs.msr1";
    std::string truth_name = "truth.json";
};

int run_generate(const GenerateOpts& o) {
    if (o.m < 1 || o.m > o.d) throw std::runtime_error("generate: need 1 <= m <= d");

    msr::Rng rng(msr::mix_seed(o.seed, 0x67656eULL));
    std::vector<double> xv(static_cast<size_t>(o.d));
    if (o.x_mode == "gauss") {
        for (auto& e : xv) e = rng.gaussian();
    } else if (o.x_mode == "discrete") {
        for (auto& e : xv) {
            e = static_cast<double>(std::min(3, static_cast<int>(rng.uniform() * 4.0)));
        }
    } else {
        throw std::runtime_error("generate: x-mode must be gauss or discrete");
    }

    std::vector<double> pv(static_cast<size_t>(o.d));
    if (o.p_mode == "uniform") {
        for (auto& e : pv) e = 1.0 / o.d;
    } else if (o.p_mode == "dirichlet") {
        double sum = 0.0;
        for (auto& e : pv) {
            e = rng.exponential();
            sum += e;
        }
        for (auto& e : pv) e /= sum;
    } else {
        throw std::runtime_error("generate: p-mode must be dirichlet or uniform");
    }

    const msr::Signal x{xv};
    const msr::ShiftPmf p{pv};
    const msr::ObservationSet obs =
        msr::generate_observations(x, p, o.m, o.sigma, o.count, o.seed);

    fs::create_directories(o.out_dir);
    const std::string obs_path = (fs::path(o.out_dir) / o.obs_name).string();
    const std::string truth_path = (fs::path(o.out_dir) / o.truth_name).string();
    msr::save_msr1(obs, obs_path);
    msr::write_json_file(msr::to_json(msr::GroundTruth{x, p}), truth_path);

    std::cout << "wrote " << obs_path << " (d=" << o.d << " m=" << o.m
              << " K=" << o.count << " sigma=" << o.sigma << ")\n"
              << "wrote " << truth_path << "\n";
    return 0;
}

struct EstimateOpts {
    std::string in_path;
    std::string out_path = "features.json";
    bool uniform = false;
    std::optional<double> sigma_override;
};

int run_estimate(const EstimateOpts& o) {
    msr::ObservationSet obs = msr::load_msr1(o.in_path);
    if (o.sigma_override) obs.sigma = *o.sigma_override;

    const msr::InvariantFeatures feats = msr::empirical_moments(obs);
    json out;
    if (o.uniform) {
        if (obs.m != obs.d) {
            throw std::runtime_error(
                "estimate: --uniform needs full windows (m == d) to average over the "
                "diagonal shift");
        }
        out = msr::to_json(msr::reduce_to_uniform(feats));
    } else {
        out = msr::to_json(feats);
    }
    msr::write_json_file(out, o.out_path);
    std::cout << "wrote " << o.out_path << " (kind="
              << (o.uniform ? "uniform" : "non-uniform") << ", from K=" << obs.count
              << " segments)\n";
    return 0;
}

struct SolveOpts {
    std::string features_path;
    std::string mode = "nonuniform";
    std::uint64_t seed = 1;
    int trials = 1;
    std::string out_path = "solve.json";
    std::string truth_path;
    std::string init_path;
    std::string trace_csv;
    int max_iters = 5000;
    double grad_tol = 1e-8;
    int memory = 10;
    std::vector<double> weights{1.0, 1.0, 1.0};
    double th = 1e-3;
    int window = -1;
};

int run_solve(const SolveOpts& o) {
    const msr::AnyFeatures any = msr::features_from_json(msr::read_json_file(o.features_path));

    msr::SolverConfig cfg;
    cfg.max_iters = o.max_iters;
    cfg.grad_tol = o.grad_tol;
    cfg.memory = o.memory;
    cfg.seed = o.seed;
    if (o.weights.size() != 3) throw std::runtime_error("solve: --weights needs t,c,mu");
    cfg.weights = {o.weights[0], o.weights[1], o.weights[2]};

    std::optional<msr::GroundTruth> truth;
    if (!o.truth_path.empty()) {
        truth = msr::truth_from_json(msr::read_json_file(o.truth_path));
    }

    const bool uniform_mode = o.mode == "uniform";
    if (!uniform_mode && o.mode != "nonuniform") {
        throw std::runtime_error("solve: --mode must be nonuniform or uniform");
    }
    cfg.mode = uniform_mode ? msr::SolveMode::Uniform : msr::SolveMode::NonUniform;

    if (uniform_mode && !std::holds_alternative<msr::UniformInvariantFeatures>(any)) {
        throw std::runtime_error("solve: --mode uniform requires a uniform features file");
    }
    if (!uniform_mode && !std::holds_alternative<msr::InvariantFeatures>(any)) {
        throw std::runtime_error("solve: --mode nonuniform requires a non-uniform features file");
    }

    const int d = uniform_mode ? std::get<msr::UniformInvariantFeatures>(any).d
                               : [&] {
                                     const auto& f = std::get<msr::InvariantFeatures>(any);
                                     if (truth) return truth->x.size();
                                     // Without truth the signal length is free;
                                     // default to the window length unless an
                                     // init pins it.
                                     return f.m;
                                 }();

    auto solve_one = [&](const msr::ObjectivePoint& init) {
        if (uniform_mode) {
            return msr::solve_msr(std::get<msr::UniformInvariantFeatures>(any),
                                  o.window, cfg, init.x);
        }
        return msr::solve_msr(std::get<msr::InvariantFeatures>(any),
                              std::get<msr::InvariantFeatures>(any).m, cfg, init);
    };

    std::optional<msr::SolveReport> best;
    json trials_meta = json::array();
    int n_aborted = 0;

    if (!o.init_path.empty()) {
        const msr::ObjectivePoint init = [&] {
            const json ij = msr::read_json_file(o.init_path);
            const int dd = ij.contains("x") && ij["x"].is_array()
                               ? static_cast<int>(ij["x"].size())
                               : (ij.contains("x_hat") ? static_cast<int>(ij["x_hat"].size()) : d);
            return msr::point_from_json(ij, dd);
        }();
        best = solve_one(init);
        trials_meta.push_back({{"trial", 0},
                               {"final_objective", best->final_objective},
                               {"iterations", best->iterations},
                               {"converged", best->converged}});
    } else {
        const int solve_d = [&] {
            if (!o.init_path.empty()) return d;
            if (truth) return truth->x.size();
            return d;
        }();
        std::vector<double> finals;
        for (int t = 0; t < o.trials; ++t) {
            const msr::ObjectivePoint init = msr::random_init(
                solve_d, cfg.mode, msr::mix_seed(cfg.seed, static_cast<std::uint64_t>(t)));
            try {
                msr::SolveReport rep = solve_one(init);
                finals.push_back(rep.final_objective);
                trials_meta.push_back({{"trial", t},
                                       {"final_objective", rep.final_objective},
                                       {"iterations", rep.iterations},
                                       {"converged", rep.converged}});
                if (!best || rep.final_objective < best->final_objective) {
                    best = std::move(rep);
                }
            } catch (const msr::SolverAbort& e) {
                ++n_aborted;
                finals.push_back(std::numeric_limits<double>::infinity());
                trials_meta.push_back({{"trial", t}, {"aborted", true}, {"error", e.what()}});
            }
        }
        if (!best) throw std::runtime_error("solve: every trial aborted");
    }

    json out = msr::to_json(*best);
    out["mode"] = o.mode;
    out["trials"] = std::move(trials_meta);
    out["n_aborted"] = n_aborted;

    if (truth) {
        const msr::AlignmentResult al =
            msr::align_and_mse(truth->x, truth->p, best->x_hat, best->p_hat);
        double xnorm = 0.0;
        for (double v : truth->x.values()) xnorm += v * v;
        out["mse_x"] = al.mse_x;
        out["mse_p"] = al.mse_p;
        out["mse_x_rel"] = al.mse_x / xnorm;
        out["best_shift"] = al.best_shift;

        // Recovery stats over the restart set, thresholded per trial.
        if (o.init_path.empty() && o.trials > 1) {
            const msr::TrialBatchReport batch = [&] {
                if (uniform_mode) {
                    return msr::multi_trial(std::get<msr::UniformInvariantFeatures>(any),
                                            o.window, cfg, o.trials, o.th, truth->x,
                                            false, msr::worker_count());
                }
                return msr::multi_trial(std::get<msr::InvariantFeatures>(any),
                                        std::get<msr::InvariantFeatures>(any).m, cfg,
                                        o.trials, o.th, truth->x, truth->p, false,
                                        msr::worker_count());
            }();
            out["p_rec"] = batch.p_rec;
            out["f_bar"] = batch.f_bar;
            out["th"] = batch.th;
        }
    }

    msr::write_json_file(out, o.out_path);
    if (!o.trace_csv.empty()) msr::write_trace_csv(best->trace, o.trace_csv);

    std::cout << "wrote " << o.out_path << " (final_objective=" << best->final_objective
              << ", converged=" << (best->converged ? "yes" : "no") << ")\n";
    return 0;
}

struct EmOpts {
    std::string in_path;
    std::uint64_t seed = 1;
    int restarts = 1;
    std::string out_path = "em.json";
    std::string init_path;
    std::string truth_path;
    std::string trace_csv;
    int max_iters = 500;
    double ll_tol = 1e-6;
    bool hard = false;
};

int run_em(const EmOpts& o) {
    const msr::ObservationSet obs = msr::load_msr1(o.in_path);
    const int d = obs.d;

    msr::EmConfig cfg;
    cfg.max_iters = o.max_iters;
    cfg.ll_tol = o.ll_tol;
    cfg.seed = o.seed;
    cfg.hard_assign = o.hard;

    std::optional<msr::EmReport> best;
    if (!o.init_path.empty()) {
        const msr::ObjectivePoint init =
            msr::point_from_json(msr::read_json_file(o.init_path), d);
        best = msr::em_fit(obs, d, cfg, init);
    } else {
        double best_ll = -std::numeric_limits<double>::infinity();
        for (int r = 0; r < std::max(o.restarts, 1); ++r) {
            const msr::ObjectivePoint init = msr::random_init(
                d, msr::SolveMode::NonUniform, msr::mix_seed(o.seed, static_cast<std::uint64_t>(r)));
            msr::EmReport rep = msr::em_fit(obs, d, cfg, init);
            const double ll = rep.log_likelihood_trace.back();
            if (!best || ll > best_ll) {
                best_ll = ll;
                best = std::move(rep);
            }
        }
    }

    json out = msr::to_json(*best);
    if (!o.truth_path.empty()) {
        const msr::GroundTruth truth = msr::truth_from_json(msr::read_json_file(o.truth_path));
        const msr::AlignmentResult al =
            msr::align_and_mse(truth.x, truth.p, best->x_hat, best->p_hat);
        out["mse_x"] = al.mse_x;
        out["mse_p"] = al.mse_p;
        out["best_shift"] = al.best_shift;
    }
    msr::write_json_file(out, o.out_path);
    if (!o.trace_csv.empty()) msr::write_trace_csv(best->log_likelihood_trace, o.trace_csv);

    std::cout << "wrote " << o.out_path << " (iterations=" << best->iterations
              << ", final_ll=" << best->log_likelihood_trace.back() << ")\n";
    return 0;
}

struct ExperimentCliOpts {
    std::string config_path;
    std::string out_dir = ".";
    // overrides; unset values keep the config/defaults
    std::vector<int> d_list;
    std::vector<int> m_list;
    std::string case_name;
    std::optional<int> trials;
    std::optional<double> th;
    std::optional<std::int64_t> count;
    std::vector<double> sigmas;
    std::optional<std::uint64_t> seed;
    std::optional<int> sweep_d, sweep_m, em_restarts;
    std::vector<double> weights;
};

msr::ExperimentConfig build_config(const ExperimentCliOpts& o) {
    msr::ExperimentConfig cfg;
    if (!o.config_path.empty()) {
        cfg = msr::config_from_json(msr::read_json_file(o.config_path));
    }
    if (!o.d_list.empty()) cfg.d_list = o.d_list;
    if (!o.m_list.empty()) cfg.m_list = o.m_list;
    if (!o.case_name.empty()) cfg.exp_case = msr::case_from_name(o.case_name);
    if (o.trials) cfg.n_trials = *o.trials;
    if (o.th) cfg.th = *o.th;
    if (o.count) cfg.observation_count = *o.count;
    if (!o.sigmas.empty()) cfg.sigmas = o.sigmas;
    if (o.seed) cfg.master_seed = *o.seed;
    if (o.sweep_d) cfg.sweep_d = *o.sweep_d;
    if (o.sweep_m) cfg.sweep_m = *o.sweep_m;
    if (o.em_restarts) cfg.em_restarts = *o.em_restarts;
    if (!o.weights.empty()) {
        if (o.weights.size() != 3) throw std::runtime_error("--weights needs t,c,mu");
        cfg.weights = {o.weights[0], o.weights[1], o.weights[2]};
    }
    return cfg;
}

int run_phase(const ExperimentCliOpts& o) {
    const msr::ExperimentConfig cfg = build_config(o);
    const msr::PhaseGridResult res = msr::run_phase_grid(cfg, msr::worker_count());

    fs::create_directories(o.out_dir);
    const std::string csv = (fs::path(o.out_dir) / "phase_grid.csv").string();
    const std::string summary = (fs::path(o.out_dir) / "phase_summary.json").string();
    msr::write_phase_csv(res, csv);
    msr::write_json_file(msr::phase_summary_json(res, cfg), summary);

    std::cout << "wrote " << csv << " (" << res.cells.size() << " cells)\n"
              << "wrote " << summary << "\n";
    for (const auto& [d, m] : res.min_m_prec1) {
        std::cout << "d=" << d << ": m_tilde="
                  << msr::min_window_length(d, cfg.exp_case == msr::ExperimentCase::Uniform
                                                   ? msr::WindowCase::UniformWithT
                                                   : cfg.exp_case == msr::ExperimentCase::NonUniformNoT
                                                         ? msr::WindowCase::NonUniformNoT
                                                         : msr::WindowCase::NonUniformWithT)
                  << ", smallest m with p_rec=1: " << (m < 0 ? std::string("none")
                                                             : std::to_string(m))
                  << "\n";
    }
    return 0;
}

int run_sweep(const ExperimentCliOpts& o) {
    msr::ExperimentConfig cfg = build_config(o);
    if (cfg.sigmas.empty()) cfg.sigmas = {0.05, 0.1, 0.5, 1.0};
    const msr::NoiseSweepResult res = msr::run_noise_sweep(cfg, msr::worker_count());

    fs::create_directories(o.out_dir);
    const std::string csv = (fs::path(o.out_dir) / "noise_sweep.csv").string();
    const std::string summary = (fs::path(o.out_dir) / "noise_sweep_summary.json").string();
    msr::write_noise_csv(res, csv);
    msr::write_json_file(msr::noise_summary_json(res, cfg), summary);

    std::cout << "wrote " << csv << "\nwrote " << summary << "\n";
    for (const auto& row : res.rows) {
        std::cout << "sigma=" << row.sigma << " " << row.method << ": mse_x=" << row.mse_x
                  << " time=" << row.wall_time_s << "s\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-segment reconstruction from shift-invariant moments"};
    app.require_subcommand(1);

    GenerateOpts gen;
    auto* cgen = app.add_subcommand("generate", "draw a random (x, p) and write noisy segments");
    cgen->add_option("--d", gen.d, "signal length");
    cgen->add_option("--m", gen.m, "window length");
    cgen->add_option("--K", gen.count, "number of segments");
    cgen->add_option("--sigma", gen.sigma, "noise standard deviation");
    cgen->add_option("--seed", gen.seed, "RNG seed");
    cgen->add_option("--p-mode", gen.p_mode, "dirichlet|uniform");
    cgen->add_option("--x-mode", gen.x_mode, "gauss|discrete");
    cgen->add_option("--out", gen.out_dir, "output directory");
    cgen->add_option("--obs-name", gen.obs_name, "observation file name");
    cgen->add_option("--truth-name", gen.truth_name, "truth file name");

    EstimateOpts est;
    auto* cest = app.add_subcommand("estimate", "debiased invariant features from MSR1 data");
    cest->add_option("--in", est.in_path, "MSR1 observation file")->required();
    cest->add_option("--out", est.out_path, "features JSON path");
    cest->add_flag("--uniform", est.uniform, "emit uniform-reduced features (needs m == d)");
    double est_sigma = -1.0;
    auto* est_sigma_opt = cest->add_option("--sigma", est_sigma, "override the header sigma");

    SolveOpts sol;
    auto* csol = app.add_subcommand("solve", "fit x (and p) to a features file");
    csol->add_option("--features", sol.features_path, "features JSON")->required();
    csol->add_option("--mode", sol.mode, "nonuniform|uniform");
    csol->add_option("--seed", sol.seed, "restart seed");
    csol->add_option("--trials", sol.trials, "random restarts");
    csol->add_option("--out", sol.out_path, "report JSON path");
    csol->add_option("--truth", sol.truth_path, "truth JSON for scoring");
    csol->add_option("--init", sol.init_path, "start from this point (x/p or x_hat/p_hat)");
    csol->add_option("--trace-csv", sol.trace_csv, "objective trace CSV");
    csol->add_option("--max-iters", sol.max_iters, "iteration cap");
    csol->add_option("--grad-tol", sol.grad_tol, "projected-gradient tolerance");
    csol->add_option("--memory", sol.memory, "quasi-Newton history");
    csol->add_option("--weights", sol.weights, "lambda_t,lambda_c,lambda_mu")->delimiter(',');
    csol->add_option("--th", sol.th, "recovery threshold for p_rec");
    csol->add_option("--window", sol.window, "uniform-mode feature window (default full)");

    EmOpts em;
    auto* cem = app.add_subcommand("em", "expectation-maximization baseline on MSR1 data");
    cem->add_option("--in", em.in_path, "MSR1 observation file")->required();
    cem->add_option("--seed", em.seed, "init seed");
    cem->add_option("--restarts", em.restarts, "random restarts, best log-likelihood wins");
    cem->add_option("--out", em.out_path, "report JSON path");
    cem->add_option("--init", em.init_path, "start from this point (x/p or x_hat/p_hat)");
    cem->add_option("--truth", em.truth_path, "truth JSON for scoring");
    cem->add_option("--trace-csv", em.trace_csv, "log-likelihood trace CSV");
    cem->add_option("--max-iters", em.max_iters, "EM iteration cap");
    cem->add_option("--ll-tol", em.ll_tol, "stop when the increase drops below this");
    cem->add_flag("--hard", em.hard, "classification-EM fallback (required for sigma = 0)");

    ExperimentCliOpts phase;
    auto* cphase = app.add_subcommand("phase", "phase-transition grid over (d, m) at sigma = 0");
    cphase->add_option("--config", phase.config_path, "experiment config JSON");
    cphase->add_option("--out", phase.out_dir, "output directory");
    cphase->add_option("--d-list", phase.d_list, "signal lengths")->delimiter(',');
    cphase->add_option("--m-list", phase.m_list, "window lengths (default 2..d)")->delimiter(',');
    cphase->add_option("--case", phase.case_name,
                       "uniform|nonuniform_no_t|nonuniform|discrete");
    int phase_trials = 0;
    auto* phase_trials_opt = cphase->add_option("--trials", phase_trials, "restarts per cell");
    double phase_th = 0.0;
    auto* phase_th_opt = cphase->add_option("--th", phase_th, "recovery threshold");
    std::uint64_t phase_seed = 0;
    auto* phase_seed_opt = cphase->add_option("--seed", phase_seed, "master seed");
    cphase->add_option("--weights", phase.weights, "lambda_t,lambda_c,lambda_mu")->delimiter(',');

    ExperimentCliOpts sweep;
    auto* csweep = app.add_subcommand("noise-sweep", "moments vs EM across noise levels");
    csweep->add_option("--config", sweep.config_path, "experiment config JSON");
    csweep->add_option("--out", sweep.out_dir, "output directory");
    csweep->add_option("--sigmas", sweep.sigmas, "noise levels")->delimiter(',');
    std::uint64_t sweep_seed = 0;
    auto* sweep_seed_opt = csweep->add_option("--seed", sweep_seed, "master seed");
    int sweep_d = 0, sweep_m = 0, sweep_trials = 0, sweep_restarts = 0;
    std::int64_t sweep_count = 0;
    auto* sweep_d_opt = csweep->add_option("--d", sweep_d, "signal length");
    auto* sweep_m_opt = csweep->add_option("--m", sweep_m, "window length");
    auto* sweep_count_opt = csweep->add_option("--K", sweep_count, "segments per sigma");
    auto* sweep_trials_opt = csweep->add_option("--trials", sweep_trials, "solver restarts");
    auto* sweep_restarts_opt = csweep->add_option("--em-restarts", sweep_restarts, "EM restarts");
    csweep->add_option("--case", sweep.case_name,
                       "uniform|nonuniform_no_t|nonuniform|discrete");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*cgen) return run_generate(gen);
        if (*cest) {
            if (*est_sigma_opt) est.sigma_override = est_sigma;
            return run_estimate(est);
        }
        if (*csol) return run_solve(sol);
        if (*cem) return run_em(em);
        if (*cphase) {
            if (*phase_trials_opt) phase.trials = phase_trials;
            if (*phase_th_opt) phase.th = phase_th;
            if (*phase_seed_opt) phase.seed = phase_seed;
            return run_phase(phase);
        }
        if (*csweep) {
            if (*sweep_seed_opt) sweep.seed = sweep_seed;
            if (*sweep_d_opt) sweep.sweep_d = sweep_d;
            if (*sweep_m_opt) sweep.sweep_m = sweep_m;
            if (*sweep_count_opt) sweep.count = sweep_count;
            if (*sweep_trials_opt) sweep.trials = sweep_trials;
            if (*sweep_restarts_opt) sweep.em_restarts = sweep_restarts;
            return run_sweep(sweep);
        }
    } catch (const std::exception& e) {
        std::cerr << "msr: error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
