#include "msr/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "msr/alignment.hpp"
#include "msr/parallel.hpp"
#include "msr/rng.hpp"
#include "msr/serialize.hpp"

namespace msr {

namespace {

using nlohmann::json;

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    if (n == 0) return kNan;
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double dot_self(const std::vector<double>& v) {
    double acc = 0.0;
    for (double e : v) acc += e * e;
    return acc;
}

std::string fmt_g(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

int case_id(ExperimentCase c) { return static_cast<int>(c); }

WindowCase window_case_for(ExperimentCase c) {
    switch (c) {
        case ExperimentCase::Uniform:
            return WindowCase::UniformWithT;
        case ExperimentCase::NonUniformNoT:
            return WindowCase::NonUniformNoT;
        default:
            return WindowCase::NonUniformWithT;
    }
}

Weights effective_weights(const ExperimentConfig& cfg) {
    Weights w = cfg.weights;
    if (cfg.exp_case == ExperimentCase::NonUniformNoT) w.lambda_t = 0.0;
    validate(w);
    return w;
}

// Cell key feeding the per-cell seed; documented layout so runs are
// reproducible across configurations that share master_seed.
std::uint64_t cell_seed(std::uint64_t master, int d, int m, ExperimentCase c) {
    const std::uint64_t key = (static_cast<std::uint64_t>(d) << 32) |
                              (static_cast<std::uint64_t>(m) << 8) |
                              static_cast<std::uint64_t>(case_id(c));
    return mix_seed(master, key);
}

struct Truth {
    std::vector<double> x;
    std::vector<double> p;
};

Truth draw_truth(int d, ExperimentCase c, std::uint64_t seed) {
    Rng rng(seed);
    Truth t;
    t.x.resize(static_cast<size_t>(d));
    if (c == ExperimentCase::Discrete) {
        for (auto& e : t.x) {
            e = static_cast<double>(std::min(3, static_cast<int>(rng.uniform() * 4.0)));
        }
    } else {
        for (auto& e : t.x) e = rng.gaussian();
    }
    if (c == ExperimentCase::Uniform) {
        t.p.assign(static_cast<size_t>(d), 1.0 / d);
    } else {
        t.p.resize(static_cast<size_t>(d));
        double sum = 0.0;
        for (auto& e : t.p) {
            e = rng.exponential();
            sum += e;
        }
        for (auto& e : t.p) e /= sum;
    }
    return t;
}

double rounded_mse(const std::vector<double>& x_true, const TrialOutcome& o, int d) {
    if (!o.x_hat) return kNan;
    double acc = 0.0;
    for (int n = 0; n < d; ++n) {
        double v = (*o.x_hat)[static_cast<size_t>((n + o.best_shift) % d)];
        v = std::clamp(std::round(v), 0.0, 3.0);
        const double diff = x_true[static_cast<size_t>(n)] - v;
        acc += diff * diff;
    }
    return acc;
}

std::vector<int> cell_m_list(const ExperimentConfig& cfg, int d) {
    std::vector<int> ms;
    if (cfg.m_list.empty()) {
        for (int m = 2; m <= d; ++m) ms.push_back(m);
    } else {
        for (int m : cfg.m_list) {
            if (m >= 1 && m <= d) ms.push_back(m);
        }
        std::sort(ms.begin(), ms.end());
        ms.erase(std::unique(ms.begin(), ms.end()), ms.end());
    }
    return ms;
}

}  // namespace

ExperimentCase case_from_name(const std::string& name) {
    if (name == "uniform") return ExperimentCase::Uniform;
    if (name == "nonuniform_no_t") return ExperimentCase::NonUniformNoT;
    if (name == "nonuniform") return ExperimentCase::NonUniform;
    if (name == "discrete") return ExperimentCase::Discrete;
    throw std::invalid_argument(
        "unknown case '" + name +
        "' (expected uniform, nonuniform_no_t, nonuniform or discrete)");
}

std::string case_name(ExperimentCase c) {
    switch (c) {
        case ExperimentCase::Uniform:
            return "uniform";
        case ExperimentCase::NonUniformNoT:
            return "nonuniform_no_t";
        case ExperimentCase::NonUniform:
            return "nonuniform";
        case ExperimentCase::Discrete:
            return "discrete";
    }
    return "?";
}

ExperimentConfig config_from_json(const json& j) {
    static const char* known[] = {
        "schema",        "d_list",       "m_list",          "case",
        "n_trials",      "th",           "K",               "sigma",
        "sigmas",        "weights",      "master_seed",     "sweep_d",
        "sweep_m",       "em_restarts",  "em_max_iters",    "em_ll_tol",
        "solver_max_iters", "solver_grad_tol", "solver_memory"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : known) {
            if (it.key() == k) {
                ok = true;
                break;
            }
        }
        if (!ok) throw std::runtime_error("config: unknown key '" + it.key() + "'");
    }
    if (j.contains("schema") && j["schema"].get<int>() != 1) {
        throw std::runtime_error("config: unsupported schema");
    }

    ExperimentConfig c;
    if (j.contains("d_list")) c.d_list = j["d_list"].get<std::vector<int>>();
    if (j.contains("m_list")) c.m_list = j["m_list"].get<std::vector<int>>();
    if (j.contains("case")) c.exp_case = case_from_name(j["case"].get<std::string>());
    if (j.contains("n_trials")) c.n_trials = j["n_trials"].get<int>();
    if (j.contains("th")) c.th = j["th"].get<double>();
    if (j.contains("K")) c.observation_count = j["K"].get<std::int64_t>();
    if (j.contains("sigma")) c.sigma = j["sigma"].get<double>();
    if (j.contains("sigmas")) c.sigmas = j["sigmas"].get<std::vector<double>>();
    if (j.contains("weights")) {
        const auto& w = j["weights"];
        if (w.is_array() && w.size() == 3) {
            c.weights = {w[0].get<double>(), w[1].get<double>(), w[2].get<double>()};
        } else if (w.is_object()) {
            c.weights.lambda_t = w.value("lambda_t", 1.0);
            c.weights.lambda_c = w.value("lambda_c", 1.0);
            c.weights.lambda_mu = w.value("lambda_mu", 1.0);
        } else {
            throw std::runtime_error("config: weights must be [t,c,mu] or an object");
        }
    }
    if (j.contains("master_seed")) c.master_seed = j["master_seed"].get<std::uint64_t>();
    if (j.contains("sweep_d")) c.sweep_d = j["sweep_d"].get<int>();
    if (j.contains("sweep_m")) c.sweep_m = j["sweep_m"].get<int>();
    if (j.contains("em_restarts")) c.em_restarts = j["em_restarts"].get<int>();
    if (j.contains("em_max_iters")) c.em_max_iters = j["em_max_iters"].get<int>();
    if (j.contains("em_ll_tol")) c.em_ll_tol = j["em_ll_tol"].get<double>();
    if (j.contains("solver_max_iters")) c.solver_max_iters = j["solver_max_iters"].get<int>();
    if (j.contains("solver_grad_tol")) c.solver_grad_tol = j["solver_grad_tol"].get<double>();
    if (j.contains("solver_memory")) c.solver_memory = j["solver_memory"].get<int>();

    if (!(c.th > 0.0)) throw std::runtime_error("config: th must be > 0");
    if (c.n_trials < 1) throw std::runtime_error("config: n_trials must be >= 1");
    if (c.observation_count < 1) throw std::runtime_error("config: K must be >= 1");
    return c;
}

json to_json(const ExperimentConfig& c) {
    json j;
    j["schema"] = 1;
    j["d_list"] = c.d_list;
    j["m_list"] = c.m_list;
    j["case"] = case_name(c.exp_case);
    j["n_trials"] = c.n_trials;
    j["th"] = c.th;
    j["K"] = c.observation_count;
    j["sigma"] = c.sigma;
    j["sigmas"] = c.sigmas;
    j["weights"] = {c.weights.lambda_t, c.weights.lambda_c, c.weights.lambda_mu};
    j["master_seed"] = c.master_seed;
    j["sweep_d"] = c.sweep_d;
    j["sweep_m"] = c.sweep_m;
    j["em_restarts"] = c.em_restarts;
    j["em_max_iters"] = c.em_max_iters;
    j["em_ll_tol"] = c.em_ll_tol;
    j["solver_max_iters"] = c.solver_max_iters;
    j["solver_grad_tol"] = c.solver_grad_tol;
    j["solver_memory"] = c.solver_memory;
    return j;
}

PhaseGridResult run_phase_grid(const ExperimentConfig& cfg, int threads) {
    if (cfg.sigma != 0.0) {
        throw std::invalid_argument("run_phase_grid: the landscape study uses sigma = 0");
    }
    const Weights weights = effective_weights(cfg);

    struct Job {
        int d, m;
    };
    std::vector<Job> jobs;
    for (int d : cfg.d_list) {
        if (d < 2) throw std::invalid_argument("run_phase_grid: d must be >= 2");
        for (int m : cell_m_list(cfg, d)) jobs.push_back({d, m});
    }
    std::sort(jobs.begin(), jobs.end(), [](const Job& a, const Job& b) {
        return a.d != b.d ? a.d < b.d : a.m < b.m;
    });

    PhaseGridResult res;
    res.cells.resize(jobs.size());

    parallel_for(static_cast<std::int64_t>(jobs.size()),
                 threads <= 0 ? worker_count() : threads, [&](std::int64_t idx) {
        const Job job = jobs[static_cast<size_t>(idx)];
        const std::uint64_t seed = cell_seed(cfg.master_seed, job.d, job.m, cfg.exp_case);
        const Truth truth = draw_truth(job.d, cfg.exp_case, seed);
        const Signal x_true{truth.x};
        const ShiftPmf p_true{truth.p};

        SolverConfig scfg;
        scfg.max_iters = cfg.solver_max_iters;
        scfg.grad_tol = cfg.solver_grad_tol;
        scfg.memory = cfg.solver_memory;
        scfg.weights = weights;
        scfg.seed = mix_seed(seed, 0x747269616cULL);

        const bool keep = cfg.exp_case == ExperimentCase::Discrete;
        TrialBatchReport batch = [&] {
            if (cfg.exp_case == ExperimentCase::Uniform) {
                scfg.mode = SolveMode::Uniform;
                const UniformInvariantFeatures target = population_moments_uniform(x_true);
                return multi_trial(target, job.m, scfg, cfg.n_trials, cfg.th, x_true,
                                   keep, 1);
            }
            scfg.mode = SolveMode::NonUniform;
            const InvariantFeatures target = population_moments(x_true, p_true, job.m);
            return multi_trial(target, job.m, scfg, cfg.n_trials, cfg.th, x_true, p_true,
                               keep, 1);
        }();

        GridCell& cell = res.cells[static_cast<size_t>(idx)];
        cell.d = job.d;
        cell.m = job.m;
        cell.exp_case = cfg.exp_case;
        cell.p_rec = batch.p_rec;
        cell.f_bar = batch.f_bar;
        cell.m_tilde = min_window_length(job.d, window_case_for(cfg.exp_case));
        cell.m_tilde_ok = job.m >= cell.m_tilde;
        if (keep) {
            std::vector<double> vals;
            vals.reserve(batch.per_trial.size());
            for (const auto& o : batch.per_trial) {
                if (o.x_hat) vals.push_back(rounded_mse(truth.x, o, job.d));
            }
            cell.rounded_mse_med = median_of(std::move(vals));
        } else {
            cell.rounded_mse_med = kNan;
        }
        cell.trials = std::move(batch);
    });

    for (const auto& cell : res.cells) {
        auto [it, inserted] = res.min_m_prec1.try_emplace(cell.d, -1);
        if (cell.p_rec == 1.0 && (it->second == -1 || cell.m < it->second)) {
            it->second = cell.m;
        }
    }
    return res;
}

void write_phase_csv(const PhaseGridResult& res, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
    f << "d,m,case,p_rec,f_bar,m_tilde,min_m_prec1,rounded_mse_med\n";
    for (const auto& cell : res.cells) {
        f << cell.d << ',' << cell.m << ',' << case_name(cell.exp_case) << ','
          << fmt_g(cell.p_rec) << ',' << fmt_g(cell.f_bar) << ',' << cell.m_tilde << ','
          << res.min_m_prec1.at(cell.d) << ',' << fmt_g(cell.rounded_mse_med) << "\n";
    }
    if (!f) throw std::runtime_error("write failed on '" + path + "'");
}

json phase_summary_json(const PhaseGridResult& res, const ExperimentConfig& cfg) {
    json cells = json::array();
    for (const auto& cell : res.cells) {
        json c;
        c["d"] = cell.d;
        c["m"] = cell.m;
        c["p_rec"] = cell.p_rec;
        c["f_bar"] = cell.f_bar;
        c["m_tilde"] = cell.m_tilde;
        c["m_tilde_ok"] = cell.m_tilde_ok;
        c["n_aborted"] = cell.trials.n_aborted;
        if (cell.exp_case == ExperimentCase::Discrete) {
            c["rounded_mse_med"] = cell.rounded_mse_med;
        }
        cells.push_back(std::move(c));
    }
    json per_d;
    for (const auto& [d, m] : res.min_m_prec1) per_d[std::to_string(d)] = m;

    json j;
    j["schema"] = 1;
    j["case"] = case_name(cfg.exp_case);
    j["config"] = to_json(cfg);
    j["cells"] = std::move(cells);
    j["min_m_prec1"] = std::move(per_d);
    return j;
}

double time_empirical_moments(const ObservationSet& obs, int reps) {
    (void)empirical_moments(obs);  // warm-up
    std::vector<double> times;
    times.reserve(static_cast<size_t>(reps));
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        volatile double sink = empirical_moments(obs).mu[0];
        (void)sink;
        const auto t1 = std::chrono::steady_clock::now();
        times.push_back(std::chrono::duration<double>(t1 - t0).count());
    }
    return median_of(std::move(times));
}

NoiseSweepResult run_noise_sweep(const ExperimentConfig& cfg, int threads) {
    if (cfg.sigmas.empty()) {
        throw std::invalid_argument("run_noise_sweep: sigma list is empty");
    }
    for (double s : cfg.sigmas) {
        if (!(s > 0.0)) {
            throw std::invalid_argument("run_noise_sweep: all sigmas must be > 0 (EM needs noise)");
        }
    }
    const int d = cfg.sweep_d;
    const int m = cfg.sweep_m;
    if (m < 1 || m > d) throw std::invalid_argument("run_noise_sweep: need 1 <= m <= d");
    const Weights weights = effective_weights(cfg);

    const Truth truth = draw_truth(d, cfg.exp_case, mix_seed(cfg.master_seed, 0x7472757468ULL));
    const Signal x_true{truth.x};
    const ShiftPmf p_true{truth.p};

    NoiseSweepResult res;
    res.truth_x = truth.x;
    res.truth_p = truth.p;
    res.details = json::array();

    const int workers = threads <= 0 ? worker_count() : threads;

    for (size_t i = 0; i < cfg.sigmas.size(); ++i) {
        const double sigma = cfg.sigmas[i];
        const ObservationSet obs =
            generate_observations(x_true, p_true, m, sigma, cfg.observation_count,
                                  mix_seed(cfg.master_seed, 0x0b50000ULL + i));

        // Moments pipeline. First pass doubles as the warm-up.
        const InvariantFeatures feats = empirical_moments(obs);
        const auto te0 = std::chrono::steady_clock::now();
        volatile double sink = empirical_moments(obs).mu[0];
        (void)sink;
        const auto te1 = std::chrono::steady_clock::now();
        const double est_time = std::chrono::duration<double>(te1 - te0).count();

        SolverConfig scfg;
        scfg.max_iters = cfg.solver_max_iters;
        scfg.grad_tol = cfg.solver_grad_tol;
        scfg.memory = cfg.solver_memory;
        scfg.weights = weights;
        scfg.mode = SolveMode::NonUniform;
        scfg.seed = mix_seed(cfg.master_seed, 0x501e0000ULL + i);

        const auto ts0 = std::chrono::steady_clock::now();
        const TrialBatchReport batch =
            multi_trial(feats, m, scfg, cfg.n_trials, cfg.th, x_true, p_true, false, workers);
        const auto ts1 = std::chrono::steady_clock::now();
        const double solve_time = std::chrono::duration<double>(ts1 - ts0).count();

        // The reported estimate is the trial with the smallest final
        // objective; ground truth enters only through the scoring.
        size_t best = 0;
        for (size_t t = 1; t < batch.per_trial.size(); ++t) {
            if (batch.per_trial[t].final_objective <
                batch.per_trial[best].final_objective) {
                best = t;
            }
        }
        const TrialOutcome& mo = batch.per_trial[best];

        res.rows.push_back({sigma, "moments", mo.mse_x, mo.mse_p, est_time + solve_time});
        res.estimate_time_s.push_back(est_time);

        // EM on identical data; best restart by final log-likelihood.
        EmConfig ecfg;
        ecfg.max_iters = cfg.em_max_iters;
        ecfg.ll_tol = cfg.em_ll_tol;

        {
            // Warm-up on a short prefix.
            ObservationSet prefix;
            prefix.d = d;
            prefix.m = m;
            prefix.count = std::min<std::int64_t>(obs.count, 256);
            prefix.sigma = sigma;
            prefix.segments.assign(obs.segments.begin(),
                                   obs.segments.begin() + prefix.count * m);
            const ObjectivePoint w0 =
                random_init(d, SolveMode::NonUniform, mix_seed(cfg.master_seed, 0xE0ULL));
            (void)e_step(w0.x, w0.p, prefix);
        }

        double best_ll = -std::numeric_limits<double>::infinity();
        std::optional<EmReport> best_em;
        const auto tm0 = std::chrono::steady_clock::now();
        for (int r = 0; r < cfg.em_restarts; ++r) {
            const ObjectivePoint init = random_init(
                d, SolveMode::NonUniform,
                mix_seed(cfg.master_seed, 0xE3000000ULL + i * 1024 + static_cast<size_t>(r)));
            EmReport rep = em_fit(obs, d, ecfg, init);
            const double ll = rep.log_likelihood_trace.back();
            if (ll > best_ll) {
                best_ll = ll;
                best_em = std::move(rep);
            }
        }
        const auto tm1 = std::chrono::steady_clock::now();
        const double em_time = std::chrono::duration<double>(tm1 - tm0).count();

        const AlignmentResult em_al =
            align_and_mse(x_true, p_true, best_em->x_hat, best_em->p_hat);
        res.rows.push_back({sigma, "em", em_al.mse_x, em_al.mse_p, em_time});

        json detail;
        detail["sigma"] = sigma;
        detail["estimate_time_s"] = est_time;
        detail["moments"] = {{"mse_x", mo.mse_x},
                             {"mse_p", mo.mse_p},
                             {"mse_x_rel", mo.mse_x / dot_self(truth.x)},
                             {"best_objective", mo.final_objective},
                             {"p_rec", batch.p_rec},
                             {"f_bar", batch.f_bar},
                             {"solve_time_s", solve_time}};
        detail["em"] = {{"mse_x", em_al.mse_x},
                        {"mse_p", em_al.mse_p},
                        {"mse_x_rel", em_al.mse_x / dot_self(truth.x)},
                        {"log_likelihood", best_ll},
                        {"iterations", best_em->iterations},
                        {"restarts", cfg.em_restarts},
                        {"time_s", em_time}};
        res.details.push_back(std::move(detail));
    }
    return res;
}

void write_noise_csv(const NoiseSweepResult& res, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
    f << "sigma,method,mse_x,mse_p,wall_time_s\n";
    for (const auto& row : res.rows) {
        f << fmt_g(row.sigma) << ',' << row.method << ',' << fmt_g(row.mse_x) << ','
          << fmt_g(row.mse_p) << ',' << fmt_g(row.wall_time_s) << "\n";
    }
    if (!f) throw std::runtime_error("write failed on '" + path + "'");
}

json noise_summary_json(const NoiseSweepResult& res, const ExperimentConfig& cfg) {
    json j;
    j["schema"] = 1;
    j["config"] = to_json(cfg);
    j["truth"] = {{"x", res.truth_x}, {"p", res.truth_p}};
    j["per_sigma"] = res.details;
    return j;
}

}  // namespace msr
