#include "msr/solver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

#include "msr/parallel.hpp"
#include "msr/rng.hpp"

namespace msr {

std::vector<double> project_simplex_raw(const std::vector<double>& v) {
    const size_t d = v.size();
    if (d == 0) throw std::invalid_argument("project_simplex: empty vector");
    for (double e : v) {
        if (!std::isfinite(e)) {
            throw std::invalid_argument("project_simplex: entries must be finite");
        }
    }
    std::vector<double> u(v);
    std::sort(u.begin(), u.end(), std::greater<double>());
    double css = 0.0;
    double tau = 0.0;
    for (size_t i = 0; i < d; ++i) {
        css += u[i];
        const double cand = (css - 1.0) / static_cast<double>(i + 1);
        if (u[i] - cand > 0.0) {
            tau = cand;
        } else {
            break;
        }
    }
    std::vector<double> out(d);
    for (size_t i = 0; i < d; ++i) out[i] = std::max(v[i] - tau, 0.0);
    return out;
}

ShiftPmf project_simplex(const std::vector<double>& v) {
    return ShiftPmf(project_simplex_raw(v));
}

ObjectivePoint random_init(int d, SolveMode mode, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> x(static_cast<size_t>(d));
    for (auto& e : x) e = rng.gaussian();
    if (mode == SolveMode::Uniform) {
        return {Signal(std::move(x)), ShiftPmf::uniform(d)};
    }
    std::vector<double> p(static_cast<size_t>(d));
    double sum = 0.0;
    for (auto& e : p) {
        e = rng.exponential();
        sum += e;
    }
    if (sum == 0.0) {
        return {Signal(std::move(x)), ShiftPmf::uniform(d)};
    }
    for (auto& e : p) e /= sum;
    return {Signal(std::move(x)), ShiftPmf(std::move(p))};
}

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

bool all_finite(const std::vector<double>& a) {
    for (double e : a) {
        if (!std::isfinite(e)) return false;
    }
    return true;
}

class LbfgsMemory {
public:
    explicit LbfgsMemory(int cap) : cap_(std::max(cap, 1)) {}

    void push(std::vector<double> s, std::vector<double> y) {
        const double sy = dot(s, y);
        if (sy <= 1e-12) return;  // positive-curvature safeguard
        if (static_cast<int>(s_.size()) == cap_) {
            s_.pop_front();
            y_.pop_front();
            rho_.pop_front();
        }
        s_.push_back(std::move(s));
        y_.push_back(std::move(y));
        rho_.push_back(1.0 / sy);
    }

    void clear() {
        s_.clear();
        y_.clear();
        rho_.clear();
    }

    bool empty() const { return s_.empty(); }

    // Two-loop recursion; returns -H g.
    std::vector<double> direction(const std::vector<double>& g) const {
        std::vector<double> q = g;
        if (s_.empty()) {
            for (auto& e : q) e = -e;
            return q;
        }
        const int k = static_cast<int>(s_.size());
        std::vector<double> alpha(static_cast<size_t>(k));
        for (int i = k - 1; i >= 0; --i) {
            const double a = rho_[static_cast<size_t>(i)] * dot(s_[static_cast<size_t>(i)], q);
            alpha[static_cast<size_t>(i)] = a;
            const auto& yi = y_[static_cast<size_t>(i)];
            for (size_t j = 0; j < q.size(); ++j) q[j] -= a * yi[j];
        }
        const double yy = dot(y_.back(), y_.back());
        const double gamma = yy > 0.0 ? (1.0 / rho_.back()) / yy : 1.0;
        for (auto& e : q) e *= gamma;
        for (int i = 0; i < k; ++i) {
            const double beta = rho_[static_cast<size_t>(i)] * dot(y_[static_cast<size_t>(i)], q);
            const double coef = alpha[static_cast<size_t>(i)] - beta;
            const auto& si = s_[static_cast<size_t>(i)];
            for (size_t j = 0; j < q.size(); ++j) q[j] += coef * si[j];
        }
        for (auto& e : q) e = -e;
        return q;
    }

private:
    int cap_;
    std::deque<std::vector<double>> s_, y_;
    std::deque<double> rho_;
};

struct CoreResult {
    std::vector<double> z;
    double objective = 0.0;
    int iterations = 0;
    bool converged = false;
    double pg_norm = 0.0;
    std::vector<double> trace;
};

constexpr double kArmijoSlope = 1e-4;
constexpr double kBacktrack = 0.5;
constexpr int kMaxBacktracks = 60;

// Shared descent loop. `project` maps a raw point to the feasible set
// (identity in uniform mode); `eval_f`/`eval_g` evaluate the objective.
CoreResult minimize(std::vector<double> z0, const SolverConfig& config,
                    const std::function<std::vector<double>(const std::vector<double>&)>& project,
                    const std::function<double(const std::vector<double>&)>& eval_f,
                    const std::function<std::vector<double>(const std::vector<double>&)>& eval_g,
                    const std::function<void(int, double, const std::vector<double>&)>& on_step) {
    if (config.max_iters < 1) throw std::invalid_argument("SolverConfig: max_iters >= 1");
    if (!(config.grad_tol > 0.0)) throw std::invalid_argument("SolverConfig: grad_tol > 0");
    validate(config.weights);

    CoreResult res;
    res.z = project(std::move(z0));
    double fz = eval_f(res.z);
    if (!std::isfinite(fz)) throw SolverAbort("objective non-finite at initial point", 0);
    std::vector<double> g = eval_g(res.z);
    if (!all_finite(g)) throw SolverAbort("gradient non-finite at initial point", 0);
    res.trace.push_back(fz);

    auto pg_norm = [&](const std::vector<double>& z, const std::vector<double>& grad) {
        std::vector<double> step(z.size());
        for (size_t i = 0; i < z.size(); ++i) step[i] = z[i] - grad[i];
        step = project(step);
        for (size_t i = 0; i < z.size(); ++i) step[i] = z[i] - step[i];
        return norm2(step);
    };

    res.pg_norm = pg_norm(res.z, g);
    if (res.pg_norm <= config.grad_tol) {
        res.converged = true;
        res.objective = fz;
        return res;
    }

    LbfgsMemory mem(config.memory);
    std::vector<double> z_new, delta(res.z.size());

    // Returns true and fills (z_new, f_new) on sufficient decrease.
    double f_new = 0.0;
    auto line_search = [&](const std::vector<double>& dir) {
        if (dot(g, dir) >= 0.0) return false;
        double t = 1.0;
        for (int bt = 0; bt < kMaxBacktracks; ++bt, t *= kBacktrack) {
            std::vector<double> trial(res.z.size());
            for (size_t i = 0; i < trial.size(); ++i) trial[i] = res.z[i] + t * dir[i];
            trial = project(std::move(trial));
            double dg = 0.0;
            bool moved = false;
            for (size_t i = 0; i < trial.size(); ++i) {
                const double di = trial[i] - res.z[i];
                delta[i] = di;
                dg += g[i] * di;
                if (di != 0.0) moved = true;
            }
            if (!moved || dg >= 0.0) continue;
            const double f_try = eval_f(trial);
            if (std::isfinite(f_try) && f_try <= fz + kArmijoSlope * dg) {
                z_new = std::move(trial);
                f_new = f_try;
                return true;
            }
        }
        return false;
    };

    for (int iter = 1; iter <= config.max_iters; ++iter) {
        std::vector<double> dir = mem.direction(g);
        bool ok = line_search(dir);
        if (!ok && !mem.empty()) {
            mem.clear();
            std::vector<double> steepest(g.size());
            for (size_t i = 0; i < g.size(); ++i) steepest[i] = -g[i];
            ok = line_search(steepest);
        }
        if (!ok) break;  // stalled; pg_norm below decides convergence

        std::vector<double> g_new = eval_g(z_new);
        if (!std::isfinite(f_new)) throw SolverAbort("objective non-finite", iter);
        if (!all_finite(g_new)) throw SolverAbort("gradient non-finite", iter);

        std::vector<double> y_pair(g.size());
        for (size_t i = 0; i < g.size(); ++i) y_pair[i] = g_new[i] - g[i];
        mem.push(delta, std::move(y_pair));

        res.z = std::move(z_new);
        fz = f_new;
        g = std::move(g_new);
        res.iterations = iter;
        res.trace.push_back(fz);
        if (on_step) on_step(iter, fz, res.z);

        res.pg_norm = pg_norm(res.z, g);
        if (res.pg_norm <= config.grad_tol) {
            res.converged = true;
            break;
        }
    }
    res.objective = fz;
    return res;
}

double median(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

TrialBatchReport summarize(std::vector<TrialOutcome> outcomes, double th) {
    TrialBatchReport rep;
    rep.n_trials = static_cast<int>(outcomes.size());
    rep.th = th;
    int hits = 0;
    std::vector<double> finals;
    finals.reserve(outcomes.size());
    for (const auto& o : outcomes) {
        if (o.aborted) ++rep.n_aborted;
        if (o.mse_x <= th) ++hits;
        finals.push_back(o.final_objective);
    }
    rep.p_rec = static_cast<double>(hits) / static_cast<double>(rep.n_trials);
    rep.f_bar = median(std::move(finals));
    rep.per_trial = std::move(outcomes);
    return rep;
}

}  // namespace

SolveReport solve_msr(const InvariantFeatures& target, int m, const SolverConfig& config,
                      const ObjectivePoint& init, const SolveObserver& observer) {
    if (config.mode != SolveMode::NonUniform) {
        throw std::invalid_argument("solve_msr: non-uniform target requires non-uniform mode");
    }
    const int d = init.x.size();
    if (init.p.size() != d) {
        throw std::invalid_argument("solve_msr: init x and p lengths differ");
    }
    std::vector<double> z0(static_cast<size_t>(2 * d));
    for (int i = 0; i < d; ++i) z0[static_cast<size_t>(i)] = init.x[i];
    for (int i = 0; i < d; ++i) z0[static_cast<size_t>(d + i)] = init.p[i];

    auto split = [d](const std::vector<double>& z) {
        return std::pair<std::vector<double>, std::vector<double>>(
            std::vector<double>(z.begin(), z.begin() + d),
            std::vector<double>(z.begin() + d, z.end()));
    };

    auto project = [d](std::vector<double> z) {
        std::vector<double> p(z.begin() + d, z.end());
        p = project_simplex_raw(p);
        std::copy(p.begin(), p.end(), z.begin() + d);
        return z;
    };

    auto eval_f = [&](const std::vector<double>& z) {
        auto [x, p] = split(z);
        return loss_raw(x, p, target, config.weights, m);
    };

    auto eval_g = [&](const std::vector<double>& z) {
        auto [x, p] = split(z);
        std::vector<double> gx, gp;
        grad_raw(x, p, target, config.weights, m, gx, gp);
        std::vector<double> g(z.size());
        std::copy(gx.begin(), gx.end(), g.begin());
        std::copy(gp.begin(), gp.end(), g.begin() + d);
        return g;
    };

    std::function<void(int, double, const std::vector<double>&)> on_step;
    if (observer) {
        on_step = [&](int iter, double f, const std::vector<double>& z) {
            auto [x, p] = split(z);
            observer(iter, f, x, p);
        };
    }

    CoreResult core = minimize(std::move(z0), config,
                               [&](const std::vector<double>& z) { return project(z); },
                               eval_f, eval_g, on_step);

    auto [x, p] = split(core.z);
    SolveReport rep{Signal(std::move(x)), ShiftPmf(std::move(p)),
                    core.objective,       core.iterations,
                    core.converged,       core.pg_norm,
                    std::move(core.trace)};
    return rep;
}

SolveReport solve_msr(const UniformInvariantFeatures& target, int window,
                      const SolverConfig& config, const Signal& init,
                      const SolveObserver& observer) {
    if (config.mode != SolveMode::Uniform) {
        throw std::invalid_argument("solve_msr: uniform target requires uniform mode");
    }
    const int d = init.size();

    auto eval_f = [&](const std::vector<double>& z) {
        return loss_uniform_raw(z, target, config.weights, window);
    };
    auto eval_g = [&](const std::vector<double>& z) {
        std::vector<double> g;
        grad_uniform_raw(z, target, config.weights, window, g);
        return g;
    };

    std::function<void(int, double, const std::vector<double>&)> on_step;
    std::vector<double> uniform_p(static_cast<size_t>(d), 1.0 / d);
    if (observer) {
        on_step = [&](int iter, double f, const std::vector<double>& z) {
            observer(iter, f, z, uniform_p);
        };
    }

    CoreResult core = minimize(init.values(), config,
                               [](std::vector<double> z) { return z; }, eval_f, eval_g,
                               on_step);

    SolveReport rep{Signal(std::move(core.z)), ShiftPmf::uniform(d),
                    core.objective,            core.iterations,
                    core.converged,            core.pg_norm,
                    std::move(core.trace)};
    return rep;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

TrialOutcome failed_trial() {
    TrialOutcome o;
    o.final_objective = kInf;
    o.mse_x = kInf;
    o.mse_p = kInf;
    o.aborted = true;
    return o;
}

}  // namespace

TrialBatchReport multi_trial(const InvariantFeatures& target, int m,
                             const SolverConfig& config, int n_trials, double th,
                             const Signal& x_true, const ShiftPmf& p_true,
                             bool keep_estimates, int threads) {
    if (n_trials < 1) throw std::invalid_argument("multi_trial: n_trials >= 1");
    const int d = x_true.size();
    std::vector<TrialOutcome> outcomes(static_cast<size_t>(n_trials));
    parallel_for(n_trials, threads <= 0 ? worker_count() : threads, [&](std::int64_t i) {
        const ObjectivePoint init =
            random_init(d, SolveMode::NonUniform, mix_seed(config.seed, static_cast<std::uint64_t>(i)));
        TrialOutcome& o = outcomes[static_cast<size_t>(i)];
        try {
            SolveReport rep = solve_msr(target, m, config, init);
            const AlignmentResult al = align_and_mse(x_true, p_true, rep.x_hat, rep.p_hat);
            o.final_objective = rep.final_objective;
            o.mse_x = al.mse_x;
            o.mse_p = al.mse_p;
            o.best_shift = al.best_shift;
            o.converged = rep.converged;
            if (keep_estimates) {
                o.x_hat = rep.x_hat.values();
                o.p_hat = rep.p_hat.mass();
            }
        } catch (const SolverAbort&) {
            o = failed_trial();
        }
    });
    return summarize(std::move(outcomes), th);
}

TrialBatchReport multi_trial(const UniformInvariantFeatures& target, int window,
                             const SolverConfig& config, int n_trials, double th,
                             const Signal& x_true, bool keep_estimates, int threads) {
    if (n_trials < 1) throw std::invalid_argument("multi_trial: n_trials >= 1");
    const int d = x_true.size();
    const ShiftPmf p_true = ShiftPmf::uniform(d);
    std::vector<TrialOutcome> outcomes(static_cast<size_t>(n_trials));
    parallel_for(n_trials, threads <= 0 ? worker_count() : threads, [&](std::int64_t i) {
        const ObjectivePoint init =
            random_init(d, SolveMode::Uniform, mix_seed(config.seed, static_cast<std::uint64_t>(i)));
        TrialOutcome& o = outcomes[static_cast<size_t>(i)];
        try {
            SolveReport rep = solve_msr(target, window, config, init.x);
            const AlignmentResult al = align_and_mse(x_true, p_true, rep.x_hat, rep.p_hat);
            o.final_objective = rep.final_objective;
            o.mse_x = al.mse_x;
            o.mse_p = al.mse_p;
            o.best_shift = al.best_shift;
            o.converged = rep.converged;
            if (keep_estimates) {
                o.x_hat = rep.x_hat.values();
                o.p_hat = rep.p_hat.mass();
            }
        } catch (const SolverAbort&) {
            o = failed_trial();
        }
    });
    return summarize(std::move(outcomes), th);
}

int min_window_length(int d, WindowCase c) {
    if (d < 1) throw std::invalid_argument("min_window_length: d >= 1");
    const long long dd = d;
    for (int m = 1;; ++m) {
        const long long mm = m;
        bool ok = false;
        switch (c) {
            case WindowCase::NonUniformWithT:
                // m^3/6 + m^2 + 11m/6 + 1 >= 2d, cleared of denominators
                ok = (mm + 1) * (mm + 2) * (mm + 3) >= 12 * dd;
                break;
            case WindowCase::NonUniformNoT:
                // m^2/2 + 3m/2 + 1 >= 2d
                ok = (mm + 1) * (mm + 2) >= 4 * dd;
                break;
            case WindowCase::UniformWithT:
                // m^2/2 + 3m/2 + 1 >= d
                ok = (mm + 1) * (mm + 2) >= 2 * dd;
                break;
        }
        if (ok) return m;
    }
}

}  // namespace msr
