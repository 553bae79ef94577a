#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "msr/alignment.hpp"
#include "msr/invariants.hpp"
#include "msr/objective.hpp"
#include "msr/signal.hpp"

namespace msr {

enum class SolveMode { NonUniform, Uniform };

struct SolverConfig {
    int max_iters = 5000;
    double grad_tol = 1e-8;      // projected-gradient norm threshold
    int memory = 10;             // quasi-Newton history length
    std::uint64_t seed = 0;
    Weights weights;
    SolveMode mode = SolveMode::NonUniform;
};

struct SolveReport {
    Signal x_hat;
    ShiftPmf p_hat;  // exact uniform in uniform mode
    double final_objective = 0.0;
    int iterations = 0;
    bool converged = false;
    double projected_grad_norm = 0.0;
    std::vector<double> trace;  // objective at init, then per accepted step
};

/// Thrown when the objective or gradient turns non-finite at an accepted
/// iterate (e.g. a corrupt target); carries the iteration it happened at.
class SolverAbort : public std::runtime_error {
public:
    SolverAbort(const std::string& what, int iteration)
        : std::runtime_error(what), iteration(iteration) {}
    int iteration;
};

struct TrialOutcome {
    double final_objective = 0.0;
    double mse_x = 0.0;
    double mse_p = 0.0;
    int best_shift = 0;
    bool converged = false;
    bool aborted = false;
    std::optional<std::vector<double>> x_hat;  // kept when requested
    std::optional<std::vector<double>> p_hat;
};

struct TrialBatchReport {
    int n_trials = 0;
    double p_rec = 0.0;  // fraction of trials with aligned mse_x <= th
    double f_bar = 0.0;  // median final objective over all trials
    double th = 0.0;
    int n_aborted = 0;
    std::vector<TrialOutcome> per_trial;
};

/// Euclidean projection onto the probability simplex by the sort-and-
/// threshold rule: out = max(v - tau, 0) with tau chosen so the result
/// sums to one.
ShiftPmf project_simplex(const std::vector<double>& v);
std::vector<double> project_simplex_raw(const std::vector<double>& v);

/// Random starting point: x has i.i.d. standard-normal entries; p is a
/// flat-Dirichlet draw (normalized i.i.d. exponentials), or exact uniform
/// in uniform mode. x is drawn before p, so a seed pins the whole point.
ObjectivePoint random_init(int d, SolveMode mode, std::uint64_t seed);

/// Called after each accepted step with (iteration, objective, x, p).
using SolveObserver =
    std::function<void(int, double, const std::vector<double>&, const std::vector<double>&)>;

/// Projected limited-memory quasi-Newton descent on the non-uniform
/// objective. Search directions come from the two-loop recursion over
/// stored curvature pairs (pairs with s.y <= 1e-12 are dropped); steps
/// use Armijo backtracking (slope 1e-4, factor 0.5) measured along the
/// actual displacement, and the p block is re-projected after every
/// trial step. Stops when the projected-gradient norm falls below
/// grad_tol or max_iters is hit.
SolveReport solve_msr(const InvariantFeatures& target, int m, const SolverConfig& config,
                      const ObjectivePoint& init, const SolveObserver& observer = {});

/// Uniform-mode variant: optimizes x alone against uniform features
/// restricted to `window` (window == d is the full objective).
SolveReport solve_msr(const UniformInvariantFeatures& target, int window,
                      const SolverConfig& config, const Signal& init,
                      const SolveObserver& observer = {});

/// Runs solve_msr from n_trials seeded random starts (trial i uses seed
/// mix(config.seed, i)) and scores each against the supplied ground truth
/// through align_and_mse. Aborted trials count as failures with infinite
/// objective. Trials may run on `threads` workers; the report is
/// assembled by trial index either way.
TrialBatchReport multi_trial(const InvariantFeatures& target, int m,
                             const SolverConfig& config, int n_trials, double th,
                             const Signal& x_true, const ShiftPmf& p_true,
                             bool keep_estimates = false, int threads = 1);

TrialBatchReport multi_trial(const UniformInvariantFeatures& target, int window,
                             const SolverConfig& config, int n_trials, double th,
                             const Signal& x_true, bool keep_estimates = false,
                             int threads = 1);

/// Identifiability cases for the minimum window length.
enum class WindowCase { NonUniformWithT, NonUniformNoT, UniformWithT };

/// Smallest m whose invariant-feature equation count reaches the unknown
/// count:  (m+1)(m+2)(m+3)/6 >= 2d   non-uniform, lambda_t != 0
///         (m+1)(m+2)/2      >= 2d   non-uniform, lambda_t  = 0
///         (m+1)(m+2)/2      >= d    uniform,     lambda_t != 0
int min_window_length(int d, WindowCase c);

}  // namespace msr
