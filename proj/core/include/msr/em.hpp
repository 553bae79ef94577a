#pragma once

#include <cstdint>
#include <vector>

#include "msr/objective.hpp"
#include "msr/observation.hpp"
#include "msr/signal.hpp"

namespace msr {

struct EmConfig {
    int max_iters = 500;
    double ll_tol = 1e-6;  // absolute log-likelihood increase threshold
    std::uint64_t seed = 0;
    // Classification-EM fallback for sigma == 0; kept out of every
    // acceptance path. The trace then records the negated total squared
    // residual instead of a log-likelihood.
    bool hard_assign = false;
};

struct EmReport {
    Signal x_hat;
    ShiftPmf p_hat;
    std::vector<double> log_likelihood_trace;
    int iterations = 0;
    double wall_time = 0.0;  // seconds, compute only
};

/// Soft shift assignments: w[k,s] proportional to
/// p[s] exp(-||y_k - mask_s x||^2 / (2 sigma^2)), rows normalized in the
/// log domain with max subtraction. Entries with p[s] == 0 stay exactly
/// zero. Rejects sigma == 0.
struct Responsibilities {
    std::int64_t count = 0;  // K
    int d = 0;
    std::vector<double> w;   // count x d, row-major

    double& operator()(std::int64_t k, int s) { return w[static_cast<size_t>(k * d + s)]; }
    double operator()(std::int64_t k, int s) const { return w[static_cast<size_t>(k * d + s)]; }
};

Responsibilities e_step(const Signal& x, const ShiftPmf& p, const ObservationSet& obs);

/// One-hot assignment to the nearest mask among shifts with p[s] > 0;
/// ties go to the smallest s.
Responsibilities e_step_hard(const Signal& x, const ShiftPmf& p, const ObservationSet& obs);

/// Weighted re-estimation:
///   p[s] = (1/K) sum_k w[k,s]
///   x[j] = weighted mean of the segment samples that cover j; a
///          coordinate no window covers keeps its previous value.
std::pair<Signal, ShiftPmf> m_step(const Responsibilities& w, const ObservationSet& obs,
                                   int d, const Signal& x_prev);

/// sum_k log sum_s p[s] N(y_k; mask_s x, sigma^2 I) via log-sum-exp.
/// Rejects sigma == 0.
double log_likelihood(const Signal& x, const ShiftPmf& p, const ObservationSet& obs);

/// Alternates e_step / m_step from `init` until the log-likelihood
/// increase drops below ll_tol or max_iters is reached.
EmReport em_fit(const ObservationSet& obs, int d, const EmConfig& config,
                const ObjectivePoint& init);

}  // namespace msr
