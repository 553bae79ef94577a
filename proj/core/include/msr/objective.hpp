#pragma once

#include <utility>
#include <vector>

#include "msr/invariants.hpp"
#include "msr/signal.hpp"

namespace msr {

/// Candidate solution for the non-uniform problem.
struct ObjectivePoint {
    Signal x;
    ShiftPmf p;
};

/// Weighted squared mismatch between the population features of `point`
/// over a length-m window and `target`.
double loss(const ObjectivePoint& point, const InvariantFeatures& target,
            const Weights& w, int m);

/// Uniform-p objective over x alone. `window` restricts the feature
/// entries to those estimable from length-`window` segments; the default
/// (window == d) is the full objective.
double loss_uniform(const Signal& x, const UniformInvariantFeatures& target,
                    const Weights& w, int window = -1);

/// Exact gradient of `loss` in (x, p). g_p is the unconstrained partial
/// derivative; simplex handling belongs to the solver.
std::pair<std::vector<double>, std::vector<double>> grad(
    const ObjectivePoint& point, const InvariantFeatures& target, const Weights& w,
    int m);

/// Exact gradient of `loss_uniform` in x.
std::vector<double> grad_uniform(const Signal& x,
                                 const UniformInvariantFeatures& target,
                                 const Weights& w, int window = -1);

/// Max over coordinates of |analytic - central difference| / max(1, |analytic|).
double finite_diff_check(const ObjectivePoint& point, const InvariantFeatures& target,
                         const Weights& w, int m, double step);

double finite_diff_check_uniform(const Signal& x,
                                 const UniformInvariantFeatures& target,
                                 const Weights& w, double step, int window = -1);

// Raw-vector kernels for the optimizer hot path and the finite-difference
// probe; p is treated as a free vector.
double loss_raw(const std::vector<double>& x, const std::vector<double>& p,
                const InvariantFeatures& target, const Weights& w, int m);
void grad_raw(const std::vector<double>& x, const std::vector<double>& p,
              const InvariantFeatures& target, const Weights& w, int m,
              std::vector<double>& g_x, std::vector<double>& g_p);
double loss_uniform_raw(const std::vector<double>& x,
                        const UniformInvariantFeatures& target, const Weights& w,
                        int window);
void grad_uniform_raw(const std::vector<double>& x,
                      const UniformInvariantFeatures& target, const Weights& w,
                      int window, std::vector<double>& g);

}  // namespace msr
