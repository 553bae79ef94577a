#pragma once

#include <vector>

#include "msr/observation.hpp"
#include "msr/signal.hpp"
#include "msr/tensor.hpp"

namespace msr {

enum class FeatureKind { NonUniform, Uniform };

/// First, second and third order shift-invariant features over window
/// indices 0..m-1:
///   mu[n]        = sum_s x[n+s]_d p[s]
///   c[n1,n2]     = sum_s x[n1+s]_d x[n2+s]_d p[s]
///   t[n1,n2,n3]  = sum_s x[n1+s]_d x[n2+s]_d x[n3+s]_d p[s]
/// c is symmetric and t fully symmetric, exactly: both are built on the
/// index simplex and mirrored.
struct InvariantFeatures {
    int m = 0;
    double sigma_used = 0.0;
    std::vector<double> mu;  // length m
    Matrix c;                // m x m
    Tensor3 t;               // m x m x m
    static constexpr FeatureKind kind = FeatureKind::NonUniform;
};

/// Uniform-p reductions, indexed over the full period:
///   mu           = (1/d) sum_j x[j]
///   c[n]         = (1/d) sum_j x[j+n]_d x[j]
///   t[n1,n2]     = (1/d) sum_j x[n1+j]_d x[n2+j]_d x[j]
struct UniformInvariantFeatures {
    int d = 0;
    double sigma_used = 0.0;
    double mu = 0.0;
    std::vector<double> c;  // length d
    Matrix t;               // d x d, symmetric
    static constexpr FeatureKind kind = FeatureKind::Uniform;
};

/// Relative weights on the third, second and first order terms.
struct Weights {
    double lambda_t = 1.0;
    double lambda_c = 1.0;
    double lambda_mu = 1.0;
};

void validate(const Weights& w);

/// Population features of (x, p) over a length-m window, summed over all
/// d shifts.
InvariantFeatures population_moments(const Signal& x, const ShiftPmf& p, int m);

/// Same computation over raw vectors with no pmf validation. The
/// optimizer and the finite-difference probe evaluate at points where p
/// is a free vector, not necessarily on the simplex.
InvariantFeatures population_moments_raw(const std::vector<double>& x,
                                         const std::vector<double>& p, int m);

/// Population features for uniform p over the full period.
UniformInvariantFeatures population_moments_uniform(const Signal& x);

/// Single-pass estimates from K noisy segments with the Gaussian-noise
/// bias removed:
///   c_hat  -= sigma^2 delta(n1,n2)
///   t_hat  -= sigma^2 (mu_hat[n1] delta(n2,n3) + mu_hat[n2] delta(n1,n3)
///             + mu_hat[n3] delta(n1,n2))
/// Second and third moments are accumulated on the index simplex
/// n1 <= n2 <= n3 in row order over segments and mirrored afterwards.
InvariantFeatures empirical_moments(const ObservationSet& obs);

/// Collapses full-window (m == d) features to the uniform-p form by
/// averaging over the diagonal shift. Rejects m != d.
UniformInvariantFeatures reduce_to_uniform(const InvariantFeatures& f);

/// Weighted squared feature mismatch:
///   lambda_t ||a.t - b.t||_F^2 + lambda_c ||a.c - b.c||_F^2
///   + lambda_mu ||a.mu - b.mu||_2^2
/// over the full symmetric arrays. A zero weight skips its block
/// entirely, so the value is bit-identical under changes to that block.
double feature_distance(const InvariantFeatures& a, const InvariantFeatures& b,
                        const Weights& w);

/// Uniform-feature counterpart of feature_distance. `window` restricts
/// the sums to the entries estimable from length-`window` segments
/// (c lags 0..window-1 and the window x window corner of t); the default
/// covers the full period.
double feature_distance_uniform(const UniformInvariantFeatures& a,
                                const UniformInvariantFeatures& b, const Weights& w,
                                int window = -1);

}  // namespace msr
