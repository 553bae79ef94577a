#include "msr/invariants.hpp"

#include <cmath>
#include <stdexcept>

namespace msr {

void validate(const Weights& w) {
    if (!(w.lambda_t >= 0.0) || !(w.lambda_c >= 0.0) || !(w.lambda_mu >= 0.0)) {
        throw std::invalid_argument("Weights: all weights must be >= 0");
    }
    if (w.lambda_t == 0.0 && w.lambda_c == 0.0 && w.lambda_mu == 0.0) {
        throw std::invalid_argument("Weights: at least one weight must be positive");
    }
}

namespace {

// Writes a simplex entry to every permutation of its indices.
inline void mirror_pair(Matrix& c, int i, int j, double v) {
    c(i, j) = v;
    c(j, i) = v;
}

inline void mirror_triple(Tensor3& t, int i, int j, int k, double v) {
    t(i, j, k) = v;
    t(i, k, j) = v;
    t(j, i, k) = v;
    t(j, k, i) = v;
    t(k, i, j) = v;
    t(k, j, i) = v;
}

}  // namespace

InvariantFeatures population_moments_raw(const std::vector<double>& x,
                                         const std::vector<double>& p, int m) {
    const int d = static_cast<int>(x.size());
    if (static_cast<int>(p.size()) != d) {
        throw std::invalid_argument("population_moments: pmf length != d");
    }
    if (m < 1 || m > d) {
        throw std::domain_error("population_moments: window length out of [1, d]");
    }

    const auto pairs = simplex_pairs(m);
    const auto triples = simplex_triples(m);

    InvariantFeatures f;
    f.m = m;
    f.sigma_used = 0.0;
    f.mu.assign(static_cast<size_t>(m), 0.0);
    f.c = Matrix(m);
    f.t = Tensor3(m);

    std::vector<double> acc2(pairs.size(), 0.0);
    std::vector<double> acc3(triples.size(), 0.0);
    std::vector<double> win(static_cast<size_t>(m));

    for (int s = 0; s < d; ++s) {
        const double w = p[static_cast<size_t>(s)];
        if (w == 0.0) continue;
        for (int n = 0; n < m; ++n) win[static_cast<size_t>(n)] = x[static_cast<size_t>((n + s) % d)];
        for (int n = 0; n < m; ++n) f.mu[static_cast<size_t>(n)] += win[static_cast<size_t>(n)] * w;
        for (size_t q = 0; q < pairs.size(); ++q) {
            acc2[q] += win[static_cast<size_t>(pairs[q].i)] *
                       win[static_cast<size_t>(pairs[q].j)] * w;
        }
        for (size_t q = 0; q < triples.size(); ++q) {
            acc3[q] += win[static_cast<size_t>(triples[q].i)] *
                       win[static_cast<size_t>(triples[q].j)] *
                       win[static_cast<size_t>(triples[q].k)] * w;
        }
    }

    for (size_t q = 0; q < pairs.size(); ++q) {
        mirror_pair(f.c, pairs[q].i, pairs[q].j, acc2[q]);
    }
    for (size_t q = 0; q < triples.size(); ++q) {
        mirror_triple(f.t, triples[q].i, triples[q].j, triples[q].k, acc3[q]);
    }
    return f;
}

InvariantFeatures population_moments(const Signal& x, const ShiftPmf& p, int m) {
    return population_moments_raw(x.values(), p.mass(), m);
}

UniformInvariantFeatures population_moments_uniform(const Signal& x) {
    const int d = x.size();
    UniformInvariantFeatures f;
    f.d = d;
    f.sigma_used = 0.0;
    f.c.assign(static_cast<size_t>(d), 0.0);
    f.t = Matrix(d);

    double mu = 0.0;
    for (int j = 0; j < d; ++j) mu += x[j];
    f.mu = mu / d;

    for (int n = 0; n < d; ++n) {
        double acc = 0.0;
        for (int j = 0; j < d; ++j) acc += x[(j + n) % d] * x[j];
        f.c[static_cast<size_t>(n)] = acc / d;
    }

    for (int n1 = 0; n1 < d; ++n1) {
        for (int n2 = n1; n2 < d; ++n2) {
            double acc = 0.0;
            for (int j = 0; j < d; ++j) acc += x[(n1 + j) % d] * x[(n2 + j) % d] * x[j];
            mirror_pair(f.t, n1, n2, acc / d);
        }
    }
    return f;
}

InvariantFeatures empirical_moments(const ObservationSet& obs) {
    if (obs.count < 1 || obs.segments.empty()) {
        throw std::invalid_argument("empirical_moments: empty observation set");
    }
    if (!std::isfinite(obs.sigma) || obs.sigma < 0.0) {
        throw std::invalid_argument("empirical_moments: sigma must be finite and >= 0");
    }
    const int m = obs.m;
    const auto pairs = simplex_pairs(m);
    const auto triples = simplex_triples(m);

    std::vector<double> acc1(static_cast<size_t>(m), 0.0);
    std::vector<double> acc2(pairs.size(), 0.0);
    std::vector<double> acc3(triples.size(), 0.0);

    for (std::int64_t k = 0; k < obs.count; ++k) {
        const double* y = obs.segments.data() + k * m;
        for (int n = 0; n < m; ++n) acc1[static_cast<size_t>(n)] += y[n];
        for (size_t q = 0; q < pairs.size(); ++q) {
            acc2[q] += y[pairs[q].i] * y[pairs[q].j];
        }
        for (size_t q = 0; q < triples.size(); ++q) {
            acc3[q] += y[triples[q].i] * y[triples[q].j] * y[triples[q].k];
        }
    }

    const double inv_k = 1.0 / static_cast<double>(obs.count);
    const double s2 = obs.sigma * obs.sigma;

    InvariantFeatures f;
    f.m = m;
    f.sigma_used = obs.sigma;
    f.mu.assign(static_cast<size_t>(m), 0.0);
    f.c = Matrix(m);
    f.t = Tensor3(m);

    for (int n = 0; n < m; ++n) f.mu[static_cast<size_t>(n)] = acc1[static_cast<size_t>(n)] * inv_k;

    for (size_t q = 0; q < pairs.size(); ++q) {
        double v = acc2[q] * inv_k;
        if (pairs[q].i == pairs[q].j) v -= s2;
        mirror_pair(f.c, pairs[q].i, pairs[q].j, v);
    }

    for (size_t q = 0; q < triples.size(); ++q) {
        const int i = triples[q].i, j = triples[q].j, k = triples[q].k;
        double v = acc3[q] * inv_k;
        // Kronecker-delta bias terms; on the simplex i <= j <= k at most
        // one pattern fires unless all three coincide.
        if (j == k) v -= s2 * f.mu[static_cast<size_t>(i)];
        if (i == k) v -= s2 * f.mu[static_cast<size_t>(j)];
        if (i == j) v -= s2 * f.mu[static_cast<size_t>(k)];
        mirror_triple(f.t, i, j, k, v);
    }
    return f;
}

UniformInvariantFeatures reduce_to_uniform(const InvariantFeatures& f) {
    const int d = f.m;
    UniformInvariantFeatures u;
    u.d = d;
    u.sigma_used = f.sigma_used;
    u.c.assign(static_cast<size_t>(d), 0.0);
    u.t = Matrix(d);

    double mu = 0.0;
    for (int n = 0; n < d; ++n) mu += f.mu[static_cast<size_t>(n)];
    u.mu = mu / d;

    for (int n = 0; n < d; ++n) {
        double acc = 0.0;
        for (int j = 0; j < d; ++j) acc += f.c((n + j) % d, j);
        u.c[static_cast<size_t>(n)] = acc / d;
    }

    for (int n1 = 0; n1 < d; ++n1) {
        for (int n2 = n1; n2 < d; ++n2) {
            double acc = 0.0;
            for (int j = 0; j < d; ++j) acc += f.t((n1 + j) % d, (n2 + j) % d, j);
            mirror_pair(u.t, n1, n2, acc / d);
        }
    }
    return u;
}

double feature_distance(const InvariantFeatures& a, const InvariantFeatures& b,
                        const Weights& w) {
    validate(w);
    if (a.m != b.m) {
        throw std::invalid_argument("feature_distance: window lengths differ");
    }
    double total = 0.0;
    if (w.lambda_mu > 0.0) {
        double acc = 0.0;
        for (size_t n = 0; n < a.mu.size(); ++n) {
            const double diff = a.mu[n] - b.mu[n];
            acc += diff * diff;
        }
        total += w.lambda_mu * acc;
    }
    if (w.lambda_c > 0.0) {
        double acc = 0.0;
        const auto& av = a.c.data();
        const auto& bv = b.c.data();
        for (size_t q = 0; q < av.size(); ++q) {
            const double diff = av[q] - bv[q];
            acc += diff * diff;
        }
        total += w.lambda_c * acc;
    }
    if (w.lambda_t > 0.0) {
        double acc = 0.0;
        const auto& av = a.t.data();
        const auto& bv = b.t.data();
        for (size_t q = 0; q < av.size(); ++q) {
            const double diff = av[q] - bv[q];
            acc += diff * diff;
        }
        total += w.lambda_t * acc;
    }
    return total;
}

double feature_distance_uniform(const UniformInvariantFeatures& a,
                                const UniformInvariantFeatures& b, const Weights& w,
                                int window) {
    validate(w);
    if (a.d != b.d) {
        throw std::invalid_argument("feature_distance_uniform: lengths differ");
    }
    const int win = window < 0 ? a.d : window;
    if (win < 1 || win > a.d) {
        throw std::invalid_argument("feature_distance_uniform: window out of [1, d]");
    }
    double total = 0.0;
    if (w.lambda_mu > 0.0) {
        const double diff = a.mu - b.mu;
        total += w.lambda_mu * diff * diff;
    }
    if (w.lambda_c > 0.0) {
        double acc = 0.0;
        for (int n = 0; n < win; ++n) {
            const double diff = a.c[static_cast<size_t>(n)] - b.c[static_cast<size_t>(n)];
            acc += diff * diff;
        }
        total += w.lambda_c * acc;
    }
    if (w.lambda_t > 0.0) {
        double acc = 0.0;
        for (int n1 = 0; n1 < win; ++n1) {
            for (int n2 = 0; n2 < win; ++n2) {
                const double diff = a.t(n1, n2) - b.t(n1, n2);
                acc += diff * diff;
            }
        }
        total += w.lambda_t * acc;
    }
    return total;
}

}  // namespace msr
