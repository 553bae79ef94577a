#include "msr/objective.hpp"

#include <cmath>
#include <stdexcept>

namespace msr {

namespace {

void check_dims(size_t dx, size_t dp, const InvariantFeatures& target, int m) {
    if (dp != dx) {
        throw std::invalid_argument("objective: x and p lengths differ");
    }
    if (m != target.m) {
        throw std::invalid_argument("objective: window length does not match target");
    }
    if (m < 1 || static_cast<size_t>(m) > dx) {
        throw std::domain_error("objective: window length out of [1, d]");
    }
}

int resolve_window(size_t dx, const UniformInvariantFeatures& target, int window) {
    if (static_cast<size_t>(target.d) != dx) {
        throw std::invalid_argument("objective: target dimension does not match x");
    }
    const int win = window < 0 ? target.d : window;
    if (win < 1 || win > target.d) {
        throw std::invalid_argument("objective: window out of [1, d]");
    }
    return win;
}

double max_rel_error(const std::vector<double>& analytic,
                     const std::vector<double>& numeric) {
    double worst = 0.0;
    for (size_t i = 0; i < analytic.size(); ++i) {
        const double err =
            std::abs(analytic[i] - numeric[i]) / std::max(1.0, std::abs(analytic[i]));
        worst = std::max(worst, err);
    }
    return worst;
}

}  // namespace

double loss_raw(const std::vector<double>& x, const std::vector<double>& p,
                const InvariantFeatures& target, const Weights& w, int m) {
    check_dims(x.size(), p.size(), target, m);
    return feature_distance(population_moments_raw(x, p, m), target, w);
}

double loss(const ObjectivePoint& point, const InvariantFeatures& target,
            const Weights& w, int m) {
    return loss_raw(point.x.values(), point.p.mass(), target, w, m);
}

double loss_uniform_raw(const std::vector<double>& x,
                        const UniformInvariantFeatures& target, const Weights& w,
                        int window) {
    const int win = resolve_window(x.size(), target, window);
    return feature_distance_uniform(population_moments_uniform(Signal(x)), target, w,
                                    win);
}

double loss_uniform(const Signal& x, const UniformInvariantFeatures& target,
                    const Weights& w, int window) {
    return loss_uniform_raw(x.values(), target, w, window);
}

void grad_raw(const std::vector<double>& x, const std::vector<double>& p,
              const InvariantFeatures& target, const Weights& w, int m,
              std::vector<double>& g_x, std::vector<double>& g_p) {
    check_dims(x.size(), p.size(), target, m);
    validate(w);
    const int d = static_cast<int>(x.size());

    const InvariantFeatures f = population_moments_raw(x, p, m);

    std::vector<double> r_mu(static_cast<size_t>(m));
    for (int n = 0; n < m; ++n) {
        r_mu[static_cast<size_t>(n)] =
            f.mu[static_cast<size_t>(n)] - target.mu[static_cast<size_t>(n)];
    }

    const auto pairs = simplex_pairs(m);
    const auto triples = simplex_triples(m);

    g_x.assign(static_cast<size_t>(d), 0.0);
    g_p.assign(static_cast<size_t>(d), 0.0);
    std::vector<double> win(static_cast<size_t>(m));

    const double wmu2 = 2.0 * w.lambda_mu;
    const double wc2 = 2.0 * w.lambda_c;
    const double wt2 = 2.0 * w.lambda_t;

    for (int s = 0; s < d; ++s) {
        const double ps = p[static_cast<size_t>(s)];
        for (int n = 0; n < m; ++n) win[static_cast<size_t>(n)] = x[static_cast<size_t>((n + s) % d)];

        if (w.lambda_mu > 0.0) {
            double acc = 0.0;
            for (int n = 0; n < m; ++n) {
                acc += r_mu[static_cast<size_t>(n)] * win[static_cast<size_t>(n)];
            }
            g_p[static_cast<size_t>(s)] += wmu2 * acc;
            if (ps != 0.0) {
                for (int n = 0; n < m; ++n) {
                    g_x[static_cast<size_t>((n + s) % d)] +=
                        wmu2 * r_mu[static_cast<size_t>(n)] * ps;
                }
            }
        }

        if (w.lambda_c > 0.0) {
            double acc = 0.0;
            for (const auto& q : pairs) {
                const double r = (f.c(q.i, q.j) - target.c(q.i, q.j)) * q.mult;
                const double xi = win[static_cast<size_t>(q.i)];
                const double xj = win[static_cast<size_t>(q.j)];
                acc += r * xi * xj;
                if (ps != 0.0) {
                    const double rps = wc2 * r * ps;
                    g_x[static_cast<size_t>((q.i + s) % d)] += rps * xj;
                    g_x[static_cast<size_t>((q.j + s) % d)] += rps * xi;
                }
            }
            g_p[static_cast<size_t>(s)] += wc2 * acc;
        }

        if (w.lambda_t > 0.0) {
            double acc = 0.0;
            for (const auto& q : triples) {
                const double r = (f.t(q.i, q.j, q.k) - target.t(q.i, q.j, q.k)) * q.mult;
                const double xi = win[static_cast<size_t>(q.i)];
                const double xj = win[static_cast<size_t>(q.j)];
                const double xk = win[static_cast<size_t>(q.k)];
                acc += r * xi * xj * xk;
                if (ps != 0.0) {
                    const double rps = wt2 * r * ps;
                    g_x[static_cast<size_t>((q.i + s) % d)] += rps * xj * xk;
                    g_x[static_cast<size_t>((q.j + s) % d)] += rps * xi * xk;
                    g_x[static_cast<size_t>((q.k + s) % d)] += rps * xi * xj;
                }
            }
            g_p[static_cast<size_t>(s)] += wt2 * acc;
        }
    }
}

std::pair<std::vector<double>, std::vector<double>> grad(
    const ObjectivePoint& point, const InvariantFeatures& target, const Weights& w,
    int m) {
    std::vector<double> g_x, g_p;
    grad_raw(point.x.values(), point.p.mass(), target, w, m, g_x, g_p);
    return {std::move(g_x), std::move(g_p)};
}

void grad_uniform_raw(const std::vector<double>& x,
                      const UniformInvariantFeatures& target, const Weights& w,
                      int window, std::vector<double>& g) {
    const int win = resolve_window(x.size(), target, window);
    validate(w);
    const int d = static_cast<int>(x.size());
    const UniformInvariantFeatures f = population_moments_uniform(Signal(x));

    g.assign(static_cast<size_t>(d), 0.0);

    if (w.lambda_mu > 0.0) {
        const double r = 2.0 * w.lambda_mu * (f.mu - target.mu) / d;
        for (int j = 0; j < d; ++j) g[static_cast<size_t>(j)] += r;
    }

    if (w.lambda_c > 0.0) {
        for (int n = 0; n < win; ++n) {
            const double r = 2.0 * w.lambda_c *
                             (f.c[static_cast<size_t>(n)] - target.c[static_cast<size_t>(n)]) / d;
            if (r == 0.0) continue;
            for (int j = 0; j < d; ++j) {
                const int a = (j + n) % d;
                g[static_cast<size_t>(a)] += r * x[static_cast<size_t>(j)];
                g[static_cast<size_t>(j)] += r * x[static_cast<size_t>(a)];
            }
        }
    }

    if (w.lambda_t > 0.0) {
        for (int n1 = 0; n1 < win; ++n1) {
            for (int n2 = n1; n2 < win; ++n2) {
                const double mult = n1 == n2 ? 1.0 : 2.0;
                const double r =
                    2.0 * w.lambda_t * mult * (f.t(n1, n2) - target.t(n1, n2)) / d;
                if (r == 0.0) continue;
                for (int j = 0; j < d; ++j) {
                    const int a = (n1 + j) % d;
                    const int b = (n2 + j) % d;
                    const double xa = x[static_cast<size_t>(a)];
                    const double xb = x[static_cast<size_t>(b)];
                    const double xj = x[static_cast<size_t>(j)];
                    g[static_cast<size_t>(a)] += r * xb * xj;
                    g[static_cast<size_t>(b)] += r * xa * xj;
                    g[static_cast<size_t>(j)] += r * xa * xb;
                }
            }
        }
    }
}

std::vector<double> grad_uniform(const Signal& x,
                                 const UniformInvariantFeatures& target,
                                 const Weights& w, int window) {
    std::vector<double> g;
    grad_uniform_raw(x.values(), target, w, window, g);
    return g;
}

double finite_diff_check(const ObjectivePoint& point, const InvariantFeatures& target,
                         const Weights& w, int m, double step) {
    if (!(step > 0.0)) throw std::invalid_argument("finite_diff_check: step must be > 0");
    const int d = point.x.size();
    auto [g_x, g_p] = grad(point, target, w, m);

    std::vector<double> xv = point.x.values();
    std::vector<double> pv = point.p.mass();

    // Perturbed p leaves the simplex; the polynomial is defined there.
    std::vector<double> fd_x(static_cast<size_t>(d));
    for (int j = 0; j < d; ++j) {
        const double keep = xv[static_cast<size_t>(j)];
        xv[static_cast<size_t>(j)] = keep + step;
        const double fp = loss_raw(xv, pv, target, w, m);
        xv[static_cast<size_t>(j)] = keep - step;
        const double fm = loss_raw(xv, pv, target, w, m);
        xv[static_cast<size_t>(j)] = keep;
        fd_x[static_cast<size_t>(j)] = (fp - fm) / (2.0 * step);
    }
    std::vector<double> fd_p(static_cast<size_t>(d));
    for (int s = 0; s < d; ++s) {
        const double keep = pv[static_cast<size_t>(s)];
        pv[static_cast<size_t>(s)] = keep + step;
        const double fp = loss_raw(xv, pv, target, w, m);
        pv[static_cast<size_t>(s)] = keep - step;
        const double fm = loss_raw(xv, pv, target, w, m);
        pv[static_cast<size_t>(s)] = keep;
        fd_p[static_cast<size_t>(s)] = (fp - fm) / (2.0 * step);
    }
    return std::max(max_rel_error(g_x, fd_x), max_rel_error(g_p, fd_p));
}

double finite_diff_check_uniform(const Signal& x,
                                 const UniformInvariantFeatures& target,
                                 const Weights& w, double step, int window) {
    if (!(step > 0.0)) throw std::invalid_argument("finite_diff_check: step must be > 0");
    const int d = x.size();
    std::vector<double> g;
    grad_uniform_raw(x.values(), target, w, window, g);

    std::vector<double> xv = x.values();
    std::vector<double> fd(static_cast<size_t>(d));
    for (int j = 0; j < d; ++j) {
        const double keep = xv[static_cast<size_t>(j)];
        xv[static_cast<size_t>(j)] = keep + step;
        const double fp = loss_uniform_raw(xv, target, w, window);
        xv[static_cast<size_t>(j)] = keep - step;
        const double fm = loss_uniform_raw(xv, target, w, window);
        xv[static_cast<size_t>(j)] = keep;
        fd[static_cast<size_t>(j)] = (fp - fm) / (2.0 * step);
    }
    return max_rel_error(g, fd);
}

}  // namespace msr
