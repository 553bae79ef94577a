#include "msr/em.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace msr {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_em_inputs(const Signal& x, const ShiftPmf& p, const ObservationSet& obs) {
    if (x.size() != obs.d || p.size() != obs.d) {
        throw std::invalid_argument("em: x/p length does not match observation d");
    }
    if (obs.count < 1) throw std::invalid_argument("em: empty observation set");
}

// Squared distance from segment y to the mask starting at s.
double mask_residual(const Signal& x, const double* y, int s, int m) {
    const int d = x.size();
    double acc = 0.0;
    for (int n = 0; n < m; ++n) {
        const double diff = y[n] - x[(n + s) % d];
        acc += diff * diff;
    }
    return acc;
}

}  // namespace

Responsibilities e_step(const Signal& x, const ShiftPmf& p, const ObservationSet& obs) {
    check_em_inputs(x, p, obs);
    if (!(obs.sigma > 0.0)) {
        throw std::domain_error("e_step: sigma must be > 0 (use the hard-assignment fallback)");
    }
    const int d = obs.d;
    const int m = obs.m;
    const double inv_2s2 = 1.0 / (2.0 * obs.sigma * obs.sigma);

    std::vector<double> log_p(static_cast<size_t>(d), kNegInf);
    for (int s = 0; s < d; ++s) {
        if (p[s] > 0.0) log_p[static_cast<size_t>(s)] = std::log(p[s]);
    }

    Responsibilities w;
    w.count = obs.count;
    w.d = d;
    w.w.assign(static_cast<size_t>(obs.count) * d, 0.0);

    std::vector<double> lw(static_cast<size_t>(d));
    for (std::int64_t k = 0; k < obs.count; ++k) {
        const double* y = obs.segments.data() + k * m;
        double best = kNegInf;
        for (int s = 0; s < d; ++s) {
            double v = log_p[static_cast<size_t>(s)];
            if (v != kNegInf) v -= mask_residual(x, y, s, m) * inv_2s2;
            lw[static_cast<size_t>(s)] = v;
            if (v > best) best = v;
        }
        double total = 0.0;
        for (int s = 0; s < d; ++s) {
            if (lw[static_cast<size_t>(s)] == kNegInf) continue;
            total += std::exp(lw[static_cast<size_t>(s)] - best);
        }
        const double inv_total = 1.0 / total;
        for (int s = 0; s < d; ++s) {
            if (lw[static_cast<size_t>(s)] == kNegInf) continue;
            w(k, s) = std::exp(lw[static_cast<size_t>(s)] - best) * inv_total;
        }
    }
    return w;
}

Responsibilities e_step_hard(const Signal& x, const ShiftPmf& p, const ObservationSet& obs) {
    check_em_inputs(x, p, obs);
    const int d = obs.d;
    const int m = obs.m;

    Responsibilities w;
    w.count = obs.count;
    w.d = d;
    w.w.assign(static_cast<size_t>(obs.count) * d, 0.0);

    for (std::int64_t k = 0; k < obs.count; ++k) {
        const double* y = obs.segments.data() + k * m;
        int best_s = -1;
        double best = std::numeric_limits<double>::infinity();
        for (int s = 0; s < d; ++s) {
            if (p[s] <= 0.0) continue;
            const double r = mask_residual(x, y, s, m);
            if (r < best) {
                best = r;
                best_s = s;
            }
        }
        w(k, best_s) = 1.0;
    }
    return w;
}

std::pair<Signal, ShiftPmf> m_step(const Responsibilities& w, const ObservationSet& obs,
                                   int d, const Signal& x_prev) {
    if (w.d != d || x_prev.size() != d) {
        throw std::invalid_argument("m_step: dimension mismatch");
    }
    if (w.count != obs.count) {
        throw std::invalid_argument("m_step: responsibility rows != K");
    }
    const int m = obs.m;

    std::vector<double> col(static_cast<size_t>(d), 0.0);
    std::vector<double> num(static_cast<size_t>(d), 0.0);
    std::vector<double> den(static_cast<size_t>(d), 0.0);

    for (std::int64_t k = 0; k < obs.count; ++k) {
        const double* y = obs.segments.data() + k * m;
        for (int s = 0; s < d; ++s) {
            const double wks = w(k, s);
            if (wks == 0.0) continue;
            col[static_cast<size_t>(s)] += wks;
            for (int n = 0; n < m; ++n) {
                const int j = (n + s) % d;
                num[static_cast<size_t>(j)] += wks * y[n];
                den[static_cast<size_t>(j)] += wks;
            }
        }
    }

    // Normalize by the actual total so the pmf invariant holds even after
    // K roundings; the total equals K up to floating error.
    double total = 0.0;
    for (double c : col) total += c;
    std::vector<double> p_new(static_cast<size_t>(d));
    for (int s = 0; s < d; ++s) p_new[static_cast<size_t>(s)] = col[static_cast<size_t>(s)] / total;

    std::vector<double> x_new(static_cast<size_t>(d));
    for (int j = 0; j < d; ++j) {
        x_new[static_cast<size_t>(j)] = den[static_cast<size_t>(j)] == 0.0
                                            ? x_prev[j]
                                            : num[static_cast<size_t>(j)] / den[static_cast<size_t>(j)];
    }
    return {Signal(std::move(x_new)), ShiftPmf(std::move(p_new))};
}

double log_likelihood(const Signal& x, const ShiftPmf& p, const ObservationSet& obs) {
    check_em_inputs(x, p, obs);
    if (!(obs.sigma > 0.0)) {
        throw std::domain_error("log_likelihood: sigma must be > 0");
    }
    const int d = obs.d;
    const int m = obs.m;
    const double inv_2s2 = 1.0 / (2.0 * obs.sigma * obs.sigma);
    const double log_norm =
        -0.5 * m * std::log(2.0 * std::numbers::pi * obs.sigma * obs.sigma);

    std::vector<double> log_p(static_cast<size_t>(d), kNegInf);
    for (int s = 0; s < d; ++s) {
        if (p[s] > 0.0) log_p[static_cast<size_t>(s)] = std::log(p[s]);
    }

    double ll = 0.0;
    std::vector<double> lw(static_cast<size_t>(d));
    for (std::int64_t k = 0; k < obs.count; ++k) {
        const double* y = obs.segments.data() + k * m;
        double best = kNegInf;
        for (int s = 0; s < d; ++s) {
            double v = log_p[static_cast<size_t>(s)];
            if (v != kNegInf) v -= mask_residual(x, y, s, m) * inv_2s2;
            lw[static_cast<size_t>(s)] = v;
            if (v > best) best = v;
        }
        double total = 0.0;
        for (int s = 0; s < d; ++s) {
            if (lw[static_cast<size_t>(s)] == kNegInf) continue;
            total += std::exp(lw[static_cast<size_t>(s)] - best);
        }
        ll += best + std::log(total) + log_norm;
    }
    return ll;
}

namespace {

// Surrogate objective for classification EM: negated total min residual.
double hard_objective(const Signal& x, const ShiftPmf& p, const ObservationSet& obs) {
    const int d = obs.d;
    const int m = obs.m;
    double total = 0.0;
    for (std::int64_t k = 0; k < obs.count; ++k) {
        const double* y = obs.segments.data() + k * m;
        double best = std::numeric_limits<double>::infinity();
        for (int s = 0; s < d; ++s) {
            if (p[s] <= 0.0) continue;
            best = std::min(best, mask_residual(x, y, s, m));
        }
        total += best;
    }
    return -total;
}

}  // namespace

EmReport em_fit(const ObservationSet& obs, int d, const EmConfig& config,
                const ObjectivePoint& init) {
    if (config.max_iters < 1) throw std::invalid_argument("EmConfig: max_iters >= 1");
    if (!(config.ll_tol > 0.0)) throw std::invalid_argument("EmConfig: ll_tol > 0");
    if (obs.d != d) throw std::invalid_argument("em_fit: d does not match observations");
    const bool hard = config.hard_assign;
    if (!hard && !(obs.sigma > 0.0)) {
        throw std::domain_error(
            "em_fit: sigma == 0 makes the likelihood degenerate; enable hard_assign");
    }

    Signal x = init.x;
    ShiftPmf p = init.p;
    std::vector<double> trace;
    double prev = kNegInf;
    int iters = 0;

    const auto t0 = std::chrono::steady_clock::now();
    for (int it = 1; it <= config.max_iters; ++it) {
        const Responsibilities w = hard ? e_step_hard(x, p, obs) : e_step(x, p, obs);
        auto [x_new, p_new] = m_step(w, obs, d, x);
        x = std::move(x_new);
        p = std::move(p_new);
        const double ll = hard ? hard_objective(x, p, obs) : log_likelihood(x, p, obs);
        trace.push_back(ll);
        iters = it;
        if (it >= 2 && ll - prev < config.ll_tol) break;
        prev = ll;
    }
    const auto t1 = std::chrono::steady_clock::now();

    EmReport rep{std::move(x), std::move(p), std::move(trace), iters,
                 std::chrono::duration<double>(t1 - t0).count()};
    return rep;
}

}  // namespace msr
