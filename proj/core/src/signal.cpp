#include "msr/signal.hpp"

#include <cmath>
#include <numeric>

namespace msr {

Signal::Signal(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) {
        throw std::invalid_argument("Signal: length must be at least 1");
    }
    for (double v : values_) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("Signal: entries must be finite");
        }
    }
}

ShiftPmf::ShiftPmf(std::vector<double> mass) : mass_(std::move(mass)) {
    if (mass_.empty()) {
        throw std::invalid_argument("ShiftPmf: length must be at least 1");
    }
    double sum = 0.0;
    for (double v : mass_) {
        if (!(v >= 0.0)) {
            throw std::invalid_argument("ShiftPmf: entries must be nonnegative");
        }
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
        throw std::invalid_argument("ShiftPmf: entries must sum to 1 within 1e-12");
    }
}

ShiftPmf ShiftPmf::uniform(int d) {
    return ShiftPmf(std::vector<double>(static_cast<size_t>(d), 1.0 / d));
}

ShiftPmf ShiftPmf::delta(int d, int s) {
    if (s < 0 || s >= d) {
        throw std::domain_error("ShiftPmf::delta: s out of range");
    }
    std::vector<double> mass(static_cast<size_t>(d), 0.0);
    mass[static_cast<size_t>(s)] = 1.0;
    return ShiftPmf(std::move(mass));
}

std::vector<double> cyclic_mask(const Signal& x, int s, int m) {
    const int d = x.size();
    if (s < 0 || s >= d) {
        throw std::domain_error("cyclic_mask: shift index out of [0, d)");
    }
    if (m < 1 || m > d) {
        throw std::domain_error("cyclic_mask: window length out of [1, d]");
    }
    std::vector<double> out(static_cast<size_t>(m));
    for (int n = 0; n < m; ++n) {
        out[static_cast<size_t>(n)] = x[(n + s) % d];
    }
    return out;
}

namespace {

std::vector<double> rotate(const std::vector<double>& v, long r) {
    const long d = static_cast<long>(v.size());
    long off = r % d;
    if (off < 0) off += d;
    std::vector<double> out(v.size());
    for (long n = 0; n < d; ++n) {
        out[static_cast<size_t>(n)] = v[static_cast<size_t>((n + off) % d)];
    }
    return out;
}

}  // namespace

Signal cyclic_shift(const Signal& x, long r) {
    return Signal(rotate(x.values(), r));
}

ShiftPmf cyclic_shift(const ShiftPmf& p, long r) {
    return ShiftPmf(rotate(p.mass(), r));
}

}  // namespace msr
