#pragma once

#include <stdexcept>
#include <vector>

namespace msr {

/// Periodic real signal of length d. Entries must be finite.
class Signal {
public:
    explicit Signal(std::vector<double> values);

    int size() const { return static_cast<int>(values_.size()); }
    double operator[](int n) const { return values_[static_cast<size_t>(n)]; }

    /// Entry at index n reduced modulo d; accepts any integer.
    double at_mod(long n) const {
        const long d = static_cast<long>(values_.size());
        long r = n % d;
        if (r < 0) r += d;
        return values_[static_cast<size_t>(r)];
    }

    const std::vector<double>& values() const { return values_; }

private:
    std::vector<double> values_;
};

/// Probability mass function over window start positions 0..d-1.
/// Entries are nonnegative and sum to one within 1e-12.
class ShiftPmf {
public:
    explicit ShiftPmf(std::vector<double> mass);

    static ShiftPmf uniform(int d);
    static ShiftPmf delta(int d, int s);

    int size() const { return static_cast<int>(mass_.size()); }
    double operator[](int s) const { return mass_[static_cast<size_t>(s)]; }
    const std::vector<double>& mass() const { return mass_; }

private:
    std::vector<double> mass_;
};

/// Window of m consecutive entries of x starting at s, wrapping modulo d.
/// output[n] = x[(n+s) mod d], n = 0..m-1. Throws std::domain_error if
/// s is outside [0, d) or m is outside [1, d].
std::vector<double> cyclic_mask(const Signal& x, int s, int m);

/// Signal rotated by r positions: output[n] = x[(n+r) mod d]. Any integer r.
Signal cyclic_shift(const Signal& x, long r);

/// Pmf rotated by r positions, same index convention as cyclic_shift.
ShiftPmf cyclic_shift(const ShiftPmf& p, long r);

}  // namespace msr
