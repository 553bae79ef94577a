#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "msr/signal.hpp"

namespace msr {

/// K noisy cyclic segments of length m plus the metadata needed to
/// interpret them. true_shifts is kept for diagnostics only; estimators
/// never receive it (they take segments, m and sigma).
struct ObservationSet {
    int d = 0;       // length of the generating signal
    int m = 0;       // window length
    std::int64_t count = 0;  // K
    double sigma = 0.0;
    std::uint64_t seed = 0;
    std::vector<double> segments;  // count x m, row-major
    std::optional<std::vector<int>> true_shifts;

    std::span<const double> row(std::int64_t k) const {
        return {segments.data() + k * m, static_cast<size_t>(m)};
    }
};

/// Draws K segments y_k = cyclic_mask(x, s_k, m) + noise, with s_k i.i.d.
/// from p and noise entries i.i.d. N(0, sigma^2). One seeded stream; per
/// segment the shift is drawn first, then the m noise values, so a fixed
/// seed reproduces the set bit for bit.
ObservationSet generate_observations(const Signal& x, const ShiftPmf& p, int m,
                                     double sigma, std::int64_t count,
                                     std::uint64_t seed);

/// MSR1 text format:
///   MSR1 d=<d> m=<m> K=<K> sigma=<float>
/// followed by K lines of m comma-separated decimal floats.
void save_msr1(const ObservationSet& obs, const std::string& path);
void save_msr1(const ObservationSet& obs, std::ostream& out);

/// Parses an MSR1 file. Malformed headers and rows are rejected with a
/// line-numbered message; a declared or actual K of zero is rejected
/// with "no observations".
ObservationSet load_msr1(const std::string& path);
ObservationSet load_msr1(std::istream& in, const std::string& name);

}  // namespace msr
