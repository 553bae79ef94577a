#include "msr/rng.hpp"

#include <cmath>
#include <numbers>

namespace msr {

double Rng::gaussian() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // 1-u keeps the log argument in (0, 1].
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
}

double Rng::exponential() {
    return -std::log(1.0 - uniform());
}

int Rng::categorical(const std::vector<double>& pmf) {
    const double u = uniform();
    double cum = 0.0;
    int last_positive = 0;
    for (int s = 0; s < static_cast<int>(pmf.size()); ++s) {
        const double w = pmf[static_cast<size_t>(s)];
        if (w > 0.0) last_positive = s;
        cum += w;
        if (u < cum) return s;
    }
    // u landed past the accumulated total due to rounding.
    return last_positive;
}

}  // namespace msr
