#include "msr/alignment.hpp"

#include <stdexcept>

namespace msr {

AlignmentResult align_and_mse(const Signal& x_ref, const ShiftPmf& p_ref,
                              const Signal& x_est, const ShiftPmf& p_est) {
    const int d = x_ref.size();
    if (p_ref.size() != d || x_est.size() != d || p_est.size() != d) {
        throw std::domain_error("align_and_mse: all four vectors must share length d");
    }

    AlignmentResult best;
    bool have = false;
    for (int r = 0; r < d; ++r) {
        double err = 0.0;
        for (int n = 0; n < d; ++n) {
            const double diff = x_ref[n] - x_est[(n + r) % d];
            err += diff * diff;
        }
        if (!have || err < best.mse_x) {
            have = true;
            best.best_shift = r;
            best.mse_x = err;
        }
    }

    double perr = 0.0;
    for (int s = 0; s < d; ++s) {
        const double diff = p_ref[s] - p_est[(s + best.best_shift) % d];
        perr += diff * diff;
    }
    best.mse_p = perr;
    return best;
}

}  // namespace msr
