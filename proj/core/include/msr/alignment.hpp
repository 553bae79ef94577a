#pragma once

#include "msr/signal.hpp"

namespace msr {

/// Outcome of resolving the joint cyclic-shift ambiguity between a
/// reference pair and an estimate pair.
struct AlignmentResult {
    int best_shift = 0;   // r in [0, d)
    double mse_x = 0.0;   // ||x_ref - shift(x_est, r)||^2 at the best r
    double mse_p = 0.0;   // ||p_ref - shift(p_est, r)||^2 at the same r
};

/// Scans all d joint shifts r, forming x'[n] = x_est[(n+r) mod d] and
/// p'[s] = p_est[(s+r) mod d] (the pairing that leaves the invariant
/// features unchanged), and returns the r minimizing ||x_ref - x'||^2.
/// Ties go to the smallest r. MSE is the raw squared norm.
AlignmentResult align_and_mse(const Signal& x_ref, const ShiftPmf& p_ref,
                              const Signal& x_est, const ShiftPmf& p_est);

}  // namespace msr
