#include "msr/tensor.hpp"

namespace msr {

std::vector<SimplexTriple> simplex_triples(int m) {
    std::vector<SimplexTriple> out;
    out.reserve(static_cast<size_t>(m) * (m + 1) * (m + 2) / 6);
    for (int i = 0; i < m; ++i) {
        for (int j = i; j < m; ++j) {
            for (int k = j; k < m; ++k) {
                double mult = 6.0;
                if (i == j && j == k) {
                    mult = 1.0;
                } else if (i == j || j == k) {
                    mult = 3.0;
                }
                out.push_back({i, j, k, mult});
            }
        }
    }
    return out;
}

std::vector<SimplexPair> simplex_pairs(int m) {
    std::vector<SimplexPair> out;
    out.reserve(static_cast<size_t>(m) * (m + 1) / 2);
    for (int i = 0; i < m; ++i) {
        for (int j = i; j < m; ++j) {
            out.push_back({i, j, i == j ? 1.0 : 2.0});
        }
    }
    return out;
}

}  // namespace msr
