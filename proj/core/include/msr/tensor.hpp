#pragma once

#include <cstddef>
#include <vector>

namespace msr {

/// Dense square matrix, row-major.
class Matrix {
public:
    Matrix() = default;
    explicit Matrix(int n) : n_(n), data_(static_cast<size_t>(n) * n, 0.0) {}

    int size() const { return n_; }
    double& operator()(int i, int j) { return data_[idx(i, j)]; }
    double operator()(int i, int j) const { return data_[idx(i, j)]; }
    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

private:
    size_t idx(int i, int j) const {
        return static_cast<size_t>(i) * n_ + static_cast<size_t>(j);
    }
    int n_ = 0;
    std::vector<double> data_;
};

/// Dense cubical order-3 tensor, row-major (i slow, k fast).
class Tensor3 {
public:
    Tensor3() = default;
    explicit Tensor3(int n) : n_(n), data_(static_cast<size_t>(n) * n * n, 0.0) {}

    int size() const { return n_; }
    double& operator()(int i, int j, int k) { return data_[idx(i, j, k)]; }
    double operator()(int i, int j, int k) const { return data_[idx(i, j, k)]; }
    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

private:
    size_t idx(int i, int j, int k) const {
        return (static_cast<size_t>(i) * n_ + static_cast<size_t>(j)) * n_ +
               static_cast<size_t>(k);
    }
    int n_ = 0;
    std::vector<double> data_;
};

/// Index tuple on the simplex i <= j <= k with its orbit size under
/// permutations (6 for distinct indices, 3 for a repeated pair, 1 for a
/// triple repeat). Accumulating on the simplex and weighting by `mult`
/// reproduces full-tensor sums exactly.
struct SimplexTriple {
    int i, j, k;
    double mult;
};

std::vector<SimplexTriple> simplex_triples(int m);

struct SimplexPair {
    int i, j;
    double mult;
};

std::vector<SimplexPair> simplex_pairs(int m);

}  // namespace msr
