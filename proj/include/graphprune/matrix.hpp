#pragma once

#include <vector>

namespace graphprune {

// Dense row-major matrix of doubles; the numeric workhorse for the compute
// engine and the desk-scale MLP.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

    double& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    double operator()(int r, int c) const {
        return data[static_cast<std::size_t>(r) * cols + c];
    }

    const double* row(int r) const { return data.data() + static_cast<std::size_t>(r) * cols; }
    double* row(int r) { return data.data() + static_cast<std::size_t>(r) * cols; }
};

} // namespace graphprune
