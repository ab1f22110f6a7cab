#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace fewgraph {

// Row-major 64-bit matrix; cols == 1 for vectors.
struct Tensor {
    int rows = 0;
    int cols = 1;
    std::vector<double> v;

    Tensor() = default;
    Tensor(int r, int c) : rows(r), cols(c), v(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), 0.0) {}

    double& at(int r, int c) { return v[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(c)]; }
    double at(int r, int c) const { return v[static_cast<std::size_t>(r) * static_cast<std::size_t>(cols) + static_cast<std::size_t>(c)]; }
    std::size_t size() const { return v.size(); }
    void zero() { std::fill(v.begin(), v.end(), 0.0); }
};

// y += W x
inline void gemv_add(const Tensor& w, const std::vector<double>& x, std::vector<double>& y) {
    const double* wp = w.v.data();
    for (int r = 0; r < w.rows; ++r) {
        double acc = 0.0;
        const double* row = wp + static_cast<std::size_t>(r) * static_cast<std::size_t>(w.cols);
        for (int c = 0; c < w.cols; ++c) acc += row[c] * x[static_cast<std::size_t>(c)];
        y[static_cast<std::size_t>(r)] += acc;
    }
}

// y += W^T d   (back-propagating through y = W x)
inline void gemv_t_add(const Tensor& w, const std::vector<double>& d, std::vector<double>& y) {
    const double* wp = w.v.data();
    for (int r = 0; r < w.rows; ++r) {
        const double dr = d[static_cast<std::size_t>(r)];
        if (dr == 0.0) continue;
        const double* row = wp + static_cast<std::size_t>(r) * static_cast<std::size_t>(w.cols);
        for (int c = 0; c < w.cols; ++c) y[static_cast<std::size_t>(c)] += row[c] * dr;
    }
}

// dW += d x^T
inline void outer_add(Tensor& dw, const std::vector<double>& d, const std::vector<double>& x) {
    double* wp = dw.v.data();
    for (int r = 0; r < dw.rows; ++r) {
        const double dr = d[static_cast<std::size_t>(r)];
        if (dr == 0.0) continue;
        double* row = wp + static_cast<std::size_t>(r) * static_cast<std::size_t>(dw.cols);
        for (int c = 0; c < dw.cols; ++c) row[c] += dr * x[static_cast<std::size_t>(c)];
    }
}

inline void add_to(std::vector<double>& y, const std::vector<double>& x) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += x[i];
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// In-place stable softmax.
inline void softmax(std::vector<double>& z) {
    double m = z[0];
    for (double x : z) m = std::max(m, x);
    double sum = 0.0;
    for (double& x : z) {
        x = std::exp(x - m);
        sum += x;
    }
    for (double& x : z) x /= sum;
}

} // namespace fewgraph
