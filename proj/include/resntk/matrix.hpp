#pragma once

#include <cstddef>
#include <vector>

#include "resntk/rng.hpp"

namespace resntk {

using Vector = std::vector<double>;

// Dense row-major matrix of 64-bit floats.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const {
    return data[i * cols + j];
  }
};

double dot(const Vector& a, const Vector& b);
double squared_norm(const Vector& a);

Vector matvec(const Matrix& a, const Vector& x);             // a · x
Vector matvec_transposed(const Matrix& a, const Vector& x);  // aᵀ · x
Matrix matmul(const Matrix& a, const Matrix& b);
double frobenius_dot(const Matrix& a, const Matrix& b);

// Standard-normal entries, deterministic in the stream.
Matrix gaussian_matrix(const RngStream& rng, std::size_t rows, std::size_t cols);

// Solves (h + jitter·I)·x = b for symmetric positive definite h via Cholesky.
// Throws NotPositiveDefinite when a pivot is not safely positive, which
// signals the caller to raise the jitter.
Matrix spd_solve(const Matrix& h, const Matrix& b, double jitter);

}  // namespace resntk
