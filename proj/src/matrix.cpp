#include "resntk/matrix.hpp"

#include <cmath>
#include <limits>

#include "resntk/errors.hpp"

namespace resntk {

double dot(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double squared_norm(const Vector& a) { return dot(a, a); }

Vector matvec(const Matrix& a, const Vector& x) {
  if (x.size() != a.cols) throw ShapeMismatch("matvec: dimension mismatch");
  Vector y(a.rows, 0.0);
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* row = a.data.data() + i * a.cols;
    double s = 0.0;
    for (std::size_t j = 0; j < a.cols; ++j) s += row[j] * x[j];
    y[i] = s;
  }
  return y;
}

Vector matvec_transposed(const Matrix& a, const Vector& x) {
  if (x.size() != a.rows) {
    throw ShapeMismatch("matvec_transposed: dimension mismatch");
  }
  Vector y(a.cols, 0.0);
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* row = a.data.data() + i * a.cols;
    const double xi = x[i];
    for (std::size_t j = 0; j < a.cols; ++j) y[j] += row[j] * xi;
  }
  return y;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows) throw ShapeMismatch("matmul: dimension mismatch");
  Matrix c(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      const double* brow = b.data.data() + k * b.cols;
      double* crow = c.data.data() + i * c.cols;
      for (std::size_t j = 0; j < b.cols; ++j) crow[j] += aik * brow[j];
    }
  }
  return c;
}

double frobenius_dot(const Matrix& a, const Matrix& b) {
  if (a.rows != b.rows || a.cols != b.cols) {
    throw ShapeMismatch("frobenius_dot: shape mismatch");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) s += a.data[i] * b.data[i];
  return s;
}

Matrix gaussian_matrix(const RngStream& rng, std::size_t rows,
                       std::size_t cols) {
  Matrix m(rows, cols);
  RandomSequence seq(rng);
  for (double& v : m.data) v = seq.next_gaussian();
  return m;
}

Matrix spd_solve(const Matrix& h, const Matrix& b, double jitter) {
  if (h.rows != h.cols) throw ShapeMismatch("spd_solve: h must be square");
  if (b.rows != h.rows) throw ShapeMismatch("spd_solve: b row mismatch");
  const std::size_t n = h.rows;

  Matrix l(n, n);
  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    max_diag = std::max(max_diag, std::abs(h(i, i)) + jitter);
  }
  const double pivot_floor =
      double(n) * std::numeric_limits<double>::epsilon() * max_diag;

  for (std::size_t j = 0; j < n; ++j) {
    double d = h(j, j) + jitter;
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > pivot_floor)) {
      throw NotPositiveDefinite(
          "spd_solve: factorization failed at pivot " + std::to_string(j) +
          "; raise the jitter");
    }
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = h(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }

  // Forward then backward substitution, one right-hand side at a time.
  Matrix x(b.rows, b.cols);
  Vector col(n), y(n);
  for (std::size_t c = 0; c < b.cols; ++c) {
    for (std::size_t i = 0; i < n; ++i) col[i] = b(i, c);
    for (std::size_t i = 0; i < n; ++i) {
      double s = col[i];
      for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * y[k];
      y[i] = s / l(i, i);
    }
    for (std::size_t ii = n; ii-- > 0;) {
      double s = y[ii];
      for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * col[k];
      col[ii] = s / l(ii, ii);
    }
    for (std::size_t i = 0; i < n; ++i) x(i, c) = col[i];
  }
  return x;
}

}  // namespace resntk
