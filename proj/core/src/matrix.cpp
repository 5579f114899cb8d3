// SPDX-License-Identifier: Apache-2.0
#include "plclab/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace plclab {

namespace {

void require_same_shape(const ComplexMatrix& a, const ComplexMatrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                                std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                                " vs " + std::to_string(b.rows()) + "x" +
                                std::to_string(b.cols()));
  }
}

}  // namespace

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols) {}

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (data_.size() != rows * cols) {
    throw std::invalid_argument("ComplexMatrix: entry count does not match shape");
  }
}

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
  ComplexMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const double> values) {
  ComplexMatrix m(values.size(), values.size());
  for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
  return m;
}

std::vector<cplx> ComplexMatrix::column(std::size_t c) const {
  std::vector<cplx> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

ComplexMatrix ComplexMatrix::adjoint() const {
  ComplexMatrix out(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) out(c, r) = std::conj((*this)(r, c));
  }
  return out;
}

cplx ComplexMatrix::trace() const {
  cplx t = 0.0;
  for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
  return t;
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& rhs) {
  require_same_shape(*this, rhs, "operator+=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += rhs.data_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& rhs) {
  require_same_shape(*this, rhs, "operator-=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= rhs.data_[i];
  return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(cplx scale) {
  for (auto& v : data_) v *= scale;
  return *this;
}

ComplexMatrix operator+(ComplexMatrix lhs, const ComplexMatrix& rhs) { return lhs += rhs; }
ComplexMatrix operator-(ComplexMatrix lhs, const ComplexMatrix& rhs) { return lhs -= rhs; }
ComplexMatrix operator*(cplx scale, ComplexMatrix m) { return m *= scale; }

ComplexMatrix operator*(const ComplexMatrix& lhs, const ComplexMatrix& rhs) {
  if (lhs.cols() != rhs.rows()) {
    throw std::invalid_argument("matrix product: inner dimensions differ (" +
                                std::to_string(lhs.cols()) + " vs " +
                                std::to_string(rhs.rows()) + ")");
  }
  ComplexMatrix out(lhs.rows(), rhs.cols());
  for (std::size_t i = 0; i < lhs.rows(); ++i) {
    auto out_row = out.row(i);
    for (std::size_t k = 0; k < lhs.cols(); ++k) {
      const cplx a = lhs(i, k);
      if (a == cplx{}) continue;
      auto rhs_row = rhs.row(k);
      for (std::size_t j = 0; j < rhs.cols(); ++j) out_row[j] += a * rhs_row[j];
    }
  }
  return out;
}

std::vector<cplx> operator*(const ComplexMatrix& m, std::span<const cplx> x) {
  if (m.cols() != x.size()) {
    throw std::invalid_argument("matrix-vector product: dimension mismatch");
  }
  std::vector<cplx> out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    cplx acc = 0.0;
    auto r = m.row(i);
    for (std::size_t j = 0; j < x.size(); ++j) acc += r[j] * x[j];
    out[i] = acc;
  }
  return out;
}

ComplexMatrix gram(const ComplexMatrix& a) {
  const std::size_t n = a.rows();
  ComplexMatrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    auto ri = a.row(i);
    for (std::size_t j = 0; j <= i; ++j) {
      auto rj = a.row(j);
      cplx acc = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) acc += ri[k] * std::conj(rj[k]);
      out(i, j) = acc;
      out(j, i) = std::conj(acc);
    }
    out(i, i) = out(i, i).real();
  }
  return out;
}

double frobenius_norm(const ComplexMatrix& m) {
  double acc = 0.0;
  for (const auto& v : m.data()) acc += std::norm(v);
  return std::sqrt(acc);
}

double max_abs(const ComplexMatrix& m) {
  double best = 0.0;
  for (const auto& v : m.data()) best = std::max(best, std::abs(v));
  return best;
}

bool all_finite(const ComplexMatrix& m) {
  return std::all_of(m.data().begin(), m.data().end(), [](const cplx& v) {
    return std::isfinite(v.real()) && std::isfinite(v.imag());
  });
}

double relative_error(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_shape(a, b, "relative_error");
  const double denom = std::max(frobenius_norm(b), std::numeric_limits<double>::min());
  return frobenius_norm(a - b) / denom;
}

}  // namespace plclab
