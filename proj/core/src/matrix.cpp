#include "topemb/matrix.hpp"

#include <algorithm>

namespace topemb {

Matrix matmul(const Matrix& a, const Matrix& b) {
  assert(a.cols() == b.rows());
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

Matrix matmul_transposed(const Matrix& a, const Matrix& b) {
  assert(a.cols() == b.cols());
  Matrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j) out(i, j) = dot(a.row(i), b.row(j));
  return out;
}

std::vector<double> column_means(const Matrix& points) {
  std::vector<double> mean(points.cols(), 0.0);
  if (points.rows() == 0) return mean;
  for (std::size_t r = 0; r < points.rows(); ++r) {
    auto row = points.row(r);
    for (std::size_t c = 0; c < points.cols(); ++c) mean[c] += row[c];
  }
  for (double& m : mean) m /= static_cast<double>(points.rows());
  return mean;
}

Matrix vstack(const Matrix& top, const Matrix& bottom) {
  assert(top.cols() == bottom.cols());
  std::vector<double> data;
  data.reserve(top.data().size() + bottom.data().size());
  data.insert(data.end(), top.data().begin(), top.data().end());
  data.insert(data.end(), bottom.data().begin(), bottom.data().end());
  return Matrix(top.rows() + bottom.rows(), top.cols(), std::move(data));
}

Matrix select_rows(const Matrix& m, std::span<const std::size_t> rows) {
  Matrix out(rows.size(), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto src = m.row(rows[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

}  // namespace topemb
