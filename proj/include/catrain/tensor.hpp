#pragma once
// Dense row-major f64 tensors plus the small set of kernels everything else
// is built on. Shapes are explicit and checked; there is no broadcasting
// beyond scalar-tensor. Matrix products go through BLAS.

#include <cblas.h>

#include <cmath>
#include <cstddef>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace catrain {

struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;

  explicit Tensor(std::vector<std::size_t> s)
      : shape(std::move(s)), data(checked_count(shape), 0.0) {}

  Tensor(std::vector<std::size_t> s, std::vector<double> d)
      : shape(std::move(s)), data(std::move(d)) {
    if (data.size() != checked_count(shape)) {
      throw std::invalid_argument("Tensor: data length " +
                                  std::to_string(data.size()) +
                                  " does not match shape " + shape_str(shape));
    }
  }

  static Tensor zeros(std::vector<std::size_t> s) { return Tensor(std::move(s)); }

  static Tensor full(std::vector<std::size_t> s, double v) {
    Tensor t(std::move(s));
    for (auto& x : t.data) x = v;
    return t;
  }

  std::size_t size() const { return data.size(); }
  std::size_t ndim() const { return shape.size(); }

  std::size_t rows() const {
    require_2d("rows");
    return shape[0];
  }
  std::size_t cols() const {
    require_2d("cols");
    return shape[1];
  }

  double operator()(std::size_t i, std::size_t j) const {
    return data[i * shape[1] + j];
  }
  double& operator()(std::size_t i, std::size_t j) {
    return data[i * shape[1] + j];
  }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }

  bool all_finite() const {
    for (double v : data)
      if (!std::isfinite(v)) return false;
    return true;
  }

  static std::string shape_str(const std::vector<std::size_t>& s) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (i) os << 'x';
      os << s[i];
    }
    os << ']';
    return os.str();
  }

  std::string shape_str() const { return shape_str(shape); }

 private:
  static std::size_t checked_count(const std::vector<std::size_t>& s) {
    if (s.empty()) throw std::invalid_argument("Tensor: empty shape");
    std::size_t n = 1;
    for (auto d : s) {
      if (d == 0) throw std::invalid_argument("Tensor: zero dimension in shape " + shape_str(s));
      n *= d;
    }
    return n;
  }

  void require_2d(const char* what) const {
    if (shape.size() != 2) {
      throw std::invalid_argument(std::string("Tensor::") + what +
                                  ": tensor is not 2-D, shape " + shape_str(shape));
    }
  }
};

namespace detail {

inline void require_matrix(const Tensor& t, const char* op) {
  if (t.ndim() != 2) {
    throw std::invalid_argument(std::string(op) + ": expected a 2-D tensor, got " +
                                t.shape_str());
  }
}

inline void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch " + a.shape_str() +
                                " vs " + b.shape_str());
  }
}

}  // namespace detail

// a[r x k] * b[k x c]
inline Tensor matmul(const Tensor& a, const Tensor& b) {
  detail::require_matrix(a, "matmul");
  detail::require_matrix(b, "matmul");
  if (a.cols() != b.rows()) {
    throw std::invalid_argument("matmul: inner dimensions disagree: " + a.shape_str() +
                                " vs " + b.shape_str());
  }
  Tensor c({a.rows(), b.cols()});
  cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasNoTrans, static_cast<int>(a.rows()),
              static_cast<int>(b.cols()), static_cast<int>(a.cols()), 1.0, a.data.data(),
              static_cast<int>(a.cols()), b.data.data(), static_cast<int>(b.cols()), 0.0,
              c.data.data(), static_cast<int>(c.cols()));
  return c;
}

// transpose(a)[m x k->k x m] * b : a[k x m], b[k x n] -> [m x n]
inline Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  detail::require_matrix(a, "matmul_tn");
  detail::require_matrix(b, "matmul_tn");
  if (a.rows() != b.rows()) {
    throw std::invalid_argument("matmul_tn: leading dimensions disagree: " + a.shape_str() +
                                " vs " + b.shape_str());
  }
  Tensor c({a.cols(), b.cols()});
  cblas_dgemm(CblasRowMajor, CblasTrans, CblasNoTrans, static_cast<int>(a.cols()),
              static_cast<int>(b.cols()), static_cast<int>(a.rows()), 1.0, a.data.data(),
              static_cast<int>(a.cols()), b.data.data(), static_cast<int>(b.cols()), 0.0,
              c.data.data(), static_cast<int>(c.cols()));
  return c;
}

// a * transpose(b) : a[m x k], b[n x k] -> [m x n]
inline Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  detail::require_matrix(a, "matmul_nt");
  detail::require_matrix(b, "matmul_nt");
  if (a.cols() != b.cols()) {
    throw std::invalid_argument("matmul_nt: trailing dimensions disagree: " + a.shape_str() +
                                " vs " + b.shape_str());
  }
  Tensor c({a.rows(), b.rows()});
  cblas_dgemm(CblasRowMajor, CblasNoTrans, CblasTrans, static_cast<int>(a.rows()),
              static_cast<int>(b.rows()), static_cast<int>(a.cols()), 1.0, a.data.data(),
              static_cast<int>(a.cols()), b.data.data(), static_cast<int>(b.cols()), 0.0,
              c.data.data(), static_cast<int>(c.cols()));
  return c;
}

inline Tensor add(const Tensor& a, const Tensor& b) {
  detail::require_same_shape(a, b, "add");
  Tensor c = a;
  for (std::size_t i = 0; i < c.size(); ++i) c.data[i] += b.data[i];
  return c;
}

inline Tensor sub(const Tensor& a, const Tensor& b) {
  detail::require_same_shape(a, b, "sub");
  Tensor c = a;
  for (std::size_t i = 0; i < c.size(); ++i) c.data[i] -= b.data[i];
  return c;
}

inline Tensor mul(const Tensor& a, const Tensor& b) {
  detail::require_same_shape(a, b, "mul");
  Tensor c = a;
  for (std::size_t i = 0; i < c.size(); ++i) c.data[i] *= b.data[i];
  return c;
}

inline Tensor add_scalar(const Tensor& a, double s) {
  Tensor c = a;
  for (auto& v : c.data) v += s;
  return c;
}

inline Tensor scale(const Tensor& a, double s) {
  Tensor c = a;
  for (auto& v : c.data) v *= s;
  return c;
}

inline Tensor relu(const Tensor& a) {
  Tensor c = a;
  for (auto& v : c.data) v = v > 0.0 ? v : 0.0;
  return c;
}

// sign(0) = 0
inline Tensor sign(const Tensor& a) {
  Tensor c = a;
  for (auto& v : c.data) v = (v > 0.0) ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
  return c;
}

inline Tensor clamp(const Tensor& a, double lo, double hi) {
  if (!(lo <= hi)) {
    throw std::invalid_argument("clamp: lo " + std::to_string(lo) + " exceeds hi " +
                                std::to_string(hi));
  }
  Tensor c = a;
  for (auto& v : c.data) v = v < lo ? lo : (v > hi ? hi : v);
  return c;
}

// Row-wise log-softmax with max subtraction; rows exponentiate-and-sum to 1.
inline Tensor log_softmax(const Tensor& logits) {
  detail::require_matrix(logits, "log_softmax");
  const std::size_t b = logits.rows(), k = logits.cols();
  if (k < 2) {
    throw std::invalid_argument("log_softmax: need at least 2 classes, got " +
                                logits.shape_str());
  }
  Tensor out({b, k});
  for (std::size_t i = 0; i < b; ++i) {
    const double* row = &logits.data[i * k];
    double m = row[0];
    for (std::size_t j = 1; j < k; ++j) m = std::max(m, row[j]);
    double sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) sum += std::exp(row[j] - m);
    const double lse = m + std::log(sum);
    for (std::size_t j = 0; j < k; ++j) out.data[i * k + j] = row[j] - lse;
  }
  return out;
}

}  // namespace catrain
