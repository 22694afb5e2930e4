// Shared domain types for recursive sparse tracking: support sets,
// Gaussian beliefs, measurement/dynamics models and the LSM hyperprior.
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace playcs {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;

// Thrown when a numerical procedure cannot continue (singular innovation
// covariance, indefinite posterior, non-finite objective).
struct numerical_error : std::runtime_error {
  explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

// Ordered set of active coordinates T within an ambient dimension N.
// Indices are unique, strictly increasing and < N.
class SupportSet {
 public:
  SupportSet() = default;

  SupportSet(std::vector<int> indices, int ambient_dim)
      : indices_(std::move(indices)), ambient_dim_(ambient_dim) {
    if (ambient_dim_ < 0) throw std::invalid_argument("SupportSet: negative ambient dim");
    int prev = -1;
    for (int i : indices_) {
      if (i <= prev || i >= ambient_dim_)
        throw std::invalid_argument("SupportSet: indices must be sorted, unique and < ambient dim");
      prev = i;
    }
  }

  static SupportSet empty(int ambient_dim) { return SupportSet({}, ambient_dim); }

  static SupportSet full(int ambient_dim) {
    std::vector<int> all(static_cast<size_t>(ambient_dim));
    for (int i = 0; i < ambient_dim; ++i) all[static_cast<size_t>(i)] = i;
    return SupportSet(std::move(all), ambient_dim);
  }

  const std::vector<int>& indices() const { return indices_; }
  int ambient_dim() const { return ambient_dim_; }
  int size() const { return static_cast<int>(indices_.size()); }

  bool contains(int i) const {
    return std::binary_search(indices_.begin(), indices_.end(), i);
  }

  SupportSet complement() const {
    std::vector<int> comp;
    comp.reserve(static_cast<size_t>(ambient_dim_ - size()));
    size_t k = 0;
    for (int i = 0; i < ambient_dim_; ++i) {
      if (k < indices_.size() && indices_[k] == i) {
        ++k;
      } else {
        comp.push_back(i);
      }
    }
    return SupportSet(std::move(comp), ambient_dim_);
  }

  bool operator==(const SupportSet& o) const {
    return ambient_dim_ == o.ambient_dim_ && indices_ == o.indices_;
  }

 private:
  std::vector<int> indices_;
  int ambient_dim_ = 0;
};

// Posterior mean and Hermitian PSD covariance of the state estimate.
struct GaussianBelief {
  CVec mean;
  CMat cov;

  int dim() const { return static_cast<int>(mean.size()); }
};

// Linear observation y = A x + n, n ~ CN(0, R).
struct MeasurementModel {
  CMat A;
  CMat R;

  int m() const { return static_cast<int>(A.rows()); }
  int n() const { return static_cast<int>(A.cols()); }

  static MeasurementModel isotropic(CMat a, double noise_var) {
    const auto rows = a.rows();
    MeasurementModel mm;
    mm.A = std::move(a);
    mm.R = noise_var * CMat::Identity(rows, rows);
    return mm;
  }
};

// Linear dynamics x_t = F x_{t-1} + v, v ~ CN(0, Q).
struct DynamicsModel {
  CMat F;
  CMat Q;

  int dim() const { return static_cast<int>(F.rows()); }

  static DynamicsModel random_walk(int n, double process_var) {
    DynamicsModel d;
    d.F = CMat::Identity(n, n);
    d.Q = process_var * CMat::Identity(n, n);
    return d;
  }
};

// Gamma(a, b) hyperprior on the inverse scales of the off-support
// Laplacian innovations (a = shape, b = inverse scale).
struct LsmPrior {
  double a = 1.0;
  double b = 1.0;

  bool valid() const { return a > 0.0 && b > 0.0; }
};

}  // namespace playcs
