#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>

#include <Eigen/Dense>

namespace insightspec::numeric {

template <typename Scalar>
Scalar standard_normal_pdf(Scalar u) {
  return std::exp(Scalar(-0.5) * u * u) / std::sqrt(Scalar(2) * std::numbers::pi_v<Scalar>);
}

/// Gaussian kernel density estimate at `x`: (1/(n h)) sum phi((x - s_i)/h).
template <typename Derived>
typename Derived::Scalar gaussian_kde(const Eigen::MatrixBase<Derived>& samples,
                                      typename Derived::Scalar bandwidth,
                                      typename Derived::Scalar x) {
  using Scalar = typename Derived::Scalar;
  const auto u = ((samples.array() - x) / bandwidth).eval();
  const Scalar norm = std::sqrt(Scalar(2) * std::numbers::pi_v<Scalar>);
  const Scalar total = (Scalar(-0.5) * u.square()).exp().sum() / norm;
  return total / (static_cast<Scalar>(samples.size()) * bandwidth);
}

/// Sample standard deviation (n - 1 denominator).
template <typename Derived>
typename Derived::Scalar sample_stddev(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  const auto n = static_cast<Scalar>(v.size());
  if (v.size() < 2) return Scalar(0);
  const Scalar mean = v.mean();
  return std::sqrt((v.array() - mean).square().sum() / (n - Scalar(1)));
}

/// 1.06 * sigma * n^(-1/5).
template <typename Derived>
typename Derived::Scalar silverman_bandwidth(const Eigen::MatrixBase<Derived>& samples) {
  using Scalar = typename Derived::Scalar;
  return Scalar(1.06) * sample_stddev(samples) *
         std::pow(static_cast<Scalar>(samples.size()), Scalar(-0.2));
}

/// Solves (X^T X) beta = X^T y by LU with partial pivoting. Returns nullopt
/// when a pivot is negligible relative to the largest one.
template <typename DerivedX, typename DerivedY>
std::optional<Eigen::Matrix<typename DerivedX::Scalar, Eigen::Dynamic, 1>> solve_normal_equations(
    const Eigen::MatrixBase<DerivedX>& design, const Eigen::MatrixBase<DerivedY>& target) {
  using Scalar = typename DerivedX::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  if (design.rows() < design.cols()) return std::nullopt;
  const Matrix gram = design.transpose() * design;
  const Vector rhs = design.transpose() * target;
  const Eigen::PartialPivLU<Matrix> lu(gram);
  const auto pivots = lu.matrixLU().diagonal().cwiseAbs();
  const Scalar largest = pivots.maxCoeff();
  if (!(largest > Scalar(0)) ||
      pivots.minCoeff() <= largest * Scalar(1e-12) * static_cast<Scalar>(gram.rows())) {
    return std::nullopt;
  }
  Vector beta = lu.solve(rhs);
  // One step of iterative refinement tightens the residual orthogonality.
  const Vector correction = lu.solve(rhs - gram * beta);
  beta += correction;
  if (!beta.allFinite()) return std::nullopt;
  return beta;
}

/// Gini impurity 1 - sum p_k^2 of a vector of class counts.
template <typename Derived>
double gini_impurity(const Eigen::DenseBase<Derived>& counts) {
  const double total = static_cast<double>(counts.sum());
  if (total <= 0) return 0.0;
  return 1.0 - (counts.template cast<double>().array() / total).square().sum();
}

inline double harmonic_number(double i) {
  constexpr double kEulerMascheroni = 0.5772156649015329;
  return std::log(i) + kEulerMascheroni;
}

/// Average unsuccessful-search path length in a binary search tree of n
/// points: 2 H(n-1) - 2 (n-1) / n, with c(2) = 1 and c(n <= 1) = 0.
inline double average_path_length(std::size_t n) {
  if (n <= 1) return 0.0;
  if (n == 2) return 1.0;
  const double m = static_cast<double>(n);
  return 2.0 * harmonic_number(m - 1.0) - 2.0 * (m - 1.0) / m;
}

}  // namespace insightspec::numeric
