#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "umpire/errors.hpp"

namespace umpire {

namespace detail {

/**
 * In-place lower Cholesky of a symmetric positive-definite matrix, returning
 * log det = sum over j of log(L_jj^2). Only the lower triangle of `a` is read
 * and overwritten. Throws NumericError carrying the index of the offending
 * leading minor when a pivot is nonpositive, which is how a caller learns the
 * input was not positive definite.
 */
template <typename Scalar>
Scalar cholesky_logdet_in_place(
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& a) {
  const Eigen::Index n = a.rows();
  Scalar logdet = Scalar(0);
  for (Eigen::Index j = 0; j < n; ++j) {
    Scalar s = a(j, j) - a.row(j).head(j).squaredNorm();
    if (!(s > Scalar(0)) || !std::isfinite(static_cast<double>(s))) {
      throw NumericError("cholesky: leading minor " + std::to_string(j + 1) +
                         " is not positive definite");
    }
    s = std::sqrt(s);
    a(j, j) = s;
    if (j + 1 < n) {
      a.col(j).tail(n - j - 1) =
          (a.col(j).tail(n - j - 1) -
           a.bottomLeftCorner(n - j - 1, j) * a.row(j).head(j).transpose()) /
          s;
    }
    logdet += Scalar(2) * std::log(s);
  }
  return logdet;
}

}  // namespace detail

/**
 * k x d matrix of response embeddings, one unit row per sampled response.
 * Rows whose norm strays from 1 by more than 1e-6 are renormalized rather
 * than rejected (embedding dumps carry rounding noise); the count of such
 * rows is reported through `renormalized` when the caller wants to warn.
 * Zero rows cannot be normalized and are rejected.
 */
class EmbeddingMatrix {
 public:
  explicit EmbeddingMatrix(Eigen::MatrixXd rows, int* renormalized = nullptr)
      : m_(std::move(rows)) {
    if (m_.rows() < 1 || m_.cols() < 1)
      throw ValidationError("EmbeddingMatrix: need k >= 1 and d >= 1");
    int fixed = 0;
    for (Eigen::Index i = 0; i < m_.rows(); ++i) {
      double norm = m_.row(i).norm();
      if (norm == 0.0 || !std::isfinite(norm))
        throw ValidationError("EmbeddingMatrix: row " + std::to_string(i) +
                              " has invalid norm");
      if (std::abs(norm - 1.0) > 1e-6) {
        m_.row(i) /= norm;
        ++fixed;
      }
    }
    if (renormalized) *renormalized = fixed;
  }

  // Rows supplied one vector at a time; all must share dimension d.
  static EmbeddingMatrix from_rows(const std::vector<Eigen::VectorXd>& rows,
                                   int* renormalized = nullptr) {
    if (rows.empty()) throw ValidationError("EmbeddingMatrix: no rows");
    const Eigen::Index d = rows.front().size();
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), d);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != d)
        throw StructuralError("EmbeddingMatrix: row " + std::to_string(i) +
                              " has dimension " + std::to_string(rows[i].size()) +
                              ", expected " + std::to_string(d));
      m.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    }
    return EmbeddingMatrix(std::move(m), renormalized);
  }

  const Eigen::MatrixXd& matrix() const { return m_; }
  Eigen::Index k() const { return m_.rows(); }
  Eigen::Index d() const { return m_.cols(); }

 private:
  Eigen::MatrixXd m_;
};

/**
 * k x k matrix of pairwise embedding inner products. Exactly symmetric by
 * construction; the constructor checks symmetry (1e-12) and a unit diagonal
 * (1e-6) so foreign matrices cannot smuggle in a non-Gram. Positive
 * semidefiniteness is not verified eagerly; the Cholesky in logdet_jittered
 * is the operational check.
 */
class GramMatrix {
 public:
  explicit GramMatrix(Eigen::MatrixXd g) : g_(std::move(g)) {
    if (g_.rows() != g_.cols())
      throw StructuralError("GramMatrix: matrix is not square");
    if ((g_ - g_.transpose()).cwiseAbs().maxCoeff() > 1e-12)
      throw ValidationError("GramMatrix: not symmetric within 1e-12");
    if ((g_.diagonal().array() - 1.0).abs().maxCoeff() > 1e-6)
      throw ValidationError("GramMatrix: diagonal departs from 1 beyond 1e-6");
  }

  const Eigen::MatrixXd& matrix() const { return g_; }
  Eigen::Index k() const { return g_.rows(); }

 private:
  Eigen::MatrixXd g_;
};

// Phi Phi^T via a symmetric rank-k update, so the result is exactly symmetric.
inline GramMatrix gram(const EmbeddingMatrix& phi) {
  const Eigen::Index k = phi.k();
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(k, k);
  g.selfadjointView<Eigen::Lower>().rankUpdate(phi.matrix());
  g = g.selfadjointView<Eigen::Lower>();
  return GramMatrix(std::move(g));
}

/**
 * log det(G + epsilon I) for symmetric PSD G, via Cholesky of the jittered
 * matrix (sum of logs of the squared factor diagonal). Finite for every PSD
 * input because the jitter bounds eigenvalues away from zero.
 */
template <typename Derived>
typename Derived::Scalar logdet_jittered(const Eigen::MatrixBase<Derived>& g,
                                         typename Derived::Scalar epsilon) {
  using Scalar = typename Derived::Scalar;
  if (!(epsilon > Scalar(0)))
    throw ValidationError("logdet_jittered: epsilon must be positive");
  if (g.rows() != g.cols())
    throw StructuralError("logdet_jittered: matrix is not square");
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> a = g;
  a.diagonal().array() += epsilon;
  return detail::cholesky_logdet_in_place(a);
}

inline double logdet_jittered(const GramMatrix& g, double epsilon) {
  return logdet_jittered(g.matrix(), epsilon);
}

/**
 * Second-moment evaluation path:
 *   log det(Phi Phi^T + eps I_k) = k log eps + log det(I_d + (k/eps) S_k),
 * with S_k = (1/k) Phi^T Phi, whose nonzero spectrum is the squared singular
 * values of Phi. Evaluated through those singular values directly,
 *   sum_i log(sigma_i^2 + eps) + (k - min(k, d)) log eps,
 * rather than by factoring I + (1/eps) Phi^T Phi: forming the product squares
 * the condition number, and at eps near 1e-8 the +1 on the diagonal falls
 * below one ulp of the scaled entries. Working on Phi itself keeps every term
 * accurate at unit scale; terms with sigma near 1 go through log1p with
 * sigma^2 - 1 formed as (sigma - 1)(sigma + 1) so eps is not lost against 1.
 * Still the cheaper side when k > d, and agrees with the Gram path within
 * 1e-8 relative.
 */
template <typename Derived>
typename Derived::Scalar logdet_second_moment(
    const Eigen::MatrixBase<Derived>& phi, typename Derived::Scalar epsilon) {
  using Scalar = typename Derived::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (!(epsilon > Scalar(0)))
    throw ValidationError("logdet_second_moment: epsilon must be positive");
  const Eigen::Index k = phi.rows();
  const Matrix a = phi;
  const Eigen::BDCSVD<Matrix> svd(a);  // singular values only
  const auto& sv = svd.singularValues();
  Scalar value = Scalar(k - sv.size()) * std::log(epsilon);
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    const Scalar s = sv(i);
    value += s > Scalar(0.5)
                 ? std::log1p((s - Scalar(1)) * (s + Scalar(1)) + epsilon)
                 : std::log(s * s + epsilon);
  }
  if (!std::isfinite(static_cast<double>(value)))
    throw NumericError("logdet_second_moment: non-finite intermediate");
  return value;
}

inline double logdet_second_moment(const EmbeddingMatrix& phi, double epsilon) {
  return logdet_second_moment(phi.matrix(), epsilon);
}

}  // namespace umpire
