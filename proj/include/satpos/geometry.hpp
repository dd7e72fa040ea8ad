#ifndef SATPOS_GEOMETRY_HPP
#define SATPOS_GEOMETRY_HPP

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "satpos/errors.hpp"
#include "satpos/rng.hpp"

namespace satpos {

using Vector3 = Eigen::Vector3d;
using Vector4 = Eigen::Vector4d;
using Matrix4 = Eigen::Matrix4d;
using VectorX = Eigen::VectorXd;
using DesignMatrix = Eigen::Matrix<double, Eigen::Dynamic, 4>;

/// Normal matrices with a condition number above this are treated as singular.
inline constexpr double kMaxCondition = 1e12;

/// Direction from receiver to a satellite above the horizon (u3 >= 0).
class UnitVector3 {
 public:
  /// Normalizes `v`; throws std::invalid_argument on a zero vector or u3 < 0.
  explicit UnitVector3(const Vector3& v);

  const Vector3& vec() const { return u_; }
  double operator[](int i) const { return u_[i]; }

 private:
  Vector3 u_;
};

/// S satellite directions and the S x 4 design matrix with rows (-u_s^T, 1).
class Geometry {
 public:
  explicit Geometry(std::vector<UnitVector3> units);

  int sat_count() const { return static_cast<int>(units_.size()); }
  const std::vector<UnitVector3>& units() const { return units_; }
  const DesignMatrix& design() const { return design_; }
  Eigen::RowVector4d row(int s) const { return design_.row(s); }

 private:
  std::vector<UnitVector3> units_;
  DesignMatrix design_;
};

/// Draws `sat_count` i.i.d. directions uniform on the northern hemisphere:
/// u3 ~ U[0,1] (the exact marginal), azimuth ~ U[0, 2pi).
Geometry sample_hemisphere(RngStream& rng, int sat_count);

/// G^T G for any expression with four columns.
template <typename Derived>
Matrix4 normal_matrix(const Eigen::MatrixBase<Derived>& design) {
  static_assert(Derived::ColsAtCompileTime == 4 || Derived::ColsAtCompileTime == Eigen::Dynamic);
  Matrix4 n = Matrix4::Zero();
  n.template selfadjointView<Eigen::Lower>().rankUpdate(design.transpose());
  return n.template selfadjointView<Eigen::Lower>();
}

inline Matrix4 normal_matrix(const Geometry& g) { return normal_matrix(g.design()); }

/// Ratio of extreme eigenvalues of a symmetric PSD matrix (inf when singular).
double condition_number(const Matrix4& normal);

/// Factorized G^T G, gated on rank and conditioning. Shared by every
/// estimator that solves the normal equations.
class NormalSolver {
 public:
  explicit NormalSolver(const Geometry& g);
  explicit NormalSolver(const Matrix4& normal, int sat_count);

  const Matrix4& normal() const { return normal_; }
  const Matrix4& inverse() const { return inverse_; }
  double condition() const { return cond_; }

  template <typename Rhs>
  Vector4 solve(const Eigen::MatrixBase<Rhs>& rhs) const {
    return lu_.solve(rhs);
  }

 private:
  Matrix4 normal_;
  Eigen::PartialPivLU<Matrix4> lu_;
  Matrix4 inverse_;
  double cond_;
};

/// sqrt(tr((G^T G)^-1)); throws SingularGeometry.
double dop(const Geometry& g);
double dop(const Matrix4& normal, int sat_count);

}  // namespace satpos

#endif  // SATPOS_GEOMETRY_HPP
