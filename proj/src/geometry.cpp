#include "satpos/geometry.hpp"

#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace satpos {

UnitVector3::UnitVector3(const Vector3& v) {
  const double n = v.norm();
  if (!(n > 0.0)) throw std::invalid_argument("unit vector from zero vector");
  u_ = v / n;
  if (u_[2] < 0.0) throw std::invalid_argument("direction below the horizon");
}

Geometry::Geometry(std::vector<UnitVector3> units) : units_(std::move(units)) {
  if (units_.empty()) throw std::invalid_argument("geometry needs at least one satellite");
  design_.resize(static_cast<Eigen::Index>(units_.size()), 4);
  for (std::size_t s = 0; s < units_.size(); ++s) {
    design_.row(static_cast<Eigen::Index>(s)) << -units_[s].vec().transpose(), 1.0;
  }
}

Geometry sample_hemisphere(RngStream& rng, int sat_count) {
  if (sat_count < 1) throw std::invalid_argument("sat_count must be >= 1");
  std::vector<UnitVector3> units;
  units.reserve(static_cast<std::size_t>(sat_count));
  for (int s = 0; s < sat_count; ++s) {
    const double up = rng.uniform();
    const double az = 2.0 * std::numbers::pi * rng.uniform();
    const double horiz = std::sqrt(std::max(0.0, 1.0 - up * up));
    units.emplace_back(Vector3(horiz * std::cos(az), horiz * std::sin(az), up));
  }
  return Geometry(std::move(units));
}

double condition_number(const Matrix4& normal) {
  Eigen::SelfAdjointEigenSolver<Matrix4> eig(normal, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues()(0);
  const double hi = eig.eigenvalues()(3);
  if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

NormalSolver::NormalSolver(const Geometry& g) : NormalSolver(normal_matrix(g), g.sat_count()) {}

NormalSolver::NormalSolver(const Matrix4& normal, int sat_count) : normal_(normal) {
  if (sat_count < 4) {
    throw SingularGeometry("need at least 4 satellites, got " + std::to_string(sat_count));
  }
  cond_ = condition_number(normal_);
  if (!(cond_ <= kMaxCondition)) {
    throw SingularGeometry("normal matrix condition number " + std::to_string(cond_) +
                           " exceeds threshold");
  }
  lu_.compute(normal_);
  inverse_ = lu_.inverse();
}

double dop(const Matrix4& normal, int sat_count) {
  return std::sqrt(NormalSolver(normal, sat_count).inverse().trace());
}

double dop(const Geometry& g) { return dop(normal_matrix(g), g.sat_count()); }

}  // namespace satpos
