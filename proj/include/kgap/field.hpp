#pragma once

#include <Eigen/Dense>
#include <map>

#include "kgap/grids.hpp"

namespace kgap {

// Complex field over (torus mode, velocity node). Modes absent from the map are zero.
struct DistributionField {
  VelocityGrid grid;
  std::map<Mode, Eigen::VectorXcd> modes;

  DistributionField() = default;
  explicit DistributionField(const VelocityGrid& g) : grid(g) {}

  static DistributionField homogeneous(const VelocityGrid& g, const Eigen::VectorXd& f);

  bool has(const Mode& l) const { return modes.count(l) > 0; }
  Eigen::VectorXcd get(const Mode& l) const;
  Eigen::VectorXcd& operator[](const Mode& l);
  // Real part of the l = 0 mode.
  Eigen::VectorXd zero_mode() const;

  // Largest |f_{-l} - conj(f_l)| relative to the largest entry.
  double reality_defect() const;
  void enforce_reality();
  double max_abs() const;
  // sqrt(sum_l sum_v |f_l|^2 h^3)
  double l2() const;

  DistributionField& operator+=(const DistributionField& o);
  DistributionField& operator-=(const DistributionField& o);
  DistributionField& operator*=(cd a);
};

DistributionField operator+(DistributionField a, const DistributionField& b);
DistributionField operator-(DistributionField a, const DistributionField& b);
DistributionField operator*(cd a, DistributionField b);

void require_same_grid(const VelocityGrid& a, const VelocityGrid& b, const char* where);

// (2 pi)^(-3/2) exp(-|v|^2/2) on the nodes.
Eigen::VectorXd maxwellian_values(const VelocityGrid& g);
DistributionField maxwellian(const VelocityGrid& g);

// Collision invariants phi_a in {1, v1, v2, v3, |v|^2} evaluated on the nodes (n^3 x 5).
Eigen::MatrixXd invariants(const VelocityGrid& g);
// Moments sum f phi_a h^3.
Eigen::VectorXcd moments(const VelocityGrid& g, const Eigen::VectorXcd& f);

// Projection onto span{mu, v mu, |v|^2 mu} that reproduces the five moments.
class MomentProjector {
 public:
  explicit MomentProjector(const VelocityGrid& g);
  Eigen::VectorXcd apply(const Eigen::VectorXcd& f) const;
  Eigen::VectorXd apply(const Eigen::VectorXd& f) const;
  // Dense matrix of the projection.
  Eigen::MatrixXd matrix() const;
  const Eigen::MatrixXd& basis() const { return psi_; }

 private:
  VelocityGrid g_;
  Eigen::MatrixXd phi_, psi_;
  Eigen::LDLT<Eigen::MatrixXd> gram_;
};

DistributionField null_projection(const DistributionField& f);

}  // namespace kgap
