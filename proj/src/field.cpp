#include "kgap/field.hpp"

namespace kgap {

DistributionField DistributionField::homogeneous(const VelocityGrid& g, const Eigen::VectorXd& f) {
  if (static_cast<std::size_t>(f.size()) != g.size())
    throw InvalidArgument("field: value count does not match grid");
  DistributionField out(g);
  out.modes[{0, 0, 0}] = f.cast<cd>();
  return out;
}

Eigen::VectorXcd DistributionField::get(const Mode& l) const {
  auto it = modes.find(l);
  if (it == modes.end()) return Eigen::VectorXcd::Zero(grid.size());
  return it->second;
}

Eigen::VectorXcd& DistributionField::operator[](const Mode& l) {
  auto it = modes.find(l);
  if (it == modes.end()) it = modes.emplace(l, Eigen::VectorXcd::Zero(grid.size())).first;
  return it->second;
}

Eigen::VectorXd DistributionField::zero_mode() const { return get({0, 0, 0}).real(); }

double DistributionField::max_abs() const {
  double m = 0.0;
  for (const auto& [l, v] : modes) m = std::max(m, v.cwiseAbs().maxCoeff());
  return m;
}

double DistributionField::l2() const {
  double s = 0.0;
  for (const auto& [l, v] : modes) s += v.squaredNorm();
  return std::sqrt(s * grid.cell());
}

double DistributionField::reality_defect() const {
  double d = 0.0;
  for (const auto& [l, v] : modes) {
    Mode m{-l[0], -l[1], -l[2]};
    d = std::max(d, (get(m) - v.conjugate()).cwiseAbs().maxCoeff());
  }
  double s = max_abs();
  return s > 0.0 ? d / s : d;
}

void DistributionField::enforce_reality() {
  std::map<Mode, Eigen::VectorXcd> out;
  for (const auto& [l, v] : modes) {
    Mode m{-l[0], -l[1], -l[2]};
    out[l] = 0.5 * (v + get(m).conjugate());
    out[m] = out[l].conjugate();
  }
  modes = std::move(out);
}

void require_same_grid(const VelocityGrid& a, const VelocityGrid& b, const char* where) {
  if (!(a == b)) throw InvalidArgument(std::string(where) + ": grid mismatch");
}

DistributionField& DistributionField::operator+=(const DistributionField& o) {
  require_same_grid(grid, o.grid, "field +");
  for (const auto& [l, v] : o.modes) (*this)[l] += v;
  return *this;
}

DistributionField& DistributionField::operator-=(const DistributionField& o) {
  require_same_grid(grid, o.grid, "field -");
  for (const auto& [l, v] : o.modes) (*this)[l] -= v;
  return *this;
}

DistributionField& DistributionField::operator*=(cd a) {
  for (auto& [l, v] : modes) v *= a;
  return *this;
}

DistributionField operator+(DistributionField a, const DistributionField& b) { return a += b; }
DistributionField operator-(DistributionField a, const DistributionField& b) { return a -= b; }
DistributionField operator*(cd a, DistributionField b) { return b *= a; }

Eigen::VectorXd maxwellian_values(const VelocityGrid& g) {
  Eigen::VectorXd m(g.size());
  const double c = std::pow(2.0 * kPi, -1.5);
  for (std::size_t p = 0; p < g.size(); ++p) m[p] = c * std::exp(-0.5 * norm2(g.node(p)));
  return m;
}

DistributionField maxwellian(const VelocityGrid& g) {
  return DistributionField::homogeneous(g, maxwellian_values(g));
}

Eigen::MatrixXd invariants(const VelocityGrid& g) {
  Eigen::MatrixXd phi(g.size(), 5);
  for (std::size_t p = 0; p < g.size(); ++p) {
    Vec3 v = g.node(p);
    phi(p, 0) = 1.0;
    phi(p, 1) = v[0];
    phi(p, 2) = v[1];
    phi(p, 3) = v[2];
    phi(p, 4) = norm2(v);
  }
  return phi;
}

Eigen::VectorXcd moments(const VelocityGrid& g, const Eigen::VectorXcd& f) {
  return g.cell() * (invariants(g).transpose() * f);
}

MomentProjector::MomentProjector(const VelocityGrid& g) : g_(g), phi_(invariants(g)) {
  Eigen::VectorXd mu = maxwellian_values(g);
  psi_ = phi_.array().colwise() * mu.array();
  Eigen::MatrixXd G = g.cell() * (phi_.transpose() * psi_);
  gram_.compute(G);
}

Eigen::VectorXcd MomentProjector::apply(const Eigen::VectorXcd& f) const {
  Eigen::VectorXcd m = g_.cell() * (phi_.transpose() * f);
  Eigen::VectorXcd c(5);
  c.real() = gram_.solve(m.real());
  c.imag() = gram_.solve(m.imag());
  return psi_ * c;
}

Eigen::VectorXd MomentProjector::apply(const Eigen::VectorXd& f) const {
  Eigen::VectorXd m = g_.cell() * (phi_.transpose() * f);
  return psi_ * gram_.solve(m);
}

Eigen::MatrixXd MomentProjector::matrix() const {
  Eigen::MatrixXd X = gram_.solve(g_.cell() * phi_.transpose());
  return psi_ * X;
}

DistributionField null_projection(const DistributionField& f) {
  MomentProjector P(f.grid);
  DistributionField out(f.grid);
  for (const auto& [l, v] : f.modes) out.modes[l] = P.apply(v);
  return out;
}

}  // namespace kgap
