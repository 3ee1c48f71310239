#include "kgap/linearized.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace kgap {

std::string to_string(WeightTag t) {
  switch (t) {
    case WeightTag::Gaussian: return "gaussian";
    case WeightTag::Polynomial: return "polynomial";
    case WeightTag::Unweighted: return "unweighted";
  }
  return "unknown";
}

WeightTag weight_tag_from(const std::string& s) {
  if (s == "gaussian") return WeightTag::Gaussian;
  if (s == "polynomial") return WeightTag::Polynomial;
  if (s == "unweighted") return WeightTag::Unweighted;
  throw InvalidArgument("weight: expected gaussian|polynomial|unweighted, got '" + s + "'");
}

namespace {

std::vector<double> sqrt_mu1(const VelocityGrid& g) {
  std::vector<double> s(g.n());
  const double c = std::pow(2.0 * kPi, -0.25);
  for (int i = 0; i < g.n(); ++i) s[i] = c * std::exp(-0.25 * g.x(i) * g.x(i));
  return s;
}

struct Outputs {
  std::vector<Eigen::MatrixXd>* sym = nullptr;  // per class, lower triangle filled
  std::vector<Eigen::VectorXd>* nu = nullptr;
};

// One half sweep over (u > 0, sigma) with the quadratic stencil. Everything is in Gaussian
// coordinates; per axis factors keep the sqrt(mu) bookkeeping separable.
void assemble_blocks(const VelocityGrid& grid, const KernelParams& kp, const AngularQuadrature& aq,
                     const CollisionOptions& phi, const CollisionClass& cls, Outputs out) {
  const int n = grid.n();
  const long N = static_cast<long>(grid.size());
  const long n2 = static_cast<long>(n) * n;
  const std::vector<double> smu = sqrt_mu1(grid);

  // Per axis tables over the box: index [i - lo].
  struct Axis {
    std::vector<double> sm, self_v, self_s;
    std::vector<std::array<double, 3>> gain, star;
  } ax[3];
  std::vector<long> raw(56), offs;
  std::vector<int> slot(56);
  std::vector<double> vals, rawv(56);

  SweepOptions so;
  so.half = true;
  sweep<3>(grid, aq, so, [&](const CollisionBlock<3>& blk) {
    const int c = cls(blk.r, blk.theta);
    if (c < 0) return;
    const double W = blk.wang * kinetic_factor(kp, phi, blk.r);
    if (W == 0.0) return;
    const Box& box = blk.box;
    for (int d = 0; d < 3; ++d) {
      const int e = box.ext(d);
      Axis& A = ax[d];
      A.sm.resize(e);
      A.self_v.resize(e);
      A.self_s.resize(e);
      A.gain.resize(e);
      A.star.resize(e);
      for (int q = 0; q < e; ++q) {
        const int i = box.lo[d] + q;
        const double sm = smu[i] * smu[i - blk.du[d]];
        A.sm[q] = sm;
        A.self_v[q] = smu[i - blk.du[d]];
        A.self_s[q] = smu[i];
        for (int a = 0; a < 3; ++a) {
          A.gain[q][a] = blk.gain[d].w[a] * sm / smu[i + blk.gain[d].off + a];
          A.star[q][a] = blk.star[d].w[a] * sm / smu[i + blk.star[d].off + a];
        }
      }
    }
    // Flattened offsets relative to v: 27 gain, 27 star, v, v*.
    int r = 0;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        for (int e = 0; e < 3; ++e)
          raw[r++] = (blk.gain[0].off + a) * n2 + (blk.gain[1].off + b) * n + blk.gain[2].off + e;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        for (int e = 0; e < 3; ++e)
          raw[r++] = (blk.star[0].off + a) * n2 + (blk.star[1].off + b) * n + blk.star[2].off + e;
    raw[54] = 0;
    const long ustar = -(blk.du[0] * n2 + blk.du[1] * n + blk.du[2]);
    raw[55] = ustar;
    offs = raw;
    std::sort(offs.begin(), offs.end());
    offs.erase(std::unique(offs.begin(), offs.end()), offs.end());
    for (int q = 0; q < 56; ++q)
      slot[q] = static_cast<int>(std::lower_bound(offs.begin(), offs.end(), raw[q]) - offs.begin());
    const int K = static_cast<int>(offs.size());
    vals.assign(K, 0.0);

    Eigen::MatrixXd* M = out.sym ? &(*out.sym)[c] : nullptr;
    Eigen::VectorXd* nu = out.nu ? &(*out.nu)[c] : nullptr;
    const double hw = 0.5 * W;
    double* Md = M ? M->data() : nullptr;

    for (int qi = 0; qi < box.ext(0); ++qi)
      for (int qj = 0; qj < box.ext(1); ++qj)
        for (int qk = 0; qk < box.ext(2); ++qk) {
          const long p = static_cast<long>(grid.idx(box.lo[0] + qi, box.lo[1] + qj, box.lo[2] + qk));
          int t = 0;
          for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
              const double ab = ax[0].gain[qi][a] * ax[1].gain[qj][b];
              for (int e = 0; e < 3; ++e) rawv[t++] = ab * ax[2].gain[qk][e];
            }
          for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
              const double ab = ax[0].star[qi][a] * ax[1].star[qj][b];
              for (int e = 0; e < 3; ++e) rawv[t++] = ab * ax[2].star[qk][e];
            }
          const double sv = ax[0].self_v[qi] * ax[1].self_v[qj] * ax[2].self_v[qk];
          const double ss = ax[0].self_s[qi] * ax[1].self_s[qj] * ax[2].self_s[qk];
          rawv[54] = -sv;
          rawv[55] = -ss;
          if (nu) {
            // sv^2 = mu(v*), ss^2 = mu(v)
            (*nu)[p] += W * sv * sv;
            (*nu)[p + ustar] += W * ss * ss;
          }
          if (Md) {
            std::fill(vals.begin(), vals.end(), 0.0);
            for (int q = 0; q < 56; ++q) vals[slot[q]] += rawv[q];
            for (int b = 0; b < K; ++b) {
              const double vb = hw * vals[b];
              if (vb == 0.0) continue;
              double* col = Md + (p + offs[b]) * N + p;
              for (int a = b; a < K; ++a) col[offs[a]] -= vb * vals[a];
            }
          }
        }
  });
}

void symmetrize_lower(Eigen::MatrixXd& M) {
  M.triangularView<Eigen::StrictlyUpper>() = M.transpose().triangularView<Eigen::StrictlyUpper>();
}

void check_budget(const VelocityGrid& grid, const AssemblyOptions& opt) {
  if (grid.n() > opt.max_n)
    throw BudgetExceeded("dense assembly needs n <= " + std::to_string(opt.max_n) + ", got n = " +
                         std::to_string(grid.n()));
}

}  // namespace

std::vector<Eigen::MatrixXd> weak_gaussian_matrices(const VelocityGrid& grid,
                                                    const KernelParams& kp,
                                                    const AngularQuadrature& aq,
                                                    const CollisionClass& cls, int n_class,
                                                    const AssemblyOptions& opt,
                                                    std::vector<Eigen::VectorXd>* nu) {
  check_budget(grid, opt);
  const Eigen::Index N = static_cast<Eigen::Index>(grid.size());
  std::vector<Eigen::MatrixXd> mats(n_class, Eigen::MatrixXd::Zero(N, N));
  if (nu) nu->assign(n_class, Eigen::VectorXd::Zero(N));
  Outputs o;
  o.sym = &mats;
  o.nu = nu;
  assemble_blocks(grid, kp, aq, opt.phi, cls, o);
  for (auto& M : mats) symmetrize_lower(M);
  return mats;
}

Eigen::VectorXcd apply_L(const VelocityGrid& grid, const KernelParams& kp,
                         const AngularQuadrature& aq, const Eigen::VectorXcd& f,
                         const CollisionOptions& phi) {
  const int n = grid.n();
  const Eigen::VectorXd mu = maxwellian_values(grid);
  const Eigen::VectorXcd gv = f.cwiseQuotient(mu.cast<cd>());
  const std::vector<double> smu = sqrt_mu1(grid);
  std::vector<double> mu1(n);
  for (int i = 0; i < n; ++i) mu1[i] = smu[i] * smu[i];
  Eigen::VectorXcd y = Eigen::VectorXcd::Zero(f.size());
  std::vector<cd> A(gv.data(), gv.data() + gv.size()), Y(f.size(), cd(0));
  std::vector<cd> D, t1, t2, G1;
  std::vector<double> m[3];
  SweepOptions so;
  so.half = true;
  sweep<3>(grid, aq, so, [&](const CollisionBlock<3>& blk) {
    const double W = blk.wang * kinetic_factor(kp, phi, blk.r);
    if (W == 0.0) return;
    const Box& box = blk.box;
    const std::size_t sz = box.size();
    for (int d = 0; d < 3; ++d) {
      m[d].resize(box.ext(d));
      for (int q = 0; q < box.ext(d); ++q) {
        const int i = box.lo[d] + q;
        m[d][q] = mu1[i] * mu1[i - blk.du[d]];
      }
    }
    D.resize(sz);
    G1.resize(sz);
    gather<3, cd>(A.data(), n, box, blk.gain, D.data(), t1, t2);
    gather<3, cd>(A.data(), n, box, blk.star, G1.data(), t1, t2);
    std::size_t q = 0;
    for (int i = 0; i < box.ext(0); ++i)
      for (int j = 0; j < box.ext(1); ++j) {
        const double mij = -0.5 * W * m[0][i] * m[1][j];
        for (int k = 0; k < box.ext(2); ++k, ++q) {
          const int vi = box.lo[0] + i, vj = box.lo[1] + j, vk = box.lo[2] + k;
          const std::size_t pv = grid.idx(vi, vj, vk);
          const std::size_t ps = grid.idx(vi - blk.du[0], vj - blk.du[1], vk - blk.du[2]);
          const cd dg = D[q] + G1[q] - A[pv] - A[ps];
          const cd val = mij * m[2][k] * dg;
          D[q] = val;
          Y[pv] -= val;
          Y[ps] -= val;
        }
      }
    scatter<3, cd>(Y.data(), n, box, blk.gain, D.data(), t1, t2);
    scatter<3, cd>(Y.data(), n, box, blk.star, D.data(), t1, t2);
  });
  for (Eigen::Index p = 0; p < y.size(); ++p) y[p] = Y[p];
  return y;
}

Eigen::VectorXd weight_scale(const VelocityGrid& grid, WeightTag tag, double k) {
  const Eigen::Index N = static_cast<Eigen::Index>(grid.size());
  Eigen::VectorXd s = Eigen::VectorXd::Ones(N);
  if (tag == WeightTag::Gaussian) return s;
  const Eigen::VectorXd mu = maxwellian_values(grid);
  for (Eigen::Index p = 0; p < N; ++p) {
    s[p] = std::sqrt(mu[p]);
    if (tag == WeightTag::Polynomial) s[p] *= std::pow(japan(norm2(grid.node(p))), k);
  }
  return s;
}

void add_transport(const VelocityGrid& grid, const Mode& ell, Eigen::MatrixXcd& a) {
  if (ell == Mode{0, 0, 0}) return;
  for (Eigen::Index p = 0; p < a.rows(); ++p) {
    const Vec3 v = grid.node(p);
    const double lv = ell[0] * v[0] + ell[1] * v[1] + ell[2] * v[2];
    a(p, p) += cd(0.0, 2.0 * kPi * lv);
  }
}

OperatorMatrix make_operator(const VelocityGrid& grid, const Eigen::MatrixXd& Lg, WeightTag tag,
                             double k, const Mode& ell, const std::string& label) {
  OperatorMatrix op;
  op.ell = ell;
  op.tag = tag;
  op.k = k;
  op.label = label;
  op.scale = weight_scale(grid, tag, k);
  op.a = (op.scale.asDiagonal() * Lg * op.scale.cwiseInverse().asDiagonal()).cast<cd>();
  add_transport(grid, ell, op.a);
  return op;
}

namespace {
CollisionClass all_in_one() {
  return [](double, double) { return 0; };
}
}  // namespace

OperatorMatrix assemble_L(const VelocityGrid& grid, const KernelParams& kp,
                          const AngularQuadrature& aq, WeightTag tag, double k, const Mode& ell,
                          const AssemblyOptions& opt) {
  auto mats = weak_gaussian_matrices(grid, kp, aq, all_in_one(), 1, opt);
  return make_operator(grid, mats[0], tag, k, ell, "L");
}

void DecompositionParams::validate() const {
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("delta must lie in (0, 1)");
  if (!(eps > 0.0 && eps <= 1.0)) throw InvalidArgument("eps must lie in (0, 1]");
  if (!(k >= 0.0)) throw InvalidArgument("k must be nonnegative");
}

double DecompositionParams::theta_eps() const { return std::asin(std::min(eps, 1.0)); }

namespace {
CollisionClass split_classes(const DecompositionParams& dp) {
  const double te = dp.theta_eps();
  return [dp, te](double r, double theta) {
    if (theta < te) return 2;
    return dp.in_phi1(r) ? 0 : 1;
  };
}

double rel_defect(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double nb = b.norm();
  return nb > 0.0 ? (a - b).norm() / nb : (a - b).norm();
}
}  // namespace

Decomposition decompose_gaussian(const VelocityGrid& grid, const KernelParams& kp,
                                 const AngularQuadrature& aq, const DecompositionParams& dp,
                                 const AssemblyOptions& opt) {
  dp.validate();
  std::vector<Eigen::VectorXd> nu;
  auto M = weak_gaussian_matrices(grid, kp, aq, split_classes(dp), 3, opt, &nu);
  Decomposition d;
  d.L = M[0] + M[1] + M[2];
  Eigen::MatrixXd K = M[0];
  K.diagonal() += nu[0];
  Eigen::MatrixXd Lam = -M[1] - M[2];
  Lam.diagonal() += nu[0];
  d.reconstruction_defect = rel_defect(K - Lam, d.L);
  d.first = make_operator(grid, K, WeightTag::Gaussian, 0.0, {0, 0, 0}, "K");
  d.second = make_operator(grid, Lam, WeightTag::Gaussian, 0.0, {0, 0, 0}, "Lambda");
  return d;
}

Decomposition decompose_polynomial(const VelocityGrid& grid, const KernelParams& kp,
                                   const AngularQuadrature& aq, const DecompositionParams& dp,
                                   const AssemblyOptions& opt) {
  // Same partition as K / Lambda; only the weight changes.
  Decomposition d = decompose_gaussian(grid, kp, aq, dp, opt);
  const Eigen::MatrixXd A = d.first.a.real(), B = d.second.a.real();
  d.first = make_operator(grid, A, WeightTag::Polynomial, dp.k, {0, 0, 0}, "A");
  d.second = make_operator(grid, B, WeightTag::Polynomial, dp.k, {0, 0, 0}, "B");
  return d;
}

double hermitian_defect(const Eigen::MatrixXcd& a) {
  const double na = a.norm();
  if (na == 0.0) return 0.0;
  return (a - a.adjoint()).norm() / na;
}

namespace {
double principal_angle(const Eigen::MatrixXcd& V, const Eigen::MatrixXcd& P) {
  if (V.cols() != P.cols() || V.cols() == 0) return kPi / 2;
  Eigen::HouseholderQR<Eigen::MatrixXcd> q1(V), q2(P);
  Eigen::MatrixXcd Q1 = q1.householderQ() * Eigen::MatrixXcd::Identity(V.rows(), V.cols());
  Eigen::MatrixXcd Q2 = q2.householderQ() * Eigen::MatrixXcd::Identity(P.rows(), P.cols());
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(Q1.adjoint() * Q2);
  const double smin = svd.singularValues().minCoeff();
  return std::acos(std::min(1.0, smin));
}
}  // namespace

Spectrum spectrum(const VelocityGrid& grid, const OperatorMatrix& op, bool want_vectors) {
  const Eigen::Index N = op.rows();
  Spectrum sp;
  const Eigen::VectorXd sc =
      op.scale.size() == N ? op.scale : Eigen::VectorXd(Eigen::VectorXd::Ones(N));
  // Back to Gaussian coordinates, where the ell = 0 operator is symmetric.
  const Eigen::MatrixXcd Ag = sc.cwiseInverse().asDiagonal() * op.a * sc.asDiagonal();
  sp.hermitian_defect = hermitian_defect(Ag);
  Eigen::VectorXcd vals;
  Eigen::MatrixXcd vecs;
  if (sp.hermitian_defect < 1e-10) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
        Ag, want_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw std::runtime_error("eigensolver did not converge");
    vals = es.eigenvalues().cast<cd>();
    if (want_vectors) vecs = es.eigenvectors();
  } else {
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(Ag, want_vectors);
    if (es.info() != Eigen::Success) throw std::runtime_error("eigensolver did not converge");
    vals = es.eigenvalues();
    if (want_vectors) vecs = es.eigenvectors();
  }
  std::vector<Eigen::Index> order(N);
  for (Eigen::Index i = 0; i < N; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return vals[a].real() > vals[b].real();
  });
  sp.values.resize(N);
  if (want_vectors) sp.vectors.resize(N, N);
  double vmax = 0.0;
  for (Eigen::Index i = 0; i < N; ++i) {
    sp.values[i] = vals[order[i]];
    vmax = std::max(vmax, std::abs(vals[i]));
    sp.max_imag = std::max(sp.max_imag, std::abs(vals[i].imag()));
    if (want_vectors) sp.vectors.col(i) = sc.asDiagonal() * vecs.col(order[i]);
  }
  // Measured residual on the collision invariants, sqrt(mu) phi in Gaussian coordinates.
  const Eigen::MatrixXd phi = invariants(grid);
  const Eigen::VectorXd mu = maxwellian_values(grid);
  Eigen::MatrixXcd Psi(N, 5);
  for (int a = 0; a < 5; ++a) Psi.col(a) = (phi.col(a).cwiseProduct(mu.cwiseSqrt())).cast<cd>();
  for (int a = 0; a < 5; ++a)
    sp.residual = std::max(sp.residual, (Ag * Psi.col(a)).norm() / Psi.col(a).norm());
  sp.tol = 10.0 * std::max(sp.residual, 1e-13 * vmax);
  sp.cluster.assign(N, false);
  double top = -std::numeric_limits<double>::infinity();
  std::vector<Eigen::Index> in;
  for (Eigen::Index i = 0; i < N; ++i) {
    if (std::abs(sp.values[i]) < sp.tol) {
      sp.cluster[i] = true;
      in.push_back(i);
    } else {
      top = std::max(top, sp.values[i].real());
    }
  }
  sp.cluster_dim = static_cast<int>(in.size());
  sp.gap = -top;
  if (want_vectors && !in.empty()) {
    Eigen::MatrixXcd V(N, in.size());
    for (std::size_t c = 0; c < in.size(); ++c)
      V.col(c) = sc.cwiseInverse().asDiagonal() * sp.vectors.col(in[c]);
    sp.principal_angle = principal_angle(V, Psi);
  } else {
    sp.principal_angle = in.empty() ? 0.0 : kPi / 2;
  }
  return sp;
}

}  // namespace kgap
