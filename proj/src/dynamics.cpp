#include "kgap/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "kgap/collision.hpp"

namespace kgap {

std::string to_string(Integrator i) { return i == Integrator::RK4 ? "rk4" : "exponential"; }

Integrator integrator_from(const std::string& s) {
  if (s == "rk4") return Integrator::RK4;
  if (s == "exponential") return Integrator::Exponential;
  throw InvalidArgument("integrator must be rk4 or exponential, got '" + s + "'");
}

void EvolutionConfig::validate() const {
  if (!(dt > 0.0)) throw InvalidArgument("evolution: dt must be positive");
  if (!(t_end > 0.0)) throw InvalidArgument("evolution: t_end must be positive");
  const double r = t_end / dt;
  if (std::abs(r - std::round(r)) > 1e-9 * r)
    throw InvalidArgument("evolution: t_end must be a multiple of dt");
  if (!(T0 >= 0.0 && T0 <= t_end)) throw InvalidArgument("evolution: need 0 <= T0 <= t_end");
  if (!(growth_abort > 1.0)) throw InvalidArgument("evolution: growth_abort must exceed 1");
  if (picard_max < 1) throw InvalidArgument("evolution: picard_max must be positive");
  if (!(eps0 > 0.0)) throw InvalidArgument("evolution: eps0 must be positive");
  if (multiplier_diagnostics) multiplier.validate();
}

int EvolutionConfig::steps() const { return static_cast<int>(std::lround(t_end / dt)); }

// ---------------------------------------------------------------------------------------------
// Linear model

LinearModel::LinearModel(const VelocityGrid& g, Eigen::MatrixXd Lg) : grid_(g), Lg_(std::move(Lg)) {
  sqrt_mu_ = maxwellian_values(g).cwiseSqrt();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Lg_);
  if (es.info() != Eigen::Success) throw NumericalAbort("linear model: eigensolver failed");
  evals_ = es.eigenvalues();
  evecs_ = es.eigenvectors();
  radius_ = evals_.cwiseAbs().maxCoeff();
  const Spectrum sp = spectrum(g, make_operator(g, Lg_, WeightTag::Gaussian, 0.0, {0, 0, 0}, "L"),
                               false);
  gap_ = sp.gap;
  cluster_ = sp.cluster_dim;
}

LinearModel LinearModel::assemble(const VelocityGrid& g, const KernelParams& kp,
                                  const AngularQuadrature& aq, const AssemblyOptions& opt) {
  const OperatorMatrix op = assemble_L(g, kp, aq, WeightTag::Gaussian, 0.0, {0, 0, 0}, opt);
  return LinearModel(g, op.a.real());
}

Eigen::MatrixXcd LinearModel::generator(const Mode& l) const {
  Eigen::MatrixXcd a = Lg_.cast<cd>();
  for (std::size_t p = 0; p < grid_.size(); ++p) {
    const Vec3 v = grid_.node(p);
    const double lv = l[0] * v[0] + l[1] * v[1] + l[2] * v[2];
    a(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p)) -= cd(0.0, 2.0 * kPi * lv);
  }
  return a;
}

const Eigen::MatrixXcd& LinearModel::propagator(const Mode& l, double t) const {
  const auto key = std::make_pair(l, t);
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  Eigen::MatrixXcd P;
  if (l == Mode{0, 0, 0}) {
    const Eigen::VectorXd e = (t * evals_).array().exp().matrix();
    P = (evecs_ * e.asDiagonal() * evecs_.transpose()).cast<cd>();
  } else {
    P = (t * generator(l)).exp();
  }
  return cache_.emplace(key, std::move(P)).first->second;
}

double LinearModel::abscissa(const Mode& l) const {
  if (l == Mode{0, 0, 0}) return -gap_;
  auto it = abscissa_.find(l);
  if (it != abscissa_.end()) return it->second;
  const double tau = 2.0;
  const Eigen::MatrixXcd& P = propagator(l, tau);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> N(0.0, 1.0);
  Eigen::VectorXcd x(P.rows());
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = cd(N(rng), N(rng));
  x.normalize();
  double prev = 0.0, rate = 0.0;
  for (int k = 0; k < 5000; ++k) {
    Eigen::VectorXcd y = P * x;
    const double nrm = y.norm();
    if (nrm == 0.0) break;
    rate = std::log(nrm) / tau;
    x = y / nrm;
    if (k > 20 && std::abs(rate - prev) < 1e-12 * std::max(1.0, std::abs(rate))) break;
    prev = rate;
  }
  abscissa_[l] = rate;
  return rate;
}

// ---------------------------------------------------------------------------------------------
// State helpers. States live in Gaussian coordinates h = f / sqrt(mu).

namespace {

using State = std::map<Mode, Eigen::VectorXcd>;

State to_state(const DistributionField& f, const Eigen::VectorXd& sm) {
  State s;
  for (const auto& [l, v] : f.modes) s[l] = v.cwiseQuotient(sm.cast<cd>());
  return s;
}

DistributionField to_field(const VelocityGrid& g, const State& s, const Eigen::VectorXd& sm) {
  DistributionField f(g);
  for (const auto& [l, v] : s) f.modes[l] = v.cwiseProduct(sm.cast<cd>());
  return f;
}

// y += a x
void axpy(State& y, cd a, const State& x) {
  for (const auto& [l, v] : x) {
    auto it = y.find(l);
    if (it == y.end())
      y[l] = a * v;
    else
      it->second += a * v;
  }
}

State lin(cd a, const State& x, cd b, const State& y) {
  State r;
  for (const auto& [l, v] : x) r[l] = a * v;
  axpy(r, b, y);
  return r;
}

State propagate(const LinearModel& m, double t, const State& x) {
  State r;
  for (const auto& [l, v] : x) r[l] = m.propagator(l, t) * v;
  return r;
}

Eigen::VectorXd bracket_pow(const VelocityGrid& g, double k) {
  Eigen::VectorXd w(static_cast<Eigen::Index>(g.size()));
  for (std::size_t p = 0; p < g.size(); ++p) w[p] = std::pow(japan(norm2(g.node(p))), k);
  return w;
}

// sum over multi-indices of order j of prod (2 pi l_i)^(2 alpha_i), j = 0, 1, 2.
std::array<double, 3> derivative_factors(const Mode& l) {
  const double e0 = 2 * kPi * l[0], e1 = 2 * kPi * l[1], e2 = 2 * kPi * l[2];
  const double s2 = e0 * e0 + e1 * e1 + e2 * e2;
  const double s4 = e0 * e0 * e0 * e0 + e1 * e1 * e1 * e1 + e2 * e2 * e2 * e2;
  return {1.0, s2, 0.5 * (s4 + s2 * s2)};
}

double weighted_l2(const VelocityGrid& g, const Eigen::VectorXcd& f, const Eigen::VectorXd& w) {
  return std::sqrt(f.cwiseProduct(w.cast<cd>()).squaredNorm() * g.cell());
}

// Everything the per-record diagnostics need.
struct Recorder {
  const VelocityGrid& g;
  const Eigen::VectorXd& sm;
  KernelParams kp;
  EvolutionConfig cfg;
  Eigen::VectorXd mu, wk, wm;
  Eigen::VectorXcd pi0;  // null projection of the initial l = 0 mode (f coordinates)
  std::vector<Vec3> xs;  // sampled torus points
  double prev_diss = 0.0, prev_t = 0.0;
  bool first = true;

  Recorder(const VelocityGrid& grid, const Eigen::VectorXd& sqrt_mu, const KernelParams& k,
           const EvolutionConfig& c, const State& s0)
      : g(grid), sm(sqrt_mu), kp(k), cfg(c) {
    mu = sm.cwiseProduct(sm);
    wk = bracket_pow(g, cfg.k_weight);
    wm = bracket_pow(g, cfg.y.m0);
    const auto it = s0.find(Mode{0, 0, 0});
    pi0 = Eigen::VectorXcd::Zero(mu.size());
    if (it != s0.end()) pi0 = MomentProjector(g).apply(Eigen::VectorXcd(it->second.cwiseProduct(sm.cast<cd>())));
    // Eight points along every axis that carries a nonzero mode.
    std::array<bool, 3> active{false, false, false};
    for (const auto& [l, v] : s0)
      for (int i = 0; i < 3; ++i) active[i] = active[i] || l[i] != 0;
    std::array<int, 3> cnt;
    for (int i = 0; i < 3; ++i) cnt[i] = active[i] ? 8 : 1;
    for (int a = 0; a < cnt[0]; ++a)
      for (int b = 0; b < cnt[1]; ++b)
        for (int c2 = 0; c2 < cnt[2]; ++c2) xs.push_back({a / 8.0, b / 8.0, c2 / 8.0});
  }

  double dissipation_rate(const DistributionField& f) const {
    double acc = 0.0;
    for (const auto& [l, v] : f.modes) {
      const auto c = derivative_factors(l);
      for (int j = 0; j < 3; ++j) {
        if (c[j] == 0.0) continue;
        const double n = weighted_sobolev(
            g, v, NormSpec{kp.s, 0.5 * kp.gamma + cfg.y.m0 * (cfg.y.l - j)});
        acc += c[j] * n * n;
      }
    }
    return acc;
  }

  void record(TrajectoryRecord& tr, double t, const State& s) {
    const DistributionField f = to_field(g, s, sm);
    tr.times.push_back(t);
    tr.y_norm.push_back(y_l_norm(f, cfg.y));
    double w2 = 0.0;
    for (const auto& [l, v] : f.modes) {
      const Eigen::VectorXcd d = l == Mode{0, 0, 0} ? Eigen::VectorXcd(v - pi0) : v;
      const double n = weighted_l2(g, d, wk);
      w2 += n * n;
    }
    tr.weighted.push_back(std::sqrt(w2));
    const double rate = dissipation_rate(f);
    const double acc = first ? 0.0 : tr.dissipation.back() + 0.5 * (t - prev_t) * (rate + prev_diss);
    tr.dissipation.push_back(acc);
    prev_diss = rate;
    prev_t = t;
    first = false;
    // F = mu + f on the sampled torus points.
    double mn = std::numeric_limits<double>::infinity(), mx = -mn, neg = 0.0;
    Eigen::VectorXd F(mu.size());
    for (const Vec3& x : xs) {
      F = mu;
      for (const auto& [l, v] : f.modes) {
        const cd e = std::polar(1.0, 2.0 * kPi * (l[0] * x[0] + l[1] * x[1] + l[2] * x[2]));
        F += (v * e).real();
      }
      mn = std::min(mn, F.minCoeff());
      mx = std::max(mx, F.maxCoeff());
      for (Eigen::Index p = 0; p < F.size(); ++p)
        if (F[p] < 0.0) neg += F[p] * F[p] * wm[p] * wm[p];
    }
    tr.min_F.push_back(mn);
    tr.max_F.push_back(mx);
    tr.neg_part.push_back(std::sqrt(neg * g.cell() / double(xs.size())));
    const Eigen::VectorXcd f0 = f.get({0, 0, 0});
    tr.moments.push_back(moments(g, f0).real());
    tr.projection_norm.push_back(l2(g, MomentProjector(g).apply(f0)));
    tr.final_state = f;
  }
};

}  // namespace

double TrajectoryRecord::moment_drift() const {
  double d = 0.0;
  for (const auto& m : moments) d = std::max(d, (m - moments.front()).cwiseAbs().maxCoeff());
  return d;
}

double decay_rate(const std::vector<double>& t, const std::vector<double>& values, double t_from,
                  double t_to) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_from - 1e-12 || t[i] > t_to + 1e-12 || !(values[i] > 0.0)) continue;
    const double y = std::log(values[i]);
    sx += t[i];
    sy += y;
    sxx += t[i] * t[i];
    sxy += t[i] * y;
    ++n;
  }
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return -slope;
}

double tail_decay_rate(const std::vector<double>& t, const std::vector<double>& values,
                       double rel_floor, double t_from) {
  if (t.empty()) return std::numeric_limits<double>::quiet_NaN();
  double tb = t.front();
  for (std::size_t i = 0; i < t.size(); ++i)
    if (values[i] > rel_floor * values.front()) tb = t[i];
  return decay_rate(t, values, std::max(t_from, 0.5 * tb), tb);
}


// ---------------------------------------------------------------------------------------------
// Evolution

namespace {

void check_rk4(const LinearModel& m, const EvolutionConfig& cfg) {
  if (cfg.integrator == Integrator::RK4 && cfg.dt * m.spectral_radius() > 2.5)
    throw InvalidArgument("evolution: rk4 needs dt * |L| <= 2.5 (dt * |L| = " +
                          std::to_string(cfg.dt * m.spectral_radius()) + ")");
}

// Generator action A_l h per mode.
State apply_generators(const std::map<Mode, Eigen::MatrixXcd>& A, const State& s) {
  State r;
  for (const auto& [l, v] : s) r[l] = A.at(l) * v;
  return r;
}

void ensure_generators(const LinearModel& m, const State& s, std::map<Mode, Eigen::MatrixXcd>& A) {
  for (const auto& [l, v] : s)
    if (!A.count(l)) A[l] = m.generator(l);
}

template <class Rhs>
State rk4_step(const State& y, double dt, Rhs&& rhs) {
  const State k1 = rhs(y);
  const State k2 = rhs(lin(1.0, y, 0.5 * dt, k1));
  const State k3 = rhs(lin(1.0, y, 0.5 * dt, k2));
  const State k4 = rhs(lin(1.0, y, dt, k3));
  State out = y;
  axpy(out, dt / 6.0, k1);
  axpy(out, dt / 3.0, k2);
  axpy(out, dt / 3.0, k3);
  axpy(out, dt / 6.0, k4);
  return out;
}

bool finite(const State& s) {
  for (const auto& [l, v] : s)
    if (!v.allFinite()) return false;
  return true;
}

// Q(f, g) in Gaussian coordinates.
State collide(const LinearModel& m, const KernelParams& kp, const AngularQuadrature& aq,
              const State& f, const State& g) {
  if (f.empty() || g.empty()) return {};
  const DistributionField F = to_field(m.grid(), f, m.sqrt_mu());
  const DistributionField G = to_field(m.grid(), g, m.sqrt_mu());
  return to_state(q_direct(F, G, kp, aq), m.sqrt_mu());
}

State mu_state(const LinearModel& m) {
  State s;
  s[{0, 0, 0}] = m.sqrt_mu().cast<cd>();  // mu / sqrt(mu)
  return s;
}

// Lawson RK4 for y' = A y + N(t-stage, y); the four stage inputs are passed to N with their
// index so Picard can align frozen coefficients.
template <class N>
State lawson_step(const LinearModel& m, const State& y, double dt, N&& nonlin,
                  std::array<State, 4>* stages = nullptr) {
  const State Py = propagate(m, dt, y);
  const State Phy = propagate(m, 0.5 * dt, y);
  const State Y1 = y;
  const State k1 = nonlin(0, Y1);
  const State Y2 = lin(1.0, Phy, 0.5 * dt, propagate(m, 0.5 * dt, k1));
  const State k2 = nonlin(1, Y2);
  const State Y3 = lin(1.0, Phy, 0.5 * dt, k2);
  const State k3 = nonlin(2, Y3);
  const State Y4 = lin(1.0, Py, dt, propagate(m, 0.5 * dt, k3));
  const State k4 = nonlin(3, Y4);
  if (stages) *stages = {Y1, Y2, Y3, Y4};
  State out = Py;
  axpy(out, dt / 6.0, propagate(m, dt, k1));
  axpy(out, dt / 3.0, propagate(m, 0.5 * dt, lin(1.0, k2, 1.0, k3)));
  axpy(out, dt / 6.0, k4);
  return out;
}

}  // namespace

TrajectoryRecord evolve_linear(const DistributionField& h0, const LinearModel& m,
                               const KernelParams& kp, const EvolutionConfig& cfg,
                               const Observer& observe) {
  cfg.validate();
  require_same_grid(h0.grid, m.grid(), "evolve_linear");
  check_rk4(m, cfg);
  State y = to_state(h0, m.sqrt_mu());
  Recorder rec(m.grid(), m.sqrt_mu(), kp, cfg, y);
  TrajectoryRecord tr;
  rec.record(tr, 0.0, y);
  if (observe) observe(0.0, to_field(m.grid(), y, m.sqrt_mu()));
  double total = 0.0;
  for (const auto& [l, v] : to_field(m.grid(), y, m.sqrt_mu()).modes)
    total += std::pow(weighted_l2(m.grid(), v, rec.wk), 2);
  const double ref = std::max(tr.weighted.front(), 1e-8 * std::sqrt(total));
  std::map<Mode, Eigen::MatrixXcd> A;
  if (cfg.integrator == Integrator::RK4) ensure_generators(m, y, A);
  const int n = cfg.steps();
  for (int j = 1; j <= n; ++j) {
    if (cfg.integrator == Integrator::Exponential)
      y = propagate(m, cfg.dt, y);
    else
      y = rk4_step(y, cfg.dt, [&](const State& s) { return apply_generators(A, s); });
    const double t = j * cfg.dt;
    rec.record(tr, t, y);
    if (observe) observe(t, tr.final_state);
    if (!finite(y) || !(tr.weighted.back() <= cfg.growth_abort * ref) ) {
      if (ref > 0.0 || !finite(y))
        throw EvolutionAbort("evolve_linear: norm grew beyond " + std::to_string(cfg.growth_abort) +
                                 "x at t = " + std::to_string(t),
                             tr);
    }
  }
  return tr;
}

namespace {

DistributionField remove_moments(const DistributionField& f) {
  DistributionField out = f;
  if (out.has({0, 0, 0})) {
    Eigen::VectorXcd& v = out[{0, 0, 0}];
    v -= MomentProjector(f.grid).apply(Eigen::VectorXcd(v));
  }
  return out;
}

void check_small(const DistributionField& f, const EvolutionConfig& cfg) {
  const double y = y_l_norm(f, cfg.y);
  if (y > cfg.eps0)
    throw InvalidArgument("evolution: |f0|_{Y_l} = " + std::to_string(y) + " exceeds eps0 = " +
                          std::to_string(cfg.eps0));
}

}  // namespace

TrajectoryRecord evolve_nonlinear(const DistributionField& f0, const LinearModel& m,
                                  const KernelParams& kp, const AngularQuadrature& aq,
                                  const EvolutionConfig& cfg) {
  cfg.validate();
  require_same_grid(f0.grid, m.grid(), "evolve_nonlinear");
  check_rk4(m, cfg);
  const DistributionField start = remove_moments(f0);
  check_small(start, cfg);
  State y = to_state(start, m.sqrt_mu());
  Recorder rec(m.grid(), m.sqrt_mu(), kp, cfg, y);
  TrajectoryRecord tr;
  rec.record(tr, 0.0, y);
  const double ref = tr.y_norm.front();
  auto Nf = [&](int, const State& s) { return collide(m, kp, aq, s, s); };
  std::map<Mode, Eigen::MatrixXcd> A;
  const int n = cfg.steps();
  for (int j = 1; j <= n; ++j) {
    if (cfg.integrator == Integrator::Exponential) {
      y = lawson_step(m, y, cfg.dt, Nf);
    } else {
      ensure_generators(m, y, A);
      y = rk4_step(y, cfg.dt, [&](const State& s) {
        State r = apply_generators(A, s);
        axpy(r, 1.0, Nf(0, s));
        return r;
      });
    }
    const double t = j * cfg.dt;
    rec.record(tr, t, y);
    if (tr.min_F.back() < -1e-6) tr.flags.push_back("positivity violation at t = " + std::to_string(t));
    if (!finite(y) || tr.y_norm.back() > cfg.growth_abort * ref)
      throw EvolutionAbort("evolve_nonlinear: blow-up at t = " + std::to_string(t), tr);
  }
  return tr;
}

json PicardResult::table() const {
  json rows = json::array();
  for (std::size_t i = 0; i < w_norms.size(); ++i) {
    json r;
    r["iteration"] = i;
    r["w_norm"] = w_norms[i];
    r["ratio"] = i == 0 ? json(nullptr) : json(ratios[i - 1]);
    rows.push_back(r);
  }
  return rows;
}

PicardResult picard_solve(const DistributionField& f0, const LinearModel& m,
                          const KernelParams& kp, const AngularQuadrature& aq,
                          const EvolutionConfig& cfg) {
  cfg.validate();
  require_same_grid(f0.grid, m.grid(), "picard_solve");
  const DistributionField start = remove_moments(f0);
  check_small(start, cfg);
  const State y0 = to_state(start, m.sqrt_mu());
  const State mu = mu_state(m);
  const int n = cfg.steps();
  YNorm yw = cfg.y;
  yw.l = cfg.y.l - 2.0;

  // Previous iterate: full-step states and Lawson stage inputs (empty means f^0 = 0).
  std::vector<State> prev_states(static_cast<std::size_t>(n + 1));
  std::vector<std::array<State, 4>> prev_stages(static_cast<std::size_t>(n));
  PicardResult res;
  for (int it = 0; it < cfg.picard_max; ++it) {
    std::vector<State> states(static_cast<std::size_t>(n + 1));
    std::vector<std::array<State, 4>> stages(static_cast<std::size_t>(n));
    states[0] = y0;
    State y = y0;
    for (int j = 0; j < n; ++j) {
      const auto& F = prev_stages[static_cast<std::size_t>(j)];
      // Q(mu + F, Y) + Q(F, mu) - L Y = Q(F, mu + Y) - Q(Y, mu); L Y is in the propagator.
      auto Nf = [&](int i, const State& Y) {
        State r = collide(m, kp, aq, Y, mu);
        for (auto& [l, v] : r) v = -v;
        if (!F[static_cast<std::size_t>(i)].empty())
          axpy(r, 1.0, collide(m, kp, aq, F[static_cast<std::size_t>(i)], lin(1.0, mu, 1.0, Y)));
        return r;
      };
      y = lawson_step(m, y, cfg.dt, Nf, &stages[static_cast<std::size_t>(j)]);
      states[static_cast<std::size_t>(j + 1)] = y;
    }
    double w = 0.0, size = 0.0;
    for (int j = 0; j <= n; ++j) {
      State d = states[static_cast<std::size_t>(j)];
      axpy(d, -1.0, prev_states[static_cast<std::size_t>(j)]);
      w = std::max(w, y_l_norm(to_field(m.grid(), d, m.sqrt_mu()), yw));
      size = std::max(size, y_l_norm(to_field(m.grid(), states[static_cast<std::size_t>(j)],
                                              m.sqrt_mu()),
                                     yw));
    }
    if (!std::isfinite(w)) throw NumericalAbort("picard_solve: iterate is not finite");
    if (!res.w_norms.empty()) res.ratios.push_back(w / res.w_norms.back());
    res.w_norms.push_back(w);
    res.iterations = it + 1;
    prev_states = std::move(states);
    prev_stages = std::move(stages);
    if (w <= cfg.picard_tol * size) {
      res.converged = true;
      break;
    }
  }
  Recorder rec(m.grid(), m.sqrt_mu(), kp, cfg, y0);
  for (int j = 0; j <= n; ++j) rec.record(res.trajectory, j * cfg.dt, prev_states[static_cast<std::size_t>(j)]);
  return res;
}


// ---------------------------------------------------------------------------------------------
// Records

void TrajectoryRecord::write_csv(std::ostream& os) const {
  os << "t,y_norm,weighted,dissipation,min_F,max_F,neg_part,projection_norm,m_1,m_v1,m_v2,m_v3,"
        "m_v2sq\n";
  char buf[64];
  auto put = [&](double x) {
    std::snprintf(buf, sizeof buf, "%.12e", x);
    os << buf;
  };
  for (std::size_t i = 0; i < times.size(); ++i) {
    put(times[i]);
    for (double x : {y_norm[i], weighted[i], dissipation[i], min_F[i], max_F[i], neg_part[i],
                     projection_norm[i]}) {
      os << ',';
      put(x);
    }
    for (Eigen::Index a = 0; a < moments[i].size(); ++a) {
      os << ',';
      put(moments[i][a]);
    }
    os << '\n';
  }
}

json TrajectoryRecord::summary() const {
  json j;
  j["n_records"] = times.size();
  if (times.empty()) return j;
  j["t_end"] = times.back();
  j["y_norm_initial"] = y_norm.front();
  j["y_norm_final"] = y_norm.back();
  j["weighted_initial"] = weighted.front();
  j["weighted_final"] = weighted.back();
  j["dissipation_integral"] = dissipation.back();
  j["min_F"] = *std::min_element(min_F.begin(), min_F.end());
  j["max_F"] = *std::max_element(max_F.begin(), max_F.end());
  j["moment_drift"] = moment_drift();
  j["flags"] = flags;
  return j;
}

EstimateReport positivity_monitor(const TrajectoryRecord& tr) {
  long bad_min = 0, bad_neg = 0;
  double worst = std::numeric_limits<double>::infinity();
  const double tol = tr.max_F.empty() ? 0.0 : 1e-12 * tr.max_F.front();
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    const double r = tr.min_F[i] / tr.max_F[i];
    worst = std::min(worst, r);
    if (tr.min_F[i] < -1e-8 * tr.max_F[i]) ++bad_min;
    if (i > 0 && tr.neg_part[i] > tr.neg_part[i - 1] + tol) ++bad_neg;
  }
  EstimateReport r;
  r.name = "positivity";
  r.tier = Tier::Exact;
  r.n_samples = static_cast<long>(tr.times.size());
  r.family = "trajectory records";
  r.stats["min_F_over_max_F"] = worst;
  r.stats["records_below_bound"] = double(bad_min);
  r.stats["negative_part_increases"] = double(bad_neg);
  r.stats["negative_part_final"] = tr.neg_part.empty() ? 0.0 : tr.neg_part.back();
  r.tolerances["min_F_over_max_F"] = -1e-8;
  r.pass = bad_min == 0 && bad_neg == 0;
  return r;
}

// ---------------------------------------------------------------------------------------------
// Initial data

namespace {

std::uint64_t mix(std::uint64_t h, std::int64_t v) {
  h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

Mode neg(const Mode& l) { return {-l[0], -l[1], -l[2]}; }

bool positive_rep(const Mode& l) {
  for (int i = 0; i < 3; ++i)
    if (l[i] != 0) return l[i] > 0;
  return true;
}

}  // namespace

DistributionField rough_initial(const VelocityGrid& g, int k0, double s, const RoughParams& rp) {
  DistributionField h(g);
  const Eigen::VectorXd wk = bracket_pow(g, -double(k0));
  const Eigen::VectorXd mu = maxwellian_values(g);
  const int n = g.n();
  for (const Mode& l0 : rp.modes) {
    const Mode l = positive_rep(l0) ? l0 : neg(l0);
    if (h.has(l)) continue;
    Eigen::VectorXcd v(static_cast<Eigen::Index>(g.size()));
    if (rp.smooth) {
      // Shifted Gaussian bumps, smooth in v.
      for (std::size_t p = 0; p < g.size(); ++p) {
        const Vec3 x = g.node(p);
        const double b = std::exp(-0.6 * norm2(Vec3{x[0] - 0.5, x[1] + 0.3, x[2]}));
        v[static_cast<Eigen::Index>(p)] = l == Mode{0, 0, 0} ? cd(b, 0.0) : cd(0.5 * b, 0.3 * b);
      }
    } else {
      std::vector<cd> hat(g.size());
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          for (int c = 0; c < n; ++c) {
            const Vec3 xi{g.xi(a), g.xi(b), g.xi(c)};
            std::uint64_t key = rp.seed;
            for (int x : {a - n / 2, b - n / 2, c - n / 2, l[0], l[1], l[2]}) key = mix(key, x);
            std::mt19937_64 rng(key);
            const double ph = std::uniform_real_distribution<double>(0.0, 2.0 * kPi)(rng);
            hat[g.idx(a, b, c)] = std::polar(std::pow(japan(norm2(xi)), s - 1.5 - rp.eps_prime), ph);
          }
      const std::vector<cd> gv = g.inverse(hat);
      for (std::size_t p = 0; p < g.size(); ++p) {
        const cd z = l == Mode{0, 0, 0} ? cd(gv[p].real(), 0.0) : gv[p];
        v[static_cast<Eigen::Index>(p)] = z * wk[static_cast<Eigen::Index>(p)];
      }
    }
    h.modes[l] = v;
    if (!(l == Mode{0, 0, 0})) h.modes[neg(l)] = v.conjugate();
  }
  // Zero the five moments with profiles phi_a <v>^-k0 exp(-|v|^2/2); subtracting
  // combinations of mu phi_a instead would dominate every <v>^k0 norm.
  if (h.has({0, 0, 0})) {
    const Eigen::MatrixXd phi = invariants(g);
    Eigen::MatrixXd psi = phi;
    for (std::size_t p = 0; p < g.size(); ++p)
      psi.row(static_cast<Eigen::Index>(p)) *= wk[static_cast<Eigen::Index>(p)] *
                                               std::exp(-0.5 * norm2(g.node(p)));
    const Eigen::MatrixXd gram = phi.transpose() * psi * g.cell();
    Eigen::VectorXcd& z = h[{0, 0, 0}];
    const Eigen::VectorXd c = gram.partialPivLu().solve(Eigen::VectorXd(phi.transpose() * z.real() * g.cell()));
    z -= (psi * c).cast<cd>();
  }
  (void)mu;
  return h;
}

double initial_functional(const DistributionField& h, int k0, double s) {
  const VelocityGrid& g = h.grid;
  const Eigen::VectorXd wk = bracket_pow(g, double(k0));
  const int n = g.n();
  const double dxi = g.dxi();
  double acc = 0.0;
  for (const auto& [l, v] : h.modes) {
    std::vector<cd> w(g.size());
    for (std::size_t p = 0; p < g.size(); ++p)
      w[p] = v[static_cast<Eigen::Index>(p)] * wk[static_cast<Eigen::Index>(p)];
    const std::vector<cd> hat = g.forward(w);
    const double lb = std::pow(japan(double(l[0] * l[0] + l[1] * l[1] + l[2] * l[2])),
                               s / (2.0 * s + 1.0));
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c) {
          const double xb = std::pow(japan(g.xi(a) * g.xi(a) + g.xi(b) * g.xi(b) + g.xi(c) * g.xi(c)), s);
          acc += std::norm(hat[g.idx(a, b, c)]) / ((xb + lb) * (xb + lb));
        }
  }
  return acc * std::pow(dxi / (2.0 * kPi), 3);
}

DistributionField small_perturbation(const VelocityGrid& g, double y_size, const YNorm& y,
                                     std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-0.3, 0.3);
  const Vec3 c{U(rng), U(rng), U(rng)};
  const double ph = 2.0 * kPi * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  const Eigen::VectorXd mu = maxwellian_values(g);
  Eigen::VectorXcd z(mu.size()), e(mu.size());
  for (std::size_t p = 0; p < g.size(); ++p) {
    const Vec3 v = g.node(p);
    const auto i = static_cast<Eigen::Index>(p);
    z[i] = std::pow(2.0 * kPi * 0.7, -1.5) *
           std::exp(-norm2(Vec3{v[0] - c[0], v[1] - c[1], v[2] - c[2]}) / 1.4);
    e[i] = std::polar(0.5, ph) * mu[i] * (1.0 + 0.3 * v[0]);
  }
  DistributionField f(g);
  f.modes[{0, 0, 0}] = z - MomentProjector(g).apply(z);
  f.modes[{1, 0, 0}] = e;
  f.modes[{-1, 0, 0}] = e.conjugate();
  const double n = y_l_norm(f, y);
  return n > 0.0 ? cd(y_size / n) * f : f;
}

// ---------------------------------------------------------------------------------------------
// Regularization

namespace {

// sum_l |<v>^k0 M(t, l, .) f_l|^2 with M applied on the velocity dual lattice.
double multiplied_norm2(const DistributionField& f, int k0, MultiplierSymbol ms, double t) {
  const VelocityGrid& g = f.grid;
  const Eigen::VectorXd wk = bracket_pow(g, double(k0));
  const int n = g.n();
  double acc = 0.0;
  ms.t = t;
  for (const auto& [l, v] : f.modes) {
    ms.eta = {2 * kPi * l[0], 2 * kPi * l[1], 2 * kPi * l[2]};
    std::vector<cd> w(v.data(), v.data() + v.size());
    std::vector<cd> hat = g.forward(w);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c)
          hat[g.idx(a, b, c)] *= multiplier_eval(ms, Vec3{g.xi(a), g.xi(b), g.xi(c)});
    const std::vector<cd> back = g.inverse(hat);
    for (std::size_t p = 0; p < g.size(); ++p)
      acc += std::norm(back[p] * wk[static_cast<Eigen::Index>(p)]);
  }
  return acc * g.cell();
}

}  // namespace

RegularizationRun regularization_run(const DistributionField& h0, const LinearModel& m,
                                     const KernelParams& kp, const EvolutionConfig& cfg) {
  EvolutionConfig c = cfg;
  c.k_weight = cfg.k0;
  c.integrator = Integrator::Exponential;
  c.growth_abort = 1e12;  // rough data: large transients are expected
  std::vector<double> mq, mt;
  Observer obs;
  if (c.multiplier_diagnostics) {
    c.multiplier.T = c.t_end;
    obs = [&](double t, const DistributionField& f) {
      mt.push_back(t);
      mq.push_back(multiplied_norm2(f, c.k0, c.multiplier, t));
    };
  }
  const TrajectoryRecord tr = evolve_linear(h0, m, kp, c, obs);
  RegularizationRun r;
  r.n = m.grid().n();
  r.functional = initial_functional(h0, c.k0, kp.s);
  r.initial_weighted = tr.weighted.front();
  for (std::size_t i = 1; i < tr.times.size(); ++i) {
    if (tr.times[i] > c.T0 + 1e-12) break;
    r.integral += 0.5 * (tr.times[i] - tr.times[i - 1]) *
                  (tr.weighted[i] * tr.weighted[i] + tr.weighted[i - 1] * tr.weighted[i - 1]);
  }
  r.ratio = r.functional > 0.0 ? r.integral / r.functional : 0.0;
  r.tail_rate = tail_decay_rate(tr.times, tr.weighted, 1e-8, c.T0);
  double ab = -std::numeric_limits<double>::infinity();
  for (const auto& [l, v] : h0.modes) ab = std::max(ab, m.abscissa(l));
  r.gap = -ab;
  if (!mq.empty() && mq.front() > 0.0) {
    // Gronwall envelope Q(0) exp(rate t), rate >= 0 fitted on the first tenth of the run.
    double rate = 0.0;
    for (std::size_t i = 1; i < mt.size() && mt[i] <= 0.1 * c.t_end + 1e-12; ++i)
      rate = std::max(rate, std::log(mq[i] / mq.front()) / mt[i]);
    for (std::size_t i = 0; i < mt.size(); ++i)
      r.multiplier_envelope_excess =
          std::max(r.multiplier_envelope_excess, mq[i] / (mq.front() * std::exp(rate * mt[i])) - 1.0);
  }
  return r;
}

EstimateReport regularization_experiment(const RegularizationSetup& setup, const KernelParams& kp,
                                         const EvolutionConfig& cfg,
                                         std::vector<RegularizationRun>* runs_out) {
  const AngularQuadrature aq = build_angular(kp, setup.n_theta, setup.n_phi);
  std::vector<RegularizationRun> runs;
  auto run = [&](int n, const RoughParams& rp, const LinearModel& m) {
    const DistributionField h0 = rough_initial(m.grid(), cfg.k0, kp.s, rp);
    RegularizationRun r = regularization_run(h0, m, kp, cfg);
    r.eps_prime = rp.smooth ? 0.0 : rp.eps_prime;
    (void)n;
    runs.push_back(r);
  };
  {
    const LinearModel coarse = LinearModel::assemble(build_grid(setup.Lv, setup.n_coarse), kp, aq);
    run(setup.n_coarse, setup.rough, coarse);
    RoughParams rougher = setup.rough;
    rougher.eps_prime = 0.5 * setup.rough.eps_prime;
    run(setup.n_coarse, rougher, coarse);
  }
  {
    const LinearModel fine = LinearModel::assemble(build_grid(setup.Lv, setup.n_fine), kp, aq);
    run(setup.n_fine, setup.rough, fine);
  }
  const double grid_change = std::abs(runs[2].ratio / runs[0].ratio - 1.0);
  const double rough_change = std::abs(runs[1].ratio / runs[0].ratio - 1.0);
  double tail = 0.0;
  for (const auto& r : runs) tail = std::max(tail, std::abs(r.tail_rate / r.gap - 1.0));
  EstimateReport rep;
  rep.name = "regularization";
  rep.tier = Tier::Fitted;
  rep.seed = setup.rough.seed;
  rep.n_samples = static_cast<long>(runs.size());
  rep.family = "rough initial data";
  rep.stats["ratio_coarse"] = runs[0].ratio;
  rep.stats["ratio_rougher"] = runs[1].ratio;
  rep.stats["ratio_fine"] = runs[2].ratio;
  rep.stats["grid_change"] = grid_change;
  rep.stats["roughness_change"] = rough_change;
  rep.stats["tail_rate_coarse"] = runs[0].tail_rate;
  rep.stats["tail_rate_fine"] = runs[2].tail_rate;
  rep.stats["gap_coarse"] = runs[0].gap;
  rep.stats["gap_fine"] = runs[2].gap;
  rep.stats["tail_rate_deviation"] = tail;
  rep.tolerances["ratio_change"] = 0.5;
  rep.tolerances["tail_rate"] = 0.2;
  rep.context["n_coarse"] = std::to_string(setup.n_coarse);
  rep.context["n_fine"] = std::to_string(setup.n_fine);
  rep.context["k0"] = std::to_string(cfg.k0);
  rep.fitted = runs[0].ratio;
  rep.pass = grid_change <= 0.5 && rough_change <= 0.5 && tail <= 0.2;
  if (runs_out) *runs_out = runs;
  return rep;
}

// ---------------------------------------------------------------------------------------------
// Triple norm

double semigroup_triple_norm(const DistributionField& f, const LinearModel& m,
                             const EvolutionConfig& cfg, const TripleNormParams& tp) {
  cfg.validate();
  const double y = y_l_norm(f, cfg.y);
  if (tp.A == 0.0) return y;
  if (f.has({0, 0, 0})) {
    const Eigen::VectorXcd z = f.get({0, 0, 0});
    if (l2(f.grid, MomentProjector(f.grid).apply(z)) > 1e-8 * std::max(l2(f.grid, z), 1e-300))
      throw InvalidArgument("semigroup_triple_norm: f must have zero moments");
  }
  const Eigen::VectorXd W = bracket_pow(f.grid, cfg.y.m0 * tp.l0);
  auto integrand = [&](const State& s) {
    double acc = 0.0;
    for (const auto& [l, v] : s) {
      const auto c = derivative_factors(l);
      const double n = weighted_l2(f.grid, v.cwiseProduct(m.sqrt_mu().cast<cd>()), W);
      acc += (c[0] + c[1] + c[2]) * n * n;
    }
    return acc;
  };
  State s = to_state(f, m.sqrt_mu());
  double prev = integrand(s);
  const double first = prev;
  if (first == 0.0) return y;
  double integral = 0.0, tau = 0.0;
  while (prev > 1e-12 * first) {
    if (tau > tp.tau_cap)
      throw NumericalAbort("semigroup_triple_norm: integrand does not decay (no gap?)");
    s = propagate(m, cfg.dt, s);
    const double cur = integrand(s);
    integral += 0.5 * cfg.dt * (prev + cur);
    prev = cur;
    tau += cfg.dt;
  }
  return std::sqrt(y * y + tp.A * integral);
}

}  // namespace kgap
