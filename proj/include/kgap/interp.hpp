#pragma once

#include <functional>
#include <vector>

#include "kgap/grids.hpp"

namespace kgap {

// One-dimensional interpolation stencil: value at i + t is sum_a w[a] * A[i + off + a].
template <int S>
struct Stencil {
  int off = 0;
  double w[S] = {};
};

// Cubic convolution (Keys, a = -1/2): C1, 4 points, reproduces quadratics.
Stencil<4> keys_stencil(double t);
// Centred quadratic Lagrange: 3 points, reproduces quadratics.
Stencil<3> quad_stencil(double t);

struct Box {
  int lo[3] = {0, 0, 0};
  int hi[3] = {-1, -1, -1};  // inclusive
  int ext(int d) const { return hi[d] - lo[d] + 1; }
  bool empty() const { return hi[0] < lo[0] || hi[1] < lo[1] || hi[2] < lo[2]; }
  std::size_t size() const {
    return empty() ? 0 : static_cast<std::size_t>(ext(0)) * ext(1) * ext(2);
  }
};

// Everything that is constant over v for a fixed lattice difference u = v - v* and a
// fixed sigma node: the post-collision shift delta = (|u| sigma - u)/2 is the same for
// every v, so v' = v + delta and v'_* = v* - delta share one stencil per axis.
template <int S>
struct CollisionBlock {
  int du[3];
  double r;          // |u|
  Vec3 sigma;
  std::size_t it, ip;
  double theta;
  double wang;       // angular weight (kernel included) times h^3
  Box box;           // valid v indices
  Stencil<S> gain[3];  // at v + delta, relative to the v index
  Stencil<S> star[3];  // at v* - delta, relative to the v index
};

struct SweepOptions {
  double r_max = -1.0;     // skip |u| > r_max when positive
  bool half = false;       // only u > 0 lexicographically (caller doubles)
  bool include_zero = false;
};

// Visit every (u, sigma) block whose stencils fit inside the grid.
template <int S>
void sweep(const VelocityGrid& g, const AngularQuadrature& aq, const SweepOptions& opt,
           const std::function<void(const CollisionBlock<S>&)>& fn);

// out(box) = sum of A at the stencil (A is an n^3 array, out is box-shaped).
template <int S, class T>
void gather(const T* A, int n, const Box& box, const Stencil<S> st[3], T* out,
            std::vector<T>& t1, std::vector<T>& t2) {
  const int e0 = box.ext(0), e1 = box.ext(1), e2 = box.ext(2);
  const int r0 = e0 + S - 1, r1 = e1 + S - 1;
  const int b0 = box.lo[0] + st[0].off, b1 = box.lo[1] + st[1].off;
  const int c2 = box.lo[2] + st[2].off;
  t1.assign(static_cast<std::size_t>(r0) * r1 * e2, T(0));
  for (int a = 0; a < r0; ++a)
    for (int b = 0; b < r1; ++b) {
      const T* src = A + (static_cast<std::size_t>(b0 + a) * n + (b1 + b)) * n + c2;
      T* dst = t1.data() + (static_cast<std::size_t>(a) * r1 + b) * e2;
      for (int s = 0; s < S; ++s) {
        const double w = st[2].w[s];
        const T* sp = src + s;
        for (int k = 0; k < e2; ++k) dst[k] += w * sp[k];
      }
    }
  t2.assign(static_cast<std::size_t>(r0) * e1 * e2, T(0));
  for (int a = 0; a < r0; ++a)
    for (int j = 0; j < e1; ++j) {
      T* dst = t2.data() + (static_cast<std::size_t>(a) * e1 + j) * e2;
      for (int s = 0; s < S; ++s) {
        const double w = st[1].w[s];
        const T* sp = t1.data() + (static_cast<std::size_t>(a) * r1 + j + s) * e2;
        for (int k = 0; k < e2; ++k) dst[k] += w * sp[k];
      }
    }
  const std::size_t plane = static_cast<std::size_t>(e1) * e2;
  for (int i = 0; i < e0; ++i) {
    T* dst = out + i * plane;
    for (std::size_t q = 0; q < plane; ++q) dst[q] = T(0);
    for (int s = 0; s < S; ++s) {
      const double w = st[0].w[s];
      const T* sp = t2.data() + (i + s) * plane;
      for (std::size_t q = 0; q < plane; ++q) dst[q] += w * sp[q];
    }
  }
}

// First two separable passes of gather (axes 2 and 1); t2 has ext(0) + S - 1 planes of
// size ext(1) * ext(2). The last pass is left to the caller so it can be fused.
template <int S, class T>
void gather12(const T* A, int n, const Box& box, const Stencil<S> st[3], std::vector<T>& t1,
              std::vector<T>& t2) {
  const int e1 = box.ext(1), e2 = box.ext(2);
  const int r0 = box.ext(0) + S - 1, r1 = e1 + S - 1;
  const int b0 = box.lo[0] + st[0].off, b1 = box.lo[1] + st[1].off;
  const int c2 = box.lo[2] + st[2].off;
  t1.resize(static_cast<std::size_t>(r0) * r1 * e2);
  for (int a = 0; a < r0; ++a)
    for (int b = 0; b < r1; ++b) {
      const T* src = A + (static_cast<std::size_t>(b0 + a) * n + (b1 + b)) * n + c2;
      T* dst = t1.data() + (static_cast<std::size_t>(a) * r1 + b) * e2;
      const double w0 = st[2].w[0], w1 = st[2].w[1], w2 = st[2].w[2];
      if constexpr (S == 4) {
        const double w3 = st[2].w[3];
        for (int k = 0; k < e2; ++k)
          dst[k] = w0 * src[k] + w1 * src[k + 1] + w2 * src[k + 2] + w3 * src[k + 3];
      } else {
        for (int k = 0; k < e2; ++k) dst[k] = w0 * src[k] + w1 * src[k + 1] + w2 * src[k + 2];
      }
    }
  t2.resize(static_cast<std::size_t>(r0) * e1 * e2);
  for (int a = 0; a < r0; ++a)
    for (int j = 0; j < e1; ++j) {
      T* dst = t2.data() + (static_cast<std::size_t>(a) * e1 + j) * e2;
      const T* sp = t1.data() + (static_cast<std::size_t>(a) * r1 + j) * e2;
      const double w0 = st[1].w[0], w1 = st[1].w[1], w2 = st[1].w[2];
      if constexpr (S == 4) {
        const double w3 = st[1].w[3];
        for (int k = 0; k < e2; ++k)
          dst[k] = w0 * sp[k] + w1 * sp[k + e2] + w2 * sp[k + 2 * e2] + w3 * sp[k + 3 * e2];
      } else {
        for (int k = 0; k < e2; ++k) dst[k] = w0 * sp[k] + w1 * sp[k + e2] + w2 * sp[k + 2 * e2];
      }
    }
}

// Adjoint of gather: A at the stencil += weights * Y(box).
template <int S, class T>
void scatter(T* A, int n, const Box& box, const Stencil<S> st[3], const T* Y,
             std::vector<T>& t1, std::vector<T>& t2) {
  const int e0 = box.ext(0), e1 = box.ext(1), e2 = box.ext(2);
  const int r0 = e0 + S - 1, r1 = e1 + S - 1;
  const int b0 = box.lo[0] + st[0].off, b1 = box.lo[1] + st[1].off;
  const int c2 = box.lo[2] + st[2].off;
  const std::size_t plane = static_cast<std::size_t>(e1) * e2;
  t2.assign(static_cast<std::size_t>(r0) * plane, T(0));
  for (int i = 0; i < e0; ++i)
    for (int s = 0; s < S; ++s) {
      const double w = st[0].w[s];
      T* dst = t2.data() + (i + s) * plane;
      const T* sp = Y + i * plane;
      for (std::size_t q = 0; q < plane; ++q) dst[q] += w * sp[q];
    }
  t1.assign(static_cast<std::size_t>(r0) * r1 * e2, T(0));
  for (int a = 0; a < r0; ++a)
    for (int j = 0; j < e1; ++j) {
      const T* sp = t2.data() + (static_cast<std::size_t>(a) * e1 + j) * e2;
      for (int s = 0; s < S; ++s) {
        const double w = st[1].w[s];
        T* dst = t1.data() + (static_cast<std::size_t>(a) * r1 + j + s) * e2;
        for (int k = 0; k < e2; ++k) dst[k] += w * sp[k];
      }
    }
  for (int a = 0; a < r0; ++a)
    for (int b = 0; b < r1; ++b) {
      T* dst = A + (static_cast<std::size_t>(b0 + a) * n + (b1 + b)) * n + c2;
      const T* sp = t1.data() + (static_cast<std::size_t>(a) * r1 + b) * e2;
      for (int s = 0; s < S; ++s) {
        const double w = st[2].w[s];
        T* dp = dst + s;
        for (int k = 0; k < e2; ++k) dp[k] += w * sp[k];
      }
    }
}

// Copy A shifted by an integer offset into box order: out(i) = A(i + off).
template <class T>
void gather_shift(const T* A, int n, const Box& box, const int off[3], T* out) {
  std::size_t q = 0;
  for (int i = box.lo[0]; i <= box.hi[0]; ++i)
    for (int j = box.lo[1]; j <= box.hi[1]; ++j) {
      const T* src = A + (static_cast<std::size_t>(i + off[0]) * n + (j + off[1])) * n + off[2];
      for (int k = box.lo[2]; k <= box.hi[2]; ++k) out[q++] = src[k];
    }
}

template <class T>
void scatter_shift(T* A, int n, const Box& box, const int off[3], const T* Y) {
  std::size_t q = 0;
  for (int i = box.lo[0]; i <= box.hi[0]; ++i)
    for (int j = box.lo[1]; j <= box.hi[1]; ++j) {
      T* dst = A + (static_cast<std::size_t>(i + off[0]) * n + (j + off[1])) * n + off[2];
      for (int k = box.lo[2]; k <= box.hi[2]; ++k) dst[k] += Y[q++];
    }
}

// Separable product p(i,j,k) = a0[i] a1[j] a2[k] over the box.
void outer3(const Box& box, const std::vector<double>& a0, const std::vector<double>& a1,
            const std::vector<double>& a2, std::vector<double>& out);

// Point interpolation with the Keys kernel (no modulation); returns false outside.
bool keys_point(const VelocityGrid& g, const double* A, const Vec3& v, double& out);

}  // namespace kgap
