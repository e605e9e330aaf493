#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <utility>
#include <vector>

#include "models.hpp"

namespace fv2d {

// Compensated (Kahan) accumulator; all series/quadrature reductions below
// run in a fixed element order so results are bit-deterministic.
template <typename Scalar>
struct KahanSum {
  Scalar sum{0}, carry{0};
  void add(Scalar v) {
    const Scalar y = v - carry;
    const Scalar t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
  Scalar value() const { return sum; }
};

// Composite Gauss-Legendre rule: n total points split into panels of order
// 10. Nodes are ascending across the whole interval.
template <typename Scalar>
void composite_gauss_legendre(Scalar a, Scalar b, int n, Vector<Scalar>& x, Vector<Scalar>& w) {
  static const Scalar nodes[10] = {
      Scalar(-0.9739065285171717), Scalar(-0.8650633666889845), Scalar(-0.6794095682990244),
      Scalar(-0.4333953941292472), Scalar(-0.1488743389816312), Scalar(0.1488743389816312),
      Scalar(0.4333953941292472),  Scalar(0.6794095682990244),  Scalar(0.8650633666889845),
      Scalar(0.9739065285171717)};
  static const Scalar weights[10] = {
      Scalar(0.0666713443086881), Scalar(0.1494513491505806), Scalar(0.2190863625159820),
      Scalar(0.2692667193099963), Scalar(0.2955242247147529), Scalar(0.2955242247147529),
      Scalar(0.2692667193099963), Scalar(0.2190863625159820), Scalar(0.1494513491505806),
      Scalar(0.0666713443086881)};
  const int panels = std::max(1, n / 10);
  const Scalar h = (b - a) / Scalar(panels);
  x.resize(10 * panels);
  w.resize(10 * panels);
  for (int p = 0; p < panels; ++p) {
    const Scalar mid = a + (Scalar(p) + Scalar(0.5)) * h;
    for (int k = 0; k < 10; ++k) {
      x(10 * p + k) = mid + Scalar(0.5) * h * nodes[k];
      w(10 * p + k) = Scalar(0.5) * h * weights[k];
    }
  }
}

// Series truncation and quadrature policy of the COS pricers.
struct CosConfig {
  int K1 = 51, K2 = 51;     // basket series truncation per direction
  double L = 12.0;          // cumulant interval half-width multiplier
  int quad_points = 2000;   // payoff-coefficient quadrature points per axis
  bool parity_filter = true;
};

// Per-asset log-return truncation interval [c1 - L sqrt(c2), c1 + L sqrt(c2)]
// from the Black-Scholes cumulants c1 = (r - q - sigma^2/2) T, c2 = sigma^2 T.
template <typename Scalar>
std::pair<Scalar, Scalar> bs_cos_interval(Scalar sigma, Scalar r, Scalar q, Scalar T, Scalar L) {
  const Scalar c1 = (r - q - Scalar(0.5) * sigma * sigma) * T;
  const Scalar half = L * std::sqrt(sigma * sigma * T);
  return {c1 - half, c1 + half};
}

// Fourier-cosine coefficients A_{k1,k2} of the bivariate Black-Scholes
// log-return density on the cumulant-symmetric box, in closed form. The
// symmetric interval turns the phase into k pi / 2, so odd k1 + k2 entries
// vanish exactly; the explicit parity filter still applies per config.
template <typename Scalar>
Array2<Scalar> a_coefficients(const BasketParams<Scalar>& p, const CosConfig& cfg) {
  const Scalar T = p.T;
  auto [a1, b1] = bs_cos_interval(p.sigma1, p.r, p.q1, T, Scalar(cfg.L));
  auto [a2, b2] = bs_cos_interval(p.sigma2, p.r, p.q2, T, Scalar(cfg.L));
  const int K1 = cfg.K1, K2 = cfg.K2;
  Array2<Scalar> A(K1 + 1, K2 + 1);
  auto quarter_cos = [](int m) -> Scalar {
    static const Scalar q[4] = {Scalar(1), Scalar(0), Scalar(-1), Scalar(0)};
    return q[((m % 4) + 4) % 4];
  };
  for (int k2 = 0; k2 <= K2; ++k2) {
    const Scalar u2 = Scalar(k2) * Scalar(EIGEN_PI) / (b2 - a2);
    for (int k1 = 0; k1 <= K1; ++k1) {
      const Scalar u1 = Scalar(k1) * Scalar(EIGEN_PI) / (b1 - a1);
      if (k1 == 0 && k2 == 0) {
        A(0, 0) = Scalar(1);
      } else if (k2 == 0) {
        A(k1, 0) = std::sqrt(Scalar(2)) * std::exp(-Scalar(0.5) * T * p.sigma1 * p.sigma1 * u1 * u1) *
                   quarter_cos(k1);
      } else if (k1 == 0) {
        A(0, k2) = std::sqrt(Scalar(2)) * std::exp(-Scalar(0.5) * T * p.sigma2 * p.sigma2 * u2 * u2) *
                   quarter_cos(k2);
      } else {
        const Scalar cross = Scalar(2) * p.rho * p.sigma1 * p.sigma2 * u1 * u2;
        const Scalar base = p.sigma1 * p.sigma1 * u1 * u1 + p.sigma2 * p.sigma2 * u2 * u2;
        A(k1, k2) = std::exp(-Scalar(0.5) * T * (base + cross)) * quarter_cos(k1 + k2) +
                    std::exp(-Scalar(0.5) * T * (base - cross)) * quarter_cos(k1 - k2);
      }
      if (cfg.parity_filter && ((k1 + k2) % 2 != 0)) A(k1, k2) = Scalar(0);
    }
  }
  return A;
}

// Same coefficients through the complex characteristic function (the
// general-model route); used as an independent cross-check of the closed
// form and of the parity property.
template <typename Scalar>
Array2<Scalar> a_coefficients_generic(const BasketParams<Scalar>& p, const CosConfig& cfg) {
  using C = std::complex<Scalar>;
  const Scalar T = p.T;
  auto [a1, b1] = bs_cos_interval(p.sigma1, p.r, p.q1, T, Scalar(cfg.L));
  auto [a2, b2] = bs_cos_interval(p.sigma2, p.r, p.q2, T, Scalar(cfg.L));
  const Scalar mu1 = p.r - p.q1 - Scalar(0.5) * p.sigma1 * p.sigma1;
  const Scalar mu2 = p.r - p.q2 - Scalar(0.5) * p.sigma2 * p.sigma2;
  auto cf = [&](Scalar u1, Scalar u2) -> C {
    const Scalar quad = p.sigma1 * p.sigma1 * u1 * u1 +
                        Scalar(2) * p.rho * p.sigma1 * p.sigma2 * u1 * u2 +
                        p.sigma2 * p.sigma2 * u2 * u2;
    return std::exp(C(-Scalar(0.5) * T * quad, T * (u1 * mu1 + u2 * mu2)));
  };
  const int K1 = cfg.K1, K2 = cfg.K2;
  Array2<Scalar> A(K1 + 1, K2 + 1);
  for (int k2 = 0; k2 <= K2; ++k2) {
    const Scalar u2 = Scalar(k2) * Scalar(EIGEN_PI) / (b2 - a2);
    for (int k1 = 0; k1 <= K1; ++k1) {
      const Scalar u1 = Scalar(k1) * Scalar(EIGEN_PI) / (b1 - a1);
      if (k1 == 0 && k2 == 0)
        A(0, 0) = cf(0, 0).real();
      else if (k2 == 0)
        A(k1, 0) = std::sqrt(Scalar(2)) * (std::exp(C(0, -a1 * u1)) * cf(u1, 0)).real();
      else if (k1 == 0)
        A(0, k2) = std::sqrt(Scalar(2)) * (std::exp(C(0, -a2 * u2)) * cf(0, u2)).real();
      else
        A(k1, k2) = (std::exp(C(0, -(a1 * u1 + a2 * u2))) * cf(u1, u2)).real() +
                    (std::exp(C(0, -(a1 * u1 - a2 * u2))) * cf(u1, -u2)).real();
      if (cfg.parity_filter && ((k1 + k2) % 2 != 0)) A(k1, k2) = Scalar(0);
    }
  }
  return A;
}

// Payoff cosine coefficient B_{k1,k2} = integral of payoff(x1, x2) times the
// normalized basis n_{k1} cos(u1 (x1-a1)) n_{k2} cos(u2 (x2-a2)) over the
// truncation box, by composite Gauss-Legendre tensor quadrature (compensated,
// fixed order: deterministic for a fixed quad_points).
template <typename Scalar, typename Payoff>
Scalar payoff_coefficient_b(const Payoff& payoff, std::pair<Scalar, Scalar> iv1,
                            std::pair<Scalar, Scalar> iv2, int k1, int k2, int quad_points) {
  Vector<Scalar> x1, w1, x2, w2;
  composite_gauss_legendre(iv1.first, iv1.second, quad_points, x1, w1);
  composite_gauss_legendre(iv2.first, iv2.second, quad_points, x2, w2);
  const Scalar u1 = Scalar(k1) * Scalar(EIGEN_PI) / (iv1.second - iv1.first);
  const Scalar u2 = Scalar(k2) * Scalar(EIGEN_PI) / (iv2.second - iv2.first);
  const Scalar n1 = k1 == 0 ? Scalar(1) : std::sqrt(Scalar(2));
  const Scalar n2 = k2 == 0 ? Scalar(1) : std::sqrt(Scalar(2));
  KahanSum<Scalar> acc;
  for (Eigen::Index q2 = 0; q2 < x2.size(); ++q2) {
    const Scalar cy = w2(q2) * std::cos(u2 * (x2(q2) - iv2.first));
    for (Eigen::Index q1 = 0; q1 < x1.size(); ++q1)
      acc.add(payoff(x1(q1), x2(q2)) * w1(q1) * std::cos(u1 * (x1(q1) - iv1.first)) * cy);
  }
  return n1 * n2 * acc.value();
}

namespace detail {

// Normalized cosine design matrix: row k holds n_k cos(u_k (x_q - a)) with
// n_0 = 1, n_k = sqrt(2).
template <typename Scalar>
Array2<Scalar> cosine_rows(int K, Scalar a, Scalar b, const Vector<Scalar>& x) {
  Array2<Scalar> Cm(K + 1, x.size());
  for (Eigen::Index q = 0; q < x.size(); ++q)
    for (int k = 0; k <= K; ++k) {
      const Scalar u = Scalar(k) * Scalar(EIGEN_PI) / (b - a);
      Cm(k, q) = (k == 0 ? Scalar(1) : std::sqrt(Scalar(2))) * std::cos(u * (x(q) - a));
    }
  return Cm;
}

}  // namespace detail

// Pointwise 2D COS basket price: payoff coefficients B_k by composite
// Gauss-Legendre tensor quadrature for this spot, then a compensated sum of
// A_k B_k over the (parity-filtered) index set.
template <typename Scalar>
Scalar cos_price_2d(const BasketParams<Scalar>& p, Scalar s1, Scalar s2,
                    const CosConfig& cfg = {}) {
  auto [a1, b1] = bs_cos_interval(p.sigma1, p.r, p.q1, p.T, Scalar(cfg.L));
  auto [a2, b2] = bs_cos_interval(p.sigma2, p.r, p.q2, p.T, Scalar(cfg.L));
  Array2<Scalar> A = a_coefficients(p, cfg);

  Vector<Scalar> x1, w1, x2, w2;
  composite_gauss_legendre(a1, b1, cfg.quad_points, x1, w1);
  composite_gauss_legendre(a2, b2, cfg.quad_points, x2, w2);
  Array2<Scalar> Cx = detail::cosine_rows(cfg.K1, a1, b1, x1);
  Array2<Scalar> Cy = detail::cosine_rows(cfg.K2, a2, b2, x2);
  for (Eigen::Index q = 0; q < x1.size(); ++q) Cx.col(q) *= w1(q);
  for (Eigen::Index q = 0; q < x2.size(); ++q) Cy.col(q) *= w2(q);

  const Vector<Scalar> e1 = x1.array().exp().matrix();
  const Vector<Scalar> e2 = x2.array().exp().matrix();

  // B = Cx (w-scaled) * P * Cy^T (w-scaled), built one payoff column at a time
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> Bq(cfg.K1 + 1, x2.size());
  Vector<Scalar> pcol(x1.size());
  for (Eigen::Index q2 = 0; q2 < x2.size(); ++q2) {
    pcol = (Scalar(0.5) * (s1 * e1.array() + s2 * e2(q2)) - p.K).max(Scalar(0)).matrix();
    Bq.col(q2) = Cx.matrix() * pcol;
  }
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> B = Bq * Cy.matrix().transpose();

  KahanSum<Scalar> acc;
  for (int k2 = 0; k2 <= cfg.K2; ++k2)
    for (int k1 = 0; k1 <= cfg.K1; ++k1) acc.add(A(k1, k2) * B(k1, k2));
  return std::exp(-p.r * p.T) / ((b1 - a1) * (b2 - a2)) * acc.value();
}

// Batch 2D COS basket price on a tensor grid of spots. The density matrix
// D = Cx^T A Cy on the quadrature grid is spot-independent and built once;
// each spot then costs one weighted payoff reduction over the quadrature
// grid, truncated at the payoff kink. Algebraically identical to the
// pointwise route; reductions are compensated and in fixed order.
template <typename Scalar>
Array2<Scalar> cos_price_2d_grid(const BasketParams<Scalar>& p, const Vector<Scalar>& spots1,
                                 const Vector<Scalar>& spots2, const CosConfig& cfg = {}) {
  auto [a1, b1] = bs_cos_interval(p.sigma1, p.r, p.q1, p.T, Scalar(cfg.L));
  auto [a2, b2] = bs_cos_interval(p.sigma2, p.r, p.q2, p.T, Scalar(cfg.L));
  Array2<Scalar> A = a_coefficients(p, cfg);

  Vector<Scalar> x1, w1, x2, w2;
  composite_gauss_legendre(a1, b1, cfg.quad_points, x1, w1);
  composite_gauss_legendre(a2, b2, cfg.quad_points, x2, w2);
  Array2<Scalar> Cx = detail::cosine_rows(cfg.K1, a1, b1, x1);
  Array2<Scalar> Cy = detail::cosine_rows(cfg.K2, a2, b2, x2);

  // weighted density values on the quadrature grid
  Array2<Scalar> WD = (Cx.matrix().transpose() * A.matrix() * Cy.matrix()).array();
  for (Eigen::Index q2 = 0; q2 < x2.size(); ++q2)
    for (Eigen::Index q1 = 0; q1 < x1.size(); ++q1) WD(q1, q2) *= w1(q1) * w2(q2);

  std::vector<Scalar> e1(static_cast<std::size_t>(x1.size()));
  std::vector<Scalar> e2(static_cast<std::size_t>(x2.size()));
  for (Eigen::Index q = 0; q < x1.size(); ++q) e1[std::size_t(q)] = std::exp(x1(q));
  for (Eigen::Index q = 0; q < x2.size(); ++q) e2[std::size_t(q)] = std::exp(x2(q));

  const Scalar disc = std::exp(-p.r * p.T) / ((b1 - a1) * (b2 - a2));
  Array2<Scalar> out(spots1.size(), spots2.size());

#ifdef _OPENMP
#pragma omp parallel for collapse(2) schedule(static)
#endif
  for (Eigen::Index j = 0; j < spots2.size(); ++j)
    for (Eigen::Index i = 0; i < spots1.size(); ++i) {
      const Scalar s1 = spots1(i), s2 = spots2(j);
      KahanSum<Scalar> acc;
      for (Eigen::Index q2 = 0; q2 < x2.size(); ++q2) {
        const Scalar tail = Scalar(0.5) * s2 * e2[std::size_t(q2)] - p.K;
        // payoff is zero until 0.5 s1 e^{x1} exceeds -tail
        const Scalar cut = -tail * Scalar(2) / s1;
        const auto first =
            std::upper_bound(e1.begin(), e1.end(), cut) - e1.begin();
        for (Eigen::Index q1 = first; q1 < x1.size(); ++q1)
          acc.add(WD(q1, q2) * (Scalar(0.5) * s1 * e1[std::size_t(q1)] + tail));
      }
      out(i, j) = disc * acc.value();
    }
  return out;
}

// Heston log-return characteristic function (the branch-stable "little trap"
// form), D(xi) = sqrt((kappa - i rho sigma xi)^2 + (xi + i) xi sigma^2).
template <typename Scalar>
std::complex<Scalar> heston_cf(const HestonParams<Scalar>& p, Scalar v0,
                               std::complex<Scalar> xi) {
  using C = std::complex<Scalar>;
  const C i(0, 1);
  const C b = C(p.kappa, 0) - i * p.rho * p.sigma * xi;
  const C D = std::sqrt(b * b + (xi + i) * xi * p.sigma * p.sigma);
  const C G = (b - D) / (b + D);
  const C eDT = std::exp(-D * p.T);
  const C t1 = i * xi * (p.r - p.q) * p.T +
               (v0 / (p.sigma * p.sigma)) * ((Scalar(1) - eDT) / (Scalar(1) - G * eDT)) * (b - D);
  const C t2 = (p.kappa * p.theta / (p.sigma * p.sigma)) *
               (p.T * (b - D) - Scalar(2) * std::log((Scalar(1) - G * eDT) / (Scalar(1) - G)));
  return std::exp(t1 + t2);
}

// First two cumulants of the Heston log return (standard COS-literature
// expressions).
template <typename Scalar>
std::pair<Scalar, Scalar> heston_cumulants(const HestonParams<Scalar>& p, Scalar v0) {
  const Scalar kap = p.kappa, th = p.theta, sig = p.sigma, rho = p.rho, T = p.T;
  const Scalar mu = p.r - p.q;
  const Scalar e = std::exp(-kap * T);
  const Scalar c1 = mu * T + (Scalar(1) - e) * (th - v0) / (Scalar(2) * kap) - Scalar(0.5) * th * T;
  const Scalar c2 =
      (Scalar(1) / (Scalar(8) * kap * kap * kap)) *
      (sig * T * kap * e * (v0 - th) * (Scalar(8) * kap * rho - Scalar(4) * sig) +
       kap * rho * sig * (Scalar(1) - e) * (Scalar(16) * th - Scalar(8) * v0) +
       Scalar(2) * th * kap * T *
           (Scalar(-4) * kap * rho * sig + sig * sig + Scalar(4) * kap * kap) +
       sig * sig *
           ((th - Scalar(2) * v0) * std::exp(Scalar(-2) * kap * T) + th * (Scalar(6) * e - Scalar(7)) +
            Scalar(2) * v0) +
       Scalar(8) * kap * kap * (v0 - th) * (Scalar(1) - e));
  return {c1, c2};
}

// 1D COS price of the Heston vanilla call. The truncation interval comes
// from the return cumulants with the same L; the payoff coefficients are the
// analytic cosine integrals of s0 e^x - K over [max(a, log(K/s0)), b].
template <typename Scalar>
Scalar cos_price_heston(const HestonParams<Scalar>& p, Scalar s0, Scalar v0, int n_terms = 160,
                        Scalar L = Scalar(12)) {
  if (s0 <= Scalar(0)) return Scalar(0);
  auto [c1, c2] = heston_cumulants(p, v0);
  const Scalar half = L * std::sqrt(std::abs(c2));
  const Scalar a = c1 - half, b = c1 + half;
  const Scalar xs = std::log(p.K / s0);
  const Scalar lo = std::max(a, xs);
  if (lo >= b) return Scalar(0);

  const Scalar eb = std::exp(b), el = std::exp(lo);
  const Scalar width = b - a;
  KahanSum<Scalar> acc;
  for (int k = 0; k <= n_terms; ++k) {
    const Scalar kh = Scalar(k) * Scalar(EIGEN_PI) / width;
    const Scalar ang = kh * (lo - a);
    const Scalar cl = std::cos(ang), sl = std::sin(ang);
    const Scalar cb = (k % 2 == 0) ? Scalar(1) : Scalar(-1);  // cos(k pi)
    const Scalar chi = (eb * cb - el * (cl + kh * sl)) / (Scalar(1) + kh * kh);
    const Scalar psi = (k == 0) ? (b - lo) : (-sl / kh);  // sin(k pi) = 0
    const Scalar G = s0 * chi - p.K * psi;
    const std::complex<Scalar> F =
        heston_cf(p, v0, std::complex<Scalar>(kh, 0)) *
        std::exp(std::complex<Scalar>(0, -kh * a));
    acc.add((k == 0 ? Scalar(0.5) : Scalar(1)) * F.real() * G);
  }
  return std::exp(-p.r * p.T) * (Scalar(2) / width) * acc.value();
}

// Heston prices on a tensor grid of (s, v). Per v-column the characteristic
// function values are shared across spots.
template <typename Scalar>
Array2<Scalar> cos_price_heston_grid(const HestonParams<Scalar>& p, const Vector<Scalar>& spots,
                                     const Vector<Scalar>& vars, int n_terms = 160,
                                     Scalar L = Scalar(12)) {
  Array2<Scalar> out(spots.size(), vars.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (Eigen::Index j = 0; j < vars.size(); ++j) {
    const Scalar v0 = vars(j);
    auto [c1, c2] = heston_cumulants(p, v0);
    const Scalar half = L * std::sqrt(std::abs(c2));
    const Scalar a = c1 - half, b = c1 + half;
    const Scalar width = b - a;
    const Scalar eb = std::exp(b);
    std::vector<Scalar> F(static_cast<std::size_t>(n_terms) + 1);
    for (int k = 0; k <= n_terms; ++k) {
      const Scalar kh = Scalar(k) * Scalar(EIGEN_PI) / width;
      const std::complex<Scalar> f = heston_cf(p, v0, std::complex<Scalar>(kh, 0)) *
                                     std::exp(std::complex<Scalar>(0, -kh * a));
      F[std::size_t(k)] = (k == 0 ? Scalar(0.5) : Scalar(1)) * f.real();
    }
    for (Eigen::Index i = 0; i < spots.size(); ++i) {
      const Scalar s0 = spots(i);
      if (s0 <= Scalar(0)) {
        out(i, j) = Scalar(0);
        continue;
      }
      const Scalar lo = std::max(a, std::log(p.K / s0));
      if (lo >= b) {
        out(i, j) = Scalar(0);
        continue;
      }
      const Scalar el = std::exp(lo);
      KahanSum<Scalar> acc;
      for (int k = 0; k <= n_terms; ++k) {
        const Scalar kh = Scalar(k) * Scalar(EIGEN_PI) / width;
        const Scalar ang = kh * (lo - a);
        const Scalar cl = std::cos(ang), sl = std::sin(ang);
        const Scalar cb = (k % 2 == 0) ? Scalar(1) : Scalar(-1);
        const Scalar chi = (eb * cb - el * (cl + kh * sl)) / (Scalar(1) + kh * kh);
        const Scalar psi = (k == 0) ? (b - lo) : (-sl / kh);
        acc.add(F[std::size_t(k)] * (s0 * chi - p.K * psi));
      }
      out(i, j) = std::exp(-p.r * p.T) * (Scalar(2) / width) * acc.value();
    }
  }
  return out;
}

}  // namespace fv2d
