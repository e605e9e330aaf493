#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "model.hpp"

namespace fv2d {

template <typename Scalar>
Scalar norm_cdf(Scalar x) {
  return Scalar(0.5) * std::erfc(-x / std::sqrt(Scalar(2)));
}

// 1D Black-Scholes price of the vanilla European call, with t the time to
// maturity. The t=0 / S=0 limits return the payoff.
template <typename Scalar>
Scalar bs_call(Scalar S, Scalar t, Scalar sigma, Scalar q, Scalar r, Scalar K) {
  if (S <= Scalar(0)) return Scalar(0);
  if (t <= Scalar(0)) return std::max(S - K, Scalar(0));
  const Scalar sq = sigma * std::sqrt(t);
  const Scalar d1 = (std::log(S / K) + (r - q + Scalar(0.5) * sigma * sigma) * t) / sq;
  const Scalar d2 = d1 - sq;
  return S * std::exp(-q * t) * norm_cdf(d1) - K * std::exp(-r * t) * norm_cdf(d2);
}

template <typename Scalar>
struct BasketParams {
  Scalar sigma1{0.1}, sigma2{0.1};
  Scalar r{0.5};
  Scalar q1{0}, q2{0};
  Scalar rho{0.5};
  Scalar T{0.25};
  Scalar K{30};
  // Domain truncation: [0, 5K] per side.
  Scalar s_bar() const { return Scalar(5) * K; }

  void validate() const {
    if (!(sigma1 > 0 && sigma2 > 0)) throw std::invalid_argument("basket: sigma must be > 0");
    if (!(std::abs(rho) < 1)) throw std::invalid_argument("basket: |rho| must be < 1");
    if (!(T > 0 && K > 0)) throw std::invalid_argument("basket: T and K must be > 0");
  }
};

template <typename Scalar>
struct HestonParams {
  Scalar sigma{0.3};  // vol of vol
  Scalar r{0.025};
  Scalar q{0};
  Scalar kappa{1.5};
  Scalar theta{0.04};
  Scalar rho{-0.9};
  Scalar T{0.25};
  Scalar K{100};
  Scalar s_bar{800}, v_bar{4};

  Scalar feller_margin() const { return Scalar(2) * kappa * theta - sigma * sigma; }

  void validate() const {
    if (!(sigma > 0 && kappa > 0 && theta > 0)) throw std::invalid_argument("heston: sigma, kappa, theta must be > 0");
    if (!(std::abs(rho) < 1)) throw std::invalid_argument("heston: |rho| must be < 1");
    if (!(T > 0 && K > 0)) throw std::invalid_argument("heston: T and K must be > 0");
  }
};

// Conservative-form coefficients of the two-asset Black-Scholes basket
// problem on [0, 5K]^2 (x = s1, y = s2):
//   f1 = (sigma1^2 + (rho/2) sigma1 sigma2 - r + q1) s1 u,  f2 symmetric,
//   g1 = 1/2 sigma1^2 s1^2 u_x + (rho/2) sigma1 sigma2 s1 s2 u_y, g2 symmetric,
//   h  = (sigma1^2 + sigma2^2 + rho sigma1 sigma2 + q1 + q2 - 3r) u.
// Boundary: s1 = 0 Dirichlet u = bs_call(s2/2, t, sigma1, q1); s2 = 0
// symmetric with (sigma2, q2); far faces Neumann du/dn = 1/2.
template <typename Scalar>
ConservativeModel<Scalar> basket_model(const BasketParams<Scalar>& p) {
  p.validate();
  ConservativeModel<Scalar> m;
  const Scalar cross = Scalar(0.5) * p.rho * p.sigma1 * p.sigma2;
  m.df1_du = [=](Scalar x, Scalar) { return (p.sigma1 * p.sigma1 + cross - p.r + p.q1) * x; };
  m.df2_du = [=](Scalar, Scalar y) { return (p.sigma2 * p.sigma2 + cross - p.r + p.q2) * y; };
  m.c11 = [=](Scalar x, Scalar) { return Scalar(0.5) * p.sigma1 * p.sigma1 * x * x; };
  m.c12 = [=](Scalar x, Scalar y) { return cross * x * y; };
  m.c21 = [=](Scalar x, Scalar y) { return cross * x * y; };
  m.c22 = [=](Scalar, Scalar y) { return Scalar(0.5) * p.sigma2 * p.sigma2 * y * y; };
  m.dh_du = [=](Scalar, Scalar) {
    return p.sigma1 * p.sigma1 + p.sigma2 * p.sigma2 + p.rho * p.sigma1 * p.sigma2 + p.q1 +
           p.q2 - Scalar(3) * p.r;
  };
  m.initial_payoff = [=](Scalar x, Scalar y) {
    return std::max(Scalar(0.5) * (x + y) - p.K, Scalar(0));
  };
  m.boundary.west = {GhostRule::dirichlet,
                     [=](Scalar s2, Scalar t) {
                       return bs_call(Scalar(0.5) * s2, t, p.sigma1, p.q1, p.r, p.K);
                     },
                     Scalar(0)};
  m.boundary.south = {GhostRule::dirichlet,
                      [=](Scalar s1, Scalar t) {
                        return bs_call(Scalar(0.5) * s1, t, p.sigma2, p.q2, p.r, p.K);
                      },
                      Scalar(0)};
  m.boundary.east = {GhostRule::neumann_slope, nullptr, Scalar(0.5)};
  m.boundary.north = {GhostRule::neumann_slope, nullptr, Scalar(0.5)};
  return m;
}

// Conservative-form coefficients of the Heston problem on [0,800]x[0,4]
// (x = s, y = v):
//   f1 = (v - r + q) s u,
//   f2 = (rho sigma v - kappa (theta - v) + 1/2 sigma^2) u,
//   g1 = 1/2 s^2 v u_x + rho sigma s v u_y,
//   g2 = 1/2 sigma^2 v u_y,
//   h  = (v - 2r + q + kappa + rho sigma) u.
// Boundary: s = 0 Dirichlet u = 0; s = s_bar and v = v_bar zero second
// derivative; v = 0 has no imposed condition (outflow) — the ghost is the
// linear extrapolation of the two nearest interior cells.
template <typename Scalar>
ConservativeModel<Scalar> heston_model(const HestonParams<Scalar>& p) {
  p.validate();
  ConservativeModel<Scalar> m;
  m.df1_du = [=](Scalar x, Scalar y) { return (y - p.r + p.q) * x; };
  m.df2_du = [=](Scalar, Scalar y) {
    return p.rho * p.sigma * y - p.kappa * (p.theta - y) + Scalar(0.5) * p.sigma * p.sigma;
  };
  m.c11 = [=](Scalar x, Scalar y) { return Scalar(0.5) * x * x * y; };
  m.c12 = [=](Scalar x, Scalar y) { return p.rho * p.sigma * x * y; };
  m.c21 = [=](Scalar, Scalar) { return Scalar(0); };
  m.c22 = [=](Scalar, Scalar y) { return Scalar(0.5) * p.sigma * p.sigma * y; };
  m.dh_du = [=](Scalar, Scalar y) {
    return y - Scalar(2) * p.r + p.q + p.kappa + p.rho * p.sigma;
  };
  m.initial_payoff = [=](Scalar x, Scalar) { return std::max(x - p.K, Scalar(0)); };
  m.boundary.west = {GhostRule::dirichlet, [](Scalar, Scalar) { return Scalar(0); }, Scalar(0)};
  m.boundary.east = {GhostRule::zero_curvature, nullptr, Scalar(0)};
  m.boundary.south = {GhostRule::outflow, nullptr, Scalar(0)};
  m.boundary.north = {GhostRule::zero_curvature, nullptr, Scalar(0)};
  return m;
}

// The four benchmark problem presets.
template <typename Scalar>
struct Preset {
  std::string name;
  bool is_heston{false};
  BasketParams<Scalar> basket{};
  HestonParams<Scalar> heston{};

  ConservativeModel<Scalar> model() const {
    return is_heston ? heston_model(heston) : basket_model(basket);
  }
  Grid2D<Scalar> grid(Eigen::Index nx, Eigen::Index ny) const {
    if (is_heston)
      return {nx, ny, Scalar(0), heston.s_bar, Scalar(0), heston.v_bar};
    return {nx, ny, Scalar(0), basket.s_bar(), Scalar(0), basket.s_bar()};
  }
  Scalar maturity() const { return is_heston ? heston.T : basket.T; }
};

template <typename Scalar>
Preset<Scalar> preset(const std::string& name) {
  Preset<Scalar> p;
  p.name = name;
  if (name == "test1") {
    p.basket = BasketParams<Scalar>{};  // sigma 0.1/0.1, r 0.5
  } else if (name == "test2") {
    p.basket = BasketParams<Scalar>{};
    p.basket.sigma1 = p.basket.sigma2 = Scalar(0.5);
    p.basket.r = Scalar(0.1);
  } else if (name == "test3") {
    p.is_heston = true;
    p.heston = HestonParams<Scalar>{};  // sigma 0.3, r 0.025
  } else if (name == "test4") {
    p.is_heston = true;
    p.heston = HestonParams<Scalar>{};
    p.heston.sigma = Scalar(0.025);
    p.heston.r = Scalar(0.3);
  } else {
    throw std::invalid_argument("unknown preset: " + name);
  }
  return p;
}

}  // namespace fv2d
