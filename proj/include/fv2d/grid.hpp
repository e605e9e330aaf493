#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <utility>

namespace fv2d {

template <typename Scalar>
using Array2 = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Uniform Cartesian finite volume mesh. Interior volumes are indexed
// i in [0, nx), j in [0, ny); one ghost layer per side extends the valid
// index range to [-1, nx] x [-1, ny].
template <typename Scalar>
struct Grid2D {
  Eigen::Index nx{0};
  Eigen::Index ny{0};
  Scalar x_min{0}, x_max{0};
  Scalar y_min{0}, y_max{0};
  static constexpr Eigen::Index n_ghost = 1;

  Scalar dx() const { return (x_max - x_min) / Scalar(nx); }
  Scalar dy() const { return (y_max - y_min) / Scalar(ny); }
  Scalar cell_area() const { return dx() * dy(); }

  // Cell-center coordinate; valid for ghost indices as the natural extension.
  Scalar xc(Eigen::Index i) const { return x_min + (Scalar(i) + Scalar(0.5)) * dx(); }
  Scalar yc(Eigen::Index j) const { return y_min + (Scalar(j) + Scalar(0.5)) * dy(); }

  // Face coordinate x_{i-1/2}; i in [0, nx] spans the closed domain.
  Scalar xf(Eigen::Index i) const { return x_min + Scalar(i) * dx(); }
  Scalar yf(Eigen::Index j) const { return y_min + Scalar(j) * dy(); }
};

template <typename Scalar>
std::pair<Scalar, Scalar> cell_center(const Grid2D<Scalar>& g, Eigen::Index i, Eigen::Index j) {
  if (i < -g.n_ghost || i > g.nx || j < -g.n_ghost || j > g.ny)
    throw std::out_of_range("cell_center: index outside interior+ghost range");
  return {g.xc(i), g.yc(j)};
}

// Vector of volume averages on a grid, stored with its ghost frame.
// values has shape (nx + 2) x (ny + 2); entry (i + 1, j + 1) belongs to
// volume (i, j).
template <typename Scalar>
struct Field {
  Grid2D<Scalar> grid;
  Array2<Scalar> values;
  Scalar time{0};

  Field() = default;
  explicit Field(const Grid2D<Scalar>& g)
      : grid(g), values(Array2<Scalar>::Zero(g.nx + 2 * g.n_ghost, g.ny + 2 * g.n_ghost)) {}

  Scalar& at(Eigen::Index i, Eigen::Index j) { return values(i + grid.n_ghost, j + grid.n_ghost); }
  Scalar at(Eigen::Index i, Eigen::Index j) const {
    return values(i + grid.n_ghost, j + grid.n_ghost);
  }

  auto interior() { return values.block(grid.n_ghost, grid.n_ghost, grid.nx, grid.ny); }
  auto interior() const { return values.block(grid.n_ghost, grid.n_ghost, grid.nx, grid.ny); }

  bool all_finite() const { return values.isFinite().all(); }
};

// Volume averages of the initial condition by the midpoint (one-point)
// quadrature rule: direct evaluation at cell centers. Ghosts are left zero;
// boundary rules fill them before the first operator application.
template <typename Scalar>
Field<Scalar> average_initial_condition(const Grid2D<Scalar>& g,
                                        const std::function<Scalar(Scalar, Scalar)>& payoff) {
  Field<Scalar> f(g);
  for (Eigen::Index j = 0; j < g.ny; ++j)
    for (Eigen::Index i = 0; i < g.nx; ++i) f.at(i, j) = payoff(g.xc(i), g.yc(j));
  f.time = Scalar(0);
  return f;
}

namespace detail {

// 3-point Lagrange interpolation base index and weights along one axis:
// the three consecutive cell centers nearest to x, clamped to the interior.
template <typename Scalar>
void lagrange3(Scalar x, Scalar x_min, Scalar d, Eigen::Index n, Eigen::Index& i0,
               Scalar w[3]) {
  const Scalar s = (x - x_min) / d - Scalar(0.5);  // fractional center index
  Eigen::Index nearest = static_cast<Eigen::Index>(std::lround(double(s)));
  i0 = std::max<Eigen::Index>(0, std::min(nearest - 1, n - 3));
  const Scalar c0 = Scalar(i0), c1 = Scalar(i0 + 1), c2 = Scalar(i0 + 2);
  w[0] = (s - c1) * (s - c2) / ((c0 - c1) * (c0 - c2));
  w[1] = (s - c0) * (s - c2) / ((c1 - c0) * (c1 - c2));
  w[2] = (s - c0) * (s - c1) / ((c2 - c0) * (c2 - c1));
}

}  // namespace detail

// Evaluate a cell-averaged field at an arbitrary interior point by tensor
// quadratic (3x3 Lagrange) interpolation of the nearest cell centers, so the
// interpolation error is below the scheme's own second-order error.
template <typename Scalar>
Scalar interpolate_at(const Field<Scalar>& f, Scalar x, Scalar y) {
  const auto& g = f.grid;
  if (g.nx < 3 || g.ny < 3)
    throw std::invalid_argument("interpolate_at: need at least 3x3 interior cells");
  if (x < g.x_min || x > g.x_max || y < g.y_min || y > g.y_max)
    throw std::out_of_range("interpolate_at: point outside the domain");
  Eigen::Index i0, j0;
  Scalar wx[3], wy[3];
  detail::lagrange3(x, g.x_min, g.dx(), g.nx, i0, wx);
  detail::lagrange3(y, g.y_min, g.dy(), g.ny, j0, wy);
  Scalar v{0};
  for (int b = 0; b < 3; ++b)
    for (int a = 0; a < 3; ++a) v += wx[a] * wy[b] * f.at(i0 + a, j0 + b);
  return v;
}

}  // namespace fv2d
