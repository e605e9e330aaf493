#pragma once

#include <stdexcept>

#include "grid.hpp"

namespace fv2d {

// First and second finite-difference sensitivities of a cell-averaged field
// along each spatial direction, evaluated on the interior cells only.
template <typename Scalar>
struct Greeks {
  Array2<Scalar> delta_x, delta_y;  // first derivative along x / y
  Array2<Scalar> gamma_x, gamma_y;  // second derivative along x / y
};

// Central differences of the cell averages; cells adjacent to the boundary
// use one-sided stencils of the same order of locality (exact for affine
// delta and quadratic gamma everywhere).
template <typename Scalar>
Greeks<Scalar> greeks(const Field<Scalar>& field) {
  const auto& g = field.grid;
  if (g.nx < 3 || g.ny < 3) throw std::invalid_argument("greeks: need at least 3x3 interior cells");
  const Array2<Scalar> u = field.interior();
  const Scalar dx = g.dx(), dy = g.dy();
  Greeks<Scalar> out;
  out.delta_x.resize(g.nx, g.ny);
  out.delta_y.resize(g.nx, g.ny);
  out.gamma_x.resize(g.nx, g.ny);
  out.gamma_y.resize(g.nx, g.ny);

  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      if (i == 0) {
        out.delta_x(i, j) = (u(1, j) - u(0, j)) / dx;
        out.gamma_x(i, j) = (u(2, j) - Scalar(2) * u(1, j) + u(0, j)) / (dx * dx);
      } else if (i == g.nx - 1) {
        out.delta_x(i, j) = (u(i, j) - u(i - 1, j)) / dx;
        out.gamma_x(i, j) = (u(i, j) - Scalar(2) * u(i - 1, j) + u(i - 2, j)) / (dx * dx);
      } else {
        out.delta_x(i, j) = (u(i + 1, j) - u(i - 1, j)) / (Scalar(2) * dx);
        out.gamma_x(i, j) = (u(i + 1, j) - Scalar(2) * u(i, j) + u(i - 1, j)) / (dx * dx);
      }
      if (j == 0) {
        out.delta_y(i, j) = (u(i, 1) - u(i, 0)) / dy;
        out.gamma_y(i, j) = (u(i, 2) - Scalar(2) * u(i, 1) + u(i, 0)) / (dy * dy);
      } else if (j == g.ny - 1) {
        out.delta_y(i, j) = (u(i, j) - u(i, j - 1)) / dy;
        out.gamma_y(i, j) = (u(i, j) - Scalar(2) * u(i, j - 1) + u(i, j - 2)) / (dy * dy);
      } else {
        out.delta_y(i, j) = (u(i, j + 1) - u(i, j - 1)) / (Scalar(2) * dy);
        out.gamma_y(i, j) = (u(i, j + 1) - Scalar(2) * u(i, j) + u(i, j - 1)) / (dy * dy);
      }
    }
  return out;
}

}  // namespace fv2d
