#pragma once

#include <Eigen/Core>

#include <functional>
#include <stdexcept>

#include "grid.hpp"

namespace fv2d {

// How a ghost cell is filled from the boundary data / interior values.
enum class GhostRule {
  dirichlet,        // ghost = 2 g_D(face midpoint, t) - adjacent interior
  neumann_slope,    // ghost = adjacent + slope * (outward-axis spacing)
  zero_curvature,   // ghost = 2 * adjacent - next interior
  outflow           // linear extrapolation from the two nearest interior cells
};

template <typename Scalar>
struct SideCondition {
  GhostRule rule{GhostRule::zero_curvature};
  // Dirichlet data as a function of (coordinate along the side, time).
  std::function<Scalar(Scalar, Scalar)> dirichlet_value;
  // Directional derivative du/dx (resp. du/dy) at the side for neumann_slope.
  Scalar slope{0};
};

template <typename Scalar>
struct BoundarySpec {
  SideCondition<Scalar> west, east, south, north;
};

// One convection-diffusion-reaction problem in conservative form,
//   u_t = -[f1_x + f2_y] + h + [g1_x + g2_y],
// with fluxes linear in the state,
//   f_d(x,y,u) = df_d/du (x,y) * u,
//   g1 = c11 u_x + c12 u_y,   g2 = c21 u_x + c22 u_y,
//   h(x,y,u)  = dh/du (x,y) * u.
// Linearity of g in the gradient is required (implicit stages are linear
// solves); f and h of the financial models are linear in u as well, and the
// fast operators rely on that, so the derivative functions are the single
// source of truth.
template <typename Scalar>
struct ConservativeModel {
  using Coeff = std::function<Scalar(Scalar, Scalar)>;

  Coeff df1_du, df2_du;          // convective flux slopes
  Coeff c11, c12, c21, c22;      // diffusive flux coefficients
  Coeff dh_du;                   // reaction/source slope
  Coeff initial_payoff;
  BoundarySpec<Scalar> boundary;

  Scalar f1(Scalar x, Scalar y, Scalar u) const { return df1_du(x, y) * u; }
  Scalar f2(Scalar x, Scalar y, Scalar u) const { return df2_du(x, y) * u; }
  Scalar h(Scalar x, Scalar y, Scalar u) const { return dh_du(x, y) * u; }
};

namespace detail {

// Ghost value on one side. adj = boundary-adjacent interior value, next = one
// further in; gD = boundary datum at the face midpoint; d = spacing along the
// outward axis with sign (+dx east, -dx west, ...). homogeneous drops the
// affine parts (Dirichlet data, Neumann slope) so the same fill yields the
// linear part of the boundary coupling.
template <typename Scalar>
Scalar ghost_value(const SideCondition<Scalar>& side, Scalar adj, Scalar next, Scalar gD,
                   Scalar d, bool homogeneous) {
  switch (side.rule) {
    case GhostRule::dirichlet:
      return (homogeneous ? Scalar(0) : Scalar(2) * gD) - adj;
    case GhostRule::neumann_slope:
      return adj + (homogeneous ? Scalar(0) : side.slope * d);
    case GhostRule::zero_curvature:
    case GhostRule::outflow:
      return Scalar(2) * adj - next;
  }
  throw std::logic_error("ghost_value: unknown rule");
}

}  // namespace detail

// Fill the one-cell ghost frame of `f` from the model's boundary rules at
// time t. Corner ghosts are the bilinear combination
//   ghost(-1,-1) = ghost(-1,0) + ghost(0,-1) - u(0,0)
// (and symmetrically), which keeps the cross-derivative stencils consistent
// with both adjacent side fills.
template <typename Scalar>
void fill_ghosts(Field<Scalar>& f, const ConservativeModel<Scalar>& model, Scalar t,
                 bool homogeneous = false) {
  const Grid2D<Scalar>& g = f.grid;
  const BoundarySpec<Scalar>& bc = model.boundary;
  const Scalar dx = g.dx(), dy = g.dy();

  auto datum = [&](const SideCondition<Scalar>& side, Scalar coord) -> Scalar {
    return (side.rule == GhostRule::dirichlet && !homogeneous && side.dirichlet_value)
               ? side.dirichlet_value(coord, t)
               : Scalar(0);
  };

  for (Eigen::Index j = 0; j < g.ny; ++j) {
    f.at(-1, j) = detail::ghost_value(bc.west, f.at(0, j), f.at(1, j), datum(bc.west, g.yc(j)),
                                      -dx, homogeneous);
    f.at(g.nx, j) = detail::ghost_value(bc.east, f.at(g.nx - 1, j), f.at(g.nx - 2, j),
                                        datum(bc.east, g.yc(j)), dx, homogeneous);
  }
  for (Eigen::Index i = 0; i < g.nx; ++i) {
    f.at(i, -1) = detail::ghost_value(bc.south, f.at(i, 0), f.at(i, 1), datum(bc.south, g.xc(i)),
                                      -dy, homogeneous);
    f.at(i, g.ny) = detail::ghost_value(bc.north, f.at(i, g.ny - 1), f.at(i, g.ny - 2),
                                        datum(bc.north, g.xc(i)), dy, homogeneous);
  }

  f.at(-1, -1) = f.at(-1, 0) + f.at(0, -1) - f.at(0, 0);
  f.at(g.nx, -1) = f.at(g.nx, 0) + f.at(g.nx - 1, -1) - f.at(g.nx - 1, 0);
  f.at(-1, g.ny) = f.at(-1, g.ny - 1) + f.at(0, g.ny) - f.at(0, g.ny - 1);
  f.at(g.nx, g.ny) = f.at(g.nx, g.ny - 1) + f.at(g.nx - 1, g.ny) - f.at(g.nx - 1, g.ny - 1);
}

}  // namespace fv2d
