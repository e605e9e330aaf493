#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "grid.hpp"
#include "model.hpp"

namespace fv2d {

// minmod limiter: min(a,b) for both positive, max(a,b) for both negative,
// 0 otherwise.
template <typename Scalar>
Scalar minmod(Scalar a, Scalar b) {
  if (a > 0 && b > 0) return std::min(a, b);
  if (a < 0 && b < 0) return std::max(a, b);
  return Scalar(0);
}

// Element-wise minmod of two one-sided difference arrays.
template <typename Scalar, typename DA, typename DB>
Array2<Scalar> minmod_array(const Eigen::ArrayBase<DA>& a, const Eigen::ArrayBase<DB>& b) {
  return Scalar(0.5) * (a.sign() + b.sign()) * a.abs().min(b.abs());
}

// CIR (local Lax-Friedrichs / upwind for linear fluxes) numerical flux.
// alpha = |f'| at the face midpoint and average state.
template <typename Scalar, typename Flux>
Scalar cir_flux(Scalar u_minus, Scalar u_plus, Flux&& f, Scalar alpha) {
  return Scalar(0.5) * (f(u_minus) + f(u_plus)) - Scalar(0.5) * alpha * (u_plus - u_minus);
}

// MUSCL face states. Arrays are indexed by face: x-faces (nx+1, ny) hold the
// states at (i-1/2, j) for i = 0..nx; y-faces (nx, ny+1) analogous.
template <typename Scalar>
struct FaceValues {
  Array2<Scalar> x_minus, x_plus;  // u^-, u^+ at vertical faces
  Array2<Scalar> y_minus, y_plus;  // u^-, u^+ at horizontal faces
};

// Limited slopes for every cell of the ghosted array (interior rows/columns
// use the minmod of one-sided differences; the ghost frame itself gets the
// one-sided difference so that boundary-face reconstructions are defined).
template <typename Scalar>
Array2<Scalar> limited_slopes_x(const Array2<Scalar>& A, Scalar dx) {
  const Eigen::Index rows = A.rows(), cols = A.cols();
  Array2<Scalar> sx(rows, cols);
  sx.block(1, 0, rows - 2, cols) =
      minmod_array<Scalar>(A.block(1, 0, rows - 2, cols) - A.block(0, 0, rows - 2, cols),
                           A.block(2, 0, rows - 2, cols) - A.block(1, 0, rows - 2, cols)) /
      dx;
  sx.row(0) = (A.row(1) - A.row(0)) / dx;
  sx.row(rows - 1) = (A.row(rows - 1) - A.row(rows - 2)) / dx;
  return sx;
}

template <typename Scalar>
Array2<Scalar> limited_slopes_y(const Array2<Scalar>& A, Scalar dy) {
  const Eigen::Index rows = A.rows(), cols = A.cols();
  Array2<Scalar> sy(rows, cols);
  sy.block(0, 1, rows, cols - 2) =
      minmod_array<Scalar>(A.block(0, 1, rows, cols - 2) - A.block(0, 0, rows, cols - 2),
                           A.block(0, 2, rows, cols - 2) - A.block(0, 1, rows, cols - 2)) /
      dy;
  sy.col(0) = (A.col(1) - A.col(0)) / dy;
  sy.col(cols - 1) = (A.col(cols - 1) - A.col(cols - 2)) / dy;
  return sy;
}

// MUSCL reconstruction of face states from a ghosted array (ghosts filled).
template <typename Scalar>
FaceValues<Scalar> muscl_reconstruct(const Grid2D<Scalar>& g, const Array2<Scalar>& A) {
  const Eigen::Index nx = g.nx, ny = g.ny;
  const Scalar dx = g.dx(), dy = g.dy();
  FaceValues<Scalar> fv;

  Array2<Scalar> sx = limited_slopes_x(A, dx);
  fv.x_minus = A.block(0, 1, nx + 1, ny) + Scalar(0.5) * dx * sx.block(0, 1, nx + 1, ny);
  fv.x_plus = A.block(1, 1, nx + 1, ny) - Scalar(0.5) * dx * sx.block(1, 1, nx + 1, ny);

  Array2<Scalar> sy = limited_slopes_y(A, dy);
  fv.y_minus = A.block(1, 0, nx, ny + 1) + Scalar(0.5) * dy * sy.block(1, 0, nx, ny + 1);
  fv.y_plus = A.block(1, 1, nx, ny + 1) - Scalar(0.5) * dy * sy.block(1, 1, nx, ny + 1);
  return fv;
}

// Grid-sampled model coefficients plus the suprema used by time-step
// selection. Face arrays live at face midpoints; the suprema are taken over
// the closed tensor grid of face coordinates (i.e. including the domain
// corners), which bounds the coefficient over every face segment since the
// models' coefficients are monotone along each face.
template <typename Scalar>
struct SpatialOperators {
  Grid2D<Scalar> grid;
  ConservativeModel<Scalar> model;

  Array2<Scalar> a1f, c11f, c12f;  // (nx+1, ny) at x-face midpoints
  Array2<Scalar> a2f, c21f, c22f;  // (nx, ny+1) at y-face midpoints
  Array2<Scalar> h0c;              // (nx, ny) at cell centers

  Scalar alpha1{0}, alpha2{0};         // sup |df/du|
  Scalar eta1{0}, eta2{0}, eta3{0};    // sup c11, sup c22, sup|c12| + sup|c21|

  SpatialOperators(const Grid2D<Scalar>& g, const ConservativeModel<Scalar>& m)
      : grid(g), model(m) {
    const Eigen::Index nx = g.nx, ny = g.ny;
    a1f.resize(nx + 1, ny);
    c11f.resize(nx + 1, ny);
    c12f.resize(nx + 1, ny);
    for (Eigen::Index j = 0; j < ny; ++j)
      for (Eigen::Index i = 0; i <= nx; ++i) {
        const Scalar x = g.xf(i), y = g.yc(j);
        a1f(i, j) = m.df1_du(x, y);
        c11f(i, j) = m.c11(x, y);
        c12f(i, j) = m.c12(x, y);
      }
    a2f.resize(nx, ny + 1);
    c21f.resize(nx, ny + 1);
    c22f.resize(nx, ny + 1);
    for (Eigen::Index j = 0; j <= ny; ++j)
      for (Eigen::Index i = 0; i < nx; ++i) {
        const Scalar x = g.xc(i), y = g.yf(j);
        a2f(i, j) = m.df2_du(x, y);
        c21f(i, j) = m.c21(x, y);
        c22f(i, j) = m.c22(x, y);
      }
    h0c.resize(nx, ny);
    for (Eigen::Index j = 0; j < ny; ++j)
      for (Eigen::Index i = 0; i < nx; ++i) h0c(i, j) = m.dh_du(g.xc(i), g.yc(j));

    Scalar sup12 = 0, sup21 = 0;
    for (Eigen::Index j = 0; j <= ny; ++j)
      for (Eigen::Index i = 0; i <= nx; ++i) {
        const Scalar x = g.xf(i), y = g.yf(j);
        alpha1 = std::max(alpha1, std::abs(m.df1_du(x, y)));
        alpha2 = std::max(alpha2, std::abs(m.df2_du(x, y)));
        eta1 = std::max(eta1, std::abs(m.c11(x, y)));
        eta2 = std::max(eta2, std::abs(m.c22(x, y)));
        sup12 = std::max(sup12, std::abs(m.c12(x, y)));
        sup21 = std::max(sup21, std::abs(m.c21(x, y)));
      }
    eta3 = sup12 + sup21;
  }
};

namespace detail {
template <typename Scalar>
void require_finite(const Array2<Scalar>& a, const char* what) {
  if (!a.isFinite().all()) throw std::runtime_error(std::string(what) + ": non-finite values");
}
}  // namespace detail

// Explicit (non-stiff) operator
//   E(U)_ij = [ (F1_{i+1/2,j} - F1_{i-1/2,j}) / dx + (F2_{i,j+1/2} - F2_{i,j-1/2}) / dy ]
//             - h(x_i, y_j, u_ij),
// so that du/dt = -E(U) + I(U). A is the ghosted array with ghosts filled at
// the evaluation time; the interior block supplies u_ij.
template <typename Scalar>
Array2<Scalar> explicit_operator(const SpatialOperators<Scalar>& ops, const Array2<Scalar>& A) {
  const Grid2D<Scalar>& g = ops.grid;
  const Eigen::Index nx = g.nx, ny = g.ny;
  const Scalar dx = g.dx(), dy = g.dy();

  FaceValues<Scalar> fv = muscl_reconstruct(g, A);

  // CIR flux for fluxes linear in u: f(u) = a u with a frozen at the face.
  Array2<Scalar> F1 = ops.a1f * Scalar(0.5) * (fv.x_minus + fv.x_plus) -
                      Scalar(0.5) * ops.a1f.abs() * (fv.x_plus - fv.x_minus);
  Array2<Scalar> F2 = ops.a2f * Scalar(0.5) * (fv.y_minus + fv.y_plus) -
                      Scalar(0.5) * ops.a2f.abs() * (fv.y_plus - fv.y_minus);

  Array2<Scalar> out = (F1.block(1, 0, nx, ny) - F1.block(0, 0, nx, ny)) / dx +
                       (F2.block(0, 1, nx, ny) - F2.block(0, 0, nx, ny)) / dy -
                       ops.h0c * A.block(1, 1, nx, ny);
  detail::require_finite(out, "explicit_operator");
  return out;
}

// Gradient of the tensor-quadratic Lagrange interpolant of the 9-point
// stencil centered at cell (i,j), evaluated at one face midpoint of that
// cell. Quadratic interpolation weights at the half-node: (-1/8, 3/4, 3/8)
// toward the face. face is one of 'E','W','N','S'. i,j are interior indices;
// the ghosted array A supplies neighbors.
template <typename Scalar>
std::pair<Scalar, Scalar> lagrange_gradient_at_face(const Grid2D<Scalar>& g,
                                                    const Array2<Scalar>& A, Eigen::Index i,
                                                    Eigen::Index j, char face) {
  const Scalar dx = g.dx(), dy = g.dy();
  const Scalar lm = Scalar(-0.125), l0 = Scalar(0.75), lp = Scalar(0.375);
  auto u = [&](Eigen::Index di, Eigen::Index dj) { return A(i + 1 + di, j + 1 + dj); };
  auto dxc = [&](Eigen::Index k) { return (u(1, k) - u(-1, k)) / (Scalar(2) * dx); };
  auto dyc = [&](Eigen::Index k) { return (u(k, 1) - u(k, -1)) / (Scalar(2) * dy); };
  switch (face) {
    case 'E':
      return {(u(1, 0) - u(0, 0)) / dx, lm * dyc(-1) + l0 * dyc(0) + lp * dyc(1)};
    case 'W':
      return {(u(0, 0) - u(-1, 0)) / dx, lp * dyc(-1) + l0 * dyc(0) + lm * dyc(1)};
    case 'N':
      return {lm * dxc(-1) + l0 * dxc(0) + lp * dxc(1), (u(0, 1) - u(0, 0)) / dy};
    case 'S':
      return {lp * dxc(-1) + l0 * dxc(0) + lm * dxc(1), (u(0, 0) - u(0, -1)) / dy};
  }
  throw std::invalid_argument("lagrange_gradient_at_face: face must be E/W/N/S");
}

// Implicit (stiff) operator
//   I(U)_ij = (g1_E - g1_W)/dx + (g2_N - g2_S)/dy,
// where each face gradient comes from the Lagrange interpolant of the cell
// owning the face (per-cell, non-symmetrized), and the diffusion coefficients
// are evaluated at the face midpoints.
template <typename Scalar>
Array2<Scalar> implicit_operator(const SpatialOperators<Scalar>& ops, const Array2<Scalar>& A) {
  const Grid2D<Scalar>& g = ops.grid;
  const Eigen::Index nx = g.nx, ny = g.ny;
  const Scalar dx = g.dx(), dy = g.dy();
  const Scalar lm = Scalar(-0.125), l0 = Scalar(0.75), lp = Scalar(0.375);

  const auto C = A.block(1, 1, nx, ny);
  const auto Wn = A.block(0, 1, nx, ny), En = A.block(2, 1, nx, ny);
  const auto Sn = A.block(1, 0, nx, ny), Nn = A.block(1, 2, nx, ny);
  const auto SW = A.block(0, 0, nx, ny), SE = A.block(2, 0, nx, ny);
  const auto NW = A.block(0, 2, nx, ny), NE = A.block(2, 2, nx, ny);

  Array2<Scalar> ux_E = (En - C) / dx, ux_W = (C - Wn) / dx;
  Array2<Scalar> uy_N = (Nn - C) / dy, uy_S = (C - Sn) / dy;
  Array2<Scalar> uy_Ef = (lm * (NW - SW) + l0 * (Nn - Sn) + lp * (NE - SE)) / (Scalar(2) * dy);
  Array2<Scalar> uy_Wf = (lp * (NW - SW) + l0 * (Nn - Sn) + lm * (NE - SE)) / (Scalar(2) * dy);
  Array2<Scalar> ux_Nf = (lm * (SE - SW) + l0 * (En - Wn) + lp * (NE - NW)) / (Scalar(2) * dx);
  Array2<Scalar> ux_Sf = (lp * (SE - SW) + l0 * (En - Wn) + lm * (NE - NW)) / (Scalar(2) * dx);

  Array2<Scalar> g1E = ops.c11f.block(1, 0, nx, ny) * ux_E + ops.c12f.block(1, 0, nx, ny) * uy_Ef;
  Array2<Scalar> g1W = ops.c11f.block(0, 0, nx, ny) * ux_W + ops.c12f.block(0, 0, nx, ny) * uy_Wf;
  Array2<Scalar> g2N = ops.c21f.block(0, 1, nx, ny) * ux_Nf + ops.c22f.block(0, 1, nx, ny) * uy_N;
  Array2<Scalar> g2S = ops.c21f.block(0, 0, nx, ny) * ux_Sf + ops.c22f.block(0, 0, nx, ny) * uy_S;

  Array2<Scalar> out = (g1E - g1W) / dx + (g2N - g2S) / dy;
  detail::require_finite(out, "implicit_operator");
  return out;
}

// Convenience wrappers that take an interior state, frame it with ghosts at
// time t and apply the operator. Used by the integrator and the matrix-free
// consistency checks.
template <typename Scalar>
Array2<Scalar> apply_E(const SpatialOperators<Scalar>& ops, const Array2<Scalar>& interior,
                       Scalar t) {
  Field<Scalar> f(ops.grid);
  f.interior() = interior;
  fill_ghosts(f, ops.model, t);
  return explicit_operator(ops, f.values);
}

template <typename Scalar>
Array2<Scalar> apply_I(const SpatialOperators<Scalar>& ops, const Array2<Scalar>& interior,
                       Scalar t, bool homogeneous = false) {
  Field<Scalar> f(ops.grid);
  f.interior() = interior;
  fill_ghosts(f, ops.model, t, homogeneous);
  return implicit_operator(ops, f.values);
}

// Affine form of the implicit operator: I(U, t) = M U + b(t) with the
// boundary couplings folded in. The matrix is recovered from the matrix-free
// operator by colored probing: ghost fills couple a boundary cell to at most
// the two nearest interior cells, so sources spaced 5 apart never overlap in
// the 3x3 stencil and each output cell has a unique in-range source.
template <typename Scalar>
Eigen::SparseMatrix<Scalar> assemble_implicit_matrix(const SpatialOperators<Scalar>& ops) {
  const Eigen::Index nx = ops.grid.nx, ny = ops.grid.ny, n = nx * ny;
  constexpr Eigen::Index stride = 5, reach = 2;
  std::vector<Eigen::Triplet<Scalar>> trips;
  trips.reserve(static_cast<std::size_t>(9 * n));
  Field<Scalar> probe(ops.grid);

  auto source_index = [&](Eigen::Index i, Eigen::Index color, Eigen::Index count) -> Eigen::Index {
    for (Eigen::Index d = -reach; d <= reach; ++d) {
      const Eigen::Index s = i + d;
      if (s >= 0 && s < count && s % stride == color) return s;
    }
    return -1;
  };

  for (Eigen::Index ca = 0; ca < stride; ++ca)
    for (Eigen::Index cb = 0; cb < stride; ++cb) {
      probe.values.setZero();
      for (Eigen::Index j = cb; j < ny; j += stride)
        for (Eigen::Index i = ca; i < nx; i += stride) probe.at(i, j) = Scalar(1);
      fill_ghosts(probe, ops.model, Scalar(0), /*homogeneous=*/true);
      Array2<Scalar> col = implicit_operator(ops, probe.values);
      for (Eigen::Index j = 0; j < ny; ++j)
        for (Eigen::Index i = 0; i < nx; ++i) {
          const Scalar v = col(i, j);
          if (v == Scalar(0)) continue;
          const Eigen::Index si = source_index(i, ca, nx);
          const Eigen::Index sj = source_index(j, cb, ny);
          if (si < 0 || sj < 0)
            throw std::logic_error("assemble_implicit_matrix: influence outside probing reach");
          trips.emplace_back(i + nx * j, si + nx * sj, v);
        }
    }

  Eigen::SparseMatrix<Scalar> M(n, n);
  M.setFromTriplets(trips.begin(), trips.end());
  M.makeCompressed();
  return M;
}

// Boundary offset b(t): the implicit operator applied to the zero field with
// inhomogeneous ghost data at time t.
template <typename Scalar>
Vector<Scalar> implicit_offset(const SpatialOperators<Scalar>& ops, Scalar t) {
  Array2<Scalar> zero = Array2<Scalar>::Zero(ops.grid.nx, ops.grid.ny);
  Array2<Scalar> out = apply_I(ops, zero, t, /*homogeneous=*/false);
  return Eigen::Map<const Vector<Scalar>>(out.data(), out.size());
}

}  // namespace fv2d
