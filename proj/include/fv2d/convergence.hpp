#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "cos.hpp"
#include "csv.hpp"
#include "integrator.hpp"
#include "models.hpp"
#include "norms.hpp"

namespace fv2d {

// Knobs shared by the study / table drivers: COS settings for pointwise
// prices, a (cheaper) quadrature for whole-grid reference surfaces, and the
// time integration policy.
template <typename Scalar>
struct StudyConfig {
  CosConfig cos{};           // pointwise COS prices (tables)
  int reference_quad = 2000;  // quadrature for whole-grid basket references
  int heston_terms = 160;    // cosine terms for the 1D Heston pricer
  Scalar heston_L = Scalar(12);
  Scalar cfl = Scalar(0.5);
  LinearSolverKind solver = LinearSolverKind::krylov;
};

// Reference price surface at the cell centers of `g`, via the batch COS
// routes (interpolation-free: evaluated per mesh at its own centers).
template <typename Scalar>
Array2<Scalar> reference_prices(const Preset<Scalar>& preset, const Grid2D<Scalar>& g,
                                const StudyConfig<Scalar>& cfg = {}) {
  Vector<Scalar> xs(g.nx), ys(g.ny);
  for (Eigen::Index i = 0; i < g.nx; ++i) xs(i) = g.xc(i);
  for (Eigen::Index j = 0; j < g.ny; ++j) ys(j) = g.yc(j);
  if (preset.is_heston)
    return cos_price_heston_grid(preset.heston, xs, ys, cfg.heston_terms, cfg.heston_L);
  CosConfig c = cfg.cos;
  c.quad_points = cfg.reference_quad;
  return cos_price_2d_grid(preset.basket, xs, ys, c);
}

// One mesh/mode line of a refinement study. `order` is log2 of the L1-error
// ratio against the previous mesh of the same mode (NaN on the first row).
template <typename Scalar>
struct ConvergenceRow {
  Eigen::Index nx{0}, ny{0};
  Mode mode{Mode::imex};
  Scalar l1{0};
  Scalar order{std::numeric_limits<Scalar>::quiet_NaN()};
  Scalar dt{0};
  long steps{0};
  double wall_seconds{0};
};

template <typename Scalar>
struct ConvergenceReport {
  std::vector<ConvergenceRow<Scalar>> rows;

  CsvTable csv() const {
    CsvTable t({"nx", "ny", "mode", "l1_error", "observed_order", "dt", "steps", "wall_seconds"});
    for (const auto& r : rows)
      t.add_row({std::to_string(r.nx), std::to_string(r.ny), mode_name(r.mode),
                 csv_number(r.l1), std::isnan(double(r.order)) ? std::string() : csv_number(r.order),
                 csv_number(r.dt), std::to_string(r.steps), csv_number(Scalar(r.wall_seconds))});
    return t;
  }
};

// Mesh-refinement study: solve each mesh with each requested integrator,
// compare against the COS reference at that mesh's own cell centers, and
// report L1 errors with observed orders.
template <typename Scalar>
ConvergenceReport<Scalar> run_convergence_study(const Preset<Scalar>& preset,
                                                const std::vector<Eigen::Index>& meshes,
                                                const std::vector<Mode>& modes,
                                                const StudyConfig<Scalar>& cfg = {}) {
  ConvergenceReport<Scalar> report;
  const ConservativeModel<Scalar> model = preset.model();
  for (Mode mode : modes) {
    Scalar prev_l1 = std::numeric_limits<Scalar>::quiet_NaN();
    for (Eigen::Index n : meshes) {
      const Grid2D<Scalar> g = preset.grid(n, n);
      RunStats<Scalar> stats;
      Field<Scalar> sol = integrate(model, g, preset.maturity(), mode, cfg.cfl, cfg.solver, &stats);
      const Array2<Scalar> ref = reference_prices(preset, g, cfg);
      const ErrorSummary<Scalar> err = error_norms(g, Array2<Scalar>(sol.interior()), ref);
      ConvergenceRow<Scalar> row;
      row.nx = g.nx;
      row.ny = g.ny;
      row.mode = mode;
      row.l1 = err.l1;
      if (!std::isnan(double(prev_l1))) row.order = std::log2(prev_l1 / err.l1);
      row.dt = stats.dt;
      row.steps = stats.steps;
      row.wall_seconds = stats.wall_seconds;
      report.rows.push_back(row);
      prev_l1 = err.l1;
    }
  }
  return report;
}

// Evaluation abscissae for the preset price tables (tensor lattice).
template <typename Scalar>
std::pair<Vector<Scalar>, Vector<Scalar>> table_lattice(const Preset<Scalar>& preset) {
  Vector<Scalar> xs(4), ys(4);
  if (preset.is_heston) {
    xs << Scalar(75.125), Scalar(100.125), Scalar(125.125), Scalar(150.125);
    ys << Scalar(0.200625), Scalar(0.400625), Scalar(0.600625), Scalar(0.800625);
  } else if (preset.name == "test2") {
    xs << Scalar(20.296875), Scalar(39.046875), Scalar(57.796875), Scalar(76.546875);
    ys = xs;
  } else {
    xs << Scalar(20.03125), Scalar(40.03125), Scalar(60.03125), Scalar(80.03125);
    ys = xs;
  }
  return {xs, ys};
}

template <typename Scalar>
struct PriceTableRow {
  Scalar x{0}, y{0};
  Scalar fv_price{0};
  Scalar cos_price{0};
  Scalar abs_diff{0};
};

// Side-by-side finite volume vs COS prices on an evaluation lattice. The
// finite volume surface is solved once on the requested mesh and read off at
// the lattice points by quadratic interpolation; COS prices are pointwise.
template <typename Scalar>
std::vector<PriceTableRow<Scalar>> price_table(const Preset<Scalar>& preset,
                                               const Vector<Scalar>& xs, const Vector<Scalar>& ys,
                                               Eigen::Index mesh, Mode mode,
                                               const StudyConfig<Scalar>& cfg = {}) {
  const Grid2D<Scalar> g = preset.grid(mesh, mesh);
  Field<Scalar> sol = integrate(preset.model(), g, preset.maturity(), mode, cfg.cfl, cfg.solver);
  std::vector<PriceTableRow<Scalar>> rows;
  rows.reserve(static_cast<std::size_t>(xs.size() * ys.size()));
  for (Eigen::Index i = 0; i < xs.size(); ++i)
    for (Eigen::Index j = 0; j < ys.size(); ++j) {
      PriceTableRow<Scalar> r;
      r.x = xs(i);
      r.y = ys(j);
      r.fv_price = interpolate_at(sol, r.x, r.y);
      r.cos_price = preset.is_heston
                        ? cos_price_heston(preset.heston, r.x, r.y, cfg.heston_terms, cfg.heston_L)
                        : cos_price_2d(preset.basket, r.x, r.y, cfg.cos);
      r.abs_diff = std::abs(r.fv_price - r.cos_price);
      rows.push_back(r);
    }
  return rows;
}

template <typename Scalar>
CsvTable price_table_csv(const std::vector<PriceTableRow<Scalar>>& rows, bool heston_names) {
  CsvTable t({heston_names ? "s" : "s1", heston_names ? "v" : "s2", "fv_price", "cos_price",
              "abs_diff"});
  for (const auto& r : rows)
    t.add_row({csv_number(r.x), csv_number(r.y), csv_number(r.fv_price), csv_number(r.cos_price),
               csv_number(r.abs_diff)});
  return t;
}

}  // namespace fv2d
