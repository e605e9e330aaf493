#pragma once

#include <cmath>
#include <stdexcept>

#include "grid.hpp"

namespace fv2d {

// Discrete error norms of a cell-centered field against a reference on the
// same grid. l1 is the cell-area-weighted sum of absolute differences;
// linf_relative normalizes the max error by the max reference magnitude.
template <typename Scalar>
struct ErrorSummary {
  Scalar l1{0};
  Scalar linf{0};
  Scalar linf_relative{0};
  Scalar mean_absolute{0};
};

template <typename Scalar>
ErrorSummary<Scalar> error_norms(const Grid2D<Scalar>& g, const Array2<Scalar>& numeric,
                                 const Array2<Scalar>& reference) {
  if (numeric.rows() != g.nx || numeric.cols() != g.ny || reference.rows() != g.nx ||
      reference.cols() != g.ny)
    throw std::invalid_argument("error_norms: arrays must be nx x ny interior values");
  const Array2<Scalar> diff = (numeric - reference).abs();
  ErrorSummary<Scalar> s;
  s.linf = diff.maxCoeff();
  s.l1 = g.cell_area() * diff.sum();
  s.mean_absolute = diff.mean();
  const Scalar ref_max = reference.abs().maxCoeff();
  s.linf_relative = ref_max > Scalar(0) ? s.linf / ref_max : s.linf;
  return s;
}

}  // namespace fv2d
