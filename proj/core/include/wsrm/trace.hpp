#pragma once

#include <iosfwd>
#include <vector>

#include "wsrm/types.hpp"

namespace wsrm {

// One row per solver iteration. Columns follow the convergence plots:
// objective, sum-power usage and every extra constraint usage.
struct TraceRow {
  long iteration = 0;
  double barrier = 0.0;  // barrier parameter t (0 when the solver has none)
  double objective = 0.0;
  double residual_norm = 0.0;
  RVector usage;  // usage(0) is the sum power
  bool outer_step = false;
};

struct ConvergenceTrace {
  std::vector<TraceRow> rows;
  // Emit the outer_step column (inner-outer solver only).
  bool marks_outer_steps = false;
  // Complex multiply-adds spent, and the same figure in M x M matmuls.
  double work = 0.0;
  double matmul_equivalents = 0.0;
  long iterations = 0;

  void write_csv(std::ostream& out) const;
};

}  // namespace wsrm
