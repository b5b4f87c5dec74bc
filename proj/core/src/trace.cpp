#include "wsrm/trace.hpp"

#include <iomanip>
#include <ostream>

namespace wsrm {

void ConvergenceTrace::write_csv(std::ostream& out) const {
  const Index extra = rows.empty() ? 0 : rows.front().usage.size() - 1;
  out << "iteration,t,objective,residual_norm,sum_power_usage";
  for (Index l = 1; l <= extra; ++l) out << ",usage_" << l;
  if (marks_outer_steps) out << ",outer_step";
  out << '\n';
  const auto old_precision = out.precision();
  out << std::setprecision(12);
  for (const auto& row : rows) {
    out << row.iteration << ',' << row.barrier << ',' << row.objective << ',' << row.residual_norm
        << ',' << (row.usage.size() > 0 ? row.usage(0) : 0.0);
    for (Index l = 1; l <= extra; ++l) out << ',' << row.usage(l);
    if (marks_outer_steps) out << ',' << (row.outer_step ? 1 : 0);
    out << '\n';
  }
  out.precision(old_precision);
}

}  // namespace wsrm
