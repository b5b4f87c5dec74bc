#pragma once

#include "wsrm/types.hpp"

namespace wsrm::work {

// Per-thread tally of complex multiply-adds spent in dense linear algebra.
// Solvers divide by M^3 to report "M x M matrix multiplication equivalents",
// the complexity proxy used to compare DPC algorithms.
void add(double multiply_adds);
double total();

inline void matmul(Index m, Index n, Index p) {
  add(static_cast<double>(m) * static_cast<double>(n) * static_cast<double>(p));
}
inline void matvec(Index m, Index n) { add(static_cast<double>(m) * static_cast<double>(n)); }

// Work done inside the lifetime of a Suspend is not counted (used for
// diagnostics such as trace rows).
class Suspend {
 public:
  Suspend() : saved_(total()) {}
  ~Suspend();
  Suspend(const Suspend&) = delete;
  Suspend& operator=(const Suspend&) = delete;

 private:
  double saved_;
};

// Measures the work done between construction and elapsed().
class Scope {
 public:
  Scope() : start_(total()) {}
  double elapsed() const { return total() - start_; }

 private:
  double start_;
};

}  // namespace wsrm::work
