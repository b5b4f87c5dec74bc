#include "wsrm/work_counter.hpp"

namespace wsrm::work {

namespace {
thread_local double tally = 0.0;
}

void add(double multiply_adds) { tally += multiply_adds; }
double total() { return tally; }

Suspend::~Suspend() { tally = saved_; }

}  // namespace wsrm::work
