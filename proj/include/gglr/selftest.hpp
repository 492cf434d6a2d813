#pragma once

#include <ostream>

namespace gglr {

// Runs the property suites (graph core, gradient prior, formation, solvers,
// pipeline), printing one line per suite. Returns the number of failed
// suites, 0 when everything passes.
int run_selftest(std::ostream& out);

}  // namespace gglr
