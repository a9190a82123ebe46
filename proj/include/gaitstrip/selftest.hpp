#pragma once

#include <ostream>

namespace gaitstrip {

// Quick invariant sweep on small shapes: fusion equivalence, parameter parity,
// extractor locality, GeM and aggregation properties, losses, sampler,
// retrieval and file round trips. Prints one PASS/FAIL line per check and
// returns true iff all pass.
bool run_selftest(std::ostream& out);

} // namespace gaitstrip
