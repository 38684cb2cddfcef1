#pragma once

#include <vector>

#include "pinlab/checks.hpp"
#include "pinlab/config.hpp"

namespace pinlab {

// Executes the configured command, writes CSV/JSON outputs plus the run
// manifest into config.output_dir, and returns the process exit code
// (verify aggregates check results; everything else returns 0 on success).
int run(const ExperimentConfig& config);

// The reference verification suite behind `pinlab verify`: every check at
// desk-scale parameters. Exposed for the acceptance tests.
std::vector<CheckReport> default_verify_suite(const InterArrivalLaw& law, std::uint64_t seed);

}  // namespace pinlab
