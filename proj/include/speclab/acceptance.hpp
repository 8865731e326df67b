// SPDX-License-Identifier: Apache-2.0

#ifndef SPECLAB_ACCEPTANCE_HPP
#define SPECLAB_ACCEPTANCE_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace speclab {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    double seconds = 0;
    std::string detail;
};

struct AcceptanceOptions {
    bool quick = true;            // reserved; the full set already runs at desk scale
    std::uint64_t seed = 1;       // drives every randomized family
    std::string scenario_dir;     // location of the bundled .scn files
};

/// Runs the whole acceptance suite, printing one PASS/FAIL line per
/// criterion to `log`. Returns the per-criterion results.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt, std::ostream& log);

} // namespace speclab

#endif
