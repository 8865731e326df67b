// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "speclab/acceptance.hpp"

int main()
{
    speclab::AcceptanceOptions opt;
    opt.scenario_dir = std::string(SPECLAB_SOURCE_DIR) + "/scenarios";
    auto results = speclab::run_acceptance(opt, std::cout);
    bool all = true;
    for (const auto& r : results)
        all = all && r.pass;
    std::cout << (all ? "acceptance: all criteria passed" : "acceptance: FAILURES present")
              << std::endl;
    return all ? 0 : 1;
}
