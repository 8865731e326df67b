// SPDX-License-Identifier: Apache-2.0

#ifndef SPECLAB_EMIT_HPP
#define SPECLAB_EMIT_HPP

#include <string>

#include "speclab/birman.hpp"
#include "speclab/lorentz.hpp"
#include "speclab/propagator.hpp"
#include "speclab/strichartz.hpp"

namespace speclab {

/// Deterministic text artifacts: CSV per RFC 4180 (CRLF line ends), JSON
/// with sorted keys, every float printed with 17 significant digits.
std::string emit_decompose_csv(const AtomicDecomposition& d);
std::string emit_propagate_csv(const Trajectory& traj);
std::string emit_scan_csv(const ExceptionalScan& scan);
std::string emit_dips_csv(const ExceptionalScan& scan);
std::string emit_projections_json(const ProjectionSet& proj);
std::string emit_strichartz_json(const MixedNormReport& rep);
std::string emit_strichartz_csv(const MixedNormReport& rep);
std::string emit_wiener_demo_json();

} // namespace speclab

#endif
