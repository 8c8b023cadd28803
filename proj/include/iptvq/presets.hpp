#pragma once

// MCS tables for a WiMAX-style frame: slots per connection and the share of
// the cell area served by each MCS.  Fractions are renormalized to sum to 1.

#include <vector>

#include "iptvq/model.hpp"

namespace iptvq {

/// QPSK 1/2 through 64-QAM 3/4, six zones.
std::vector<McsClass> six_mcs_classes();
/// QPSK 1/2 and 16-QAM 1/2.
std::vector<McsClass> two_mcs_classes();
/// QPSK 1/2, QPSK 3/4, 16-QAM 3/4.
std::vector<McsClass> three_mcs_classes();
/// QPSK 1/2, 16-QAM 1/2, 64-QAM 2/3 with the random-walk geometry.
std::vector<McsClass> walk_mcs_classes();

/// Rescales area fractions to sum to 1.  Throws ValidationError if the sum
/// is off by more than `tolerance`.
std::vector<McsClass> normalize_area_fractions(std::vector<McsClass> mcs, double tolerance = 1e-5);

}  // namespace iptvq
