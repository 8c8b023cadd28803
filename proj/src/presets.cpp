#include "iptvq/presets.hpp"

#include <cmath>
#include <string>

namespace iptvq {

std::vector<McsClass> normalize_area_fractions(std::vector<McsClass> mcs, double tolerance) {
  double sum = 0;
  for (const auto& c : mcs) sum += c.area_fraction;
  if (!(std::abs(sum - 1.0) <= tolerance)) {
    throw ValidationError("area fractions sum to " + std::to_string(sum) + ", not 1");
  }
  if (std::abs(sum - 1.0) <= 1e-12) return mcs;
  for (auto& c : mcs) c.area_fraction /= sum;
  return mcs;
}

std::vector<McsClass> six_mcs_classes() {
  return normalize_area_fractions({
      {"QPSK 1/2", 14, 0.166352},
      {"QPSK 3/4", 9, 0.287335},
      {"16-QAM 1/2", 7, 0.120983},
      {"16-QAM 3/4", 5, 0.236295},
      {"64-QAM 2/3", 4, 0.068053},
      {"64-QAM 3/4", 3, 0.120983},
  });
}

std::vector<McsClass> two_mcs_classes() {
  return normalize_area_fractions({
      {"QPSK 1/2", 14, 0.453687},
      {"16-QAM 1/2", 7, 0.546313},
  });
}

std::vector<McsClass> three_mcs_classes() {
  return normalize_area_fractions({
      {"QPSK 1/2", 14, 0.166352},
      {"QPSK 3/4", 9, 0.408318},
      {"16-QAM 3/4", 5, 0.425331},
  });
}

std::vector<McsClass> walk_mcs_classes() {
  return normalize_area_fractions({
      {"QPSK 1/2", 14, 0.453687},
      {"16-QAM 1/2", 7, 0.357278},
      {"64-QAM 2/3", 4, 0.189036},
  });
}

}  // namespace iptvq
