#pragma once

#include <string>
#include <vector>

namespace hydrofrac {

struct VerifyResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

// random-state oracles for every split: energy partition, stress and tangent against finite differences,
// Drucker-Prager with B = 0 against vol-dev
VerifyResult verify_split_oracles(int samples = 1000, unsigned seed = 1);
// region classification against the two boundary lines and energy continuity across them
VerifyResult verify_drucker_prager_regions(int samples = 20000, unsigned seed = 2);
// steady Darcy column against the linear profile
VerifyResult verify_darcy_column();
// transient consolidation against the series solution at three times
VerifyResult verify_consolidation();

std::vector<VerifyResult> verify_all();

}  // namespace hydrofrac
