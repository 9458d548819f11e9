#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace leki {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;  // worst-case numbers, or the first failure
};

// Randomized property suites over the library's mathematical contracts. Each
// suite draws its own deterministic streams from the seed, so results are
// reproducible and independent of suite order.
CheckResult check_norm_inequalities(std::uint64_t seed, int instances = 100);
CheckResult check_taper_psd(std::uint64_t seed, int instances = 100);
CheckResult check_escape_vector_claims(std::uint64_t seed, int instances = 100);
CheckResult check_riccati_ode();
CheckResult check_regularized_loss_identity(std::uint64_t seed,
                                            int instances = 100);
CheckResult check_inflation_identities(std::uint64_t seed, int instances = 100);
CheckResult check_linearized_scheme_exact(std::uint64_t seed,
                                          int instances = 20);
CheckResult check_jacobians(std::uint64_t seed, int points = 20);

// Every suite above, in a fixed order.
std::vector<CheckResult> run_property_checks(std::uint64_t seed = 7);

}  // namespace leki
