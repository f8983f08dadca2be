#pragma once

// Cross-oracle acceptance checks shared by the acceptance test binary and
// the `verify` subcommand. Each check pins its own tolerances and seeds.

#include "eprld/model.hpp"
#include "eprld/rng.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace eprld {

/// Random normal stable A = O B O' with B block diagonal (2x2 rotation-scaling
/// blocks and 1x1 entries), at least one complex pair, and a commuting SPD Q
/// that is constant on each block.
SystemSpec random_valid_spec(Engine& rng, int dim);

/// 4-D system whose A + A' is not a multiple of the identity, used for the
/// Q-invariance check together with Q0 = I - 0.3 M + 0.1 M^2.
SystemSpec q_invariance_system();
Matrix q_invariance_noise(const SystemSpec& base);

enum class VerifyScale { full, reduced };

struct VerifyOptions {
  VerifyScale scale = VerifyScale::full;
  std::uint64_t seed = 20240917;
  unsigned jobs = 0;
};

struct CheckResult {
  int id = 0;
  std::string name;
  bool passed = false;
  double measured = 0.0;   // headline metric
  double tolerance = 0.0;  // its bound
  std::string detail;
  double seconds = 0.0;
};

inline constexpr int kAcceptanceCount = 10;

/// Runs criterion `id` in 1..kAcceptanceCount.
CheckResult run_check(int id, const VerifyOptions& options);

/// Runs the listed criteria (all when `ids` is empty) in order.
std::vector<CheckResult> run_acceptance(const VerifyOptions& options, const std::vector<int>& ids = {});

/// "PASS  3 spectral-oracle  measured=... tol=...  (1.2 s)  detail".
std::string format_result(const CheckResult& r);

}  // namespace eprld
