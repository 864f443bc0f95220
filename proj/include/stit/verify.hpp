#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "stit/config.hpp"
#include "stit/measure.hpp"
#include "stit/stats.hpp"

namespace stit {

// P(Y_t n W' = W') estimated from runs in `outer` that follow only the
// 0-cell (while W' is intact every cut through it divides the 0-cell).
Proportion no_division_probability(const HyperplaneMeasure& m, const Window& inner,
                                   const Window& outer, double t, std::size_t n,
                                   std::uint64_t master_seed, int threads = 0);

// P(S(W',W) < s, Y_s n W' = W') with W' = [-a,a]^l, W = [-b,b]^l.
Proportion encapsulation_probability(const HyperplaneMeasure& m, double a, double b, double s,
                                     std::size_t n, std::uint64_t master_seed, int threads = 0);

// e^{-s Lambda([W'])} (1 - e^{-s L(a,b)})^{2l}.
double encapsulation_lower_bound(const HyperplaneMeasure& m, double a, double b, double s);

struct InvariantSweep {
  std::size_t trajectories = 0;
  std::size_t jumps = 0;
  std::size_t failures = 0;
  std::string first_failure;
};

// check_invariants on n independent trajectories of Y_t n W.
InvariantSweep invariant_sweep(const HyperplaneMeasure& m, const Window& w, double t,
                               std::size_t n, std::uint64_t master_seed, int threads = 0);

// Number of hyperplanes, out of n draws from Lambda restricted to [W], that
// lie in two or more of the separating sets G_i(a,b).
std::size_t separating_overlaps(const HyperplaneMeasure& m, double a, double b, std::size_t n,
                                std::uint64_t master_seed);

struct DominationRow {
  double M;
  double p_hat;       // P^(zeta / q >= M)
  double stderr_p;
  double chain_tail;  // P(B_t >= M)
};

// Tail of zeta(Y_t n W') / q against the birth chain with q = Lambda([W']).
std::vector<DominationRow> birth_chain_domination(std::span<const double> zeta, double q, double t,
                                                  std::span<const double> ms);

enum class CheckStatus { kPass, kFail, kSkipped };
const char* status_name(CheckStatus s);

struct CheckResult {
  std::string name;
  bool hard;  // exact identity (no retry) vs statistical check
  CheckStatus status;
  double value;      // measured quantity (min p-value for KS checks)
  double reference;  // what it is compared against
  std::size_t n;     // replicates of the last attempt (0 for closed forms)
  int attempts;
  std::string detail;
};

struct BatteryOptions {
  // Statistical checks below this many replicates have too little power to
  // mean anything and are reported as skipped.
  std::size_t min_statistical_n = 200;
  // Trajectory cap for the invariant sweep.
  std::size_t max_invariant_runs = 1000;
  bool retry_soft = true;
};

// Measure identities, jump-chain invariants, consistency and STIT-property
// KS tests, the encapsulation bound, the no-jump chi triple and birth-chain
// domination. Statistical checks that fail are rerun once with doubled N.
std::vector<CheckResult> run_battery(const RunConfig& config, const BatteryOptions& options = {});

bool battery_passed(std::span<const CheckResult> results);

// `check,kind,status,value,reference,n,attempts,detail`
void write_csv(std::ostream& out, std::span<const CheckResult> results);

}  // namespace stit
