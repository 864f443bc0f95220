#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "stit/geometry.hpp"
#include "stit/measure.hpp"
#include "stit/rng.hpp"

namespace stit {

/// Probe boxes whose hitting indicators {boundary of Y_t meets C} generate
/// the two partitions of the beta estimator: Inner boxes in int(W'), Outer
/// boxes in W_sim \ W.
class ProbePartition {
 public:
  // Inner: per_side^l boxes on a regular grid in W' = [-a,a]^l, half-side
  // a / (2 per_side). Outer: one box per inner box, same half-side, moved
  // along the first axis to +-(1 + margin) b / 2 (the middle of the gap
  // between W and W_sim = [-margin b, margin b]^l).
  static ProbePartition grid(double a, double b, int dim = 2, int per_side = 2,
                             double margin = 2.0);

  // Custom probes; throws DomainError unless inner boxes lie strictly in
  // int(W') and outer boxes strictly between W and the boundary of W_sim.
  ProbePartition(double a, double b, double margin, std::vector<Polytope> inner,
                 std::vector<Polytope> outer);

  double a() const { return a_; }
  double b() const { return b_; }
  int dim() const { return dim_; }
  double sim_half_side() const { return margin_ * b_; }
  const std::vector<Polytope>& inner() const { return inner_; }
  const std::vector<Polytope>& outer() const { return outer_; }

 private:
  double a_, b_, margin_;
  int dim_;
  std::vector<Polytope> inner_;
  std::vector<Polytope> outer_;
};

/// Hitting pattern of one replicate: bit j set iff probe j was hit.
struct ProbePattern {
  std::uint32_t inner = 0;
  std::uint32_t outer = 0;
};

// Simulates Y_t n W_sim and records which probes the cell boundaries meet.
// Only cells that still contain an unhit probe are followed; the others
// cannot change the pattern.
ProbePattern simulate_probe_hits(const HyperplaneMeasure& m, const ProbePartition& probes, double t,
                                 RandomStream rng);

// Patterns from the full (unpruned) simulation; used to validate the above.
ProbePattern probe_hits_full(const HyperplaneMeasure& m, const ProbePartition& probes, double t,
                             RandomStream rng);

std::vector<ProbePattern> simulate_probe_patterns(const HyperplaneMeasure& m,
                                                  const ProbePartition& probes, double t,
                                                  std::size_t n, std::uint64_t master_seed,
                                                  int threads = 0);

// 1/2 sum_ij |P(E_i n A_j) - P(E_i) P(A_j)| for a joint count table
// (rows: inner atoms, columns: outer atoms).
double beta_from_table(const std::vector<std::vector<double>>& counts);

struct BetaEstimate {
  double value;
  double stderr_value;  // bootstrap
  std::size_t n;
  std::size_t rows;  // inner atoms after merging
  std::size_t cols;  // outer atoms after merging
};

struct BetaOptions {
  std::uint32_t inner_mask = 0xffffffffu;  // probes kept in the inner partition
  std::uint32_t outer_mask = 0xffffffffu;
  std::size_t merge_below = 5;  // atoms with fewer counts are pooled; 0 disables
  int bootstrap = 200;
  std::uint64_t bootstrap_seed = 0;
};

// Plug-in estimate from recorded patterns. A lower estimate of beta(a,b):
// any fixed pair of finite partitions stays below the supremum (up to
// sampling error). Throws EstimationError on an empty table.
BetaEstimate beta_from_patterns(std::span<const ProbePattern> patterns,
                                const BetaOptions& options = {});

// Simulates N >= 1e4 replicates and estimates beta.
BetaEstimate beta_hat(const HyperplaneMeasure& m, const ProbePartition& probes, double t,
                      std::size_t n, std::uint64_t master_seed, int threads = 0);

struct BetaBoundInputs {
  double a, b, t, s, M;
  int dim;
  double lambda_inner;  // Lambda([W'])
  double L;             // L(a,b)
  double p_tail;        // P(zeta(Y_t n W') >= M)

  void validate() const;
};

// Mixing bound with the max of the two bracketed terms; raw may exceed 1.
double theorem2_bound_raw(const BetaBoundInputs& in);
double theorem2_bound(const BetaBoundInputs& in);
// Same with the sum form of the bracket.
double simplified_bound_raw(const BetaBoundInputs& in);
double simplified_bound(const BetaBoundInputs& in);

// zeta(Y_t n W') for N independent replicates.
std::vector<double> sample_zeta(const HyperplaneMeasure& m, const Window& inner, double t,
                                std::size_t n, std::uint64_t master_seed, int threads = 0);

struct ZetaTail {
  double M;
  double p_hat;
  double stderr_p;
  int r;
  double moment_r;       // MC estimate of E zeta^r
  double markov_bound;   // moment_r / M^r (capped at 1)
  double markov_stderr;  // stderr of moment_r / M^r
};

ZetaTail zeta_tail_from_samples(std::span<const double> zeta, double M, int r = 2);
// Simulates N >= 1e4 replicates.
ZetaTail zeta_tail(const HyperplaneMeasure& m, const Window& inner, double t, double M,
                   std::size_t n, std::uint64_t master_seed, int r = 2, int threads = 0);

// Smallest M on the sample grid with P^(zeta < M) > 1 - eps.
double zeta_threshold(std::span<const double> zeta, double eps);

// E(B_t^r) for the linear birth chain with rates q n from B_0 = 1.
double birth_chain_moment(double q, double t, int r);
// P(B_t >= M) = (1 - e^{-qt})^{ceil(M) - 1} for M > 1.
double birth_chain_tail(double q, double t, double M);

struct BoundPoint {
  double u, v, s, M;
  double p_tail;
  double raw;
  double value;  // clamped
};

// Minimizes the mixing bound over s = b^-u, M = b^v (u in us, v in vs,
// only s < t). p_tail comes from the zeta samples. Returns nullopt if no
// grid point satisfies s < t.
std::optional<BoundPoint> optimize_bound(const HyperplaneMeasure& m, double a, double b, double t,
                                         std::span<const double> zeta, std::span<const double> us,
                                         std::span<const double> vs);

struct DecayRow {
  double b;
  double beta;
  double beta_stderr;
  double L;
  std::optional<BoundPoint> bound;  // optimized mixing bound
};

struct DecayResult {
  std::vector<DecayRow> rows;
  double bound_slope;      // log-log slope of the clamped bound
  double raw_bound_slope;  // same for the unclamped minimum
  double beta_spearman;    // rank correlation of beta^ with b
};

struct DecayOptions {
  std::vector<double> us = {0.7, 0.8, 0.9};
  std::vector<double> vs = {0.2, 0.3};
  int per_side = 2;
  double margin = 2.0;
  int threads = 0;
};

DecayResult decay_experiment(const HyperplaneMeasure& m, double a, double t,
                             std::span<const double> b_grid, std::size_t n,
                             std::uint64_t master_seed, const DecayOptions& options = {});

// One row per (b, quantity): `b,estimator,value,stderr`.
void write_csv(std::ostream& out, const DecayResult& result);

}  // namespace stit
