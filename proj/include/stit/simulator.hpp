#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "stit/geometry.hpp"
#include "stit/measure.hpp"
#include "stit/rng.hpp"
#include "stit/weight_tree.hpp"

namespace stit {

using CellId = std::uint64_t;

struct Cell {
  CellId id = 0;
  Polytope polytope;  // emptied once the cell is divided or dropped
  double lambda = 0.0;
  bool alive = false;
};

struct JumpRecord {
  std::uint64_t jump_id;
  double time;
  CellId parent;
  Hyperplane hyperplane;
  CellId plus_child;   // parent n H^+
  CellId minus_child;  // parent n H^-
  double zeta_before;
  double zeta_after;
  bool parent_was_zero_cell;
};

/// Y_t n W: live cells, clock, cached zeta and the jump log.
class TessellationState {
 public:
  explicit TessellationState(Polytope window) : window_(std::move(window)) {}

  const Polytope& window() const { return window_; }
  double clock() const { return clock_; }
  double zeta() const { return zeta_; }
  const std::vector<JumpRecord>& jump_log() const { return log_; }
  std::uint64_t jump_count() const { return jumps_; }
  // Id of the cell containing the origin; empty if the window does not.
  std::optional<CellId> zero_cell_id() const { return zero_cell_; }
  // True when cells irrelevant to the caller were dropped during the run,
  // so the live cells no longer cover the window.
  bool pruned() const { return pruned_; }

  const Cell& cell(CellId id) const { return cells_.at(id); }
  std::size_t live_count() const { return live_; }
  std::vector<const Cell*> live_cells() const;
  std::vector<Polytope> live_polytopes() const;

 private:
  friend class StitSimulator;

  Polytope window_;
  std::vector<Cell> cells_;
  std::vector<JumpRecord> log_;
  double clock_ = 0.0;
  double zeta_ = 0.0;
  std::uint64_t jumps_ = 0;
  std::size_t live_ = 0;
  std::optional<CellId> zero_cell_;
  bool pruned_ = false;
};

/// Push-based callback invoked after every division.
class JumpObserver {
 public:
  virtual ~JumpObserver() = default;
  virtual void on_jump(const TessellationState& state, const JumpRecord& jump) = 0;
};

struct SimulatorOptions {
  std::size_t max_cells = 10'000'000;
  bool record_log = true;
  // Cells for which this returns false are dropped right after birth. Only
  // safe when the caller's observables do not depend on them.
  std::function<bool(const Polytope&)> keep_cell;
};

/// Gillespie simulation of the STIT jump chain in a convex window: the next
/// jump comes after Exp(zeta), the dividing cell is chosen with probability
/// Lambda([C]) / zeta and the hyperplane is drawn from Lambda^C.
class StitSimulator {
 public:
  StitSimulator(const HyperplaneMeasure& measure, Polytope window, RandomStream rng,
                SimulatorOptions options = {});

  void add_observer(JumpObserver* observer) { observers_.push_back(observer); }

  // Advances the clock to t_end (no-op if already there). Throws
  // ExplosionGuard when the cell cap is exceeded.
  void run_until(double t_end);

  // Divides a live cell by h at the given time (>= clock), bypassing the
  // random clock. Returns false if h does not cut the cell.
  bool apply_cut(CellId cell, const Hyperplane& h, double time);

  const TessellationState& state() const { return state_; }
  TessellationState take_state() { return std::move(state_); }
  const HyperplaneMeasure& measure() const { return measure_; }

 private:
  CellId add_cell(Polytope p);
  void retire(CellId id);
  void divide(CellId id, const Polytope& plus, const Polytope& minus, const Hyperplane& h);

  HyperplaneMeasure measure_;
  RandomStream rng_;
  SimulatorOptions options_;
  TessellationState state_;
  WeightTree weights_;
  std::vector<JumpObserver*> observers_;
};

// Runs a simulation of Y_{t_end} n W from the trivial tessellation {W}.
TessellationState simulate(const HyperplaneMeasure& m, const Window& w, double t_end,
                           RandomStream& rng, const std::vector<JumpObserver*>& observers = {});

// Sum of Lambda([C]) over live cells, recomputed from scratch.
double zeta_of(const HyperplaneMeasure& m, const TessellationState& state);

// Hard checks: volume conservation (unless pruned), fresh zeta vs cached,
// zeta monotone along the log, live count = 1 + jumps (unless pruned).
// Throws InternalError describing the first violation.
void check_invariants(const HyperplaneMeasure& m, const TessellationState& state);

/// Observer for the encapsulation time S(W', W) = first time the 0-cell
/// contains W' and lies in int(W).
struct EncapsulationRecord {
  bool happened = false;
  double time = 0.0;             // S(W', W) when happened
  bool inner_intact = true;      // no cut has hit int(W') so far
  std::optional<double> inner_hit_time;
};

class EncapsulationDetector : public JumpObserver {
 public:
  // inner = W' = [-a,a]^l, outer = W = [-b,b]^l; the simulation window may be
  // W itself or any larger window.
  EncapsulationDetector(const Window& inner, const Window& outer);

  void on_jump(const TessellationState& state, const JumpRecord& jump) override;

  const EncapsulationRecord& record() const { return record_; }
  // S < s and Y_s n W' = W'; valid once the simulation has reached s.
  bool encapsulated_before(double s) const;

 private:
  Polytope inner_;
  Polytope outer_;
  EncapsulationRecord record_;
};

/// No-jump triple (chi quantities) for the event A = {Y n W' = W'}.
struct ChiTriple {
  double chi_t;          // chi(t,s;t)
  double chi_t_minus_s;  // chi(t,s;t-s)
  double ratio;          // P(Y_{t-s} in A) / P(Y_t in A)
};

struct ChiNoJumpResult {
  ChiTriple exact;
  ChiTriple monte_carlo;
  ChiTriple stderr_mc;
  std::size_t replicates;
};

// Closed forms (1, e^{-s Lambda([W'])}, e^{s Lambda([W'])}).
ChiTriple chi_no_jump_exact(double lambda_inner, double s);

// Exact triple plus an MC cross-check from `replicates` simulations in W'
// using streams (master_seed, 0..replicates-1).
ChiNoJumpResult chi_no_jump_case(const HyperplaneMeasure& m, const Window& inner, double t,
                                 double s, std::size_t replicates, std::uint64_t master_seed);

}  // namespace stit
