#include "stit/simulator.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "stit/error.hpp"
#include "stit/parallel.hpp"

namespace stit {

namespace {

constexpr int kMaxResamples = 1'000'000;

}  // namespace

// ---------------------------------------------------------------------------
// TessellationState

std::vector<const Cell*> TessellationState::live_cells() const {
  std::vector<const Cell*> out;
  out.reserve(live_);
  for (const Cell& c : cells_) {
    if (c.alive) out.push_back(&c);
  }
  return out;
}

std::vector<Polytope> TessellationState::live_polytopes() const {
  std::vector<Polytope> out;
  out.reserve(live_);
  for (const Cell& c : cells_) {
    if (c.alive) out.push_back(c.polytope);
  }
  return out;
}

// ---------------------------------------------------------------------------
// StitSimulator

StitSimulator::StitSimulator(const HyperplaneMeasure& measure, Polytope window, RandomStream rng,
                             SimulatorOptions options)
    : measure_(measure),
      rng_(rng),
      options_(std::move(options)),
      state_(std::move(window)) {
  if (state_.window_.empty()) throw DomainError("simulator: empty window");
  if (state_.window_.dim() != measure_.dim()) throw DomainError("simulator: dimension mismatch");
  const CellId root = add_cell(state_.window_);
  const Vec origin = Vec::Zero(measure_.dim());
  if (state_.window_.contains_strictly(std::span<const Vec>(&origin, 1))) state_.zero_cell_ = root;
}

CellId StitSimulator::add_cell(Polytope p) {
  const CellId id = state_.cells_.size();
  Cell c;
  c.id = id;
  c.lambda = lambda_hit(measure_, p);
  c.polytope = std::move(p);
  c.alive = true;
  state_.zeta_ += c.lambda;
  ++state_.live_;
  weights_.push_back(c.lambda);
  state_.cells_.push_back(std::move(c));
  return id;
}

void StitSimulator::retire(CellId id) {
  Cell& c = state_.cells_[id];
  c.alive = false;
  c.polytope = Polytope();
  state_.zeta_ -= c.lambda;
  --state_.live_;
  weights_.set(id, 0.0);
}

void StitSimulator::divide(CellId id, const Polytope& plus, const Polytope& minus,
                           const Hyperplane& h) {
  const double zeta_before = state_.zeta_;
  const bool was_zero = state_.zero_cell_ == id;
  retire(id);
  const CellId plus_id = add_cell(plus);
  const CellId minus_id = add_cell(minus);

  // The origin satisfies <0,u> = 0 <= alpha, so it stays on the H^- side.
  if (was_zero) state_.zero_cell_ = minus_id;

  if (options_.keep_cell) {
    for (CellId child : {plus_id, minus_id}) {
      if (!options_.keep_cell(state_.cells_[child].polytope)) {
        retire(child);
        state_.pruned_ = true;
        if (state_.zero_cell_ == child) state_.zero_cell_.reset();
      }
    }
  }

  JumpRecord rec{state_.jumps_, state_.clock_, id,          h,   plus_id,
                 minus_id,      zeta_before,  state_.zeta_, was_zero};
  ++state_.jumps_;
  if (options_.record_log) state_.log_.push_back(rec);

  if (state_.live_ > options_.max_cells) {
    throw ExplosionGuard("cell count exceeded cap of " + std::to_string(options_.max_cells));
  }
  for (JumpObserver* obs : observers_) obs->on_jump(state_, rec);
}

void StitSimulator::run_until(double t_end) {
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw DomainError("run_until: bad end time");
  while (state_.clock_ < t_end) {
    if (!(state_.zeta_ > 0.0) || state_.live_ == 0) {
      state_.clock_ = t_end;
      return;
    }
    const double wait = rng_.exponential(state_.zeta_);
    // Overshooting waits are discarded; by memorylessness a later call can
    // draw afresh from t_end.
    if (state_.clock_ + wait > t_end) {
      state_.clock_ = t_end;
      return;
    }
    state_.clock_ += wait;

    CellId chosen = 0;
    for (int tries = 0;; ++tries) {
      if (tries > kMaxResamples) throw InternalError("run_until: cell choice did not converge");
      chosen = weights_.find(rng_.uniform() * weights_.total());
      if (state_.cells_[chosen].alive && weights_.weight(chosen) > 0.0) break;
    }

    const Polytope& p = state_.cells_[chosen].polytope;
    for (int tries = 0;; ++tries) {
      if (tries > kMaxResamples) throw InternalError("run_until: no splitting hyperplane found");
      const Hyperplane h = sample_conditional(measure_, p, rng_);
      auto parts = split(p, h, state_.jumps_);
      if (parts) {
        // `p` dies inside divide; the parts are already materialized.
        divide(chosen, parts->plus, parts->minus, h);
        break;
      }
    }
  }
}

bool StitSimulator::apply_cut(CellId cell, const Hyperplane& h, double time) {
  if (cell >= state_.cells_.size() || !state_.cells_[cell].alive) {
    throw DomainError("apply_cut: cell is not alive");
  }
  if (time < state_.clock_) throw DomainError("apply_cut: time runs backwards");
  auto parts = split(state_.cells_[cell].polytope, h, state_.jumps_);
  if (!parts) return false;
  state_.clock_ = time;
  divide(cell, parts->plus, parts->minus, h);
  return true;
}

// ---------------------------------------------------------------------------
// Free functions

TessellationState simulate(const HyperplaneMeasure& m, const Window& w, double t_end,
                           RandomStream& rng, const std::vector<JumpObserver*>& observers) {
  if (!(t_end > 0.0)) throw DomainError("simulate: t_end must be positive");
  StitSimulator sim(m, w.polytope(), rng);
  for (JumpObserver* obs : observers) sim.add_observer(obs);
  sim.run_until(t_end);
  return sim.take_state();
}

double zeta_of(const HyperplaneMeasure& m, const TessellationState& state) {
  double z = 0.0;
  for (const Cell* c : state.live_cells()) z += lambda_hit(m, c->polytope);
  return z;
}

void check_invariants(const HyperplaneMeasure& m, const TessellationState& state) {
  const double fresh = zeta_of(m, state);
  if (std::abs(fresh - state.zeta()) > 1e-9 * std::max(1.0, fresh)) {
    throw InternalError("cached zeta " + std::to_string(state.zeta()) + " != recomputed " +
                        std::to_string(fresh));
  }
  if (state.pruned()) return;

  double vol = 0.0;
  for (const Cell* c : state.live_cells()) vol += c->polytope.volume();
  const double wvol = state.window().volume();
  if (std::abs(vol - wvol) > 1e-6 * wvol) {
    throw InternalError("cell volumes sum to " + std::to_string(vol) + ", window has " +
                        std::to_string(wvol));
  }
  if (state.live_count() != 1 + state.jump_count()) {
    throw InternalError("cell count is not 1 + number of jumps");
  }
  double prev = lambda_hit(m, state.window());
  for (const JumpRecord& j : state.jump_log()) {
    if (j.zeta_after < j.zeta_before - 1e-9 * j.zeta_before ||
        std::abs(j.zeta_before - prev) > 1e-9 * prev) {
      throw InternalError("zeta decreased at jump " + std::to_string(j.jump_id));
    }
    prev = j.zeta_after;
  }
}

// ---------------------------------------------------------------------------
// Encapsulation

EncapsulationDetector::EncapsulationDetector(const Window& inner, const Window& outer)
    : inner_(inner.polytope()), outer_(outer.polytope()) {
  if (inner.dim != outer.dim || !(inner.half_side < outer.half_side)) {
    throw DomainError("encapsulation: need W' strictly inside W");
  }
}

void EncapsulationDetector::on_jump(const TessellationState& state, const JumpRecord& jump) {
  // While W' is intact it lies in the 0-cell, so only 0-cell divisions can
  // reach it.
  if (!record_.inner_intact || !jump.parent_was_zero_cell) return;
  if (hits_interior(jump.hyperplane, inner_)) {
    record_.inner_intact = false;
    record_.inner_hit_time = jump.time;
    return;
  }
  if (record_.happened || !state.zero_cell_id()) return;
  const Polytope& zero = state.cell(*state.zero_cell_id()).polytope;
  if (!zero.has_window_facet() && outer_.contains_strictly(zero.vertices())) {
    record_.happened = true;
    record_.time = jump.time;
  }
}

bool EncapsulationDetector::encapsulated_before(double s) const {
  const bool intact_at_s = !record_.inner_hit_time || *record_.inner_hit_time > s;
  return record_.happened && record_.time < s && intact_at_s;
}

// ---------------------------------------------------------------------------
// No-jump case

ChiTriple chi_no_jump_exact(double lambda_inner, double s) {
  return {1.0, std::exp(-s * lambda_inner), std::exp(s * lambda_inner)};
}

ChiNoJumpResult chi_no_jump_case(const HyperplaneMeasure& m, const Window& inner, double t,
                                 double s, std::size_t replicates, std::uint64_t master_seed) {
  if (!(s > 0.0) || !(s < t)) throw DomainError("chi_no_jump_case: need 0 < s < t");
  const double lambda_inner = lambda_hit(m, inner.polytope());

  // Only the first division of W' matters; everything after it is dropped.
  const auto first_jump = parallel_map(replicates, 0, [&](std::size_t i) {
    SimulatorOptions opts;
    opts.keep_cell = [](const Polytope&) { return false; };
    StitSimulator sim(m, inner.polytope(), RandomStream(master_seed, i), opts);
    sim.run_until(t);
    const auto& log = sim.state().jump_log();
    return log.empty() ? std::numeric_limits<double>::infinity() : log.front().time;
  });

  std::size_t intact_t = 0;
  std::size_t intact_ts = 0;
  for (double tau : first_jump) {
    if (tau > t) ++intact_t;
    if (tau > t - s) ++intact_ts;
  }
  if (intact_t == 0) throw EstimationError("chi_no_jump_case: event {Y_t n W' = W'} never seen");

  ChiNoJumpResult r;
  r.exact = chi_no_jump_exact(lambda_inner, s);
  r.replicates = replicates;
  // Given Y_t n W' = W' there was no jump in (t-s, t], so chi(t,s;t) = 1.
  r.monte_carlo.chi_t = 1.0;
  r.stderr_mc.chi_t = 0.0;
  const double p = static_cast<double>(intact_t) / static_cast<double>(intact_ts);
  r.monte_carlo.chi_t_minus_s = p;
  r.stderr_mc.chi_t_minus_s = std::sqrt(p * (1.0 - p) / static_cast<double>(intact_ts));
  r.monte_carlo.ratio = 1.0 / p;
  r.stderr_mc.ratio = r.stderr_mc.chi_t_minus_s / (p * p);
  return r;
}

}  // namespace stit
