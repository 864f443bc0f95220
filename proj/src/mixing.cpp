#include "stit/mixing.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>

#include "stit/error.hpp"
#include "stit/parallel.hpp"
#include "stit/simulator.hpp"
#include "stit/stats.hpp"

namespace stit {

namespace {

constexpr std::uint64_t kBootstrapStream = 0xb0075ull << 40;
constexpr std::uint64_t kZetaStream = 0x2e7aull << 40;

Polytope centered_box(const Vec& c, double half) {
  return Polytope::box(c.array() - half, c.array() + half);
}

bool strictly_inside_cube(const Polytope& p, double half) {
  for (const Vec& v : p.vertices()) {
    if (v.cwiseAbs().maxCoeff() >= half - kGeomEps) return false;
  }
  return true;
}

// Some coordinate stays beyond +-half across the whole box.
bool strictly_outside_cube(const Polytope& p, double half) {
  for (int j = 0; j < p.dim(); ++j) {
    bool above = true, below = true;
    for (const Vec& v : p.vertices()) {
      above = above && v(j) > half + kGeomEps;
      below = below && v(j) < -half - kGeomEps;
    }
    if (above || below) return true;
  }
  return false;
}

bool contains_box(const Polytope& cell, const Polytope& probe) {
  for (const Vec& v : probe.vertices()) {
    if (!cell.contains(v)) return false;
  }
  return true;
}

ProbePattern pack(const std::vector<bool>& hit, std::size_t n_inner) {
  ProbePattern p;
  for (std::size_t j = 0; j < hit.size(); ++j) {
    if (!hit[j]) continue;
    if (j < n_inner) {
      p.inner |= 1u << j;
    } else {
      p.outer |= 1u << (j - n_inner);
    }
  }
  return p;
}

// Follows the probes through the divisions: a probe is hit when the cell
// that holds it is cut through its interior.
class ProbeTracker : public JumpObserver {
 public:
  explicit ProbeTracker(std::vector<Polytope> probes)
      : probes_(std::move(probes)), hit_(probes_.size(), false), owner_(probes_.size(), 0) {}

  bool keep(const Polytope& cell) const {
    for (std::size_t j = 0; j < probes_.size(); ++j) {
      if (!hit_[j] && contains_box(cell, probes_[j])) return true;
    }
    return false;
  }

  void on_jump(const TessellationState& state, const JumpRecord& jump) override {
    for (std::size_t j = 0; j < probes_.size(); ++j) {
      if (hit_[j] || owner_[j] != jump.parent) continue;
      if (hits_interior(jump.hyperplane, probes_[j])) {
        hit_[j] = true;
      } else {
        // H^- = {<x,u> <= alpha}.
        const bool minus = jump.hyperplane.signed_distance(probes_[j].centroid()) < 0.0;
        owner_[j] = minus ? jump.minus_child : jump.plus_child;
        if (!state.cell(owner_[j]).alive) throw InternalError("probe owner was dropped");
      }
    }
  }

  const std::vector<bool>& hit() const { return hit_; }

 private:
  std::vector<Polytope> probes_;
  std::vector<bool> hit_;
  std::vector<CellId> owner_;
};

std::vector<Polytope> all_probes(const ProbePartition& probes) {
  std::vector<Polytope> out = probes.inner();
  out.insert(out.end(), probes.outer().begin(), probes.outer().end());
  return out;
}

struct Categories {
  std::map<std::uint32_t, std::size_t> index;
  std::size_t count = 0;
};

Categories categorize(std::span<const std::uint32_t> keys, std::size_t merge_below) {
  std::map<std::uint32_t, std::size_t> freq;
  for (std::uint32_t k : keys) ++freq[k];
  Categories c;
  std::optional<std::size_t> rare;
  for (const auto& [key, n] : freq) {
    if (merge_below > 0 && n < merge_below) {
      if (!rare) rare = c.count++;
      c.index[key] = *rare;
    } else {
      c.index[key] = c.count++;
    }
  }
  return c;
}

double beta_of_indices(std::span<const std::size_t> rows, std::span<const std::size_t> cols,
                       std::size_t nr, std::size_t nc) {
  std::vector<std::vector<double>> t(nr, std::vector<double>(nc, 0.0));
  for (std::size_t k = 0; k < rows.size(); ++k) t[rows[k]][cols[k]] += 1.0;
  return beta_from_table(t);
}

}  // namespace

// ---------------------------------------------------------------------------
// ProbePartition

ProbePartition ProbePartition::grid(double a, double b, int dim, int per_side, double margin) {
  if (per_side < 1) throw DomainError("ProbePartition: per_side must be >= 1");
  int count = 1;
  for (int j = 0; j < dim; ++j) count *= per_side;
  if (count > 16) throw DomainError("ProbePartition: at most 16 probes per side");
  const double half = a / (2.0 * per_side);
  const double outer_x = 0.5 * (1.0 + margin) * b;

  std::vector<Polytope> inner, outer;
  for (int idx = 0; idx < count; ++idx) {
    Vec c(dim);
    int rest = idx;
    for (int j = 0; j < dim; ++j) {
      const int g = rest % per_side;
      rest /= per_side;
      c(j) = a * (-1.0 + (2.0 * g + 1.0) / per_side);
    }
    inner.push_back(centered_box(c, half));
    Vec o = c;
    o(0) = c(0) >= 0.0 ? outer_x : -outer_x;
    outer.push_back(centered_box(o, half));
  }
  return ProbePartition(a, b, margin, std::move(inner), std::move(outer));
}

ProbePartition::ProbePartition(double a, double b, double margin, std::vector<Polytope> inner,
                               std::vector<Polytope> outer)
    : a_(a), b_(b), margin_(margin), inner_(std::move(inner)), outer_(std::move(outer)) {
  if (!(a > 0.0) || !(a < b)) throw DomainError("ProbePartition: need 0 < a < b");
  if (!(margin > 1.0)) throw DomainError("ProbePartition: margin must exceed 1");
  if (inner_.empty() || outer_.empty() || inner_.size() > 16 || outer_.size() > 16) {
    throw DomainError("ProbePartition: need 1..16 probes on each side");
  }
  dim_ = inner_.front().dim();
  for (const Polytope& p : inner_) {
    if (p.dim() != dim_ || !strictly_inside_cube(p, a)) {
      throw DomainError("ProbePartition: inner probe not strictly inside W'");
    }
  }
  for (const Polytope& p : outer_) {
    if (p.dim() != dim_ || !strictly_outside_cube(p, b) || !strictly_inside_cube(p, margin * b)) {
      throw DomainError("ProbePartition: outer probe not strictly between W and W_sim");
    }
  }
}

// ---------------------------------------------------------------------------
// Probe simulations

ProbePattern simulate_probe_hits(const HyperplaneMeasure& m, const ProbePartition& probes, double t,
                                 RandomStream rng) {
  ProbeTracker tracker(all_probes(probes));
  SimulatorOptions opts;
  opts.keep_cell = [&tracker](const Polytope& p) { return tracker.keep(p); };
  opts.record_log = false;
  StitSimulator sim(m, Window(probes.sim_half_side(), probes.dim()).polytope(), rng, opts);
  sim.add_observer(&tracker);
  sim.run_until(t);
  return pack(tracker.hit(), probes.inner().size());
}

ProbePattern probe_hits_full(const HyperplaneMeasure& m, const ProbePartition& probes, double t,
                             RandomStream rng) {
  const auto st = simulate(m, Window(probes.sim_half_side(), probes.dim()), t, rng);
  const auto boxes = all_probes(probes);
  std::vector<bool> hit(boxes.size(), true);
  for (const Cell* c : st.live_cells()) {
    for (std::size_t j = 0; j < boxes.size(); ++j) {
      if (hit[j] && contains_box(c->polytope, boxes[j])) hit[j] = false;
    }
  }
  return pack(hit, probes.inner().size());
}

std::vector<ProbePattern> simulate_probe_patterns(const HyperplaneMeasure& m,
                                                  const ProbePartition& probes, double t,
                                                  std::size_t n, std::uint64_t master_seed,
                                                  int threads) {
  return parallel_map(n, threads, [&](std::size_t i) {
    return simulate_probe_hits(m, probes, t, RandomStream(master_seed, i));
  });
}

// ---------------------------------------------------------------------------
// Beta estimation

double beta_from_table(const std::vector<std::vector<double>>& counts) {
  double n = 0.0;
  for (const auto& row : counts) {
    for (double c : row) n += c;
  }
  if (!(n > 0.0)) throw EstimationError("beta: empty atom table");
  const std::size_t nc = counts.front().size();
  std::vector<double> col(nc, 0.0);
  for (const auto& row : counts) {
    if (row.size() != nc) throw DomainError("beta: ragged table");
    for (std::size_t j = 0; j < nc; ++j) col[j] += row[j];
  }
  double sum = 0.0;
  for (const auto& row : counts) {
    double r = 0.0;
    for (double c : row) r += c;
    for (std::size_t j = 0; j < nc; ++j) {
      sum += std::abs(row[j] / n - (r / n) * (col[j] / n));
    }
  }
  return 0.5 * sum;
}

BetaEstimate beta_from_patterns(std::span<const ProbePattern> patterns, const BetaOptions& options) {
  if (patterns.empty()) throw EstimationError("beta: no replicates");
  std::vector<std::uint32_t> ki, ko;
  ki.reserve(patterns.size());
  ko.reserve(patterns.size());
  for (const auto& p : patterns) {
    ki.push_back(p.inner & options.inner_mask);
    ko.push_back(p.outer & options.outer_mask);
  }
  const auto ci = categorize(ki, options.merge_below);
  const auto co = categorize(ko, options.merge_below);
  std::vector<std::size_t> rows, cols;
  for (std::size_t k = 0; k < patterns.size(); ++k) {
    rows.push_back(ci.index.at(ki[k]));
    cols.push_back(co.index.at(ko[k]));
  }

  BetaEstimate est{beta_of_indices(rows, cols, ci.count, co.count), 0.0, patterns.size(), ci.count,
                   co.count};
  if (options.bootstrap > 1) {
    RandomStream rng(options.bootstrap_seed, kBootstrapStream);
    std::vector<double> reps;
    std::vector<std::size_t> br(rows.size()), bc(cols.size());
    for (int b = 0; b < options.bootstrap; ++b) {
      for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto pick = rng.below(rows.size());
        br[k] = rows[pick];
        bc[k] = cols[pick];
      }
      reps.push_back(beta_of_indices(br, bc, ci.count, co.count));
    }
    est.stderr_value = standard_error(reps) * std::sqrt(static_cast<double>(reps.size()));
  }
  return est;
}

BetaEstimate beta_hat(const HyperplaneMeasure& m, const ProbePartition& probes, double t,
                      std::size_t n, std::uint64_t master_seed, int threads) {
  if (n < 10000) throw DomainError("beta_hat: need N >= 1e4 replicates");
  const auto patterns = simulate_probe_patterns(m, probes, t, n, master_seed, threads);
  BetaOptions opts;
  opts.bootstrap_seed = master_seed;
  return beta_from_patterns(patterns, opts);
}

// ---------------------------------------------------------------------------
// Bounds

void BetaBoundInputs::validate() const {
  if (!(a > 0.0) || !(a < b)) throw DomainError("bound: need 0 < a < b");
  if (!(s > 0.0) || !(s < t)) throw DomainError("bound: need 0 < s < t");
  if (!(M > 0.0)) throw DomainError("bound: need M > 0");
  if (!(p_tail >= 0.0 && p_tail <= 1.0)) throw DomainError("bound: p_tail must be in [0,1]");
  if (dim < 2) throw DomainError("bound: need l >= 2");
  if (!(lambda_inner > 0.0) || !(L >= 0.0)) throw DomainError("bound: bad Lambda([W']) or L");
}

namespace {

// e^{-s Lambda([W'])} (1 - e^{-s L})^{2l}
double encapsulation_term(const BetaBoundInputs& in) {
  return std::exp(-in.s * in.lambda_inner) * std::pow(-std::expm1(-in.s * in.L), 2 * in.dim);
}

}  // namespace

double theorem2_bound_raw(const BetaBoundInputs& in) {
  in.validate();
  const double e = encapsulation_term(in);
  const double em = std::exp(-in.s * in.M);
  const double bracket =
      1.0 - e * em + std::max(std::expm1(in.s * in.M), 2.0 - em - e);
  return in.p_tail + (1.0 - in.p_tail) * bracket;
}

double theorem2_bound(const BetaBoundInputs& in) { return std::min(1.0, theorem2_bound_raw(in)); }

double simplified_bound_raw(const BetaBoundInputs& in) {
  in.validate();
  const double e = encapsulation_term(in);
  const double em = std::exp(-in.s * in.M);
  const double bracket = 2.0 + std::exp(in.s * in.M) - em - (1.0 + em) * e;
  return in.p_tail + (1.0 - in.p_tail) * bracket;
}

double simplified_bound(const BetaBoundInputs& in) { return std::min(1.0, simplified_bound_raw(in)); }

// ---------------------------------------------------------------------------
// zeta tails and the birth chain

std::vector<double> sample_zeta(const HyperplaneMeasure& m, const Window& inner, double t,
                                std::size_t n, std::uint64_t master_seed, int threads) {
  return parallel_map(n, threads, [&](std::size_t i) {
    RandomStream rng(master_seed, kZetaStream | i);
    SimulatorOptions opts;
    opts.record_log = false;
    StitSimulator sim(m, inner.polytope(), rng, opts);
    sim.run_until(t);
    return sim.state().zeta();
  });
}

ZetaTail zeta_tail_from_samples(std::span<const double> zeta, double M, int r) {
  if (zeta.empty()) throw EstimationError("zeta_tail: no samples");
  if (r < 1) throw DomainError("zeta_tail: r must be >= 1");
  std::size_t above = 0;
  std::vector<double> powers;
  powers.reserve(zeta.size());
  for (double z : zeta) {
    above += z >= M;
    powers.push_back(std::pow(z, r));
  }
  const auto p = proportion(above, zeta.size());
  ZetaTail out;
  out.M = M;
  out.p_hat = p.p;
  out.stderr_p = p.stderr_p;
  out.r = r;
  out.moment_r = mean(powers);
  const double scale = std::pow(M, r);
  out.markov_bound = std::min(1.0, out.moment_r / scale);
  out.markov_stderr = standard_error(powers) / scale;
  return out;
}

ZetaTail zeta_tail(const HyperplaneMeasure& m, const Window& inner, double t, double M,
                   std::size_t n, std::uint64_t master_seed, int r, int threads) {
  if (n < 10000) throw DomainError("zeta_tail: need N >= 1e4 replicates");
  const auto z = sample_zeta(m, inner, t, n, master_seed, threads);
  return zeta_tail_from_samples(z, M, r);
}

double zeta_threshold(std::span<const double> zeta, double eps) {
  if (zeta.empty()) throw EstimationError("zeta_threshold: no samples");
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("zeta_threshold: need 0 < eps < 1");
  std::vector<double> z(zeta.begin(), zeta.end());
  std::sort(z.begin(), z.end());
  const auto k = static_cast<std::size_t>(std::floor((1.0 - eps) * static_cast<double>(z.size())));
  const double base = z[std::min(k, z.size() - 1)];
  return std::nextafter(base, std::numeric_limits<double>::infinity());
}

double birth_chain_moment(double q, double t, int r) {
  if (!(q > 0.0) || !(t > 0.0)) throw DomainError("birth_chain_moment: need q, t > 0");
  if (r < 1) throw DomainError("birth_chain_moment: need r >= 1");
  const double p = std::exp(-q * t);
  const double x = -std::expm1(-q * t);  // 1 - p without cancellation
  if (x == 0.0) return 1.0;
  const double log_x = std::log(x);

  double sum = 0.0;
  constexpr std::uint64_t kMaxTerms = 200'000'000;
  for (std::uint64_t l = 1; l <= kMaxTerms; ++l) {
    const double term = p * std::exp(r * std::log(static_cast<double>(l)) + (l - 1) * log_x);
    sum += term;
    // Successive term ratios ((l+1)/l)^r x decrease in l, so once below one
    // the tail is at most a geometric series.
    const double rho = std::pow(1.0 + 1.0 / static_cast<double>(l), r) * x;
    if (rho < 1.0) {
      const double tail = term * rho / (1.0 - rho);
      if (tail <= 1e-13 * sum) return sum + tail;
    }
  }
  throw InternalError("birth_chain_moment: series did not converge");
}

double birth_chain_tail(double q, double t, double M) {
  if (!(q > 0.0) || !(t > 0.0)) throw DomainError("birth_chain_tail: need q, t > 0");
  if (M <= 1.0) return 1.0;
  const double x = -std::expm1(-q * t);
  return std::pow(x, std::ceil(M) - 1.0);
}

// ---------------------------------------------------------------------------
// Decay experiment

std::optional<BoundPoint> optimize_bound(const HyperplaneMeasure& m, double a, double b, double t,
                                         std::span<const double> zeta, std::span<const double> us,
                                         std::span<const double> vs) {
  const int dim = m.dim();
  const double lambda_inner = lambda_hit(m, Window(a, dim).polytope());
  const double L = big_L(m, a, b);
  std::optional<BoundPoint> best;
  for (double u : us) {
    for (double v : vs) {
      const double s = std::pow(b, -u);
      const double M = std::pow(b, v);
      if (!(s < t)) continue;
      const double p_tail = zeta_tail_from_samples(zeta, M, 1).p_hat;
      const BetaBoundInputs in{a, b, t, s, M, dim, lambda_inner, L, p_tail};
      const double raw = theorem2_bound_raw(in);
      if (!best || raw < best->raw) best = BoundPoint{u, v, s, M, p_tail, raw, std::min(1.0, raw)};
    }
  }
  return best;
}

DecayResult decay_experiment(const HyperplaneMeasure& m, double a, double t,
                             std::span<const double> b_grid, std::size_t n,
                             std::uint64_t master_seed, const DecayOptions& options) {
  if (b_grid.size() < 2) throw DomainError("decay_experiment: need at least two b values");
  for (std::size_t k = 0; k < b_grid.size(); ++k) {
    if (!(b_grid[k] > a) || (k > 0 && !(b_grid[k] > b_grid[k - 1]))) {
      throw DomainError("decay_experiment: b grid must increase and exceed a");
    }
  }
  const int dim = m.dim();
  const auto zeta = sample_zeta(m, Window(a, dim), t, n, master_seed, options.threads);

  DecayResult out;
  for (std::size_t k = 0; k < b_grid.size(); ++k) {
    const double b = b_grid[k];
    const auto probes = ProbePartition::grid(a, b, dim, options.per_side, options.margin);
    const std::uint64_t seed = splitmix64(master_seed + 0x9e3779b97f4a7c15ull * (k + 1));
    const auto patterns = simulate_probe_patterns(m, probes, t, n, seed, options.threads);
    BetaOptions bopts;
    bopts.bootstrap_seed = seed;
    const auto est = beta_from_patterns(patterns, bopts);
    out.rows.push_back({b, est.value, est.stderr_value, big_L(m, a, b),
                        optimize_bound(m, a, b, t, zeta, options.us, options.vs)});
  }

  std::vector<double> lb, lv, lr, bs, betas;
  for (const auto& r : out.rows) {
    bs.push_back(r.b);
    betas.push_back(r.beta);
    if (r.bound) {
      lb.push_back(std::log(r.b));
      lv.push_back(std::log(r.bound->value));
      lr.push_back(std::log(r.bound->raw));
    }
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  out.bound_slope = lb.size() >= 2 ? linear_fit(lb, lv).slope : nan;
  out.raw_bound_slope = lb.size() >= 2 ? linear_fit(lb, lr).slope : nan;
  out.beta_spearman = spearman(bs, betas);
  return out;
}

void write_csv(std::ostream& out, const DecayResult& result) {
  out << "b,estimator,value,stderr\n" << std::setprecision(12);
  for (const auto& r : result.rows) {
    out << r.b << ",beta_hat," << r.beta << ',' << r.beta_stderr << '\n';
    out << r.b << ",L," << r.L << ",0\n";
    if (r.bound) {
      out << r.b << ",theorem2_bound," << r.bound->value << ",0\n";
      out << r.b << ",theorem2_bound_raw," << r.bound->raw << ",0\n";
      out << r.b << ",s," << r.bound->s << ",0\n";
      out << r.b << ",M," << r.bound->M << ",0\n";
      out << r.b << ",p_tail," << r.bound->p_tail << ",0\n";
    }
  }
  out << "all,bound_slope," << result.bound_slope << ",0\n";
  out << "all,raw_bound_slope," << result.raw_bound_slope << ",0\n";
  out << "all,beta_spearman," << result.beta_spearman << ",0\n";
}

}  // namespace stit
