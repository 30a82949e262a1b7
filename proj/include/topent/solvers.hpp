#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <vector>

#include "topent/errors.hpp"

namespace topent::detail {

// Small dynamic bitset sized at construction. Universes handled by the exact
// solvers stay small (the schedule caps them), but candidate index sets can
// run to a few thousand bits.
class Bits {
 public:
  Bits() = default;
  explicit Bits(int nbits) : n_(nbits), w_((nbits + 63) / 64, 0) {}

  int size_bits() const { return n_; }
  void set(int i) { w_[static_cast<std::size_t>(i) >> 6] |= (std::uint64_t{1} << (i & 63)); }
  void reset(int i) { w_[static_cast<std::size_t>(i) >> 6] &= ~(std::uint64_t{1} << (i & 63)); }
  bool test(int i) const {
    return (w_[static_cast<std::size_t>(i) >> 6] >> (i & 63)) & 1;
  }

  int count() const {
    int c = 0;
    for (std::uint64_t x : w_) c += std::popcount(x);
    return c;
  }
  bool any() const {
    for (std::uint64_t x : w_)
      if (x) return true;
    return false;
  }
  bool none() const { return !any(); }

  bool intersects(const Bits& o) const {
    for (std::size_t i = 0; i < w_.size(); ++i)
      if (w_[i] & o.w_[i]) return true;
    return false;
  }
  bool is_subset_of(const Bits& o) const {
    for (std::size_t i = 0; i < w_.size(); ++i)
      if (w_[i] & ~o.w_[i]) return false;
    return true;
  }
  int first_set() const {
    for (std::size_t i = 0; i < w_.size(); ++i)
      if (w_[i]) return static_cast<int>(i * 64 + std::countr_zero(w_[i]));
    return -1;
  }

  Bits& operator|=(const Bits& o) {
    for (std::size_t i = 0; i < w_.size(); ++i) w_[i] |= o.w_[i];
    return *this;
  }
  Bits& operator&=(const Bits& o) {
    for (std::size_t i = 0; i < w_.size(); ++i) w_[i] &= o.w_[i];
    return *this;
  }
  Bits& subtract(const Bits& o) {
    for (std::size_t i = 0; i < w_.size(); ++i) w_[i] &= ~o.w_[i];
    return *this;
  }

  template <class F>
  void for_each_set(F&& f) const {
    for (std::size_t i = 0; i < w_.size(); ++i) {
      std::uint64_t x = w_[i];
      while (x) {
        f(static_cast<int>(i * 64 + std::countr_zero(x)));
        x &= x - 1;
      }
    }
  }

  bool operator==(const Bits&) const = default;

 private:
  int n_ = 0;
  std::vector<std::uint64_t> w_;
};

// ---------------------------------------------------------------------------
// Maximum independent set (cardinality) in a conflict graph.
// ---------------------------------------------------------------------------

struct MisResult {
  int size = 0;
  std::vector<int> chosen;  // ascending vertex indices
};

// Greedy maximal independent set taking vertices in ascending index order.
inline MisResult greedy_independent_set(const std::vector<Bits>& conflict) {
  const int v = static_cast<int>(conflict.size());
  MisResult r;
  Bits blocked(v);
  for (int i = 0; i < v; ++i) {
    if (blocked.test(i)) continue;
    r.chosen.push_back(i);
    blocked.set(i);
    blocked |= conflict[i];
  }
  r.size = static_cast<int>(r.chosen.size());
  return r;
}

// Upper bound: partition candidates into cliques of the conflict graph; an
// independent set holds at most one vertex per clique.
inline int clique_cover_bound(const Bits& cand, const std::vector<Bits>& conflict) {
  std::vector<Bits> classes;
  cand.for_each_set([&](int v) {
    for (Bits& c : classes) {
      if (c.is_subset_of(conflict[v])) {
        c.set(v);
        return;
      }
    }
    Bits nc(static_cast<int>(conflict.size()));
    nc.set(v);
    classes.push_back(std::move(nc));
  });
  return static_cast<int>(classes.size());
}

namespace mis_impl {
struct Search {
  const std::vector<Bits>& conflict;
  int best = 0;
  bool found = false;
  std::vector<int> best_set;
  std::vector<int> cur;

  void run(Bits cand) {
    const int v = cand.first_set();
    if (v < 0) {
      const int sz = static_cast<int>(cur.size());
      if (sz > best || (sz == best && !found)) {
        best = sz;
        best_set = cur;
        found = true;
      }
      return;
    }
    const int bound = static_cast<int>(cur.size()) + clique_cover_bound(cand, conflict);
    if (bound < best || (bound == best && found)) return;
    Bits inc = cand;
    inc.reset(v);
    inc.subtract(conflict[v]);
    cur.push_back(v);
    run(std::move(inc));
    cur.pop_back();
    cand.reset(v);
    run(std::move(cand));
  }
};
}  // namespace mis_impl

// Exact maximum independent set; ties resolve to the lexicographically first
// certificate (branching explores inclusion of the lowest vertex first).
inline MisResult max_independent_set(const std::vector<Bits>& conflict) {
  const int v = static_cast<int>(conflict.size());
  MisResult greedy = greedy_independent_set(conflict);
  mis_impl::Search s{conflict, 0, false, {}, {}};
  s.best = greedy.size;
  Bits all(v);
  for (int i = 0; i < v; ++i) all.set(i);
  s.run(std::move(all));
  MisResult r;
  r.size = s.best;
  r.chosen = s.found ? s.best_set : greedy.chosen;
  return r;
}

// ---------------------------------------------------------------------------
// Weighted set cover and weighted packing over ball families.
//
// Family values are always reported as the canonical sum: weights added in
// ascending candidate-index order. The branch-and-bound searches accumulate
// sums the same way, so reported optima are bit-for-bit reproducible and
// comparable against enumeration oracles.
// ---------------------------------------------------------------------------

struct FamilyCandidate {
  Bits footprint;      // covered elements (cover) or occupied points (packing)
  double weight = 0;   // exp(-s * order)
  int order = 0;
  int center = 0;
};

template <class Cands>
inline double canonical_value(const Cands& cands, std::vector<int> chosen) {
  std::sort(chosen.begin(), chosen.end());
  double v = 0.0;
  for (int i : chosen) v += cands[i].weight;
  return v;
}

struct FamilyResult {
  double value = 0.0;
  std::vector<int> chosen;  // ascending candidate indices
  bool optimal = false;
  bool feasible = true;
};

// Greedy weighted set cover: repeatedly take the candidate with the best
// uncovered-per-weight ratio (ties: lighter weight, then lower index).
inline FamilyResult greedy_cover(int universe, const std::vector<FamilyCandidate>& cands) {
  FamilyResult r;
  Bits covered(universe);
  const int total = universe;
  while (covered.count() < total) {
    int best = -1;
    int best_gain = 0;
    for (int i = 0; i < static_cast<int>(cands.size()); ++i) {
      Bits fresh = cands[i].footprint;
      fresh.subtract(covered);
      const int gain = fresh.count();
      if (gain == 0) continue;
      if (best < 0) {
        best = i;
        best_gain = gain;
        continue;
      }
      // gain / weight > best_gain / best_weight, by cross-multiplication
      const double lhs = static_cast<double>(gain) * cands[best].weight;
      const double rhs = static_cast<double>(best_gain) * cands[i].weight;
      if (lhs > rhs || (lhs == rhs && cands[i].weight < cands[best].weight)) {
        best = i;
        best_gain = gain;
      }
    }
    if (best < 0) {
      r.feasible = false;
      return r;
    }
    r.chosen.push_back(best);
    covered |= cands[best].footprint;
  }
  std::sort(r.chosen.begin(), r.chosen.end());
  r.value = canonical_value(cands, r.chosen);
  return r;
}

namespace cover_impl {

// Dual-feasible lower bound on the weight needed to cover `uncovered`:
// y_e = min over candidates containing e of weight / |footprint ∩ uncovered|.
inline double dual_bound(const Bits& uncovered, const std::vector<FamilyCandidate>& cands) {
  const int u = uncovered.size_bits();
  std::vector<double> y(static_cast<std::size_t>(u), std::numeric_limits<double>::infinity());
  for (const FamilyCandidate& c : cands) {
    Bits inter = c.footprint;
    inter &= uncovered;
    const int k = inter.count();
    if (k == 0) continue;
    const double share = c.weight / k;
    inter.for_each_set([&](int e) { y[e] = std::min(y[e], share); });
  }
  double total = 0.0;
  uncovered.for_each_set([&](int e) { total += y[e]; });
  return total;
}

struct Search {
  const std::vector<FamilyCandidate>& cands;
  const std::vector<std::vector<int>>& covers_of;
  int universe;
  double best = std::numeric_limits<double>::infinity();
  bool found = false;
  std::vector<int> best_set;
  std::vector<int> cur;

  void run(const Bits& covered, double cur_weight) {
    if (covered.count() == universe) {
      const double val = canonical_value(cands, cur);
      if (val < best || (val == best && !found)) {
        best = val;
        best_set = cur;
        std::sort(best_set.begin(), best_set.end());
        found = true;
      }
      return;
    }
    Bits uncovered(universe);
    for (int e = 0; e < universe; ++e)
      if (!covered.test(e)) uncovered.set(e);
    // Deflate slightly so floating-point noise can never prune the optimum.
    const double lb = (cur_weight + dual_bound(uncovered, cands)) * (1.0 - 1e-9);
    if (lb > best || (lb == best && found)) return;

    // Branch on the uncovered element with the fewest covering candidates.
    int pick = -1;
    std::size_t pick_covers = 0;
    uncovered.for_each_set([&](int e) {
      std::size_t c = 0;
      for (int i : covers_of[e]) {
        Bits fresh = cands[i].footprint;
        fresh.subtract(covered);
        if (fresh.any()) ++c;
      }
      if (pick < 0 || c < pick_covers) {
        pick = e;
        pick_covers = c;
      }
    });
    if (pick < 0 || pick_covers == 0) return;  // dead end
    for (int i : covers_of[pick]) {
      Bits next = covered;
      next |= cands[i].footprint;
      cur.push_back(i);
      run(next, cur_weight + cands[i].weight);
      cur.pop_back();
    }
  }
};

}  // namespace cover_impl

// Exact minimum-weight set cover by branch and bound (greedy seed, dual
// lower bound, deterministic branching order).
inline FamilyResult min_weight_cover(int universe, const std::vector<FamilyCandidate>& cands) {
  Bits reach(universe);
  for (const FamilyCandidate& c : cands) reach |= c.footprint;
  if (reach.count() != universe) {
    FamilyResult r;
    r.feasible = false;
    return r;
  }
  if (universe == 0) return FamilyResult{0.0, {}, true, true};

  std::vector<std::vector<int>> covers_of(static_cast<std::size_t>(universe));
  for (int i = 0; i < static_cast<int>(cands.size()); ++i)
    cands[i].footprint.for_each_set([&](int e) { covers_of[e].push_back(i); });

  FamilyResult greedy = greedy_cover(universe, cands);
  cover_impl::Search s{cands, covers_of, universe,
                     std::numeric_limits<double>::infinity(), false, {}, {}};
  s.best = greedy.value;
  s.run(Bits(universe), 0.0);
  FamilyResult r;
  r.optimal = true;
  r.chosen = s.found ? s.best_set : greedy.chosen;
  r.value = canonical_value(cands, r.chosen);
  return r;
}

// Greedy packing: candidates must arrive sorted by descending weight (the
// callers sort by ascending order, then center); add when disjoint.
inline FamilyResult greedy_packing(const std::vector<FamilyCandidate>& cands) {
  FamilyResult r;
  if (cands.empty()) return r;
  Bits occupied(cands.front().footprint.size_bits());
  for (int i = 0; i < static_cast<int>(cands.size()); ++i) {
    if (occupied.intersects(cands[i].footprint)) continue;
    occupied |= cands[i].footprint;
    r.chosen.push_back(i);
  }
  r.value = canonical_value(cands, r.chosen);
  return r;
}

namespace packing_impl {
struct Search {
  const std::vector<FamilyCandidate>& cands;
  const std::vector<Bits>& conflict;
  const std::vector<int>& group;                  // candidate -> same-center clique id
  const std::vector<std::vector<int>>& cands_at;  // point -> candidates containing it
  const std::vector<double>& ratio;               // weight / footprint size
  int n_points = 0;
  double best = 0.0;
  bool found = false;
  std::vector<int> best_set;
  std::vector<int> cur;
  std::vector<int> stamp;
  int epoch = 0;

  // Clique-partition bound: candidates sharing a center pairwise intersect
  // (they all contain the center), so a packing takes at most one per group,
  // and the first available candidate of a group carries its maximal weight.
  double clique_bound(const Bits& avail) {
    ++epoch;
    double total = 0.0;
    avail.for_each_set([&](int v) {
      const int g = group[static_cast<std::size_t>(v)];
      if (stamp[static_cast<std::size_t>(g)] == epoch) return;
      stamp[static_cast<std::size_t>(g)] = epoch;
      total += cands[static_cast<std::size_t>(v)].weight;
    });
    return total;
  }

  // Density bound: spreading each weight uniformly over its footprint, a
  // disjoint family collects at most the best available density at every
  // still-unoccupied point.
  double density_bound(const Bits& avail, const Bits& occupied) {
    double total = 0.0;
    for (int p = 0; p < n_points; ++p) {
      if (occupied.test(p)) continue;
      double peak = 0.0;
      for (int i : cands_at[static_cast<std::size_t>(p)])
        if (avail.test(i)) peak = std::max(peak, ratio[static_cast<std::size_t>(i)]);
      total += peak;
    }
    return total;
  }

  void run(int i, const Bits& avail, const Bits& occupied, double cur_weight) {
    const int c = static_cast<int>(cands.size());
    while (i < c && !avail.test(i)) ++i;
    if (i >= c) {
      if (cur_weight > best || (cur_weight == best && !found)) {
        best = cur_weight;
        best_set = cur;
        found = true;
      }
      return;
    }
    // Inflate slightly: an overestimate can only weaken pruning, never cut
    // off the optimum.
    const double slack = std::min(clique_bound(avail), density_bound(avail, occupied));
    const double ub = (cur_weight + slack) * (1.0 + 1e-9);
    if (ub < best || (ub == best && found)) return;

    Bits inc = avail;
    inc.reset(i);
    inc.subtract(conflict[i]);
    Bits inc_occ = occupied;
    inc_occ |= cands[static_cast<std::size_t>(i)].footprint;
    cur.push_back(i);
    run(i + 1, inc, inc_occ, cur_weight + cands[i].weight);
    cur.pop_back();
    Bits exc = avail;
    exc.reset(i);
    run(i + 1, exc, occupied, cur_weight);
  }
};
}  // namespace packing_impl

// Exact maximum-weight packing (pairwise disjoint footprints). Candidates must
// arrive in canonical order; the running sum then equals the canonical value.
inline FamilyResult max_weight_packing(const std::vector<FamilyCandidate>& cands) {
  const int c = static_cast<int>(cands.size());
  if (c == 0) return FamilyResult{};
  const int n_points = cands.front().footprint.size_bits();
  std::vector<Bits> conflict(static_cast<std::size_t>(c), Bits(c));
  for (int i = 0; i < c; ++i)
    for (int j = i + 1; j < c; ++j)
      if (cands[i].footprint.intersects(cands[j].footprint)) {
        conflict[i].set(j);
        conflict[j].set(i);
      }

  std::vector<int> group(static_cast<std::size_t>(c), 0);
  std::map<int, int> group_of_center;
  for (int i = 0; i < c; ++i) {
    const auto it = group_of_center.emplace(cands[static_cast<std::size_t>(i)].center,
                                            static_cast<int>(group_of_center.size()));
    group[static_cast<std::size_t>(i)] = it.first->second;
  }
  std::vector<std::vector<int>> cands_at(static_cast<std::size_t>(n_points));
  std::vector<double> ratio(static_cast<std::size_t>(c), 0.0);
  for (int i = 0; i < c; ++i) {
    const int size = cands[static_cast<std::size_t>(i)].footprint.count();
    ratio[static_cast<std::size_t>(i)] = cands[static_cast<std::size_t>(i)].weight / size;
    cands[static_cast<std::size_t>(i)].footprint.for_each_set(
        [&](int p) { cands_at[static_cast<std::size_t>(p)].push_back(i); });
  }

  FamilyResult greedy = greedy_packing(cands);
  packing_impl::Search s{cands, conflict, group, cands_at, ratio, n_points,
                         0.0,   false,    {},    {},       {},    0};
  s.stamp.assign(group_of_center.size(), 0);
  s.best = greedy.value;
  Bits all(c);
  for (int i = 0; i < c; ++i) all.set(i);
  s.run(0, all, Bits(n_points), 0.0);
  FamilyResult r;
  r.optimal = true;
  r.chosen = s.found ? s.best_set : greedy.chosen;
  r.value = canonical_value(cands, r.chosen);
  return r;
}

}  // namespace topent::detail
