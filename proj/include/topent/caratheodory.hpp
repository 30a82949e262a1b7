#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "topent/capacity.hpp"
#include "topent/errors.hpp"
#include "topent/estimate.hpp"
#include "topent/finite_system.hpp"
#include "topent/sft.hpp"
#include "topent/solvers.hpp"

namespace topent {

struct CoverSolution {
  std::vector<BowenBallSpec> balls;  // open balls, canonical (order, center) order
  double value = 0.0;                // sum of exp(-s * order), canonical summation
  bool optimal = false;
};

struct PackingSolution {
  std::vector<BowenBallSpec> balls;  // closed balls centered in z
  double value = 0.0;
  bool optimal = false;
};

namespace detail_cara {

// Candidate open balls over z for the cover problem, canonical (order,
// center) enumeration, duplicate coverage collapsed onto the deepest ball.
inline std::vector<detail::FamilyCandidate> cover_candidates(const SubsetRef& z, double s,
                                                             double eps,
                                                             const ScaleSchedule& sched) {
  const FiniteSystem& sys = z.system();
  const auto& pts = z.members();
  const int u = static_cast<int>(pts.size());
  std::map<std::vector<std::uint64_t>, std::size_t> best;  // footprint key -> candidate slot
  std::vector<detail::FamilyCandidate> cands;
  for (int n = sched.n_min; n <= sched.n_max; ++n) {
    const double w = std::exp(-s * n);
    for (int c = 0; c < sys.size(); ++c) {
      detail::Bits cover(u);
      std::vector<std::uint64_t> key;
      for (int e = 0; e < u; ++e)
        if (bowen_within(sys, c, pts[e], n, eps, /*closed=*/false)) cover.set(e);
      if (!cover.any()) continue;
      key.reserve(static_cast<std::size_t>(u + 63) / 64);
      for (int e = 0; e < u; ++e)
        if (cover.test(e)) key.push_back(static_cast<std::uint64_t>(e));
      auto it = best.find(key);
      if (it != best.end()) {
        // Same coverage at a deeper order weighs less; keep the lighter ball.
        if (w < cands[it->second].weight) {
          cands[it->second].weight = w;
          cands[it->second].order = n;
          cands[it->second].center = c;
        }
        continue;
      }
      best.emplace(std::move(key), cands.size());
      cands.push_back(detail::FamilyCandidate{std::move(cover), w, n, c});
    }
  }
  // Canonical order: (order asc, center asc). Deduplication can disturb it.
  std::sort(cands.begin(), cands.end(), [](const auto& a, const auto& b) {
    return a.order != b.order ? a.order < b.order : a.center < b.center;
  });
  return cands;
}

// Candidate closed balls centered in z, footprints over the whole space.
inline std::vector<detail::FamilyCandidate> packing_candidates(const SubsetRef& z, double s,
                                                               double eps,
                                                               const ScaleSchedule& sched) {
  const FiniteSystem& sys = z.system();
  std::map<std::vector<std::uint64_t>, std::size_t> best;
  std::vector<detail::FamilyCandidate> cands;
  for (int n = sched.n_min; n <= sched.n_max; ++n) {
    const double w = std::exp(-s * n);
    for (int c : z.members()) {
      detail::Bits footprint(sys.size());
      for (int p = 0; p < sys.size(); ++p)
        if (bowen_within(sys, c, p, n, eps, /*closed=*/true)) footprint.set(p);
      std::vector<std::uint64_t> key;
      for (int p = 0; p < sys.size(); ++p)
        if (footprint.test(p)) key.push_back(static_cast<std::uint64_t>(p));
      auto it = best.find(key);
      if (it != best.end()) continue;  // same point set at minimal order seen first: heavier
      best.emplace(std::move(key), cands.size());
      cands.push_back(detail::FamilyCandidate{std::move(footprint), w, n, c});
    }
  }
  std::sort(cands.begin(), cands.end(), [](const auto& a, const auto& b) {
    return a.order != b.order ? a.order < b.order : a.center < b.center;
  });
  return cands;
}

template <class Solution>
inline Solution assemble(const std::vector<detail::FamilyCandidate>& cands,
                         const detail::FamilyResult& res, bool closed) {
  Solution out;
  out.value = res.value;
  out.optimal = res.optimal;
  for (int i : res.chosen) {
    const auto& c = cands[static_cast<std::size_t>(i)];
    out.balls.push_back(BowenBallSpec{c.center, c.order, 0.0, closed});
  }
  return out;
}

}  // namespace detail_cara

// M^s_{N,eps}(z) truncated to ball orders in [n_min, n_max]: the exact
// minimum of sum exp(-s n_i) over open-ball covers of z with centers anywhere
// in the system. Above the caps a greedy cover is returned with optimal=false.
inline CoverSolution bowen_outer_measure(const SubsetRef& z, double s, double eps,
                                         const ScaleSchedule& sched) {
  sched.validate();
  if (z.empty()) throw std::invalid_argument("bowen_outer_measure needs a nonempty subset");
  if (!(eps > 0.0)) throw std::invalid_argument("radius must be positive");
  if (s < 0.0) throw std::invalid_argument("exponent must be nonnegative");
  auto cands = detail_cara::cover_candidates(z, s, eps, sched);
  detail::FamilyResult res;
  if (z.size() <= sched.exact_cap && cands.size() <= sched.candidate_cap) {
    res = detail::min_weight_cover(z.size(), cands);
  } else {
    res = detail::greedy_cover(z.size(), cands);
  }
  if (!res.feasible)
    throw contract_error(
        "open order-N balls centered in z must cover z; candidate family was infeasible");
  CoverSolution out = detail_cara::assemble<CoverSolution>(cands, res, /*closed=*/false);
  for (auto& b : out.balls) b.radius = eps;
  return out;
}

// P^s_{N,eps}(z) truncated to orders in [n_min, n_max]: the exact maximum of
// sum exp(-s n_i) over pairwise-disjoint closed-ball families centered in z.
inline PackingSolution packing_premeasure(const SubsetRef& z, double s, double eps,
                                          const ScaleSchedule& sched) {
  sched.validate();
  if (z.empty()) throw std::invalid_argument("packing_premeasure needs a nonempty subset");
  if (!(eps > 0.0)) throw std::invalid_argument("radius must be positive");
  if (s < 0.0) throw std::invalid_argument("exponent must be nonnegative");
  auto cands = detail_cara::packing_candidates(z, s, eps, sched);
  detail::FamilyResult res;
  if (z.system().size() <= sched.exact_cap && cands.size() <= sched.candidate_cap) {
    res = detail::max_weight_packing(cands);
  } else {
    res = detail::greedy_packing(cands);
  }
  PackingSolution out = detail_cara::assemble<PackingSolution>(cands, res, /*closed=*/true);
  for (auto& b : out.balls) b.radius = eps;
  return out;
}

struct CriticalExponent {
  double s = 0.0;
  double value_at_crossing = 0.0;
  bool crossed = false;
  std::string flag;
};

// Bisection for the s where a nonincreasing evaluator crosses threshold 1.
// The evaluator is probed for monotonicity first; a rise is a contract
// violation, not a numeric result.
inline CriticalExponent critical_exponent(const std::function<double(double)>& value_at,
                                          double s_lo, double s_hi, double tol) {
  if (!(s_lo >= 0.0) || !(s_hi >= s_lo)) throw std::invalid_argument("bad exponent range");
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  const int probes = 7;
  double prev = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= probes; ++i) {
    const double s = s_lo + (s_hi - s_lo) * i / probes;
    const double v = value_at(s);
    if (v > prev * (1.0 + 1e-12) + 1e-12)
      throw contract_error("critical_exponent needs a nonincreasing evaluator");
    prev = v;
  }
  const double at_lo = value_at(s_lo);
  if (at_lo <= 1.0) return CriticalExponent{s_lo, at_lo, false, "below_threshold_at_range_start"};
  const double at_hi = value_at(s_hi);
  if (at_hi > 1.0) return CriticalExponent{s_hi, at_hi, false, "above_threshold_at_range_end"};
  double lo = s_lo, hi = s_hi;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (value_at(mid) <= 1.0)
      hi = mid;
    else
      lo = mid;
  }
  const double s = 0.5 * (lo + hi);
  return CriticalExponent{s, value_at(s), true, ""};
}

struct Decomposition {
  std::vector<SubsetRef> parts;
};

struct SymbolicDecomposition {
  std::vector<SymbolicSubset> parts;
};

namespace detail_cara {

// Two-point extrapolation of a crossing that behaves like h + c/n.
inline double extrapolate_in_order(int n0, double s0, int n1, double s1) {
  if (n0 == n1) return s1;
  return (n1 * s1 - n0 * s0) / static_cast<double>(n1 - n0);
}

inline std::pair<int, int> proxy_orders(const ScaleSchedule& sched) {
  const int n1 = sched.n_max;
  const int n0 = std::max(sched.n_min, (sched.n_min + sched.n_max) / 2);
  return {n0 == n1 ? n1 : n0, n1};
}

// Crossing of count * exp(-s n) against 1 via the shared bisection routine.
inline CriticalExponent count_crossing(double log_count, int order, const ScaleSchedule& sched) {
  auto eval = [log_count, order](double s) {
    const double e = log_count - s * order;
    return e > 700.0 ? std::exp(700.0) : std::exp(e);
  };
  return critical_exponent(eval, sched.s_lo, sched.s_hi, sched.tol);
}

struct ProxyTrack {
  double extrapolated = 0.0;
  double raw_low = 0.0;   // crossing at the shallow proxy order
  double raw_high = 0.0;  // crossing at the deepest order
  bool crossed = true;
  CriticalExponent c0, c1;
};

inline ProxyTrack track_from_counts(double log_count0, double log_count1, int n0, int n1,
                                    const ScaleSchedule& sched) {
  ProxyTrack t;
  t.c0 = count_crossing(log_count0, n0, sched);
  t.c1 = count_crossing(log_count1, n1, sched);
  t.raw_low = t.c0.s;
  t.raw_high = t.c1.s;
  t.crossed = t.c0.crossed || t.c0.flag == "below_threshold_at_range_start";
  t.crossed = t.crossed && (t.c1.crossed || t.c1.flag == "below_threshold_at_range_start");
  t.extrapolated = extrapolate_in_order(n0, t.c0.s, n1, t.c1.s);
  if (t.extrapolated < 0.0) t.extrapolated = 0.0;
  return t;
}

inline void record_crossings(EntropyEstimate& est, double eps, int n0, int n1,
                             const ProxyTrack& t, bool optimal) {
  est.crossings.push_back(CrossingPoint{eps, n0, t.c0.s, t.c0.value_at_crossing, optimal});
  if (n1 != n0)
    est.crossings.push_back(CrossingPoint{eps, n1, t.c1.s, t.c1.value_at_crossing, optimal});
}

}  // namespace detail_cara

// Bowen entropy estimate on a finite system. Per radius, the critical
// exponent of the outer-measure value at the largest order (the M^s_eps
// proxy), computed at two truncation depths and extrapolated in 1/n to cancel
// the finite-order bias; the bracket keeps the raw crossings.
inline EntropyEstimate bowen_entropy_estimate(const SubsetRef& z, const ScaleSchedule& sched) {
  sched.validate();
  if (z.empty()) throw std::invalid_argument("bowen_entropy_estimate needs a nonempty subset");
  const auto [n0, n1] = detail_cara::proxy_orders(sched);

  EntropyEstimate est;
  double lower = std::numeric_limits<double>::infinity();
  double upper = -std::numeric_limits<double>::infinity();
  bool any_greedy = false;

  auto cover_count = [&](int n, double eps) -> std::pair<double, bool> {
    const CoverSolution sol = bowen_outer_measure(z, 0.0, eps, sched.with_orders(n, n));
    return {sol.value, sol.optimal};  // at s = 0 the value is the ball count
  };

  for (double eps : sched.epsilons) {
    double logc[2];
    double loglb[2];
    bool exact_at[2];
    const int orders[2] = {n0, n1};
    for (int i = 0; i < 2; ++i) {
      auto [count, exact] = cover_count(orders[i], eps);
      any_greedy = any_greedy || !exact;
      exact_at[i] = exact;
      logc[i] = std::log(count);
      if (exact) {
        loglb[i] = logc[i];
      } else {
        // A (n, 2 eps)-separated set meets each open eps-ball at most once.
        const auto sep = greedy_separated(z, orders[i], 2.0 * eps);
        loglb[i] = std::log(static_cast<double>(sep.points.size()));
      }
    }
    const auto ub = detail_cara::track_from_counts(logc[0], logc[1], n0, n1, sched);
    const auto lb = detail_cara::track_from_counts(loglb[0], loglb[1], n0, n1, sched);
    detail_cara::record_crossings(est, eps, n0, n1, ub, exact_at[0] && exact_at[1]);
    if (!ub.crossed) est.note("crossing_range_clamped");
    est.per_epsilon.emplace_back(eps, ub.extrapolated);
    lower = std::min({lower, lb.extrapolated, ub.extrapolated});
    upper = std::max({upper, ub.extrapolated, ub.raw_high, ub.raw_low});
  }
  est.value = est.per_epsilon.back().second;
  est.lower = std::max(0.0, std::min(lower, est.value));
  est.upper = std::max(upper, est.value);
  est.note(n0 == n1 ? "single_order_no_extrapolation" : "order_truncation_extrapolated");
  if (any_greedy) est.note("cover_solver_greedy");
  return est;
}

// Symbolic Bowen estimate: open balls of order n at dyadic radius 2^-m are
// depth-(n+m) cylinders, so the minimal cover of z is exactly the class
// count at that depth.
inline EntropyEstimate bowen_entropy_estimate(const SftSpec& sft, const SymbolicSubset& z,
                                              const ScaleSchedule& sched) {
  sched.validate();
  const auto [n0, n1] = detail_cara::proxy_orders(sched);
  EntropyEstimate est;
  double lower = std::numeric_limits<double>::infinity();
  double upper = -std::numeric_limits<double>::infinity();
  for (double eps : sched.epsilons) {
    const SymbolicScale scale = SymbolicScale::from_epsilon(eps);
    const double l0 = log_big(class_count(sft, z, n0 + scale.m));
    const double l1 = log_big(class_count(sft, z, n1 + scale.m));
    const auto t = detail_cara::track_from_counts(l0, l1, n0, n1, sched);
    detail_cara::record_crossings(est, eps, n0, n1, t, true);
    if (!t.crossed) est.note("crossing_range_clamped");
    est.per_epsilon.emplace_back(eps, t.extrapolated);
    lower = std::min(lower, t.extrapolated);
    upper = std::max({upper, t.raw_low, t.raw_high, t.extrapolated});
  }
  est.value = est.per_epsilon.back().second;
  est.lower = std::max(0.0, std::min(lower, est.value));
  est.upper = std::max(upper, est.value);
  est.note(n0 == n1 ? "single_order_no_extrapolation" : "order_truncation_extrapolated");
  return est;
}

namespace detail_cara {

inline void require_union_equals(const SubsetRef& z, const Decomposition& d) {
  if (d.parts.empty()) throw contract_error("decomposition has no parts");
  SubsetRef u = d.parts.front();
  for (std::size_t i = 1; i < d.parts.size(); ++i) u = union_subset(u, d.parts[i]);
  if (!u.same_system(z) || u.members() != z.members())
    throw contract_error("decomposition union differs from the target subset");
}

inline void require_union_equals(const SftSpec& sft, const SymbolicSubset& z,
                                 const SymbolicDecomposition& d) {
  if (d.parts.empty()) throw contract_error("decomposition has no parts");
  SymbolicSubset u = d.parts.front();
  for (std::size_t i = 1; i < d.parts.size(); ++i) u = symbolic_union(u, d.parts[i]);
  std::size_t depth = std::max<std::size_t>(1, std::max(z.max_base_length(), u.max_base_length()));
  if (z.full && u.full) return;
  if (class_words(sft, z, static_cast<int>(depth)) !=
      class_words(sft, u, static_cast<int>(depth)))
    throw contract_error("decomposition union differs from the target subset");
}

}  // namespace detail_cara

// Packing entropy estimate, cross-checked two ways: (a) the critical exponent
// of the decomposition-minimized packing premeasure proxy, and (b) the
// inf-sup form: min over decompositions of the max capacity estimate of the
// parts. The reported value is the smaller of the two.
inline EntropyEstimate packing_entropy_estimate(const SubsetRef& z, const ScaleSchedule& sched,
                                                std::vector<Decomposition> decomps = {}) {
  sched.validate();
  if (z.empty()) throw std::invalid_argument("packing_entropy_estimate needs a nonempty subset");
  decomps.insert(decomps.begin(), Decomposition{{z}});
  for (std::size_t i = 1; i < decomps.size(); ++i)
    detail_cara::require_union_equals(z, decomps[i]);

  const auto [n0, n1] = detail_cara::proxy_orders(sched);
  EntropyEstimate est;
  double lower = std::numeric_limits<double>::infinity();
  double upper = -std::numeric_limits<double>::infinity();
  bool any_greedy = false;

  auto pack_count = [&](const SubsetRef& part, int n, double eps) -> std::pair<double, bool> {
    const PackingSolution sol = packing_premeasure(part, 0.0, eps, sched.with_orders(n, n));
    return {sol.value, sol.optimal};
  };

  // Route (a): per radius, crossing of min over decompositions of the summed
  // part premeasures, at two proxy orders, extrapolated.
  std::vector<double> raw_exponents;
  for (double eps : sched.epsilons) {
    double best_log[2] = {0.0, 0.0};
    bool exact_at = true;
    const int orders[2] = {n0, n1};
    for (int i = 0; i < 2; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const Decomposition& d : decomps) {
        double total = 0.0;
        for (const SubsetRef& part : d.parts) {
          if (part.empty()) continue;  // contributes nothing to the sum
          auto [count, exact] = pack_count(part, orders[i], eps);
          any_greedy = any_greedy || !exact;
          exact_at = exact_at && exact;
          total += count;
        }
        best = std::min(best, total);
      }
      best_log[i] = std::log(best);
    }
    const auto t = detail_cara::track_from_counts(best_log[0], best_log[1], n0, n1, sched);
    detail_cara::record_crossings(est, eps, n0, n1, t, exact_at);
    if (!t.crossed) est.note("crossing_range_clamped");
    est.per_epsilon.emplace_back(eps, t.extrapolated);
    raw_exponents.push_back(t.raw_high);
    lower = std::min(lower, t.extrapolated);
    upper = std::max({upper, t.raw_low, t.raw_high, t.extrapolated});
  }
  const double route_a = est.per_epsilon.back().second;

  // Route (b): the inf-sup characterization.
  double route_b = std::numeric_limits<double>::infinity();
  double route_b_lower = std::numeric_limits<double>::infinity();
  double route_b_upper = std::numeric_limits<double>::infinity();
  for (const Decomposition& d : decomps) {
    double worst = 0.0, worst_lo = 0.0, worst_hi = 0.0;
    for (const SubsetRef& part : d.parts) {
      if (part.empty()) continue;
      const EntropyEstimate cap = capacity_entropy_estimate(part, sched);
      worst = std::max(worst, cap.value);
      worst_lo = std::max(worst_lo, cap.lower);
      worst_hi = std::max(worst_hi, cap.upper);
    }
    if (worst < route_b) {
      route_b = worst;
      route_b_lower = worst_lo;
      route_b_upper = worst_hi;
    }
  }

  est.stats["premeasure_route"] = route_a;
  est.stats["inf_sup_route"] = route_b;
  est.value = std::max(0.0, std::min(route_a, route_b));
  est.lower = std::max(0.0, std::min({lower, route_b_lower, est.value}));
  est.upper = std::max({upper, route_b_upper, est.value});
  if (any_greedy) est.note("packing_solver_greedy");

  // The packing exponent at fixed scale rises as the radius shrinks; assert
  // it on the deepest-order crossings (the extrapolated values carry signless
  // higher-order residuals and may wobble within them).
  const double wobble = 1e-9 + 2.0 * sched.tol;
  for (std::size_t i = 1; i < raw_exponents.size(); ++i)
    if (raw_exponents[i] < raw_exponents[i - 1] - wobble)
      est.note("epsilon_monotonicity_violated");
  return est;
}

// Symbolic packing estimate: closed order-n balls at radius 2^-m are
// depth-(n+m-1) cylinders, so premeasure counts are class counts.
inline EntropyEstimate packing_entropy_estimate(const SftSpec& sft, const SymbolicSubset& z,
                                                const ScaleSchedule& sched,
                                                std::vector<SymbolicDecomposition> decomps = {}) {
  sched.validate();
  decomps.insert(decomps.begin(), SymbolicDecomposition{{z}});
  for (std::size_t i = 1; i < decomps.size(); ++i)
    detail_cara::require_union_equals(sft, z, decomps[i]);

  const auto [n0, n1] = detail_cara::proxy_orders(sched);
  EntropyEstimate est;
  double lower = std::numeric_limits<double>::infinity();
  double upper = -std::numeric_limits<double>::infinity();

  std::vector<double> raw_exponents;
  for (double eps : sched.epsilons) {
    const SymbolicScale scale = SymbolicScale::from_epsilon(eps);
    double best_log[2];
    const int orders[2] = {n0, n1};
    for (int i = 0; i < 2; ++i) {
      BigInt best = -1;
      for (const SymbolicDecomposition& d : decomps) {
        BigInt total = 0;
        for (const SymbolicSubset& part : d.parts)
          total += class_count(sft, part, orders[i] + scale.m - 1);
        if (best < 0 || total < best) best = total;
      }
      best_log[i] = log_big(best);
    }
    const auto t = detail_cara::track_from_counts(best_log[0], best_log[1], n0, n1, sched);
    detail_cara::record_crossings(est, eps, n0, n1, t, true);
    if (!t.crossed) est.note("crossing_range_clamped");
    est.per_epsilon.emplace_back(eps, t.extrapolated);
    raw_exponents.push_back(t.raw_high);
    lower = std::min(lower, t.extrapolated);
    upper = std::max({upper, t.raw_low, t.raw_high, t.extrapolated});
  }
  const double route_a = est.per_epsilon.back().second;

  double route_b = std::numeric_limits<double>::infinity();
  double route_b_lower = std::numeric_limits<double>::infinity();
  double route_b_upper = std::numeric_limits<double>::infinity();
  for (const SymbolicDecomposition& d : decomps) {
    double worst = 0.0, worst_lo = 0.0, worst_hi = 0.0;
    for (const SymbolicSubset& part : d.parts) {
      const EntropyEstimate cap = capacity_entropy_estimate(sft, part, sched);
      worst = std::max(worst, cap.value);
      worst_lo = std::max(worst_lo, cap.lower);
      worst_hi = std::max(worst_hi, cap.upper);
    }
    if (worst < route_b) {
      route_b = worst;
      route_b_lower = worst_lo;
      route_b_upper = worst_hi;
    }
  }

  est.stats["premeasure_route"] = route_a;
  est.stats["inf_sup_route"] = route_b;
  est.value = std::max(0.0, std::min(route_a, route_b));
  est.lower = std::max(0.0, std::min({lower, route_b_lower, est.value}));
  est.upper = std::max({upper, route_b_upper, est.value});
  const double wobble = 1e-9 + 2.0 * sched.tol;
  for (std::size_t i = 1; i < raw_exponents.size(); ++i)
    if (raw_exponents[i] < raw_exponents[i - 1] - wobble)
      est.note("epsilon_monotonicity_violated");
  return est;
}

// Partition of z by the cycle each point's forward orbit falls into.
inline Decomposition orbit_decomposition(const SubsetRef& z) {
  const FiniteSystem& sys = z.system();
  std::vector<int> cycle_root(static_cast<std::size_t>(sys.size()), -1);
  for (int start = 0; start < sys.size(); ++start) {
    // Walk until a repeat; the minimal index on the cycle is the root.
    std::vector<char> seen(static_cast<std::size_t>(sys.size()), 0);
    int p = start;
    while (!seen[static_cast<std::size_t>(p)]) {
      seen[static_cast<std::size_t>(p)] = 1;
      p = sys.step(p);
    }
    int root = p;
    int q = sys.step(p);
    while (q != p) {
      root = std::min(root, q);
      q = sys.step(q);
    }
    cycle_root[static_cast<std::size_t>(start)] = root;
  }
  std::map<int, std::vector<int>> groups;
  for (int p : z.members()) groups[cycle_root[static_cast<std::size_t>(p)]].push_back(p);
  Decomposition d;
  for (auto& [root, members] : groups) d.parts.emplace_back(sys, std::move(members));
  return d;
}

// Split a cylinder union (or the full space) by first symbol.
inline SymbolicDecomposition first_symbol_decomposition(const SftSpec& sft,
                                                        const SymbolicSubset& z) {
  SymbolicDecomposition d;
  if (z.full) {
    for (int a = 0; a < sft.alphabet_size(); ++a)
      if (sft.word_extendable({a})) d.parts.push_back(SymbolicSubset::cylinders(sft, {{a}}));
    return d;
  }
  std::map<int, std::vector<std::vector<int>>> groups;
  for (const auto& b : z.bases) groups[b.front()].push_back(b);
  for (auto& [a, words] : groups)
    d.parts.push_back(SymbolicSubset::cylinders(sft, std::move(words)));
  return d;
}

struct IncreasingSequence {
  bool achieved = false;
  std::string message;
  std::vector<SubsetRef> stages;
  std::vector<EntropyEstimate> estimates;
};

// Builds A_1 ⊆ A_2 ⊆ ... with union z and capacity estimate of every stage
// within target_eps of the packing estimate, by accumulating decomposition
// parts whose capacity estimates qualify (union bound: the max rule).
inline IncreasingSequence build_increasing_sequence(const SubsetRef& z, double target_eps,
                                                    const ScaleSchedule& sched,
                                                    std::vector<Decomposition> decomps) {
  if (!(target_eps > 0.0)) throw std::invalid_argument("target_eps must be positive");
  const EntropyEstimate packing = packing_entropy_estimate(z, sched, decomps);
  const double threshold = packing.value + target_eps;

  decomps.insert(decomps.begin(), Decomposition{{z}});
  std::vector<std::pair<double, SubsetRef>> pool;
  for (const Decomposition& d : decomps)
    for (const SubsetRef& part : d.parts) {
      if (part.empty()) continue;
      const EntropyEstimate cap = capacity_entropy_estimate(part, sched);
      if (cap.value <= threshold + 1e-12) pool.emplace_back(cap.value, part);
    }

  IncreasingSequence out;
  if (pool.empty()) {
    out.message = "insufficient decompositions: no part meets the capacity threshold";
    return out;
  }
  std::stable_sort(pool.begin(), pool.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  SubsetRef acc;
  for (const auto& [val, part] : pool) {
    acc = acc.system().valid() ? union_subset(acc, part) : part;
    if (!out.stages.empty() && acc.members() == out.stages.back().members()) continue;
    out.stages.push_back(acc);
    if (acc.members() == z.members()) break;
  }
  if (out.stages.empty() || out.stages.back().members() != z.members()) {
    out.stages.clear();
    out.message = "insufficient decompositions: qualifying parts do not cover the subset";
    return out;
  }
  for (const SubsetRef& stage : out.stages) {
    EntropyEstimate cap = capacity_entropy_estimate(stage, sched);
    if (cap.value > threshold + 1e-9) {
      out.stages.clear();
      out.estimates.clear();
      out.message = "insufficient decompositions: a cumulative union exceeds the threshold";
      return out;
    }
    out.estimates.push_back(std::move(cap));
  }
  out.achieved = true;
  out.message = "ok";
  return out;
}

struct SymbolicIncreasingSequence {
  bool achieved = false;
  std::string message;
  std::vector<SymbolicSubset> stages;
  std::vector<EntropyEstimate> estimates;
};

inline SymbolicIncreasingSequence build_increasing_sequence(
    const SftSpec& sft, const SymbolicSubset& z, double target_eps, const ScaleSchedule& sched,
    std::vector<SymbolicDecomposition> decomps) {
  if (!(target_eps > 0.0)) throw std::invalid_argument("target_eps must be positive");
  const EntropyEstimate packing = packing_entropy_estimate(sft, z, sched, decomps);
  const double threshold = packing.value + target_eps;

  decomps.insert(decomps.begin(), SymbolicDecomposition{{z}});
  std::vector<std::pair<double, SymbolicSubset>> pool;
  for (const SymbolicDecomposition& d : decomps)
    for (const SymbolicSubset& part : d.parts) {
      const EntropyEstimate cap = capacity_entropy_estimate(sft, part, sched);
      if (cap.value <= threshold + 1e-12) pool.emplace_back(cap.value, part);
    }

  SymbolicIncreasingSequence out;
  if (pool.empty()) {
    out.message = "insufficient decompositions: no part meets the capacity threshold";
    return out;
  }
  std::stable_sort(pool.begin(), pool.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  const int probe_depth = static_cast<int>(std::max<std::size_t>(1, z.max_base_length()));
  const auto target_classes = class_words(sft, z, probe_depth);
  auto covers_target = [&](const SymbolicSubset& s) {
    return class_words(sft, s, probe_depth) == target_classes;
  };

  bool started = false;
  SymbolicSubset acc;
  for (const auto& [val, part] : pool) {
    acc = started ? symbolic_union(acc, part) : part;
    started = true;
    if (!out.stages.empty() && class_words(sft, acc, probe_depth) ==
                                   class_words(sft, out.stages.back(), probe_depth))
      continue;
    out.stages.push_back(acc);
    if (covers_target(acc)) break;
  }
  if (out.stages.empty() || !covers_target(out.stages.back())) {
    out.stages.clear();
    out.message = "insufficient decompositions: qualifying parts do not cover the subset";
    return out;
  }
  for (const SymbolicSubset& stage : out.stages) {
    EntropyEstimate cap = capacity_entropy_estimate(sft, stage, sched);
    if (cap.value > threshold + 1e-9) {
      out.stages.clear();
      out.estimates.clear();
      out.message = "insufficient decompositions: a cumulative union exceeds the threshold";
      return out;
    }
    out.estimates.push_back(std::move(cap));
  }
  out.achieved = true;
  out.message = "ok";
  return out;
}

}  // namespace topent
